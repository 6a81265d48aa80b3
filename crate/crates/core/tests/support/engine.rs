//! Randomised checks of the goal tree: tactic soundness and undo/focus.

use std::time::Duration;

use proptest::prelude::*;

use ipm::engine::{
    apply_tactic, focus, init_session, reconstruct_proof, undo, EngineError, NodeStatus, ProofState, Tactic,
    TacticKind,
};
use ipm::sexpr::Term;
use ipm::solver::{bounded_counterexample, FakeMode, Session, Verdict};

use super::{as_formula, fake_session, linear_atom, linear_obligation, obligation, sample, xyz_names};

const T: Duration = Duration::from_millis(1000);

fn node_formula(state: &ProofState, id: usize) -> Term {
    let n = state.node(id).unwrap();
    as_formula(&n.hypotheses, &n.goal)
}

#[derive(Debug, Default)]
pub struct SoundnessSummary {
    pub obligations: usize,
    pub applications: usize,
    pub confirmed_by_solver: usize,
}

/// An obligation and the tactic steps to try on it.
type Plan = ((Vec<Term>, Term), Vec<(u8, Term)>);

fn plan() -> impl Strategy<Value = Plan> {
    (linear_obligation(), prop::collection::vec((0u8..3, linear_atom()), 1..4))
}

/// Applies random Assert/Case/Assume steps to random linear obligations and
/// checks that the children of every step jointly entail the parent: by
/// exhaustive search over `[-bound, bound]`, and with `solver` too when one
/// is given. Also checks the open-goal count after each step and that a
/// finished proof mentions `assume` exactly when it is tainted. Stops after `wanted` obligations received at least one step.
pub fn soundness(wanted: usize, bound: i64, mut solver: Option<&mut Session>) -> Result<SoundnessSummary, String> {
    let mut summary = SoundnessSummary::default();
    for ((hyps, goal), steps) in sample(plan(), wanted * 20) {
        if summary.obligations == wanted {
            break;
        }
        let mut session = fake_session(FakeMode::Oracle { bound: 4 });
        let (mut state, _) = init_session(&obligation(hyps, goal), xyz_names(), &mut session, T)
            .map_err(|e| e.to_string())?;
        let mut applied = 0;
        for (k, formula) in steps {
            if state.is_complete() {
                break;
            }
            let kind = [TacticKind::Assert, TacticKind::Case, TacticKind::Assume][k as usize];
            let open_before = state.open_goals().len();
            let report = apply_tactic(&mut state, &mut session, Tactic::new(kind, formula), T)
                .map_err(|e| e.to_string())?;
            let still_open = report.children.iter().filter(|c| c.status == NodeStatus::Open).count();
            if state.open_goals().len() != open_before - 1 + still_open {
                return Err(format!("{kind:?}: open goals went from {open_before} to {}", state.open_goals().len()));
            }
            let parent = node_formula(&state, report.target);
            let children: Vec<Term> = report.children.iter().map(|c| node_formula(&state, c.id)).collect();
            if let Some(cex) = bounded_counterexample(&children, &parent, bound)? {
                return Err(format!(
                    "{kind:?} on goal {}: children do not entail the parent, counterexample {cex:?}",
                    report.target
                ));
            }
            if let Some(s) = solver.as_deref_mut() {
                match s.check_entailment(&children, &parent, T).map_err(|e| e.to_string())? {
                    Verdict::Proved => summary.confirmed_by_solver += 1,
                    other => return Err(format!("solver on {kind:?} step: {other}")),
                }
            }
            applied += 1;
        }
        if let Ok(proof) = reconstruct_proof(&state) {
            if proof.contains("assume") != state.tainted() {
                return Err(format!("taint flag disagrees with the proof text:\n{proof}"));
            }
        }
        if applied > 0 {
            summary.obligations += 1;
            summary.applications += applied;
        }
    }
    if summary.obligations < wanted {
        return Err(format!("only {} obligations needed a tactic", summary.obligations));
    }
    Ok(summary)
}

#[derive(Debug, Clone)]
enum Op {
    Tactic(TacticKind, Term),
    Focus(usize),
    Check(Term),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0u8..3, linear_atom()).prop_map(|(k, f)| {
            Op::Tactic([TacticKind::Assert, TacticKind::Case, TacticKind::Assume][k as usize], f)
        }),
        1 => (0usize..12).prop_map(Op::Focus),
        1 => linear_atom().prop_map(Op::Check),
    ]
}

fn sequence() -> impl Strategy<Value = (Vec<String>, Vec<Op>)> {
    let answers = prop::collection::vec(prop_oneof![Just("unsat"), Just("sat"), Just("unknown")], 40)
        .prop_map(|v| v.into_iter().map(String::from).collect());
    (answers, prop::collection::vec(op(), 2..10))
}

/// Runs `count` random tactic/focus/check sequences against the scripted
/// fake solver. Every state-changing step must be undone exactly, check must
/// not change anything, and focus must reject closed and unknown goals.
/// Returns the number of undo comparisons made.
pub fn undo_focus(count: usize) -> Result<usize, String> {
    let mut comparisons = 0;
    let mut closed_focus_checks = 0;
    for (i, (answers, ops)) in sample(sequence(), count).into_iter().enumerate() {
        let mut session = fake_session(FakeMode::Scripted(answers));
        let ob = obligation(vec![], Term::app(">", vec![Term::sym("x"), Term::int(5)]));
        let (mut state, _) = init_session(&ob, xyz_names(), &mut session, T).map_err(|e| e.to_string())?;
        let mut history = vec![state.snapshot().clone()];
        for op in ops {
            let before = state.snapshot().clone();
            match op {
                Op::Tactic(kind, f) => match apply_tactic(&mut state, &mut session, Tactic::new(kind, f.clone()), T) {
                    Ok(_) => {
                        // undo, compare, and redo so the tree keeps growing
                        undo(&mut state).map_err(|e| e.to_string())?;
                        if state.snapshot() != &before {
                            return Err(format!("sequence {i}: undo after {kind:?} differs"));
                        }
                        comparisons += 1;
                        apply_tactic(&mut state, &mut session, Tactic::new(kind, f), T)
                            .map_err(|e| e.to_string())?;
                        history.push(state.snapshot().clone());
                    }
                    Err(EngineError::NoOpenGoal) => {}
                    Err(e) => return Err(format!("sequence {i}: {e}")),
                },
                Op::Check(f) => {
                    if state.is_complete() {
                        continue;
                    }
                    apply_tactic(&mut state, &mut session, Tactic::new(TacticKind::Check, f), T)
                        .map_err(|e| e.to_string())?;
                    if state.snapshot() != &before || state.history_len() != history.len() - 1 {
                        return Err(format!("sequence {i}: check changed the state"));
                    }
                }
                Op::Focus(id) => {
                    let open = state.open_goals().contains(&id);
                    let result = focus(&mut state, id);
                    match (open, &result, state.node(id)) {
                        (true, Ok(()), _) => {
                            if state.focus() != Some(id) {
                                return Err(format!("sequence {i}: focus {id} ignored"));
                            }
                            // idempotent
                            let again = state.snapshot().clone();
                            focus(&mut state, id).map_err(|e| e.to_string())?;
                            if state.snapshot() != &again {
                                return Err(format!("sequence {i}: focus is not idempotent"));
                            }
                        }
                        (false, Err(EngineError::NotOpen(_)), Some(_)) => {}
                        (false, Err(EngineError::UnknownGoal(_)), None) => {}
                        _ => return Err(format!("sequence {i}: focus {id} gave {result:?}")),
                    }
                    if !open && state.snapshot() != &before {
                        return Err(format!("sequence {i}: rejected focus changed the state"));
                    }
                }
            }
        }
        // a closed node and an unknown id are both rejected
        let closed = state.nodes().find(|n| n.status.is_closed()).map(|n| n.id);
        if let Some(closed) = closed {
            if !matches!(focus(&mut state, closed), Err(EngineError::NotOpen(_))) {
                return Err(format!("sequence {i}: focus on closed goal {closed} accepted"));
            }
            closed_focus_checks += 1;
        }
        // unwind the whole sequence, one snapshot at a time
        history.pop();
        while let Some(expected) = history.pop() {
            let focused = state.focus();
            undo(&mut state).map_err(|e| e.to_string())?;
            // focus changes are not recorded, so compare the trees only
            if state.snapshot().nodes != expected.nodes || state.snapshot().open_order != expected.open_order {
                return Err(format!("sequence {i}: unwinding differs (focus was {focused:?})"));
            }
            comparisons += 1;
        }
        if !matches!(undo(&mut state), Err(EngineError::NothingToUndo)) {
            return Err(format!("sequence {i}: history not exhausted"));
        }
        if !matches!(focus(&mut state, 10_000), Err(EngineError::UnknownGoal(_))) {
            return Err(format!("sequence {i}: focus on unknown goal accepted"));
        }
    }
    if closed_focus_checks == 0 {
        return Err("no sequence closed a goal".into());
    }
    Ok(comparisons)
}
