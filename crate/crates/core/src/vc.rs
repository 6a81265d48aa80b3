//! Splitting a Boogie-emitted script into the shared prelude and per-obligation
//! blocks, and peeling each obligation into hypotheses and a goal.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::backtranslate::{self, ProtectionError};
use crate::sexpr::{Command, Term};

/// Default cap on the number of term nodes produced by let-inlining.
pub const DEFAULT_INLINE_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VcError {
    #[error("command {index}: `(pop)` without a matching `(push)`")]
    UnmatchedPop { index: usize },
    #[error("command {index}: `(push)` is never popped")]
    UnclosedPush { index: usize },
    #[error("command {index}: push/pop with count {count}; only 1 is supported")]
    StackCount { index: usize, count: u32 },
    #[error("command {index}: nested `(push)` inside a verification block")]
    NestedPush { index: usize },
    #[error("block {block}: expected exactly one `(check-sat)`, found {found}")]
    CheckSatCount { block: usize, found: usize },
    #[error("block {block}: expected exactly one negated assert, found {found}")]
    NegatedAssertCount { block: usize, found: usize },
    #[error("block {block}: unresolvable let reference `{name}`")]
    UnresolvedLet { block: usize, name: String },
    #[error("block {block}: let-inlining exceeded the budget of {budget} term nodes")]
    InlineBudget { block: usize, budget: usize },
    #[error("block {block}: {source}")]
    Protection {
        block: usize,
        #[source]
        source: ProtectionError,
    },
}

/// Commands between one matched `(push 1)` / `(pop 1)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcBlock {
    /// Position of the block among all blocks in the file.
    pub index: usize,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScriptSplit {
    pub options: Vec<Command>,
    pub prelude: Vec<Command>,
    pub blocks: Vec<VcBlock>,
}

impl ScriptSplit {
    pub fn command_count(&self) -> usize {
        self.options.len()
            + self.prelude.len()
            + self
                .blocks
                .iter()
                .map(|b| b.commands.len() + 2)
                .sum::<usize>()
    }
}

/// One verification condition as hypotheses and a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    /// Index of the source block.
    pub block: usize,
    /// Solver-facing hypotheses (protection calls removed).
    pub hypotheses: Vec<Term>,
    /// Solver-facing goal.
    pub goal: Term,
    /// Hypotheses as extracted, protection calls still present.
    pub raw_hypotheses: Vec<Term>,
    /// Goal as extracted, protection calls still present.
    pub raw_goal: Term,
    /// Declarations local to the block; needed before any query.
    pub local_decls: Vec<Command>,
    pub is_ipm_target: bool,
}

/// Assigns every command to the options, the prelude or one block.
pub fn segment_script(commands: &[Command]) -> Result<ScriptSplit, VcError> {
    let mut split = ScriptSplit::default();
    let mut open: Option<(usize, Vec<Command>)> = None;
    for (index, cmd) in commands.iter().enumerate() {
        match cmd {
            Command::Push(count) => {
                if *count != 1 {
                    return Err(VcError::StackCount { index, count: *count });
                }
                if open.is_some() {
                    return Err(VcError::NestedPush { index });
                }
                open = Some((index, Vec::new()));
            }
            Command::Pop(count) => {
                if *count != 1 {
                    return Err(VcError::StackCount { index, count: *count });
                }
                let Some((_, commands)) = open.take() else {
                    return Err(VcError::UnmatchedPop { index });
                };
                split.blocks.push(VcBlock {
                    index: split.blocks.len(),
                    commands,
                });
            }
            other => match open.as_mut() {
                Some((_, block)) => block.push(other.clone()),
                None if is_option(other) => split.options.push(other.clone()),
                None => split.prelude.push(other.clone()),
            },
        }
    }
    if let Some((index, _)) = open {
        return Err(VcError::UnclosedPush { index });
    }
    Ok(split)
}

fn is_option(cmd: &Command) -> bool {
    match cmd {
        Command::SetOption { .. } => true,
        Command::Other(raw) => {
            let head = raw.trim_start_matches('(').trim_start();
            head.starts_with("set-info") || head.starts_with("set-logic")
        }
        _ => false,
    }
}

/// Peels the block's negated assert into hypotheses and a goal.
pub fn extract_obligation(block: &VcBlock) -> Result<Obligation, VcError> {
    extract_obligation_with_budget(block, DEFAULT_INLINE_BUDGET)
}

pub fn extract_obligation_with_budget(
    block: &VcBlock,
    budget: usize,
) -> Result<Obligation, VcError> {
    let checks = block
        .commands
        .iter()
        .filter(|c| matches!(c, Command::CheckSat))
        .count();
    if checks != 1 {
        return Err(VcError::CheckSatCount {
            block: block.index,
            found: checks,
        });
    }

    let mut extra = Vec::new();
    let mut negated = Vec::new();
    for cmd in &block.commands {
        if let Command::Assert(t) = cmd {
            match t.as_app() {
                Some(("not", [body])) => negated.push(body),
                _ => extra.push(t.clone()),
            }
        }
    }
    let [body] = negated.as_slice() else {
        return Err(VcError::NegatedAssertCount {
            block: block.index,
            found: negated.len(),
        });
    };

    let mut inliner = Inliner {
        budget,
        used: 0,
        bound_names: HashSet::new(),
    };
    let inlined = inliner
        .inline(body, &HashMap::new())
        .ok_or(VcError::InlineBudget {
            block: block.index,
            budget,
        })?;
    if let Some(name) = free_symbols(&inlined)
        .into_iter()
        .find(|s| inliner.bound_names.contains(s))
    {
        return Err(VcError::UnresolvedLet {
            block: block.index,
            name,
        });
    }

    let (antecedents, goal) = peel_implications(inlined);
    let mut raw_hypotheses = Vec::new();
    for extra in extra {
        flatten_conjunction(extra, &mut raw_hypotheses);
    }
    for a in antecedents {
        flatten_conjunction(a, &mut raw_hypotheses);
    }

    let strip = |t: &Term| {
        backtranslate::strip_protections(t).map_err(|source| VcError::Protection {
            block: block.index,
            source,
        })
    };
    let hypotheses = raw_hypotheses.iter().map(strip).collect::<Result<_, _>>()?;
    let stripped_goal = strip(&goal)?;

    Ok(Obligation {
        block: block.index,
        hypotheses,
        goal: stripped_goal,
        raw_hypotheses,
        is_ipm_target: backtranslate::contains_protect_to_prove(&goal),
        raw_goal: goal,
        local_decls: block
            .commands
            .iter()
            .filter(|c| matches!(c, Command::Declare(_)))
            .cloned()
            .collect(),
    })
}

/// Keeps the obligations whose goal carries a `_protectToProve` marker.
pub fn find_ipm_targets(obligations: Vec<Obligation>) -> Vec<Obligation> {
    obligations
        .into_iter()
        .filter_map(|mut o| {
            o.is_ipm_target = backtranslate::contains_protect_to_prove(&o.raw_goal);
            o.is_ipm_target.then_some(o)
        })
        .collect()
}

/// Splits `a => (b => (... => g))` into `[a, b, ...]` and `g`.
pub fn peel_implications(mut t: Term) -> (Vec<Term>, Term) {
    let mut antecedents = Vec::new();
    loop {
        match t {
            Term::App(head, mut args) if head.symbol_name() == Some("=>") && args.len() >= 2 => {
                let consequent = args.pop().unwrap();
                antecedents.extend(args);
                t = consequent;
            }
            other => return (antecedents, other),
        }
    }
}

fn flatten_conjunction(t: Term, out: &mut Vec<Term>) {
    match t {
        Term::App(head, args) if head.symbol_name() == Some("and") => {
            for a in args {
                flatten_conjunction(a, out);
            }
        }
        Term::BoolLit(true) => {}
        other => out.push(other),
    }
}

struct Inliner {
    budget: usize,
    used: usize,
    bound_names: HashSet<String>,
}

impl Inliner {
    fn charge(&mut self, n: usize) -> Option<()> {
        self.used += n;
        (self.used <= self.budget).then_some(())
    }

    fn inline(&mut self, t: &Term, env: &HashMap<String, Term>) -> Option<Term> {
        Some(match t {
            Term::Symbol(name) | Term::QuotedSymbol(name) => match env.get(name) {
                Some(v) => {
                    self.charge(v.size())?;
                    v.clone()
                }
                None => {
                    self.charge(1)?;
                    t.clone()
                }
            },
            Term::App(head, args) => {
                self.charge(1)?;
                let head = self.inline(head, env)?;
                let args = args
                    .iter()
                    .map(|a| self.inline(a, env))
                    .collect::<Option<Vec<_>>>()?;
                Term::App(Box::new(head), args)
            }
            Term::Let { bindings, body } => {
                let mut inner = env.clone();
                for b in bindings {
                    self.bound_names.insert(b.name.name.clone());
                    let v = self.inline(&b.value, env)?;
                    inner.insert(b.name.name.clone(), v);
                }
                self.inline(body, &inner)?
            }
            Term::Quantifier {
                kind,
                bindings,
                body,
                attributes,
            } => {
                self.charge(1)?;
                let mut inner = env.clone();
                for b in bindings {
                    inner.remove(&b.name.name);
                }
                Term::Quantifier {
                    kind: *kind,
                    bindings: bindings.clone(),
                    body: Box::new(self.inline(body, &inner)?),
                    attributes: attributes.clone(),
                }
            }
            Term::Annotated { body, attributes } => {
                self.charge(1)?;
                Term::Annotated {
                    body: Box::new(self.inline(body, env)?),
                    attributes: attributes.clone(),
                }
            }
            leaf => {
                self.charge(1)?;
                leaf.clone()
            }
        })
    }
}

/// Symbols occurring free (not bound by a quantifier or let) in `t`.
pub fn free_symbols(t: &Term) -> HashSet<String> {
    fn go(t: &Term, bound: &mut Vec<String>, out: &mut HashSet<String>) {
        match t {
            Term::Symbol(s) | Term::QuotedSymbol(s) => {
                if !bound.contains(s) {
                    out.insert(s.clone());
                }
            }
            Term::App(h, args) => {
                go(h, bound, out);
                for a in args {
                    go(a, bound, out);
                }
            }
            Term::Quantifier { bindings, body, .. } => {
                let n = bound.len();
                bound.extend(bindings.iter().map(|b| b.name.name.clone()));
                go(body, bound, out);
                bound.truncate(n);
            }
            Term::Let { bindings, body } => {
                for b in bindings {
                    go(&b.value, bound, out);
                }
                let n = bound.len();
                bound.extend(bindings.iter().map(|b| b.name.name.clone()));
                go(body, bound, out);
                bound.truncate(n);
            }
            Term::Annotated { body, .. } => go(body, bound, out),
            _ => {}
        }
    }
    let mut out = HashSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::{parse_script, parse_term};

    const TRIANGLE: &str = include_str!("../fixtures/triangle_sum_even.smt2");
    const STOCK: &str = include_str!("../fixtures/triangle_sum_even.stock.smt2");

    fn block_of(body: &str) -> VcBlock {
        let cmds = parse_script(&format!("(assert (not {body}))\n(check-sat)")).unwrap();
        VcBlock {
            index: 0,
            commands: cmds,
        }
    }

    #[test]
    fn triangle_has_one_block_and_set_axiom() {
        let split = segment_script(&parse_script(TRIANGLE).unwrap()).unwrap();
        assert_eq!(split.blocks.len(), 1);
        let axiom = parse_term("(not (|Set#IsMember| |Set#Empty| o@@5))").unwrap();
        assert!(split.prelude.iter().any(|c| match c {
            Command::Assert(t) => t.any(&mut |s| *s == axiom),
            _ => false,
        }));
    }

    #[test]
    fn no_push_means_prelude_only() {
        let cmds = parse_script("(set-option :smt.mbqi false)(declare-fun a () Int)(assert (> a 0))").unwrap();
        let split = segment_script(&cmds).unwrap();
        assert!(split.blocks.is_empty());
        assert_eq!(split.options.len(), 1);
        assert_eq!(split.prelude.len(), 2);
    }

    #[test]
    fn partition_counts() {
        let cmds = parse_script(TRIANGLE).unwrap();
        let split = segment_script(&cmds).unwrap();
        assert_eq!(split.command_count(), cmds.len());
    }

    #[test]
    fn two_blocks_in_order() {
        let cmds = parse_script(STOCK).unwrap();
        let push = cmds.iter().position(|c| *c == Command::Push(1)).unwrap();
        let mut doubled = cmds.clone();
        doubled.extend_from_slice(&cmds[push..]);
        let split = segment_script(&doubled).unwrap();
        assert_eq!(split.blocks.len(), 2);
        assert_eq!(split.blocks[0].commands, split.blocks[1].commands);
        assert_eq!(split.blocks[1].index, 1);
        assert_eq!(split.command_count(), doubled.len());
    }

    #[test]
    fn stack_errors() {
        let e = segment_script(&parse_script("(push 2)(pop 2)").unwrap()).unwrap_err();
        assert_eq!(e, VcError::StackCount { index: 0, count: 2 });
        let e = segment_script(&parse_script("(pop 1)").unwrap()).unwrap_err();
        assert_eq!(e, VcError::UnmatchedPop { index: 0 });
        let e = segment_script(&parse_script("(push 1)(check-sat)").unwrap()).unwrap_err();
        assert_eq!(e, VcError::UnclosedPush { index: 0 });
    }

    #[test]
    fn triangle_goal_and_hypotheses() {
        let split = segment_script(&parse_script(TRIANGLE).unwrap()).unwrap();
        let ob = extract_obligation(&split.blocks[0]).unwrap();
        assert_eq!(
            ob.goal,
            parse_term("(= (Mod (Mul |x#0@@1| (+ |x#0@@1| 1)) (LitInt 2)) (LitInt 0))").unwrap()
        );
        assert!(ob.hypotheses.contains(&parse_term("($IsGoodHeap $Heap)").unwrap()));
        assert!(ob
            .hypotheses
            .contains(&parse_term("(= (ControlFlow 0 0) 2)").unwrap()));
        assert!(ob
            .hypotheses
            .contains(&parse_term("(= (ControlFlow 0 2) (- 0 1))").unwrap()));
        assert_eq!(ob.hypotheses.len(), 5);
        assert_eq!(ob.local_decls.len(), 3);
        assert!(ob.is_ipm_target);
    }

    #[test]
    fn bare_goal_has_no_hypotheses() {
        let ob = extract_obligation(&block_of("g")).unwrap();
        assert!(ob.hypotheses.is_empty());
        assert_eq!(ob.goal, Term::sym("g"));
    }

    #[test]
    fn implication_chain_peels_in_order() {
        let ob = extract_obligation(&block_of("(=> a (=> b (=> c g)))")).unwrap();
        // independent peeler: walk the right spine by hand
        let mut expected = Vec::new();
        let mut t = parse_term("(=> a (=> b (=> c g)))").unwrap();
        while let Some(("=>", [l, r])) = t.as_app() {
            expected.push(l.clone());
            let next = r.clone();
            t = next;
        }
        assert_eq!(ob.hypotheses, expected);
        assert_eq!(ob.goal, t);
    }

    #[test]
    fn conjunctions_flatten_only_in_antecedents() {
        let ob = extract_obligation(&block_of("(=> (and (and a b) c) (and d e))")).unwrap();
        assert_eq!(
            ob.hypotheses,
            vec![Term::sym("a"), Term::sym("b"), Term::sym("c")]
        );
        assert_eq!(ob.goal, parse_term("(and d e)").unwrap());
    }

    #[test]
    fn not_a_negated_assert() {
        let block = VcBlock {
            index: 3,
            commands: parse_script("(assert g)(check-sat)").unwrap(),
        };
        assert_eq!(
            extract_obligation(&block).unwrap_err(),
            VcError::NegatedAssertCount { block: 3, found: 0 }
        );
    }

    #[test]
    fn let_used_out_of_scope_is_rejected() {
        let err = extract_obligation(&block_of("(and (let ((k a)) k) k)")).unwrap_err();
        assert_eq!(
            err,
            VcError::UnresolvedLet {
                block: 0,
                name: "k".into()
            }
        );
    }

    #[test]
    fn let_inlining_keeps_free_symbols() {
        let t = parse_term("(let ((p (and a b))) (let ((q (=> p c))) (and q p)))").unwrap();
        let mut inl = Inliner {
            budget: DEFAULT_INLINE_BUDGET,
            used: 0,
            bound_names: HashSet::new(),
        };
        let out = inl.inline(&t, &HashMap::new()).unwrap();
        assert_eq!(out, parse_term("(and (=> (and a b) c) (and a b))").unwrap());
        assert_eq!(free_symbols(&out), free_symbols(&t));
    }

    #[test]
    fn inlining_budget_is_enforced() {
        // each level doubles the term
        let mut body = "x0".to_string();
        let mut lets = String::new();
        for i in 1..=24 {
            lets.push_str(&format!("(let ((x{i} (and x{} x{}))) ", i - 1, i - 1));
            body = format!("x{i}");
        }
        let text = format!("(=> a {lets}{body}{})", ")".repeat(24));
        let err = extract_obligation_with_budget(&block_of(&text), 10_000).unwrap_err();
        assert_eq!(
            err,
            VcError::InlineBudget {
                block: 0,
                budget: 10_000
            }
        );
    }

    #[test]
    fn uninstrumented_script_has_no_targets() {
        let split = segment_script(&parse_script(STOCK).unwrap()).unwrap();
        let obs = split
            .blocks
            .iter()
            .map(extract_obligation)
            .collect::<Result<Vec<_>, _>>()
            .unwrap();
        assert!(find_ipm_targets(obs).is_empty());
    }

    #[test]
    fn two_targets_in_file_order() {
        let text = include_str!("../fixtures/two_targets.smt2");
        let split = segment_script(&parse_script(text).unwrap()).unwrap();
        let obs: Vec<_> = split
            .blocks
            .iter()
            .map(|b| extract_obligation(b).unwrap())
            .collect();
        let targets = find_ipm_targets(obs);
        assert_eq!(targets.iter().map(|o| o.block).collect::<Vec<_>>(), [0, 1]);
    }
}
