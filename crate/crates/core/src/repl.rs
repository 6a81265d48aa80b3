//! The line-oriented frontend: renders goals, reads commands, prints the
//! reconstructed proof once every goal is closed.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use crate::engine::{ProofState, TacticKind, TacticReport};
use crate::prover::{parse_command, Prover, ReplCommand, HELP};
use crate::solver::{NotProvedReason, Verdict};

pub const PROMPT: &str = "> ";
pub const TAINT_WARNING: &str = "WARNING: proof uses assume";

/// How an interactive run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplOutcome {
    Completed { tainted: bool },
    Quit,
    EndOfInput,
}

impl ReplOutcome {
    pub fn exit_code(self) -> i32 {
        match self {
            ReplOutcome::Completed { .. } => 0,
            ReplOutcome::Quit | ReplOutcome::EndOfInput => 1,
        }
    }
}

/// The goal count followed by the focused goal's hypotheses and goal.
pub fn render_state(state: &ProofState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} goal(s) remaining", state.open_goals().len());
    if let Some(node) = state.focused() {
        out.push_str("current goal:\nhypotheses\n");
        for h in node.display.hypothesis_lines() {
            let _ = writeln!(out, "   {h}");
        }
        let _ = writeln!(out, "goal\n   {}", node.display.goal_line());
    }
    out
}

/// The closing banner: the original goal and the proof that closes it.
pub fn render_completion(state: &ProofState, proof: &str) -> String {
    let mut out = String::from("Congrats, current goal proved.\n");
    let _ = writeln!(out, "Goal: {}", state.root().display.goal_line());
    out.push_str("Proof:\n");
    out.push_str(proof);
    if state.tainted() {
        let _ = writeln!(out, "{TAINT_WARNING}");
    }
    out
}

/// The answer to a `check`, naming the formula as the user typed it.
pub fn render_check(verdict: &Verdict, formula: &str) -> String {
    match verdict {
        Verdict::Proved => format!("Yes, Z3 can prove {formula}\n"),
        Verdict::NotProved(NotProvedReason::Timeout) => {
            format!("No, Z3 cannot prove {formula} (timeout)\n")
        }
        Verdict::NotProved(_) => format!("No, Z3 cannot prove {formula}\n"),
        Verdict::SolverError(e) => format!("solver error: {e}\n"),
    }
}

fn solver_errors(report: &TacticReport) -> String {
    let mut out = String::new();
    for child in &report.children {
        if let Some(Verdict::SolverError(e)) = &child.verdict {
            let _ = writeln!(out, "solver error on goal {}: {e}", child.id);
        }
    }
    out
}

fn render_report(state: &ProofState, report: &TacticReport) -> String {
    let mut out = solver_errors(report);
    if report.target_closed {
        out.push_str("Congrats, current goal proved.\n");
    }
    out.push_str(&render_state(state));
    for id in &report.queued {
        if let Some(node) = state.node(*id) {
            let _ = write!(out, "\ngoal {id} is: {}\n", node.display.goal_line());
        }
    }
    out
}

/// Output of one command, and the outcome if it ended the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub text: String,
    pub outcome: Option<ReplOutcome>,
}

impl Step {
    fn text(text: String) -> Self {
        Step { text, outcome: None }
    }
}

/// What the loop prints before the first prompt; ends the run when the
/// solver already proved the goal.
pub fn opening(prover: &Prover) -> Step {
    let mut text = String::new();
    if let Verdict::SolverError(e) = prover.initial_verdict() {
        let _ = writeln!(text, "solver error: {e}");
    }
    match completion(prover) {
        Some(done) => Step {
            text: text + &done,
            outcome: Some(ReplOutcome::Completed {
                tainted: prover.state().tainted(),
            }),
        },
        None => Step::text(text + &render_state(prover.state())),
    }
}

/// Executes one input line.
pub fn execute_line(prover: &mut Prover, line: &str) -> Step {
    match parse_command(line) {
        Ok(Some(c)) => execute(prover, c),
        Ok(None) => Step::text(String::new()),
        Err(msg) => Step::text(format!("error: {msg}\n")),
    }
}

pub fn execute(prover: &mut Prover, command: ReplCommand) -> Step {
    let text = match command {
        ReplCommand::Help => format!("{HELP}\n"),
        ReplCommand::Quit => {
            return Step {
                text: String::new(),
                outcome: Some(ReplOutcome::Quit),
            }
        }
        ReplCommand::Undo => match prover.undo() {
            Ok(()) => render_state(prover.state()),
            Err(e) => format!("error: {e}\n"),
        },
        ReplCommand::Focus(id) => match prover.focus(id) {
            Ok(()) => render_state(prover.state()),
            Err(e) => format!("error: {e}\n"),
        },
        ReplCommand::Tactic(kind, formula) => match prover.apply(kind, &formula) {
            Err(e) => format!("error: {e}\n"),
            Ok(report) if kind == TacticKind::Check => match &report.verdict {
                Some(v) => render_check(v, &formula),
                None => String::new(),
            },
            Ok(report) if report.complete => {
                let mut text = solver_errors(&report);
                text.push_str(&completion(prover).unwrap_or_default());
                return Step {
                    text,
                    outcome: Some(ReplOutcome::Completed {
                        tainted: prover.state().tainted(),
                    }),
                };
            }
            Ok(report) => render_report(prover.state(), &report),
        },
    };
    Step::text(text)
}

/// Runs the command loop until the proof closes, the user quits, or the
/// input ends. With `echo`, each command is copied to the output after the
/// prompt so that scripted transcripts read like interactive ones.
pub fn run_repl<R: BufRead, W: Write>(
    prover: &mut Prover,
    input: &mut R,
    out: &mut W,
    echo: bool,
) -> io::Result<ReplOutcome> {
    let first = opening(prover);
    out.write_all(first.text.as_bytes())?;
    if let Some(outcome) = first.outcome {
        return Ok(outcome);
    }
    let mut line = String::new();
    loop {
        out.write_all(PROMPT.as_bytes())?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(ReplOutcome::EndOfInput);
        }
        if echo {
            writeln!(out, "{}", line.trim_end())?;
        }
        let step = execute_line(prover, &line);
        out.write_all(step.text.as_bytes())?;
        if let Some(outcome) = step.outcome {
            out.flush()?;
            return Ok(outcome);
        }
    }
}

fn completion(prover: &Prover) -> Option<String> {
    let state = prover.state();
    if !state.is_complete() {
        return None;
    }
    let proof = prover.proof().ok()?;
    Some(render_completion(state, &proof))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::targets_from_smt;
    use crate::solver::{FakeMode, FakeSolver, Session, SolverConfig};
    use std::time::Duration;

    const SMT: &str = include_str!("../fixtures/triangle_sum_even.smt2");

    fn prover(answers: &[&str]) -> Prover {
        let out = targets_from_smt(SMT).unwrap();
        let (factory, _) = FakeSolver::factory(FakeMode::Scripted(
            answers.iter().map(|a| a.to_string()).collect(),
        ));
        let session = Session::start(factory, &SolverConfig::default(), &out.options, &out.prelude).unwrap();
        Prover::start(&out.targets[0], session, Duration::from_millis(100)).unwrap()
    }

    fn run(p: &mut Prover, script: &str) -> (ReplOutcome, String) {
        let mut out = Vec::new();
        let outcome = run_repl(p, &mut script.as_bytes(), &mut out, false).unwrap();
        (outcome, String::from_utf8(out).unwrap())
    }

    #[test]
    fn initial_render_matches_transcript() {
        let p = prover(&["unknown"]);
        assert_eq!(
            render_state(p.state()),
            "1 goal(s) remaining\ncurrent goal:\nhypotheses\ngoal\n   (((x * (x + 1)) % 2) == 0)\n"
        );
        assert_eq!(render_state(p.state()), render_state(p.state()));
    }

    #[test]
    fn case_announces_queued_goal() {
        let mut p = prover(&["unknown", "unknown", "unknown"]);
        let (outcome, text) = run(&mut p, "case (x % 2) == 0\n:quit\n");
        assert_eq!(outcome, ReplOutcome::Quit);
        assert!(text.contains(
            "2 goal(s) remaining\ncurrent goal:\nhypotheses\n   ((x % 2) == 0)\ngoal\n   (((x * (x + 1)) % 2) == 0)\n\ngoal 2 is: (((x * (x + 1)) % 2) == 0)\n"
        ), "{text}");
    }

    #[test]
    fn help_and_errors_keep_going() {
        let mut p = prover(&["unknown"]);
        let before = p.state().snapshot().clone();
        let (outcome, text) = run(&mut p, ":help\nfrobnicate x\ncase z > 0\nundo\n");
        assert_eq!(outcome, ReplOutcome::EndOfInput);
        assert!(text.contains("check <formula>"));
        assert!(text.contains("error: unknown command `frobnicate`"));
        assert!(text.contains("error: unknown identifier `z`"));
        assert!(text.contains("error: nothing to undo"));
        assert_eq!(p.state().snapshot(), &before);
    }

    #[test]
    fn check_reports_without_changing_state() {
        let mut p = prover(&["unknown", "unknown"]);
        let (_, text) = run(&mut p, "check x % 2 == 0\n");
        assert!(text.contains("No, Z3 cannot prove x % 2 == 0\n"), "{text}");
        assert_eq!(p.state().history_len(), 0);
    }

    #[test]
    fn assume_completes_with_warning() {
        let mut p = prover(&["unknown", "unsat"]);
        let (outcome, text) = run(&mut p, "assume false\n");
        assert_eq!(outcome, ReplOutcome::Completed { tainted: true });
        assert_eq!(outcome.exit_code(), 0);
        assert!(text.ends_with(
            "Congrats, current goal proved.\nGoal: (((x * (x + 1)) % 2) == 0)\nProof:\nassume false;\nWARNING: proof uses assume\n"
        ), "{text}");
    }
}
