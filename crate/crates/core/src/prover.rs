//! A proof session: one target, its goal tree and the solver behind it.
//! The REPL, the JSON session server and the C interface all drive this.

use std::time::Duration;

use crate::dafny::parse_tactic_expr;
use crate::engine::{
    apply_tactic, focus, init_session, reconstruct_proof, undo, EngineError, NodeId, ProofState,
    Tactic, TacticKind, TacticReport,
};
use crate::pipeline::Target;
use crate::solver::{Session, Verdict};

/// A command as typed by the user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplCommand {
    Tactic(TacticKind, String),
    Undo,
    Focus(NodeId),
    Help,
    Quit,
}

pub const HELP: &str = "\
commands:
  check <formula>    ask the solver whether <formula> follows from the hypotheses
  assert <formula>   prove <formula> first, then use it as a hypothesis
  case <formula>     split on whether <formula> holds
  assume <formula>   add <formula> as a hypothesis without proof (unsound)
  undo               revert the last assert/case/assume
  focus <n>          work on open goal <n>
  :help              show this list
  :quit              give up on the remaining goals";

/// Parses one input line; blank lines and `//` comments yield `None`.
pub fn parse_command(line: &str) -> Result<Option<ReplCommand>, String> {
    let line = line.trim();
    if line.is_empty() || line.starts_with("//") {
        return Ok(None);
    }
    let (word, rest) = match line.split_once(char::is_whitespace) {
        Some((w, r)) => (w, r.trim()),
        None => (line, ""),
    };
    let bare = |cmd: ReplCommand| {
        if rest.is_empty() {
            Ok(Some(cmd))
        } else {
            Err(format!("`{word}` takes no argument"))
        }
    };
    match word {
        ":help" | "help" => bare(ReplCommand::Help),
        ":quit" | "quit" => bare(ReplCommand::Quit),
        "undo" => bare(ReplCommand::Undo),
        "focus" => rest
            .parse::<NodeId>()
            .map(|n| Some(ReplCommand::Focus(n)))
            .map_err(|_| "usage: focus <goal number>".to_string()),
        w => match TacticKind::from_keyword(w) {
            Some(_) if rest.is_empty() => Err(format!("usage: {w} <formula>")),
            Some(kind) => Ok(Some(ReplCommand::Tactic(kind, rest.to_string()))),
            None => Err(format!("unknown command `{w}`; type :help for the list")),
        },
    }
}

pub struct Prover {
    state: ProofState,
    solver: Session,
    timeout: Duration,
    initial: Verdict,
    label: Option<String>,
}

impl std::fmt::Debug for Prover {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Prover")
            .field("open_goals", &self.state.open_goals())
            .finish_non_exhaustive()
    }
}

impl Prover {
    /// Opens the target's context in the solver and tries the goal once.
    pub fn start(target: &Target, mut solver: Session, timeout: Duration) -> Result<Self, EngineError> {
        solver.push_context(&target.obligation.local_decls)?;
        let (state, initial) = init_session(&target.obligation, target.names.clone(), &mut solver, timeout)?;
        Ok(Prover {
            state,
            solver,
            timeout,
            initial,
            label: target.label.clone(),
        })
    }

    pub fn state(&self) -> &ProofState {
        &self.state
    }

    /// The solver's answer on the untouched goal.
    pub fn initial_verdict(&self) -> &Verdict {
        &self.initial
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn apply(&mut self, kind: TacticKind, formula: &str) -> Result<TacticReport, EngineError> {
        let term = parse_tactic_expr(formula, self.state.names())?;
        apply_tactic(&mut self.state, &mut self.solver, Tactic::new(kind, term), self.timeout)
    }

    pub fn undo(&mut self) -> Result<(), EngineError> {
        undo(&mut self.state)
    }

    pub fn focus(&mut self, id: NodeId) -> Result<(), EngineError> {
        focus(&mut self.state, id)
    }

    pub fn proof(&self) -> Result<String, EngineError> {
        reconstruct_proof(&self.state)
    }

    /// Closes the target's solver context and hands the solver back.
    pub fn finish(mut self) -> Session {
        if let Err(e) = self.solver.pop_context() {
            log::warn!("could not pop solver context: {e}");
        }
        self.solver
    }
}
