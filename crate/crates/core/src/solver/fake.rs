use std::collections::HashSet;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::eval::bounded_counterexample;
use super::{Backend, BackendError, BackendFactory};
use crate::sexpr::{parse_script, Command, Term};
use crate::vc::free_symbols;

/// How the fake answers `(check-sat)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FakeMode {
    /// Canned answers in order; `unknown` once exhausted. The special
    /// answers `<hang>` (never reply) and `unknown:timeout` are understood.
    Scripted(Vec<String>),
    /// Decides the current assertions by brute force over integers in
    /// `[-bound, bound]`; `unknown` when that is impossible.
    Oracle { bound: i64 },
}

/// Shared between a fake and its test: everything the fake has seen.
#[derive(Debug, Default)]
pub struct FakeLog {
    pub commands: Vec<String>,
    pub depth: usize,
    pub max_depth: usize,
    pub spawns: usize,
    pub checks: usize,
    next_answer: usize,
}

const BUILTINS: &[&str] = &[
    "and", "or", "not", "=>", "xor", "=", "distinct", "ite", "+", "-", "*", "div", "mod", "abs",
    "<", "<=", ">", ">=", "true", "false",
];

#[derive(Debug, Default, Clone)]
struct Frame {
    declared: HashSet<String>,
    asserts: Vec<Term>,
}

/// An in-process stand-in for an SMT solver speaking the same protocol.
#[derive(Debug)]
pub struct FakeSolver {
    mode: FakeMode,
    log: Arc<Mutex<FakeLog>>,
    frames: Vec<Frame>,
    last_reason: &'static str,
    alive: bool,
}

impl FakeSolver {
    pub fn new(mode: FakeMode, log: Arc<Mutex<FakeLog>>) -> Self {
        log.lock().unwrap().spawns += 1;
        log.lock().unwrap().depth = 0;
        FakeSolver {
            mode,
            log,
            frames: vec![Frame::default()],
            last_reason: "incomplete",
            alive: true,
        }
    }

    /// A factory producing fakes that share one log and one answer queue.
    pub fn factory(mode: FakeMode) -> (BackendFactory, Arc<Mutex<FakeLog>>) {
        let log = Arc::new(Mutex::new(FakeLog::default()));
        let shared = log.clone();
        let factory: BackendFactory = Box::new(move || {
            Ok(Box::new(FakeSolver::new(mode.clone(), shared.clone())) as Box<dyn Backend>)
        });
        (factory, log)
    }

    fn is_declared(&self, name: &str) -> bool {
        BUILTINS.contains(&name) || self.frames.iter().any(|f| f.declared.contains(name))
    }

    fn check_sat(&mut self) -> Option<String> {
        let mut log = self.log.lock().unwrap();
        log.checks += 1;
        match &self.mode {
            FakeMode::Scripted(answers) => {
                let answer = answers
                    .get(log.next_answer)
                    .cloned()
                    .unwrap_or_else(|| "unknown".to_string());
                log.next_answer += 1;
                match answer.as_str() {
                    "<hang>" => None,
                    "unknown:timeout" => {
                        self.last_reason = "timeout";
                        Some("unknown".into())
                    }
                    _ => {
                        self.last_reason = "incomplete";
                        Some(answer)
                    }
                }
            }
            FakeMode::Oracle { bound } => {
                // The prelude and facts outside the evaluable fragment (heap
                // predicates, uninterpreted sorts) are dropped: fewer facts
                // can only turn `unsat` into `sat`, never the other way round.
                let asserts: Vec<Term> = self
                    .frames
                    .iter()
                    .skip(1)
                    .flat_map(|f| f.asserts.iter())
                    .filter(|a| bounded_counterexample(std::slice::from_ref(*a), &Term::BoolLit(false), 0).is_ok())
                    .cloned()
                    .collect();
                // satisfiable iff there is a counterexample to `false`
                let answer = match bounded_counterexample(&asserts, &Term::BoolLit(false), *bound) {
                    Ok(Some(_)) => "sat",
                    Ok(None) => "unsat",
                    Err(_) => "unknown",
                };
                self.last_reason = "incomplete";
                Some(answer.to_string())
            }
        }
    }

    fn answer(&mut self, command: &str) -> Option<String> {
        let cmds = match parse_script(command) {
            Ok(c) if c.len() == 1 => c,
            Ok(_) => return Some("(error \"expected exactly one command\")".into()),
            Err(e) => return Some(format!("(error \"{e}\")")),
        };
        let reply = match cmds.into_iter().next().unwrap() {
            Command::SetOption { .. } => "success".to_string(),
            Command::Declare(d) => {
                self.frames.last_mut().unwrap().declared.insert(d.name);
                "success".to_string()
            }
            Command::Assert(t) => {
                let mut unknown: Vec<String> = free_symbols(&t)
                    .into_iter()
                    .filter(|s| !self.is_declared(s))
                    .collect();
                unknown.sort();
                if let Some(name) = unknown.first() {
                    format!("(error \"unknown constant {name}\")")
                } else {
                    self.frames.last_mut().unwrap().asserts.push(t);
                    "success".to_string()
                }
            }
            Command::Push(n) => {
                for _ in 0..n {
                    self.frames.push(Frame::default());
                }
                let mut log = self.log.lock().unwrap();
                log.depth += n as usize;
                log.max_depth = log.max_depth.max(log.depth);
                "success".to_string()
            }
            Command::Pop(n) => {
                let n = n as usize;
                if n >= self.frames.len() {
                    return Some("(error \"pop from empty stack\")".into());
                }
                self.frames.truncate(self.frames.len() - n);
                self.log.lock().unwrap().depth -= n;
                "success".to_string()
            }
            Command::CheckSat => return self.check_sat(),
            Command::Other(raw) if raw.starts_with("(get-info") => {
                format!("(:reason-unknown \"{}\")", self.last_reason)
            }
            Command::Other(raw) if raw.starts_with("(set-info") || raw.starts_with("(set-logic") => {
                "success".to_string()
            }
            Command::Other(raw) => format!("(error \"unsupported command {}\")", raw.replace('"', "")),
        };
        Some(reply)
    }
}

impl Backend for FakeSolver {
    fn send(&mut self, command: &str, _deadline: Duration) -> Result<String, BackendError> {
        if !self.alive {
            return Err(BackendError::Died("fake solver stopped".into()));
        }
        self.log.lock().unwrap().commands.push(command.to_string());
        match self.answer(command) {
            Some(reply) => Ok(reply),
            None => {
                self.alive = false;
                Err(BackendError::Timeout)
            }
        }
    }

    fn shutdown(&mut self) {
        self.alive = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_decides_small_problems() {
        let (mut factory, log) = FakeSolver::factory(FakeMode::Oracle { bound: 5 });
        let mut f = factory().unwrap();
        let d = Duration::from_secs(1);
        assert_eq!(f.send("(set-option :print-success true)", d).unwrap(), "success");
        assert_eq!(f.send("(declare-fun x () Int)", d).unwrap(), "success");
        assert_eq!(f.send("(push 1)", d).unwrap(), "success");
        assert_eq!(f.send("(assert (> x 0))", d).unwrap(), "success");
        assert_eq!(f.send("(assert (not (>= x 1)))", d).unwrap(), "success");
        assert_eq!(f.send("(check-sat)", d).unwrap(), "unsat");
        assert_eq!(f.send("(pop 1)", d).unwrap(), "success");
        assert_eq!(f.send("(assert (> x 3))", d).unwrap(), "success");
        assert_eq!(f.send("(check-sat)", d).unwrap(), "sat");
        assert!(f.send("(assert (> y 3))", d).unwrap().starts_with("(error"));
        assert_eq!(log.lock().unwrap().max_depth, 1);
    }
}
