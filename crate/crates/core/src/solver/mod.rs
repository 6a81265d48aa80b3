//! A long-lived SMT solver process spoken to over the textual SMT-LIB
//! protocol, configured like the stock verifier pipeline.

mod eval;
mod fake;
mod process;

use std::fmt;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::sexpr::{print_term, single_line, Command, Term};

pub use eval::{bounded_counterexample, eval_bool, Value};
pub use fake::{FakeLog, FakeMode, FakeSolver};
pub use process::ProcessBackend;

/// Options the client always controls; file values for these are ignored.
const PINNED_OPTIONS: &[&str] = &[":print-success", ":timeout", ":rlimit"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub executable: PathBuf,
    pub extra_args: Vec<String>,
    pub per_query_timeout: Duration,
    /// Sent after the file's own options, so these win.
    pub options: Vec<(String, String)>,
    /// Where to log the command transcript, if anywhere.
    pub trace: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            executable: PathBuf::from("z3"),
            extra_args: vec!["-in".to_string()],
            per_query_timeout: Duration::from_millis(1000),
            options: [
                ("auto_config", "false"),
                ("smt.mbqi", "false"),
                ("smt.random_seed", "0"),
                ("sat.random_seed", "0"),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
            trace: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NotProvedReason {
    Sat,
    Unknown,
    Timeout,
}

impl fmt::Display for NotProvedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NotProvedReason::Sat => "sat",
            NotProvedReason::Unknown => "unknown",
            NotProvedReason::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// The solver answered `unsat` for the negated goal.
    Proved,
    NotProved(NotProvedReason),
    SolverError(String),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proved => f.write_str("proved"),
            Verdict::NotProved(r) => write!(f, "not proved ({r})"),
            Verdict::SolverError(e) => write!(f, "solver error: {e}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot start solver `{path}`: {source}")]
    Spawn {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver rejected setup command #{index} `{command}`: {message}")]
    Setup {
        index: usize,
        command: String,
        message: String,
    },
    #[error("solver process died{}", if .0.is_empty() { String::new() } else { format!(": {}", .0) })]
    Died(String),
    #[error("solver did not answer `{0}` in time")]
    Unresponsive(String),
    #[error("unexpected solver answer `{answer}` to `{command}`")]
    Protocol { command: String, answer: String },
    #[error("solver session is no longer usable")]
    Dead,
    #[error("cannot write solver trace: {0}")]
    Trace(#[source] std::io::Error),
}

/// Transport-level outcome of one command.
#[derive(Debug)]
pub enum BackendError {
    /// No answer before the deadline; the backend has been torn down.
    Timeout,
    /// The process exited or its pipes closed.
    Died(String),
}

/// One SMT-LIB command channel. Every command produces exactly one answer
/// because `:print-success` is always on.
pub trait Backend: Send {
    fn send(&mut self, command: &str, deadline: Duration) -> Result<String, BackendError>;
    fn shutdown(&mut self);

    /// A handle that aborts the process from another thread, if supported.
    fn interrupter(&self) -> Option<Interrupter> {
        None
    }
}

/// Kills the solver process behind a session; any in-flight query fails.
pub type Interrupter = Arc<dyn Fn() + Send + Sync>;

pub type BackendFactory = Box<dyn FnMut() -> Result<Box<dyn Backend>, SolverError> + Send>;

/// Watchdog slack for non-query commands such as prelude axioms.
const SETUP_DEADLINE: Duration = Duration::from_secs(60);

/// A live solver with the prelude asserted.
pub struct Session {
    factory: BackendFactory,
    backend: Option<Box<dyn Backend>>,
    config: SolverConfig,
    /// Commands that rebuild the current solver state from scratch.
    setup: Vec<String>,
    /// Length of `setup` at stack depth 0.
    base_len: usize,
    depth: usize,
    timeout_sent: Option<Duration>,
    transcript: Vec<String>,
    trace: Option<File>,
    needs_restart: bool,
    closed: bool,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("depth", &self.depth)
            .field("alive", &self.is_alive())
            .finish_non_exhaustive()
    }
}

/// Starts the configured solver executable and replays options and prelude.
pub fn start_session(
    config: &SolverConfig,
    options: &[Command],
    prelude: &[Command],
) -> Result<Session, SolverError> {
    let cfg = config.clone();
    let factory: BackendFactory = Box::new(move || {
        ProcessBackend::spawn(&cfg.executable, &cfg.extra_args).map(|b| Box::new(b) as Box<dyn Backend>)
    });
    Session::start(factory, config, options, prelude)
}

/// Resolves the solver executable: an explicit path, else `IPM_SOLVER`,
/// else `z3` on the `PATH`. Returns `None` when nothing runnable is found.
pub fn locate_solver(explicit: Option<&Path>) -> Option<PathBuf> {
    let candidate = explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("IPM_SOLVER").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("z3"));
    if candidate.components().count() > 1 {
        return candidate.is_file().then_some(candidate);
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|dir| dir.join(&candidate))
            .find(|p| p.is_file())
    })
}

fn option_key(cmd: &Command) -> Option<&str> {
    match cmd {
        Command::SetOption { key, .. } => Some(key),
        _ => None,
    }
}

impl Session {
    pub fn start(
        mut factory: BackendFactory,
        config: &SolverConfig,
        options: &[Command],
        prelude: &[Command],
    ) -> Result<Session, SolverError> {
        let trace = match &config.trace {
            Some(p) => Some(File::create(p).map_err(SolverError::Trace)?),
            None => None,
        };
        let backend = factory()?;
        let mut s = Session {
            factory,
            backend: Some(backend),
            config: config.clone(),
            setup: Vec::new(),
            base_len: 0,
            depth: 0,
            timeout_sent: None,
            transcript: Vec::new(),
            trace,
            needs_restart: false,
            closed: false,
        };
        let mut commands = vec!["(set-option :print-success true)".to_string()];
        let overridden: Vec<String> = config.options.iter().map(|(k, _)| format!(":{k}")).collect();
        for cmd in options {
            match option_key(cmd) {
                Some(k) if PINNED_OPTIONS.contains(&k) || overridden.iter().any(|o| o == k) => {
                    log::debug!("file option {k} overridden by the client");
                }
                Some(k) => {
                    log::debug!("replaying file option {k}");
                    commands.push(single_line(&cmd.to_string()));
                }
                None => commands.push(single_line(&cmd.to_string())),
            }
        }
        for (k, v) in &config.options {
            commands.push(format!("(set-option :{k} {v})"));
        }
        commands.extend(prelude.iter().map(|c| single_line(&c.to_string())));
        for (index, command) in commands.into_iter().enumerate() {
            s.setup_command(index, command)?;
        }
        s.base_len = s.setup.len();
        Ok(s)
    }

    fn setup_command(&mut self, index: usize, command: String) -> Result<(), SolverError> {
        let answer = self.raw_send(&command, SETUP_DEADLINE)?;
        if let Some(message) = error_message(&answer) {
            return Err(SolverError::Setup {
                index,
                command,
                message,
            });
        }
        self.setup.push(command);
        Ok(())
    }

    /// Lets another thread abandon a running query by killing the process.
    pub fn interrupter(&self) -> Option<Interrupter> {
        self.backend.as_ref().and_then(|b| b.interrupter())
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn is_alive(&self) -> bool {
        self.backend.is_some()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Every command sent so far, in order, including replays.
    pub fn transcript(&self) -> &[String] {
        &self.transcript
    }

    fn log_trace(&mut self, line: &str) {
        if let Some(f) = &mut self.trace {
            if let Err(e) = writeln!(f, "{line}") {
                log::warn!("disabling solver trace: {e}");
                self.trace = None;
            }
        }
    }

    fn raw_send(&mut self, command: &str, deadline: Duration) -> Result<String, SolverError> {
        let backend = self.backend.as_mut().ok_or(SolverError::Dead)?;
        self.transcript.push(command.to_string());
        let res = backend.send(command, deadline);
        self.log_trace(command);
        match res {
            Ok(answer) => {
                self.log_trace(&format!("; {answer}"));
                Ok(answer)
            }
            Err(BackendError::Timeout) => {
                self.log_trace("; <watchdog expired>");
                self.kill();
                Err(SolverError::Unresponsive(command.to_string()))
            }
            Err(BackendError::Died(msg)) => {
                self.log_trace("; <solver died>");
                self.kill();
                Err(SolverError::Died(msg))
            }
        }
    }

    /// Sends a command that must be acknowledged with `success`.
    fn command(&mut self, command: &str) -> Result<(), SolverError> {
        let answer = self.raw_send(command, SETUP_DEADLINE)?;
        if answer == "success" {
            Ok(())
        } else {
            Err(SolverError::Protocol {
                command: command.to_string(),
                answer,
            })
        }
    }

    fn kill(&mut self) {
        if let Some(mut b) = self.backend.take() {
            b.shutdown();
        }
    }

    /// Rebuilds a torn-down process by replaying the recorded setup.
    pub fn restart(&mut self) -> Result<(), SolverError> {
        self.kill();
        log::info!("restarting solver");
        self.backend = Some((self.factory)()?);
        self.timeout_sent = None;
        let setup = std::mem::take(&mut self.setup);
        for (index, command) in setup.into_iter().enumerate() {
            self.setup_command(index, command)?;
        }
        self.needs_restart = false;
        Ok(())
    }

    fn ensure_live(&mut self) -> Result<(), SolverError> {
        if self.closed {
            return Err(SolverError::Dead);
        }
        if self.needs_restart || self.backend.is_none() {
            self.restart()?;
        }
        Ok(())
    }

    /// Opens a frame holding one obligation's local declarations.
    pub fn push_context(&mut self, decls: &[Command]) -> Result<(), SolverError> {
        self.ensure_live()?;
        self.command("(push 1)")?;
        self.setup.push("(push 1)".to_string());
        self.depth += 1;
        for (i, d) in decls.iter().enumerate() {
            let text = single_line(&d.to_string());
            let index = self.setup.len() + i;
            let answer = self.raw_send(&text, SETUP_DEADLINE)?;
            if let Some(message) = error_message(&answer) {
                return Err(SolverError::Setup {
                    index,
                    command: text,
                    message,
                });
            }
            self.setup.push(text);
        }
        Ok(())
    }

    /// Drops every frame opened by `push_context`.
    pub fn pop_context(&mut self) -> Result<(), SolverError> {
        if self.depth == 0 {
            return Ok(());
        }
        let n = self.depth;
        self.setup.truncate(self.base_len);
        self.depth = 0;
        if self.backend.is_some() && !self.needs_restart {
            self.command(&format!("(pop {n})"))?;
        }
        Ok(())
    }

    /// Asks whether `hypotheses` entail `goal`. The solver stack is back at
    /// its previous depth afterwards, whatever the outcome.
    pub fn check_entailment(
        &mut self,
        hypotheses: &[Term],
        goal: &Term,
        timeout: Duration,
    ) -> Result<Verdict, SolverError> {
        self.ensure_live()?;
        if self.timeout_sent != Some(timeout) {
            self.command(&format!("(set-option :timeout {})", timeout.as_millis()))?;
            self.timeout_sent = Some(timeout);
        }
        self.command("(push 1)")?;
        let verdict = self.query(hypotheses, goal, timeout);
        match verdict {
            Err(SolverError::Unresponsive(_)) => {
                // the process is gone; the next call replays the setup
                self.needs_restart = true;
                Ok(Verdict::NotProved(NotProvedReason::Timeout))
            }
            Err(e) => Err(e),
            Ok(v) => {
                self.command("(pop 1)")?;
                Ok(v)
            }
        }
    }

    fn query(
        &mut self,
        hypotheses: &[Term],
        goal: &Term,
        timeout: Duration,
    ) -> Result<Verdict, SolverError> {
        let mut asserts: Vec<String> = hypotheses
            .iter()
            .map(|h| format!("(assert {})", print_term(h)))
            .collect();
        asserts.push(format!("(assert {})", print_term(&Term::not(goal.clone()))));
        for a in &asserts {
            let answer = self.raw_send(a, SETUP_DEADLINE)?;
            if let Some(message) = error_message(&answer) {
                return Ok(Verdict::SolverError(message));
            }
        }
        // the watchdog only fires if the solver ignores its own timeout
        let deadline = timeout * 2 + Duration::from_secs(1);
        let answer = self.raw_send("(check-sat)", deadline)?;
        Ok(match answer.as_str() {
            "unsat" => Verdict::Proved,
            "sat" => Verdict::NotProved(NotProvedReason::Sat),
            "unknown" => {
                let reason = self.raw_send("(get-info :reason-unknown)", SETUP_DEADLINE)?;
                if reason.contains("timeout") || reason.contains("canceled") {
                    Verdict::NotProved(NotProvedReason::Timeout)
                } else {
                    Verdict::NotProved(NotProvedReason::Unknown)
                }
            }
            other => match error_message(other) {
                Some(m) => Verdict::SolverError(m),
                None => Verdict::SolverError(format!("unexpected answer `{other}`")),
            },
        })
    }

    /// Terminates the solver for good. Safe to call more than once.
    pub fn shutdown(&mut self) {
        self.kill();
        self.needs_restart = false;
        self.closed = true;
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// The message of an `(error "...")` answer.
fn error_message(answer: &str) -> Option<String> {
    let rest = answer.trim().strip_prefix("(error")?.trim();
    let body = rest.strip_suffix(')')?.trim();
    let body = body
        .strip_prefix('"')
        .and_then(|b| b.strip_suffix('"'))
        .unwrap_or(body);
    Some(body.replace("\"\"", "\""))
}
