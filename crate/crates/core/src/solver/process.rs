use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use super::{Backend, BackendError, Interrupter, SolverError};

/// A solver child process. A reader thread turns stdout into complete
/// answers so that every read can be bounded by a watchdog.
pub struct ProcessBackend {
    child: Arc<Mutex<Child>>,
    stdin: Option<ChildStdin>,
    answers: Receiver<String>,
    stderr: Arc<Mutex<String>>,
    interrupted: Arc<AtomicBool>,
}

/// How often a blocked read checks for an interrupt.
const POLL: Duration = Duration::from_millis(50);

/// Net parenthesis depth of a line, ignoring strings and quoted symbols.
fn paren_balance(line: &str, in_string: &mut bool, in_quote: &mut bool) -> i64 {
    let mut depth = 0;
    for c in line.chars() {
        match c {
            '"' if !*in_quote => *in_string = !*in_string,
            '|' if !*in_string => *in_quote = !*in_quote,
            '(' if !*in_string && !*in_quote => depth += 1,
            ')' if !*in_string && !*in_quote => depth -= 1,
            _ => {}
        }
    }
    depth
}

impl ProcessBackend {
    pub fn spawn(executable: &Path, args: &[String]) -> Result<Self, SolverError> {
        let mut child = Command::new(executable)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                path: executable.display().to_string(),
                source,
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let mut stderr_pipe = child.stderr.take().expect("piped stderr");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut pending = String::new();
            let (mut depth, mut in_string, mut in_quote) = (0i64, false, false);
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if pending.is_empty() && line.trim().is_empty() {
                    continue;
                }
                depth += paren_balance(&line, &mut in_string, &mut in_quote);
                if !pending.is_empty() {
                    pending.push('\n');
                }
                pending.push_str(&line);
                if depth <= 0 && !in_string && !in_quote {
                    if tx.send(std::mem::take(&mut pending).trim().to_string()).is_err() {
                        break;
                    }
                    depth = 0;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = stderr.clone();
        thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr_pipe.read_to_string(&mut buf);
            sink.lock().unwrap().push_str(&buf);
        });
        Ok(ProcessBackend {
            child: Arc::new(Mutex::new(child)),
            stdin,
            answers: rx,
            stderr,
            interrupted: Arc::new(AtomicBool::new(false)),
        })
    }

    fn died(&mut self) -> BackendError {
        let status = self.child.lock().unwrap().try_wait().ok().flatten();
        // give the stderr reader a moment to collect the last words
        thread::sleep(Duration::from_millis(20));
        let stderr = self.stderr.lock().unwrap().trim().to_string();
        let mut msg = match status {
            Some(s) => format!("exited with {s}"),
            None => "stopped answering".to_string(),
        };
        if !stderr.is_empty() {
            msg.push_str(": ");
            msg.push_str(&stderr);
        }
        BackendError::Died(msg)
    }
}

impl Backend for ProcessBackend {
    fn send(&mut self, command: &str, deadline: Duration) -> Result<String, BackendError> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(BackendError::Died("stdin closed".into()));
        };
        if writeln!(stdin, "{command}").and_then(|_| stdin.flush()).is_err() {
            return Err(self.died());
        }
        let start = Instant::now();
        loop {
            if self.interrupted.load(Ordering::SeqCst) {
                self.shutdown();
                return Err(BackendError::Died("interrupted".into()));
            }
            let left = deadline.saturating_sub(start.elapsed());
            match self.answers.recv_timeout(left.min(POLL)) {
                Ok(answer) => return Ok(answer),
                Err(RecvTimeoutError::Timeout) if left > POLL => continue,
                Err(RecvTimeoutError::Timeout) => {
                    self.shutdown();
                    return Err(BackendError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => return Err(self.died()),
            }
        }
    }

    fn shutdown(&mut self) {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = writeln!(stdin, "(exit)");
        }
        let mut child = self.child.lock().unwrap();
        let _ = child.kill();
        let _ = child.wait();
    }

    fn interrupter(&self) -> Option<Interrupter> {
        let child = self.child.clone();
        let flag = self.interrupted.clone();
        Some(Arc::new(move || {
            flag.store(true, Ordering::SeqCst);
            // the reader may be blocked while holding no lock; killing here
            // makes a single-process solver stop at once
            if let Ok(mut c) = child.try_lock() {
                let _ = c.kill();
            }
        }))
    }
}

impl Drop for ProcessBackend {
    fn drop(&mut self) {
        self.shutdown();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balance_ignores_strings_and_quotes() {
        let (mut s, mut q) = (false, false);
        assert_eq!(paren_balance("(error \"a ( b\")", &mut s, &mut q), 0);
        assert_eq!(paren_balance("(:x |(|", &mut s, &mut q), 1);
        assert!(!s && !q);
    }

    #[test]
    fn missing_executable_is_reported() {
        let err = ProcessBackend::spawn(Path::new("/nonexistent/solver"), &[]).err().unwrap();
        assert!(err.to_string().contains("/nonexistent/solver"));
    }

    #[test]
    fn shell_solver_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("solver.sh");
        std::fs::write(
            &script,
            "#!/bin/sh\nwhile read -r line; do\n  case \"$line\" in\n    \"(check-sat)\") echo unsat ;;\n    \"(exit)\") exit 0 ;;\n    *) echo success ;;\n  esac\ndone\n",
        )
        .unwrap();
        let mut b = ProcessBackend::spawn(Path::new("/bin/sh"), &[script.display().to_string()]).unwrap();
        let d = Duration::from_secs(5);
        assert_eq!(b.send("(push 1)", d).unwrap(), "success");
        assert_eq!(b.send("(check-sat)", d).unwrap(), "unsat");
        b.shutdown();
        assert!(matches!(b.send("(check-sat)", d), Err(BackendError::Died(_))));
    }

    #[test]
    fn watchdog_kills_silent_solver() {
        let mut b = ProcessBackend::spawn(Path::new("/bin/sh"), &["-c".into(), "sleep 30".into()]).unwrap();
        let t = std::time::Instant::now();
        assert!(matches!(
            b.send("(check-sat)", Duration::from_millis(100)),
            Err(BackendError::Timeout)
        ));
        assert!(t.elapsed() < Duration::from_secs(5));
        assert!(b.child.lock().unwrap().try_wait().unwrap().is_some());
    }
}
