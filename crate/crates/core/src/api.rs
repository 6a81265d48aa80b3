//! Newline-delimited JSON access to a proof session, for companion UIs.
//!
//! Each request line is an object `{"id": …, "type": …, "payload": …}`; the
//! server answers every request with exactly one line carrying the same id.
//! See `docs/protocol.md` for the schema.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::engine::{EngineError, NodeId, ProofState, TacticKind, TacticReport};
use crate::prover::Prover;
use crate::solver::{NotProvedReason, Verdict};

/// Builds a fresh proof session for each connection.
pub type ProverFactory = Arc<dyn Fn() -> Result<Prover, String> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalView {
    pub id: NodeId,
    pub hypotheses: Vec<String>,
    pub goal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeView {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub status: String,
    /// The tactic applied here, as `keyword formula`.
    pub tactic: Option<String>,
    pub children: Vec<NodeId>,
    pub goal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateView {
    pub goal_count: usize,
    /// Open goals in the order they would be worked on.
    pub goals: Vec<GoalView>,
    pub focus: Option<NodeId>,
    pub tainted: bool,
    /// The whole goal tree, for outline views.
    pub nodes: Vec<NodeView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "camelCase")]
pub enum VerdictView {
    Proved,
    NotProved { reason: String },
    SolverError { message: String },
}

impl From<&Verdict> for VerdictView {
    fn from(v: &Verdict) -> Self {
        match v {
            Verdict::Proved => VerdictView::Proved,
            Verdict::NotProved(r) => VerdictView::NotProved {
                reason: match r {
                    NotProvedReason::Sat => "sat",
                    NotProvedReason::Unknown => "unknown",
                    NotProvedReason::Timeout => "timeout",
                }
                .to_string(),
            },
            Verdict::SolverError(m) => VerdictView::SolverError { message: m.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChildView {
    pub id: NodeId,
    pub status: String,
    pub verdict: Option<VerdictView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportView {
    pub tactic: String,
    pub formula: String,
    pub target: NodeId,
    /// Only for `check`.
    pub verdict: Option<VerdictView>,
    pub children: Vec<ChildView>,
    pub queued: Vec<NodeId>,
    pub target_closed: bool,
    pub state: StateView,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompleteView {
    /// The root goal.
    pub goal: String,
    pub proof: String,
    pub tainted: bool,
    pub state: StateView,
}

pub fn state_view(state: &ProofState) -> StateView {
    let goals = state
        .open_goals()
        .iter()
        .filter_map(|&id| state.node(id))
        .map(|n| GoalView {
            id: n.id,
            hypotheses: n.display.hypothesis_lines(),
            goal: n.display.goal_line(),
        })
        .collect();
    let nodes = state
        .nodes()
        .map(|n| NodeView {
            id: n.id,
            parent: n.parent,
            status: n.status.name().to_string(),
            tactic: n
                .tactic
                .as_ref()
                .map(|t| format!("{} {}", t.kind.keyword(), state.render(&t.formula))),
            children: n.children.clone(),
            goal: n.display.goal_line(),
        })
        .collect();
    StateView {
        goal_count: state.open_goals().len(),
        goals,
        focus: state.focus(),
        tainted: state.tainted(),
        nodes,
    }
}

fn report_view(state: &ProofState, report: &TacticReport) -> ReportView {
    ReportView {
        tactic: report.tactic.kind.keyword().to_string(),
        formula: state.render(&report.tactic.formula),
        target: report.target,
        verdict: report.verdict.as_ref().map(VerdictView::from),
        children: report
            .children
            .iter()
            .map(|c| ChildView {
                id: c.id,
                status: c.status.name().to_string(),
                verdict: c.verdict.as_ref().map(VerdictView::from),
            })
            .collect(),
        queued: report.queued.clone(),
        target_closed: report.target_closed,
        state: state_view(state),
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "camelCase")]
enum Request {
    ApplyTactic { tactic: String, formula: String },
    Undo,
    Focus { goal: NodeId },
    GetState,
    Quit,
}

/// One connection's proof session.
#[derive(Debug)]
pub struct ApiSession {
    prover: Prover,
    closed: bool,
}

impl ApiSession {
    pub fn new(prover: Prover) -> Self {
        ApiSession { prover, closed: false }
    }

    pub fn prover(&self) -> &Prover {
        &self.prover
    }

    pub fn prover_mut(&mut self) -> &mut Prover {
        &mut self.prover
    }

    /// Whether a `quit` request has been handled.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Handles one request line and returns the reply object.
    pub fn handle_line(&mut self, line: &str) -> Value {
        match serde_json::from_str::<Value>(line) {
            Ok(msg) => self.handle_message(&msg),
            Err(e) => reply(Value::Null, "error", error_payload("badRequest", format!("invalid JSON: {e}"))),
        }
    }

    /// Handles one request object and returns the reply object.
    pub fn handle_message(&mut self, msg: &Value) -> Value {
        let id = msg.get("id").cloned().unwrap_or(Value::Null);
        if !msg.is_object() {
            return reply(id, "error", error_payload("badRequest", "a request must be a JSON object".into()));
        }
        let mut body = msg.clone();
        if let Some(obj) = body.as_object_mut() {
            obj.remove("id");
            // requests without arguments may omit the payload
            if obj.get("payload").is_some_and(Value::is_null) {
                obj.remove("payload");
            }
        }
        let request = match serde_json::from_value::<Request>(body) {
            Ok(r) => r,
            Err(e) => return reply(id, "error", error_payload("badRequest", e.to_string())),
        };
        if self.closed {
            return reply(id, "error", error_payload("closed", "the session has ended".into()));
        }
        let (kind, payload) = match self.dispatch(request) {
            Ok(ok) => ok,
            Err(e) => {
                let code = match e {
                    EngineError::Solver(_) => "solver",
                    EngineError::Formula(_) => "formula",
                    _ => "tactic",
                };
                ("error", error_payload(code, e.to_string()))
            }
        };
        reply(id, kind, payload)
    }

    fn dispatch(&mut self, request: Request) -> Result<(&'static str, Value), EngineError> {
        let p = &mut self.prover;
        match request {
            Request::GetState => Ok(("state", to_value(&state_view(p.state())))),
            Request::Quit => {
                self.closed = true;
                Ok(("state", to_value(&state_view(p.state()))))
            }
            Request::Undo => {
                p.undo()?;
                Ok(("state", to_value(&state_view(p.state()))))
            }
            Request::Focus { goal } => {
                p.focus(goal)?;
                Ok(("state", to_value(&state_view(p.state()))))
            }
            Request::ApplyTactic { tactic, formula } => {
                let Some(kind) = TacticKind::from_keyword(tactic.trim()) else {
                    return Ok((
                        "error",
                        error_payload("badRequest", format!("unknown tactic `{tactic}`")),
                    ));
                };
                let report = p.apply(kind, &formula)?;
                if report.complete && kind != TacticKind::Check {
                    let state = p.state();
                    let view = CompleteView {
                        goal: state.root().display.goal_line(),
                        proof: p.proof()?,
                        tainted: state.tainted(),
                        state: state_view(state),
                    };
                    return Ok(("proofComplete", to_value(&view)));
                }
                Ok(("tacticReport", to_value(&report_view(p.state(), &report))))
            }
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("views serialize")
}

fn error_payload(code: &str, message: String) -> Value {
    json!({ "code": code, "message": message })
}

fn reply(id: Value, kind: &str, payload: Value) -> Value {
    json!({ "id": id, "type": kind, "payload": payload })
}

/// Serves one connection until it closes or sends `quit`.
pub fn serve_stream<R: BufRead, W: Write>(session: &mut ApiSession, input: R, mut out: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let answer = session.handle_line(&line);
        writeln!(out, "{answer}")?;
        out.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

fn serve_connection(stream: TcpStream, factory: &ProverFactory) -> io::Result<()> {
    let peer = stream.peer_addr().ok();
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    match factory() {
        Ok(prover) => {
            log::info!("session opened for {peer:?}");
            let mut session = ApiSession::new(prover);
            serve_stream(&mut session, reader, &mut writer)
        }
        Err(message) => {
            let answer = reply(Value::Null, "error", error_payload("solver", message));
            writeln!(writer, "{answer}")
        }
    }
}

/// Binds a listener; port 0 picks a free port.
pub fn bind(addr: impl ToSocketAddrs) -> io::Result<TcpListener> {
    TcpListener::bind(addr)
}

/// Accepts connections forever, one thread and one proof session each.
pub fn serve(listener: TcpListener, factory: ProverFactory) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let factory = Arc::clone(&factory);
        std::thread::spawn(move || {
            if let Err(e) = serve_connection(stream, &factory) {
                log::warn!("connection ended with an error: {e}");
            }
        });
    }
    Ok(())
}
