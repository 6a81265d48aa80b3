//! The goal tree: tactics, automatic discharge of subgoals, undo, focus and
//! proof reconstruction.

mod reconstruct;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::backtranslate::{display_obligation, show, DisplayedObligation, NameMap};
use crate::dafny::ExprError;
use crate::sexpr::Term;
use crate::solver::{Session, SolverError, Verdict};
use crate::vc::Obligation;

pub use reconstruct::reconstruct_proof;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    /// Waiting for the user.
    Open,
    /// A tactic was applied and some descendant is still open.
    Decomposed,
    AutoDischarged,
    ClosedByTactic,
    /// Admitted without proof by `assume`.
    Assumed,
}

impl NodeStatus {
    pub fn is_closed(self) -> bool {
        matches!(
            self,
            NodeStatus::AutoDischarged | NodeStatus::ClosedByTactic | NodeStatus::Assumed
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeStatus::Open => "open",
            NodeStatus::Decomposed => "decomposed",
            NodeStatus::AutoDischarged => "autoDischarged",
            NodeStatus::ClosedByTactic => "closedByTactic",
            NodeStatus::Assumed => "assumed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TacticKind {
    Check,
    Assert,
    Case,
    Assume,
}

impl TacticKind {
    pub const ALL: [TacticKind; 4] = [
        TacticKind::Check,
        TacticKind::Assert,
        TacticKind::Case,
        TacticKind::Assume,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            TacticKind::Check => "check",
            TacticKind::Assert => "assert",
            TacticKind::Case => "case",
            TacticKind::Assume => "assume",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tactic {
    pub kind: TacticKind,
    /// Solver-facing, protection-free boolean formula.
    pub formula: Term,
}

impl Tactic {
    pub fn new(kind: TacticKind, formula: Term) -> Self {
        Tactic { kind, formula }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub hypotheses: Vec<Term>,
    pub goal: Term,
    pub status: NodeStatus,
    pub tactic: Option<Tactic>,
    pub children: Vec<NodeId>,
    pub display: DisplayedObligation,
}

/// Everything undo restores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub nodes: BTreeMap<NodeId, ProofNode>,
    pub focus: Option<NodeId>,
    /// Open nodes in creation order.
    pub open_order: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct ProofState {
    current: Snapshot,
    history: Vec<Snapshot>,
    next_id: NodeId,
    names: NameMap,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no open goal")]
    NoOpenGoal,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("there is no goal {0}")]
    UnknownGoal(NodeId),
    #[error("goal {0} is already closed")]
    NotOpen(NodeId),
    #[error("{0}")]
    Formula(#[from] ExprError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0} goal(s) are still open")]
    OpenGoalsRemain(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildReport {
    pub id: NodeId,
    pub status: NodeStatus,
    pub verdict: Option<Verdict>,
}

/// What a tactic application did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TacticReport {
    pub tactic: Tactic,
    /// The goal the tactic was applied to.
    pub target: NodeId,
    /// For `check`: whether the formula follows from the hypotheses.
    pub verdict: Option<Verdict>,
    pub children: Vec<ChildReport>,
    /// Open children other than the newly focused one.
    pub queued: Vec<NodeId>,
    /// The target goal is now closed.
    pub target_closed: bool,
    /// No open goal remains anywhere.
    pub complete: bool,
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.keyword(), self.formula)
    }
}

impl ProofState {
    /// A state with a single open root.
    pub fn new(obligation: &Obligation, names: NameMap) -> Self {
        let mut st = ProofState {
            current: Snapshot {
                nodes: BTreeMap::new(),
                focus: None,
                open_order: Vec::new(),
            },
            history: Vec::new(),
            next_id: 0,
            names,
        };
        let root = st.make_node(None, obligation.hypotheses.clone(), obligation.goal.clone());
        st.current.nodes.insert(root.id, root);
        st.current.open_order.push(0);
        st.current.focus = Some(0);
        st
    }

    fn make_node(&mut self, parent: Option<NodeId>, hypotheses: Vec<Term>, goal: Term) -> ProofNode {
        let id = self.next_id;
        self.next_id += 1;
        let display = display_obligation(&hypotheses, &goal, &self.names);
        ProofNode {
            id,
            parent,
            hypotheses,
            goal,
            status: NodeStatus::Open,
            tactic: None,
            children: Vec::new(),
            display,
        }
    }

    pub fn names(&self) -> &NameMap {
        &self.names
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.current
    }

    pub fn root(&self) -> &ProofNode {
        &self.current.nodes[&0]
    }

    pub fn node(&self, id: NodeId) -> Option<&ProofNode> {
        self.current.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ProofNode> {
        self.current.nodes.values()
    }

    pub fn focus(&self) -> Option<NodeId> {
        self.current.focus
    }

    pub fn focused(&self) -> Option<&ProofNode> {
        self.current.focus.and_then(|id| self.node(id))
    }

    pub fn open_goals(&self) -> &[NodeId] {
        &self.current.open_order
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn is_complete(&self) -> bool {
        self.current.open_order.is_empty()
    }

    /// Whether anything was admitted with `assume`.
    pub fn tainted(&self) -> bool {
        self.nodes().any(|n| n.status == NodeStatus::Assumed)
    }

    /// Shows a formula the way goals are shown.
    pub fn render(&self, t: &Term) -> String {
        show(t, &self.names).render()
    }

    /// Marks the root discharged when the solver proves it outright.
    fn discharge_root(&mut self) {
        let root = self.current.nodes.get_mut(&0).unwrap();
        root.status = NodeStatus::AutoDischarged;
        self.current.open_order.clear();
        self.current.focus = None;
    }

    fn close_upwards(&mut self, mut id: NodeId) {
        while let Some(parent) = self.current.nodes[&id].parent {
            let all_closed = self.current.nodes[&parent]
                .children
                .iter()
                .all(|c| self.current.nodes[c].status.is_closed());
            if !all_closed {
                return;
            }
            self.current.nodes.get_mut(&parent).unwrap().status = NodeStatus::ClosedByTactic;
            id = parent;
        }
    }

    fn refresh_open_order(&mut self) {
        self.current.open_order = self
            .current
            .nodes
            .values()
            .filter(|n| n.status == NodeStatus::Open)
            .map(|n| n.id)
            .collect();
    }
}

/// Builds the goal tree for an obligation and tries the solver on it first.
pub fn init_session(
    obligation: &Obligation,
    names: NameMap,
    session: &mut Session,
    timeout: Duration,
) -> Result<(ProofState, Verdict), EngineError> {
    let mut state = ProofState::new(obligation, names);
    let verdict = session.check_entailment(&obligation.hypotheses, &obligation.goal, timeout)?;
    if verdict.is_proved() {
        state.discharge_root();
    }
    Ok((state, verdict))
}

/// Applies one tactic to the focused goal. On error the state is unchanged.
pub fn apply_tactic(
    state: &mut ProofState,
    session: &mut Session,
    tactic: Tactic,
    timeout: Duration,
) -> Result<TacticReport, EngineError> {
    let target = state.current.focus.ok_or(EngineError::NoOpenGoal)?;
    let node = state.current.nodes[&target].clone();
    let psi = tactic.formula.clone();
    let with = |extra: Term| {
        let mut h = node.hypotheses.clone();
        h.push(extra);
        h
    };

    if tactic.kind == TacticKind::Check {
        let verdict = session.check_entailment(&node.hypotheses, &psi, timeout)?;
        return Ok(TacticReport {
            tactic,
            target,
            verdict: Some(verdict),
            children: Vec::new(),
            queued: Vec::new(),
            target_closed: false,
            complete: state.is_complete(),
        });
    }

    // (hypotheses, goal, try the solver, admitted)
    let specs: Vec<(Vec<Term>, Term, bool, bool)> = match tactic.kind {
        TacticKind::Assert => vec![
            (node.hypotheses.clone(), psi.clone(), true, false),
            (with(psi.clone()), node.goal.clone(), true, false),
        ],
        TacticKind::Case => vec![
            (with(psi.clone()), node.goal.clone(), true, false),
            (with(Term::not(psi.clone())), node.goal.clone(), true, false),
        ],
        TacticKind::Assume => vec![
            (node.hypotheses.clone(), psi.clone(), false, true),
            (with(psi.clone()), node.goal.clone(), true, false),
        ],
        TacticKind::Check => unreachable!(),
    };
    // ask the solver before touching the state so failures leave it intact
    let mut verdicts = Vec::with_capacity(specs.len());
    for (h, g, try_solver, _) in &specs {
        verdicts.push(if *try_solver {
            Some(session.check_entailment(h, g, timeout)?)
        } else {
            None
        });
    }

    state.history.push(state.current.clone());
    let mut children = Vec::new();
    for ((h, g, _, admitted), verdict) in specs.into_iter().zip(verdicts) {
        let mut child = state.make_node(Some(target), h, g);
        child.status = if admitted {
            NodeStatus::Assumed
        } else if verdict.as_ref().is_some_and(Verdict::is_proved) {
            NodeStatus::AutoDischarged
        } else {
            NodeStatus::Open
        };
        children.push(ChildReport {
            id: child.id,
            status: child.status,
            verdict,
        });
        state.current.nodes.insert(child.id, child);
    }
    {
        let n = state.current.nodes.get_mut(&target).unwrap();
        n.tactic = Some(tactic.clone());
        n.children = children.iter().map(|c| c.id).collect();
        n.status = NodeStatus::Decomposed;
    }
    let open_children: Vec<NodeId> = children
        .iter()
        .filter(|c| c.status == NodeStatus::Open)
        .map(|c| c.id)
        .collect();
    if open_children.is_empty() {
        state.close_upwards(children[0].id);
    }
    state.refresh_open_order();
    state.current.focus = open_children
        .first()
        .copied()
        .or_else(|| state.current.open_order.first().copied());
    let target_closed = state.current.nodes[&target].status.is_closed();
    Ok(TacticReport {
        tactic,
        target,
        verdict: None,
        queued: open_children.iter().skip(1).copied().collect(),
        children,
        target_closed,
        complete: state.is_complete(),
    })
}

/// Restores the state before the last state-changing tactic.
pub fn undo(state: &mut ProofState) -> Result<(), EngineError> {
    state.current = state.history.pop().ok_or(EngineError::NothingToUndo)?;
    Ok(())
}

/// Moves the focus to another open goal.
pub fn focus(state: &mut ProofState, id: NodeId) -> Result<(), EngineError> {
    match state.node(id) {
        None => Err(EngineError::UnknownGoal(id)),
        Some(n) if n.status != NodeStatus::Open => Err(EngineError::NotOpen(id)),
        Some(_) => {
            state.current.focus = Some(id);
            Ok(())
        }
    }
}
