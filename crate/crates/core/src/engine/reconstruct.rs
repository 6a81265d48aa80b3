use super::{EngineError, NodeId, NodeStatus, ProofState, TacticKind};

/// Renders the closed goal tree as source statements, two spaces per level.
pub fn reconstruct_proof(state: &ProofState) -> Result<String, EngineError> {
    let open = state.open_goals().len();
    if open > 0 {
        return Err(EngineError::OpenGoalsRemain(open));
    }
    let mut out = String::new();
    emit(state, 0, 0, &mut out);
    Ok(out)
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn emit(state: &ProofState, id: NodeId, depth: usize, out: &mut String) {
    let node = state.node(id).expect("node ids in the tree are valid");
    let Some(tactic) = &node.tactic else {
        // auto-discharged leaves need no text
        return;
    };
    let psi = state.render(&tactic.formula);
    let kids = &node.children;
    match tactic.kind {
        TacticKind::Assert => {
            let premise = state.node(kids[0]).unwrap();
            if premise.status == NodeStatus::AutoDischarged {
                line(out, depth, &format!("assert {psi};"));
            } else {
                line(out, depth, &format!("assert {psi} by {{"));
                emit(state, kids[0], depth + 1, out);
                line(out, depth, "}");
            }
            emit(state, kids[1], depth, out);
        }
        TacticKind::Case => {
            line(out, depth, &format!("if ({psi}) {{"));
            emit(state, kids[0], depth + 1, out);
            line(out, depth, "} else {");
            emit(state, kids[1], depth + 1, out);
            line(out, depth, "}");
        }
        TacticKind::Assume => {
            line(out, depth, &format!("assume {psi};"));
            emit(state, kids[1], depth, out);
        }
        TacticKind::Check => unreachable!("check never changes the tree"),
    }
}
