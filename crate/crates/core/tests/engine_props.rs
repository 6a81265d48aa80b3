mod support;

use ipm::solver::{locate_solver, start_session, SolverConfig};

#[test]
fn tactic_children_entail_their_parent() {
    let summary = support::engine::soundness(100, 6, None).unwrap();
    assert_eq!(summary.obligations, 100);
    assert!(summary.applications >= 100);
}

#[test]
fn tactic_soundness_confirmed_by_z3() {
    let Some(executable) = locate_solver(None) else {
        eprintln!("SKIP: no SMT solver found");
        return;
    };
    let config = SolverConfig {
        executable,
        ..SolverConfig::default()
    };
    let mut z3 = start_session(&config, &[], &support::xyz_prelude()).unwrap();
    let summary = support::engine::soundness(30, 4, Some(&mut z3)).unwrap();
    assert_eq!(summary.confirmed_by_solver, summary.applications);
}

#[test]
fn undo_and_focus_on_random_sequences() {
    let comparisons = support::engine::undo_focus(50).unwrap();
    assert!(comparisons >= 50);
}
