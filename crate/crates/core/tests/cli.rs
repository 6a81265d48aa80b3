mod support;

use std::io::Write;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use ipm::solver::locate_solver;

fn ipm(args: &[&str], stdin: &str, solver: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipm"));
    cmd.args(args)
        .env_remove("IPM_SOLVER")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(s) = solver {
        cmd.arg("--solver").arg(s);
    }
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A stand-in solver that never proves anything.
fn stubborn_solver(dir: &Path) -> PathBuf {
    let path = dir.join("stubborn-solver");
    std::fs::write(
        &path,
        "#!/bin/sh\nwhile IFS= read -r line; do\n  case \"$line\" in\n    \
         *check-sat*) echo unknown ;;\n    \
         *reason-unknown*) echo '(:reason-unknown \"incomplete\")' ;;\n    \
         *) echo success ;;\n  esac\ndone\n",
    )
    .unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn triangle() -> String {
    support::fixture("triangle_sum_even.smt2").display().to_string()
}

#[test]
fn quit_with_open_goals_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let solver = stubborn_solver(dir.path());
    let out = ipm(&[&triangle()], ":help\ncase (x % 2) == 0\n:quit\n", Some(&solver));
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("1 goal(s) remaining\ncurrent goal:\nhypotheses\ngoal\n   (((x * (x + 1)) % 2) == 0)\n> "), "{text}");
    assert!(text.contains("undo               revert"));
    assert!(text.contains("goal 2 is: (((x * (x + 1)) % 2) == 0)"));
}

#[test]
fn end_of_input_exits_one_and_echoes_commands() {
    let dir = tempfile::tempdir().unwrap();
    let solver = stubborn_solver(dir.path());
    let out = ipm(&[&triangle()], "check x > 0\n", Some(&solver));
    assert_eq!(out.status.code(), Some(1));
    // stdin is a pipe, so commands are echoed after the prompt
    assert!(stdout(&out).contains("> check x > 0\nNo, Z3 cannot prove x > 0\n"), "{}", stdout(&out));
}

#[test]
fn script_file_is_read_instead_of_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let solver = stubborn_solver(dir.path());
    let script = dir.path().join("s.ipm");
    std::fs::write(&script, "assume false\n").unwrap();
    let out = ipm(&[&triangle(), "--script", script.to_str().unwrap()], "", Some(&solver));
    // the stand-in never proves anything, so the assumed branch stays open
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("> assume false\n1 goal(s) remaining\n"), "{}", stdout(&out));
}

#[test]
fn missing_solver_is_an_input_error() {
    let out = ipm(&[&triangle()], "", Some(Path::new("/nonexistent/z3")));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/z3"), "{}", stderr(&out));
}

#[test]
fn missing_toolchain_names_the_binary_and_the_bypass() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.dfy");
    std::fs::copy(support::fixture("triangle_sum_even.dfy"), &src).unwrap();
    let out = ipm(&[src.to_str().unwrap(), "--dafny-cmd", "no-such-dafny {input} {output}"], "", None);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("no-such-dafny") && err.contains("--dafny-cmd") && err.contains("--from-smt"), "{err}");
    assert!(dir.path().join("t.ipm.dfy").exists());
}

#[test]
fn source_without_targets_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.dfy");
    std::fs::copy(support::fixture("placeholder.dfy"), &src).unwrap();
    std::fs::copy(support::fixture("triangle_sum_even.stock.smt2"), dir.path().join("p.smt2")).unwrap();
    let out = ipm(&[src.to_str().unwrap(), "--from-smt"], "", None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no {:ipm} proof targets"), "{}", stderr(&out));
}

#[test]
fn source_with_from_smt_and_emit_path() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.dfy");
    std::fs::copy(support::fixture("triangle_sum_even.dfy"), &src).unwrap();
    std::fs::copy(support::fixture("triangle_sum_even.smt2"), dir.path().join("t.smt2")).unwrap();
    let emitted = dir.path().join("out.dfy");
    let solver = stubborn_solver(dir.path());
    let out = ipm(
        &[src.to_str().unwrap(), "--from-smt", "--emit-instrumented", emitted.to_str().unwrap()],
        "",
        Some(&solver),
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(std::fs::read_to_string(&emitted).unwrap().contains("_protectToProve("));
}

#[test]
fn trace_records_the_solver_conversation() {
    let dir = tempfile::tempdir().unwrap();
    let solver = stubborn_solver(dir.path());
    let trace = dir.path().join("trace.smt2");
    let out = ipm(&[&triangle(), "--trace-smt", trace.to_str().unwrap()], "", Some(&solver));
    assert_eq!(out.status.code(), Some(1));
    let log = std::fs::read_to_string(&trace).unwrap();
    assert!(log.contains("(check-sat)") && log.contains("smt.mbqi"), "{log}");
}

#[test]
fn triangle_proof_with_z3() {
    let Some(z3) = locate_solver(None) else {
        eprintln!("SKIP: no SMT solver found");
        return;
    };
    let script = support::TRIANGLE_SCRIPT.join("\n") + "\n";
    let out = ipm(&[&triangle(), "--timeout-ms", "1000"], &script, Some(&z3));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let proof = text.split("Proof:\n").nth(1).unwrap();
    assert_eq!(proof, support::TRIANGLE_PROOF);
    assert!(text.contains("Congrats, current goal proved.\nGoal: (((x * (x + 1)) % 2) == 0)\nProof:\n"));
}

#[test]
fn assume_false_is_accepted_with_a_warning() {
    let Some(z3) = locate_solver(None) else {
        eprintln!("SKIP: no SMT solver found");
        return;
    };
    let out = ipm(&[&triangle()], "assume false\n", Some(&z3));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("Proof:\nassume false;\nWARNING: proof uses assume\n"), "{}", stdout(&out));
}
