//! C interface to the interactive proof mode.
//!
//! Sessions are opaque handles. Every fallible call returns an [`IpmStatus`];
//! on failure, [`ipm_last_error`] describes what went wrong on the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and must be released with [`ipm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::time::Duration;

use ipm::api::ApiSession;
use ipm::dafny::instrument;
use ipm::pipeline::targets_from_smt;
use ipm::prover::Prover;
use ipm::repl::{execute_line, opening, render_state};
use ipm::solver::{locate_solver, start_session, FakeMode, FakeSolver, Session, SolverConfig};

/// Result codes shared by every function that can fail.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The SMT-LIB script or source program could not be used.
    InputError = 3,
    /// The solver could not be found, started or kept alive.
    SolverError = 4,
    /// The command was rejected; the session is unchanged.
    CommandError = 5,
    /// The proof is not finished yet.
    OpenGoals = 6,
    /// An internal error; the session should be discarded.
    Panic = 7,
}

/// A proof session over one target of an SMT-LIB script.
pub struct IpmSession {
    api: ApiSession,
    finished: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: IpmStatus, message: impl Into<String>) -> IpmStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> IpmStatus) -> IpmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(IpmStatus::Panic, "internal error"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, IpmStatus> {
    if p.is_null() {
        return Err(fail(IpmStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(IpmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> IpmStatus {
    match CString::new(s.replace('\0', " ")) {
        Ok(c) => {
            *out = c.into_raw();
            IpmStatus::Ok
        }
        Err(_) => fail(IpmStatus::Panic, "string contains NUL"),
    }
}

unsafe fn session_mut<'a>(s: *mut IpmSession) -> Result<&'a mut IpmSession, IpmStatus> {
    s.as_mut()
        .ok_or_else(|| fail(IpmStatus::NullArgument, "session is null"))
}

unsafe fn open(
    smt: *const c_char,
    target_index: usize,
    timeout_ms: u32,
    out: *mut *mut IpmSession,
    connect: impl FnOnce(&ipm::pipeline::PipelineOutput) -> Result<Session, String>,
) -> IpmStatus {
    if out.is_null() {
        return fail(IpmStatus::NullArgument, "out is null");
    }
    *out = ptr::null_mut();
    let smt = match text(smt, "smt") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let input = match targets_from_smt(smt) {
        Ok(i) => i,
        Err(e) => return fail(IpmStatus::InputError, e.to_string()),
    };
    let Some(target) = input.targets.get(target_index) else {
        return fail(
            IpmStatus::InputError,
            format!("target {target_index} out of range ({} targets)", input.targets.len()),
        );
    };
    let session = match connect(&input) {
        Ok(s) => s,
        Err(e) => return fail(IpmStatus::SolverError, e),
    };
    let timeout = Duration::from_millis(u64::from(timeout_ms.max(1)));
    match Prover::start(target, session, timeout) {
        Ok(prover) => {
            *out = Box::into_raw(Box::new(IpmSession {
                api: ApiSession::new(prover),
                finished: false,
            }));
            IpmStatus::Ok
        }
        Err(e) => fail(IpmStatus::SolverError, e.to_string()),
    }
}

/// Opens a session on target `target_index` of an instrumented SMT-LIB
/// script, backed by an external solver. `solver` may be null to use
/// `$IPM_SOLVER` or `z3` on the PATH.
///
/// # Safety
/// `smt` must be a NUL-terminated string, `solver` null or NUL-terminated,
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_open(
    smt: *const c_char,
    solver: *const c_char,
    target_index: usize,
    timeout_ms: u32,
    out: *mut *mut IpmSession,
) -> IpmStatus {
    guard(|| {
        let explicit = if solver.is_null() {
            None
        } else {
            match text(solver, "solver") {
                Ok(s) => Some(PathBuf::from(s)),
                Err(st) => return st,
            }
        };
        open(smt, target_index, timeout_ms, out, |input| {
            let executable = locate_solver(explicit.as_deref()).ok_or("SMT solver not found")?;
            let config = SolverConfig {
                executable,
                per_query_timeout: Duration::from_millis(u64::from(timeout_ms.max(1))),
                ..SolverConfig::default()
            };
            start_session(&config, &input.options, &input.prelude).map_err(|e| e.to_string())
        })
    })
}

/// Opens a session backed by the built-in checker, which decides goals by
/// exhaustive search over integers in `[-bound, bound]`. Meant for tests
/// and demos that must run without an external solver.
///
/// # Safety
/// As for [`ipm_session_open`].
#[no_mangle]
pub unsafe extern "C" fn ipm_session_open_builtin(
    smt: *const c_char,
    bound: u32,
    target_index: usize,
    out: *mut *mut IpmSession,
) -> IpmStatus {
    guard(|| {
        open(smt, target_index, 1000, out, |input| {
            let (factory, _) = FakeSolver::factory(FakeMode::Oracle {
                bound: i64::from(bound),
            });
            Session::start(factory, &SolverConfig::default(), &input.options, &input.prelude)
                .map_err(|e| e.to_string())
        })
    })
}

/// Releases a session and its solver. Null is ignored.
///
/// # Safety
/// `session` must come from an open function and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_free(session: *mut IpmSession) {
    if !session.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(session))));
    }
}

/// Runs one REPL command line (`case …`, `undo`, `focus 2`, …) and returns
/// the text the REPL would print. A rejected command yields
/// `CommandError` and the same text; `finished` (nullable) is set to 1 once
/// the proof is complete or the user quit.
///
/// # Safety
/// `session` must be live, `line` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_command(
    session: *mut IpmSession,
    line: *const c_char,
    out: *mut *mut c_char,
    finished: *mut i32,
) -> IpmStatus {
    guard(|| {
        let s = match session_mut(session) {
            Ok(s) => s,
            Err(st) => return st,
        };
        if out.is_null() {
            return fail(IpmStatus::NullArgument, "out is null");
        }
        let line = match text(line, "line") {
            Ok(l) => l,
            Err(st) => return st,
        };
        let step = execute_line(s.api.prover_mut(), line);
        if step.outcome.is_some() {
            s.finished = true;
        }
        if !finished.is_null() {
            *finished = i32::from(s.finished || s.api.prover().state().is_complete());
        }
        let rejected = step.text.starts_with("error: ");
        if rejected {
            set_error(step.text.trim_start_matches("error: ").trim_end());
        }
        let status = give_string(out, step.text);
        if status == IpmStatus::Ok && rejected {
            IpmStatus::CommandError
        } else {
            status
        }
    })
}

/// The text shown before the first prompt: the goal display, or the
/// finished proof when the solver needed no help.
///
/// # Safety
/// `session` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_opening(session: *mut IpmSession, out: *mut *mut c_char) -> IpmStatus {
    guard(|| match session_mut(session) {
        Ok(_) if out.is_null() => fail(IpmStatus::NullArgument, "out is null"),
        Ok(s) => give_string(out, opening(s.api.prover()).text),
        Err(st) => st,
    })
}

/// The current goal display, as the REPL prints it.
///
/// # Safety
/// `session` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_render(session: *mut IpmSession, out: *mut *mut c_char) -> IpmStatus {
    guard(|| match session_mut(session) {
        Ok(_) if out.is_null() => fail(IpmStatus::NullArgument, "out is null"),
        Ok(s) => give_string(out, render_state(s.api.prover().state())),
        Err(st) => st,
    })
}

/// Handles one JSON protocol request and returns the JSON reply.
///
/// # Safety
/// `session` must be live, `request` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_handle_json(
    session: *mut IpmSession,
    request: *const c_char,
    out: *mut *mut c_char,
) -> IpmStatus {
    guard(|| {
        let s = match session_mut(session) {
            Ok(s) => s,
            Err(st) => return st,
        };
        if out.is_null() {
            return fail(IpmStatus::NullArgument, "out is null");
        }
        let request = match text(request, "request") {
            Ok(r) => r,
            Err(st) => return st,
        };
        let answer = s.api.handle_line(request);
        give_string(out, answer.to_string())
    })
}

/// Number of goals still open.
///
/// # Safety
/// `session` must be live and `count` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_open_goals(session: *mut IpmSession, count: *mut usize) -> IpmStatus {
    guard(|| match session_mut(session) {
        Ok(_) if count.is_null() => fail(IpmStatus::NullArgument, "count is null"),
        Ok(s) => {
            *count = s.api.prover().state().open_goals().len();
            IpmStatus::Ok
        }
        Err(st) => st,
    })
}

/// The reconstructed proof; `OpenGoals` while goals remain. `tainted`
/// (nullable) is set to 1 when the proof relies on `assume`.
///
/// # Safety
/// `session` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_session_proof(
    session: *mut IpmSession,
    out: *mut *mut c_char,
    tainted: *mut i32,
) -> IpmStatus {
    guard(|| {
        let s = match session_mut(session) {
            Ok(s) => s,
            Err(st) => return st,
        };
        if out.is_null() {
            return fail(IpmStatus::NullArgument, "out is null");
        }
        let prover = s.api.prover();
        match prover.proof() {
            Ok(proof) => {
                if !tainted.is_null() {
                    *tainted = i32::from(prover.state().tainted());
                }
                give_string(out, proof)
            }
            Err(e) => fail(IpmStatus::OpenGoals, e.to_string()),
        }
    })
}

/// Instruments a source program for interactive proof.
///
/// # Safety
/// `source` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ipm_instrument(source: *const c_char, out: *mut *mut c_char) -> IpmStatus {
    guard(|| {
        if out.is_null() {
            return fail(IpmStatus::NullArgument, "out is null");
        }
        let source = match text(source, "source") {
            Ok(s) => s,
            Err(st) => return st,
        };
        match instrument(source) {
            Ok(program) => give_string(out, program),
            Err(e) => fail(IpmStatus::InputError, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ipm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The last error on this thread, or null. Valid until the next call into
/// this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn ipm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The library version as a static string.
#[no_mangle]
pub extern "C" fn ipm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
