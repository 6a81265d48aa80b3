#ifndef IPM_H
#define IPM_H

/* Generated from src/lib.rs by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by every function that can fail.
 */
typedef enum IpmStatus {
  IPM_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  IPM_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  IPM_STATUS_INVALID_UTF8 = 2,
  /*
   The SMT-LIB script or source program could not be used.
   */
  IPM_STATUS_INPUT_ERROR = 3,
  /*
   The solver could not be found, started or kept alive.
   */
  IPM_STATUS_SOLVER_ERROR = 4,
  /*
   The command was rejected; the session is unchanged.
   */
  IPM_STATUS_COMMAND_ERROR = 5,
  /*
   The proof is not finished yet.
   */
  IPM_STATUS_OPEN_GOALS = 6,
  /*
   An internal error; the session should be discarded.
   */
  IPM_STATUS_PANIC = 7,
} IpmStatus;

/*
 A proof session over one target of an SMT-LIB script.
 */
typedef struct IpmSession IpmSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Opens a session on target `target_index` of an instrumented SMT-LIB
 script, backed by an external solver. `solver` may be null to use
 `$IPM_SOLVER` or `z3` on the PATH.

 # Safety
 `smt` must be a NUL-terminated string, `solver` null or NUL-terminated,
 and `out` a valid pointer.
 */
enum IpmStatus ipm_session_open(const char *smt,
                                const char *solver,
                                uintptr_t target_index,
                                uint32_t timeout_ms,
                                struct IpmSession **out);

/*
 Opens a session backed by the built-in checker, which decides goals by
 exhaustive search over integers in `[-bound, bound]`. Meant for tests
 and demos that must run without an external solver.

 # Safety
 As for [`ipm_session_open`].
 */
enum IpmStatus ipm_session_open_builtin(const char *smt,
                                        uint32_t bound,
                                        uintptr_t target_index,
                                        struct IpmSession **out);

/*
 Releases a session and its solver. Null is ignored.

 # Safety
 `session` must come from an open function and not be used afterwards.
 */
void ipm_session_free(struct IpmSession *session);

/*
 Runs one REPL command line (`case …`, `undo`, `focus 2`, …) and returns
 the text the REPL would print. A rejected command yields
 `CommandError` and the same text; `finished` (nullable) is set to 1 once
 the proof is complete or the user quit.

 # Safety
 `session` must be live, `line` NUL-terminated, `out` valid.
 */
enum IpmStatus ipm_session_command(struct IpmSession *session,
                                   const char *line,
                                   char **out,
                                   int32_t *finished);

/*
 The text shown before the first prompt: the goal display, or the
 finished proof when the solver needed no help.

 # Safety
 `session` must be live and `out` valid.
 */
enum IpmStatus ipm_session_opening(struct IpmSession *session, char **out);

/*
 The current goal display, as the REPL prints it.

 # Safety
 `session` must be live and `out` valid.
 */
enum IpmStatus ipm_session_render(struct IpmSession *session, char **out);

/*
 Handles one JSON protocol request and returns the JSON reply.

 # Safety
 `session` must be live, `request` NUL-terminated, `out` valid.
 */
enum IpmStatus ipm_session_handle_json(struct IpmSession *session, const char *request, char **out);

/*
 Number of goals still open.

 # Safety
 `session` must be live and `count` valid.
 */
enum IpmStatus ipm_session_open_goals(struct IpmSession *session, uintptr_t *count);

/*
 The reconstructed proof; `OpenGoals` while goals remain. `tainted`
 (nullable) is set to 1 when the proof relies on `assume`.

 # Safety
 `session` must be live and `out` valid.
 */
enum IpmStatus ipm_session_proof(struct IpmSession *session, char **out, int32_t *tainted);

/*
 Instruments a source program for interactive proof.

 # Safety
 `source` must be NUL-terminated and `out` valid.
 */
enum IpmStatus ipm_instrument(const char *source, char **out);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void ipm_string_free(char *s);

/*
 The last error on this thread, or null. Valid until the next call into
 this library on the same thread; do not free.
 */
const char *ipm_last_error(void);

/*
 The library version as a static string.
 */
const char *ipm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPM_H */
