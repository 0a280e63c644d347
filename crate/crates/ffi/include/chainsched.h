#ifndef CHAINSCHED_H
#define CHAINSCHED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Arithmetic used by the LP solver.
typedef enum CsMode {
  CS_MODE_RATIONAL = 0,
  CS_MODE_FLOAT = 1,
} CsMode;

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  // A required pointer argument was null.
  CS_STATUS_NULL_ARGUMENT = 1,
  // Input text was not valid UTF-8.
  CS_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON or a field with the wrong shape.
  CS_STATUS_PARSE = 3,
  // Values that parse but describe no valid instance or schedule.
  CS_STATUS_MODEL = 4,
  // The LP has no optimal solution.
  CS_STATUS_INFEASIBLE = 5,
  // The simplex iteration cap was reached.
  CS_STATUS_ITERATION_LIMIT = 6,
  // A bug inside the library; the handle arguments are left untouched.
  CS_STATUS_INTERNAL = 7,
} CsStatus;

// A platform, a load set and an installment plan.
typedef struct CsScenario CsScenario;

// A complete timeline with its fractions and makespan.
typedef struct CsSchedule CsSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a
// success. Owned by the library and valid until the next call.
const char *cs_last_error_message(void);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cs_string_free(char *s);

// Parses a scenario document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum CsStatus cs_scenario_from_json(const char *json, struct CsScenario **out);

// Replaces the installment plan: `q[n]` installments for load `n`.
//
// # Safety
// `q` must point to `len` readable values.
enum CsStatus cs_scenario_set_installments(struct CsScenario *scenario,
                                           const size_t *q,
                                           size_t len);

// Number of processors and number of loads.
//
// # Safety
// Pointers must be valid; either output may be null.
enum CsStatus cs_scenario_shape(const struct CsScenario *scenario,
                                size_t *processors,
                                size_t *loads);

// # Safety
// `scenario` must come from this library and not have been freed.
void cs_scenario_free(struct CsScenario *scenario);

// Solves the makespan LP for the scenario's plan.
//
// # Safety
// `scenario` must be a live handle and `out` writable.
enum CsStatus cs_solve(const struct CsScenario *scenario,
                       enum CsMode mode,
                       struct CsSchedule **out);

// Parses a schedule document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum CsStatus cs_schedule_from_json(const char *json, struct CsSchedule **out);

// The schedule as JSON, in the same layout the CLI writes.
//
// # Safety
// `schedule` must be a live handle and `out` writable.
enum CsStatus cs_schedule_to_json(const struct CsSchedule *schedule, char **out);

// Exact makespan as `p/q` text, and optionally its nearest double.
//
// # Safety
// `schedule` must be a live handle; `exact` and `approx` may be null.
enum CsStatus cs_schedule_makespan(const struct CsSchedule *schedule, char **exact, double *approx);

// # Safety
// `schedule` must come from this library and not have been freed.
void cs_schedule_free(struct CsSchedule *schedule);

// Checks the schedule against every constraint family. `feasible` gets 1
// or 0. When `report` is non-null it receives the full JSON report.
// `tolerance` of 0 means exact comparison.
//
// # Safety
// Handles must be live; `feasible` writable; `report` may be null.
enum CsStatus cs_validate(const struct CsScenario *scenario,
                          const struct CsSchedule *schedule,
                          double tolerance,
                          int32_t *feasible,
                          char **report);

// Library version, static.
const char *cs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINSCHED_H */
