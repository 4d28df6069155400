#ifndef LIEJET_H
#define LIEJET_H

/* C interface to the liejet engine.
 *
 * Usage pattern: create a system from a JSON document (text or file), tune
 * options, run commands. Every command fills out-parameters with
 * heap-allocated NUL-terminated strings owned by the caller; release each
 * one with lj_string_free. Reports are deterministic JSON (stable field
 * order, no timestamps), so identical inputs give byte-identical text.
 *
 * Return codes: LJ_OK means the command ran and every verdict passed.
 * LJ_CHECK_FAILED means the command ran and produced its report, but at
 * least one verdict failed or the run aborted; the report's "errors" array
 * carries abort messages. The remaining codes mean no report was produced;
 * lj_last_error() describes why.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lj_status {
  LJ_OK = 0,
  LJ_CHECK_FAILED = 1,    /* ran; some verdict failed (report available) */
  LJ_CONFIG_ERROR = 2,    /* malformed or structurally invalid input */
  LJ_RUNTIME_ERROR = 3,   /* evaluation aborted outside a guarded run */
  LJ_INVALID_ARGUMENT = 4 /* null handle/out pointer, bad enum value */
} lj_status;

typedef enum lj_format { LJ_FORMAT_CSV = 0, LJ_FORMAT_JSON = 1 } lj_format;

/* One loaded system description plus run options. Not thread-safe; use one
 * handle per thread. */
typedef struct lj_system lj_system;

const char* lj_version(void);

/* Message for the most recent failing call on this thread; empty string when
 * the last call succeeded. The pointer stays valid until the next call. */
const char* lj_last_error(void);

/* Byte offset into the offending source text for parse errors; SIZE_MAX
 * when not applicable. */
size_t lj_last_error_offset(void);

/* Releases a string returned through any out-parameter. NULL is a no-op. */
void lj_string_free(char* s);

/* ---- system lifecycle --------------------------------------------------- */

lj_status lj_system_create(const char* config_json, lj_system** out);
lj_status lj_system_load(const char* path, lj_system** out);
void lj_system_free(lj_system* sys);

/* Canonical JSON form of the loaded document. */
lj_status lj_system_config(const lj_system* sys, char** config_json);

/* Structure/identity tolerance (default 1e-9). */
lj_status lj_system_set_tol(lj_system* sys, double tol);
/* Seed for every randomized sampling check (default 1). */
lj_status lj_system_set_seed(lj_system* sys, uint64_t seed);
/* Sample count per randomized check (default 100). */
lj_status lj_system_set_samples(lj_system* sys, int samples);

/* ---- commands ----------------------------------------------------------- */

/* Structure checks, morphism conditions, the operator identity suite and
 * the regularity estimate. No integration. */
lj_status lj_run_check(lj_system* sys, char** report_json);

/* Assembles and integrates the configured system. trajectory_text may be
 * NULL when only the report is wanted. */
lj_status lj_run_simulate(lj_system* sys, lj_format format, char** report_json,
                          char** trajectory_text);

/* Reduction workflow over the document's morphism section; the trajectory
 * out-parameter receives the pushed (reduced-side) trajectory. */
lj_status lj_run_reduce(lj_system* sys, lj_format format, char** report_json,
                        char** trajectory_text);

/* Operator identity suite over the catalog algebroids at jet orders 1..3. */
lj_status lj_run_operators(double tol, uint64_t seed, int samples, char** report_json);

/* Bundled scenarios at their recorded tolerances; name NULL or empty runs
 * all of them. */
lj_status lj_run_scenarios(const char* name, char** report_json);

/* ---- catalog ------------------------------------------------------------ */

/* JSON array of bundled scenario names. */
lj_status lj_scenario_names(char** names_json);

/* The config-file equivalent of one bundled scenario. */
lj_status lj_scenario_config(const char* name, char** config_json);

/* ---- rendering ---------------------------------------------------------- */

/* Human-readable rendering of a report produced by any lj_run_* call. */
lj_status lj_report_text(const char* report_json, char** text);

#ifdef __cplusplus
}
#endif

#endif
