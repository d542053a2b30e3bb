#ifndef GEOSOLVE_GEOSOLVE_H
#define GEOSOLVE_GEOSOLVE_H

/* C interface to the planar geometry engine: problem parsing, solving
 * with auxiliary-construction search, independent proof checking,
 * problem generation, and difficulty scoring.
 *
 * Conventions:
 *  - All returned char* buffers are owned by the caller and must be
 *    released with gs_string_free.
 *  - Functions return 0 on success; nonzero codes are documented per
 *    function. Optional out-parameters may be NULL.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Shared error codes. Commands with richer exit contracts document the
 * full meaning next to the function. */
#define GS_OK 0
#define GS_FAIL 1           /* well-formed input, negative outcome */
#define GS_ERR_PARSE 2      /* input text failed to parse/validate */
#define GS_ERR_UNREALIZABLE 3 /* no non-degenerate diagram exists */
#define GS_ERR_ARG 4        /* null/invalid argument */
#define GS_ERR_IO 5         /* filesystem failure */

/* Library semantic version, static storage (do not free). */
const char* gs_version(void);

/* Frees any char* returned by this library. NULL is ignored. */
void gs_string_free(char* s);

/* JSON description of the construction catalog: name, arity, signature
 * and emitted fact templates per kind. Never fails. */
char* gs_catalog_json(void);

/* Opaque parsed problem. */
typedef struct gs_problem gs_problem;

/* Parses `.gg` problem text. Returns GS_OK or GS_ERR_PARSE; on error
 * *err (if non-NULL) receives a message. */
int gs_problem_parse(const char* text, gs_problem** out, char** err);
void gs_problem_free(gs_problem* p);

/* Canonical formatting of a parsed problem. */
char* gs_problem_format(const gs_problem* p);

/* Solves a problem with DD saturation plus best-first auxiliary search.
 *
 * opts_json (NULL for defaults) recognizes:
 *   {"max_nodes":int, "max_depth":int, "wall_seconds":num,
 *    "beam_width":int, "lambda":num, "seed":int, "guidance":string}
 * guidance: "" or "heuristic" for built-in, else an endpoint
 * ("http://host:port" or "exec:CMD").
 *
 * Returns: 0 solved, 1 unsolved within budget, 2 parse/config error,
 * 3 unrealizable problem.
 * *report_json: {"solved":bool, "trace":string, "aux_count":int,
 *   "trace_len":int, "nodes":int, "seconds":num, "best_value":num,
 *   "truncated":bool, "message":string}
 */
int gs_solve(const char* problem_text, const char* opts_json,
             char** report_json);

/* Independent proof checker.
 * Returns: 0 valid, 1 invalid, 2 parse error (either input).
 * *result_json: {"status":int, "step":int, "message":string} */
int gs_check(const char* trace_text, const char* problem_text,
             char** result_json);

/* Difficulty score of a checked trace against its problem:
 * score = w1*trace_len + w2*aux_count + w3*distinct_rules +
 *         w4*[symmetric], defaults (1, 5, 2, 3).
 * Returns: 0 ok, 1 trace rejected by the checker, 2 parse error.
 * *result_json: {"score":num, "trace_len":int, "aux_count":int,
 *   "distinct_rules":int, "symmetric":bool} */
int gs_score(const char* problem_text, const char* trace_text,
             char** result_json);

/* Metrics callback for gs_generate; `line` is a plain-text counters
 * line, valid only during the call. */
typedef void (*gs_metrics_cb)(const char* line, void* user);

/* Generates problems (walk, mine, backward-trace, dedup, score) and
 * appends one JSON object per unique triplet to out_path.
 *
 * opts_json (NULL for defaults) recognizes:
 *   {"seed":int, "max_paths":int, "max_triplets":int,
 *    "wall_seconds":num, "epsilon":num, "walk_min":int, "walk_max":int,
 *    "min_trace_len":int, "metrics_every":int, "weights":string}
 * weights: text of `kind weight` lines; empty for uniform defaults.
 *
 * Returns: 0 ok, 2 config error, 3 I/O error.
 * *metrics_json: {"paths":int, "unique_paths":int, "goals":int,
 *   "triplets":int, "duplicates":int, "configurations":int,
 *   "configs_per_path":num} */
int gs_generate(const char* opts_json, const char* out_path,
                gs_metrics_cb metrics_cb, void* user, char** metrics_json);

#ifdef __cplusplus
}
#endif

#endif /* GEOSOLVE_GEOSOLVE_H */
