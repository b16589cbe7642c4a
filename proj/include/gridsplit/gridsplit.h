/* C interface to the gridsplit islanding toolkit.
 *
 * A session owns one loaded network case plus every derived result (intact
 * power flow, zone graph, spectral report, dendrogram, plans and evaluation
 * reports). Results are computed on first request and cached; a session may
 * be used from several threads at once.
 *
 * Every function returning gs_status records a message retrievable with
 * gs_last_error() on the calling thread when it fails.
 */
#ifndef GRIDSPLIT_H
#define GRIDSPLIT_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef GRIDSPLIT_BUILDING
#    define GS_API __declspec(dllexport)
#  else
#    define GS_API __declspec(dllimport)
#  endif
#else
#  define GS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gs_session gs_session;

typedef enum gs_status {
    GS_OK = 0,
    GS_ERR_INVALID_ARGUMENT = 1, /* null handle, r out of range, bad option */
    GS_ERR_PARSE = 2,
    GS_ERR_VALIDATION = 3,
    GS_ERR_UNSUPPORTED = 4,
    GS_ERR_NUMERICAL = 5,
    GS_ERR_INFEASIBLE = 6,
    GS_ERR_INTERNAL = 7
} gs_status;

typedef enum gs_artifact {
    GS_ARTIFACT_CASE_SUMMARY = 0, /* gridsplit-summary/1 */
    GS_ARTIFACT_CASE = 1,         /* gridsplit-case/1, the loaded case */
    GS_ARTIFACT_VALIDATION = 2,   /* gridsplit-validation/1 */
    GS_ARTIFACT_SOLUTION = 3,     /* gridsplit-pf/1, intact system */
    GS_ARTIFACT_SOLVE_TRACE = 4,  /* plain text iteration trace */
    GS_ARTIFACT_GRAPH = 5,        /* gridsplit-graph/1 */
    GS_ARTIFACT_GRAPH_DOT = 6,    /* GraphViz */
    GS_ARTIFACT_SPECTRAL = 7,     /* gridsplit-spectral/1 */
    GS_ARTIFACT_DENDROGRAM = 8,   /* gridsplit-dendro/1 */
    GS_ARTIFACT_PLAN = 9,         /* gridsplit-plan/1, uses r */
    GS_ARTIFACT_REPORT = 10,      /* gridsplit-report/1, uses r */
    GS_ARTIFACT_SWEEP_CSV = 11,   /* r is the largest island count */
    GS_ARTIFACT_SWEEP_JSON = 12,  /* gridsplit-sweep/1, r as above */
    GS_ARTIFACT_ISLAND_CASE = 13  /* gridsplit-case/1 for island `island` of plan r */
} gs_artifact;

typedef struct gs_options {
    int include_external;    /* collapse external zones to vertex X (default 1) */
    double tolerance;        /* power-flow mismatch tolerance, p.u. (default 1e-6) */
    int max_iterations;      /* Newton iteration cap (default 50) */
    int enforce_q_limits;    /* PV->PQ switching (default 0) */
    double loss_margin;      /* island loss reserve fraction (default 0.03) */
    int embedding_dim;       /* 0 selects k by eigengap */
    const char* format;      /* "json", "matpower" or NULL to infer from extension */
} gs_options;

GS_API const char* gs_version(void);
GS_API const char* gs_status_name(gs_status status);

/* Fills `options` with defaults. */
GS_API void gs_options_init(gs_options* options);

/* Loads and validates a case. `zones_path` may be NULL. */
GS_API gs_status gs_session_open(const char* case_path, const char* zones_path,
                                 const gs_options* options, gs_session** out);

/* Loads a case without opening a session and renders its
 * gridsplit-validation/1 document into `out` (released with gs_string_free).
 * Returns GS_ERR_VALIDATION, still delivering the document, when the case
 * has findings. */
GS_API gs_status gs_validate_case(const char* case_path, const char* zones_path,
                                  const gs_options* options, char** out, size_t* length);

/* Re-reads the case files and drops every cached result. On failure the
 * previous state is kept. */
GS_API gs_status gs_session_reload(gs_session* session);

GS_API void gs_session_close(gs_session* session);

/* Number of zone-graph vertices (builds the graph if needed). */
GS_API gs_status gs_session_vertex_count(gs_session* session, size_t* out);

/* Renders an artifact into a newly allocated NUL-terminated buffer released
 * with gs_string_free. `r` is the island count for plan/report/island-case
 * and the largest island count for sweeps; `island` is the 1-based island
 * label for GS_ARTIFACT_ISLAND_CASE. For GS_ARTIFACT_REPORT a
 * GS_ERR_INFEASIBLE status still delivers the report in `out`. */
GS_API gs_status gs_session_render(gs_session* session, gs_artifact artifact, size_t r,
                                   size_t island, char** out, size_t* length);

GS_API void gs_string_free(char* text);

/* Message of the most recent failure on this thread ("" if none). */
GS_API const char* gs_last_error(void);

/* The same failure as a JSON object {"error": <status name>, "message": ...}. */
GS_API const char* gs_last_error_json(void);

#ifdef __cplusplus
}
#endif

#endif /* GRIDSPLIT_H */
