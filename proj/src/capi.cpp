#include "gridsplit/gridsplit.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "gridsplit/error.hpp"
#include "gridsplit/pipeline.hpp"
#include "json_util.hpp"

struct gs_session {
    gridsplit::PipelineConfig config;
    std::mutex mutex;
    std::shared_ptr<gridsplit::Pipeline> pipeline;

    std::shared_ptr<gridsplit::Pipeline> current() {
        std::lock_guard lock(mutex);
        return pipeline;
    }
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_json;

gs_status status_of(gridsplit::ErrorKind kind) {
    using gridsplit::ErrorKind;
    switch (kind) {
        case ErrorKind::invalid_argument: return GS_ERR_INVALID_ARGUMENT;
        case ErrorKind::parse: return GS_ERR_PARSE;
        case ErrorKind::validation: return GS_ERR_VALIDATION;
        case ErrorKind::unsupported: return GS_ERR_UNSUPPORTED;
        case ErrorKind::numerical: return GS_ERR_NUMERICAL;
        case ErrorKind::infeasible: return GS_ERR_INFEASIBLE;
    }
    return GS_ERR_INTERNAL;
}

gs_status fail(gs_status status, const std::string& message) {
    last_error = message;
    gridsplit::detail::Json doc;
    doc["error"] = gs_status_name(status);
    doc["message"] = message;
    last_error_json = doc.dump();
    return status;
}

gs_status succeed() {
    last_error.clear();
    last_error_json.clear();
    return GS_OK;
}

template <typename F>
gs_status guarded(F&& body) {
    try {
        return body();
    } catch (const gridsplit::Error& e) {
        return fail(status_of(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(GS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(GS_ERR_INTERNAL, e.what());
    }
}

gs_status copy_out(const std::string& text, char** out, size_t* length) {
    auto* buffer = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buffer) return fail(GS_ERR_INTERNAL, "out of memory");
    std::memcpy(buffer, text.data(), text.size());
    buffer[text.size()] = '\0';
    *out = buffer;
    if (length) *length = text.size();
    return GS_OK;
}

gridsplit::PipelineConfig make_config(const char* case_path, const char* zones_path, const gs_options* options) {
    gs_options defaults;
    gs_options_init(&defaults);
    const gs_options& o = options ? *options : defaults;
    if (!(o.tolerance > 0.0) || o.max_iterations < 1 || !(o.loss_margin >= 0.0) || o.embedding_dim < 0) {
        throw gridsplit::Error(gridsplit::ErrorKind::invalid_argument,
                               "tolerance and iteration cap must be positive, loss margin and embedding "
                               "dimension non-negative");
    }
    gridsplit::PipelineConfig config;
    config.case_path = case_path;
    if (zones_path) config.zones_path = zones_path;
    if (o.format) config.format = gridsplit::case_format_from_tag(o.format);
    config.include_external = o.include_external != 0;
    if (o.embedding_dim > 0) config.embedding_dim = static_cast<std::size_t>(o.embedding_dim);
    config.evaluation.powerflow.tolerance = o.tolerance;
    config.evaluation.powerflow.max_iterations = o.max_iterations;
    config.evaluation.powerflow.enforce_q_limits = o.enforce_q_limits != 0;
    config.evaluation.redispatch.loss_margin = o.loss_margin;
    return config;
}

}  // namespace

extern "C" {

const char* gs_version(void) { return "1.0.0"; }

const char* gs_status_name(gs_status status) {
    switch (status) {
        case GS_OK: return "ok";
        case GS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case GS_ERR_PARSE: return "parse";
        case GS_ERR_VALIDATION: return "validation";
        case GS_ERR_UNSUPPORTED: return "unsupported";
        case GS_ERR_NUMERICAL: return "numerical";
        case GS_ERR_INFEASIBLE: return "infeasible";
        case GS_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

void gs_options_init(gs_options* options) {
    if (!options) return;
    options->include_external = 1;
    options->tolerance = 1e-6;
    options->max_iterations = 50;
    options->enforce_q_limits = 0;
    options->loss_margin = 0.03;
    options->embedding_dim = 0;
    options->format = nullptr;
}

gs_status gs_session_open(const char* case_path, const char* zones_path, const gs_options* options,
                          gs_session** out) {
    if (!case_path || !out) return fail(GS_ERR_INVALID_ARGUMENT, "case path and output handle are required");
    *out = nullptr;
    return guarded([&] {
        auto session = std::make_unique<gs_session>();
        session->config = make_config(case_path, zones_path, options);
        session->pipeline = std::make_shared<gridsplit::Pipeline>(session->config);
        *out = session.release();
        return succeed();
    });
}

gs_status gs_validate_case(const char* case_path, const char* zones_path, const gs_options* options, char** out,
                           size_t* length) {
    if (!case_path || !out) return fail(GS_ERR_INVALID_ARGUMENT, "case path and output buffer are required");
    *out = nullptr;
    return guarded([&] {
        const auto config = make_config(case_path, zones_path, options);
        const auto format = config.format.value_or(gridsplit::infer_case_format(config.case_path));
        std::vector<std::string> warnings;
        const auto network = gridsplit::load_case(config.case_path, format, config.zones_path, &warnings);
        const auto document = gridsplit::validation_json(network, warnings);
        if (const auto status = copy_out(document, out, length); status != GS_OK) return status;
        if (!gridsplit::validate(network).empty()) {
            return fail(GS_ERR_VALIDATION, "case failed validation");
        }
        return succeed();
    });
}

gs_status gs_session_reload(gs_session* session) {
    if (!session) return fail(GS_ERR_INVALID_ARGUMENT, "null session");
    return guarded([&] {
        auto fresh = std::make_shared<gridsplit::Pipeline>(session->config);
        std::lock_guard lock(session->mutex);
        session->pipeline = std::move(fresh);
        return succeed();
    });
}

void gs_session_close(gs_session* session) { delete session; }

gs_status gs_session_vertex_count(gs_session* session, size_t* out) {
    if (!session || !out) return fail(GS_ERR_INVALID_ARGUMENT, "null session or output");
    return guarded([&] {
        *out = session->current()->graph().order();
        return succeed();
    });
}

gs_status gs_session_render(gs_session* session, gs_artifact artifact, size_t r, size_t island, char** out,
                            size_t* length) {
    if (!session || !out) return fail(GS_ERR_INVALID_ARGUMENT, "null session or output buffer");
    *out = nullptr;
    if (length) *length = 0;
    return guarded([&]() -> gs_status {
        const auto pipeline = session->current();
        std::string text;
        gs_status status = GS_OK;
        switch (artifact) {
            case GS_ARTIFACT_CASE_SUMMARY: text = pipeline->case_summary_json(); break;
            case GS_ARTIFACT_CASE: text = gridsplit::to_json(pipeline->network()); break;
            case GS_ARTIFACT_VALIDATION: text = pipeline->validation_json(); break;
            case GS_ARTIFACT_SOLUTION: text = pipeline->solution_json(); break;
            case GS_ARTIFACT_SOLVE_TRACE: text = pipeline->solve_trace_text(); break;
            case GS_ARTIFACT_GRAPH: text = pipeline->graph_json(); break;
            case GS_ARTIFACT_GRAPH_DOT: text = pipeline->graph_dot(); break;
            case GS_ARTIFACT_SPECTRAL: text = pipeline->spectral_json(); break;
            case GS_ARTIFACT_DENDROGRAM: text = pipeline->dendrogram_json(); break;
            case GS_ARTIFACT_PLAN: text = pipeline->plan_json(r); break;
            case GS_ARTIFACT_REPORT: {
                const auto report = pipeline->report(r);
                text = gridsplit::to_json(*report);
                if (!report->all_dispatch_feasible()) status = GS_ERR_INFEASIBLE;
                break;
            }
            case GS_ARTIFACT_SWEEP_CSV: text = pipeline->sweep_csv(r); break;
            case GS_ARTIFACT_SWEEP_JSON: text = pipeline->sweep_json(r); break;
            case GS_ARTIFACT_ISLAND_CASE: text = pipeline->island_case_json(r, island); break;
            default: return fail(GS_ERR_INVALID_ARGUMENT, "unknown artifact " + std::to_string(artifact));
        }
        if (const auto copied = copy_out(text, out, length); copied != GS_OK) return copied;
        if (status == GS_ERR_INFEASIBLE) {
            return fail(status, "island redispatch is infeasible for r=" + std::to_string(r) +
                                    "; see the report for the affected islands");
        }
        return succeed();
    });
}

void gs_string_free(char* text) { std::free(text); }

const char* gs_last_error(void) { return last_error.c_str(); }

const char* gs_last_error_json(void) { return last_error_json.empty() ? "" : last_error_json.c_str(); }

}  // extern "C"
