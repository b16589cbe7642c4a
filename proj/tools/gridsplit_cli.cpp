#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "gridsplit/gridsplit.h"

namespace {

constexpr int exit_usage = 64;

struct RunConfig {
    std::string case_path;
    std::string zones_path;
    std::string format;
    std::string out_dir;
    bool no_external = false;
    double tolerance = 1e-6;
    int max_iterations = 50;
    bool q_limits = false;
    double loss_margin = 0.03;
    int embedding_dim = 0;
};

struct SessionDeleter {
    void operator()(gs_session* s) const { gs_session_close(s); }
};
using Session = std::unique_ptr<gs_session, SessionDeleter>;

int exit_code(gs_status status) {
    switch (status) {
        case GS_OK: return 0;
        case GS_ERR_INVALID_ARGUMENT:
        case GS_ERR_PARSE:
        case GS_ERR_VALIDATION:
        case GS_ERR_UNSUPPORTED: return 2;
        case GS_ERR_NUMERICAL:
        case GS_ERR_INFEASIBLE: return 3;
        default: return 1;
    }
}

int report_failure(gs_status status) {
    std::cerr << gs_last_error_json() << '\n';
    return exit_code(status);
}

gs_options make_options(const RunConfig& config) {
    gs_options options;
    gs_options_init(&options);
    options.include_external = config.no_external ? 0 : 1;
    options.tolerance = config.tolerance;
    options.max_iterations = config.max_iterations;
    options.enforce_q_limits = config.q_limits ? 1 : 0;
    options.loss_margin = config.loss_margin;
    options.embedding_dim = config.embedding_dim;
    options.format = config.format.empty() ? nullptr : config.format.c_str();
    return options;
}

const char* zones_or_null(const RunConfig& config) {
    return config.zones_path.empty() ? nullptr : config.zones_path.c_str();
}

gs_status open_session(const RunConfig& config, Session& session) {
    const auto options = make_options(config);
    gs_session* raw = nullptr;
    const auto status = gs_session_open(config.case_path.c_str(), zones_or_null(config), &options, &raw);
    session.reset(raw);
    return status;
}

gs_status render(gs_session* session, gs_artifact artifact, std::size_t r, std::size_t island, std::string& text) {
    char* buffer = nullptr;
    std::size_t length = 0;
    const auto status = gs_session_render(session, artifact, r, island, &buffer, &length);
    if (buffer) {
        text.assign(buffer, length);
        gs_string_free(buffer);
    }
    return status;
}

// Prints to stdout, or writes `name` under the output directory.
bool emit(const RunConfig& config, const std::string& name, const std::string& text) {
    if (config.out_dir.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return true;
    }
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    const auto path = std::filesystem::path(config.out_dir) / name;
    std::ofstream file(path, std::ios::binary);
    file << text;
    if (!file) {
        std::cerr << "{\"error\":\"io\",\"message\":\"cannot write " << path.string() << "\"}\n";
        return false;
    }
    return true;
}

struct Artifact {
    gs_artifact kind;
    std::string name;
};

int run_artifacts(const RunConfig& config, std::initializer_list<Artifact> artifacts, std::size_t r = 0) {
    Session session;
    if (const auto status = open_session(config, session); status != GS_OK) return report_failure(status);
    for (const auto& a : artifacts) {
        std::string text;
        const auto status = render(session.get(), a.kind, r, 0, text);
        if (status != GS_OK && status != GS_ERR_INFEASIBLE) return report_failure(status);
        if (!emit(config, a.name, text)) return 2;
        if (status == GS_ERR_INFEASIBLE) return report_failure(status);
    }
    return 0;
}

int run_validate(const RunConfig& config) {
    const auto options = make_options(config);
    char* buffer = nullptr;
    std::size_t length = 0;
    const auto status = gs_validate_case(config.case_path.c_str(), zones_or_null(config), &options, &buffer, &length);
    if (buffer) {
        const std::string text(buffer, length);
        gs_string_free(buffer);
        if (!emit(config, "validation.json", text)) return 2;
    }
    return status == GS_OK ? 0 : report_failure(status);
}

int run_evaluate(const RunConfig& config, std::size_t r, bool export_islands) {
    Session session;
    if (const auto status = open_session(config, session); status != GS_OK) return report_failure(status);
    std::string text;
    const auto status = render(session.get(), GS_ARTIFACT_REPORT, r, 0, text);
    if (status != GS_OK && status != GS_ERR_INFEASIBLE) return report_failure(status);
    if (!emit(config, "report_r" + std::to_string(r) + ".json", text)) return 2;
    if (export_islands && !config.out_dir.empty()) {
        for (std::size_t label = 1; label <= r; ++label) {
            std::string island;
            if (const auto s = render(session.get(), GS_ARTIFACT_ISLAND_CASE, r, label, island); s != GS_OK) {
                return report_failure(s);
            }
            const auto name = "island_r" + std::to_string(r) + "_" + std::to_string(label) + ".json";
            if (!emit(config, name, island)) return 2;
        }
    }
    return status == GS_OK ? 0 : report_failure(status);
}

std::optional<std::size_t> positive_param(const httplib::Request& req, const std::string& key) {
    if (!req.has_param(key)) return std::nullopt;
    const auto value = req.get_param_value(key);
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos || value.size() > 9) {
        return std::nullopt;
    }
    const auto n = std::stoul(value);
    if (n == 0) return std::nullopt;
    return n;
}

// Plain messages only; failures from the library reuse gs_last_error_json().
std::string error_body(gs_status status, const std::string& message) {
    return std::string("{\"error\":\"") + gs_status_name(status) + "\",\"message\":\"" + message + "\"}";
}

void send_error(httplib::Response& res, int code, const std::string& body) {
    res.status = code;
    res.set_content(body, "application/json");
}

int http_status(gs_status status) {
    switch (status) {
        case GS_OK: return 200;
        case GS_ERR_INFEASIBLE: return 422;
        case GS_ERR_NUMERICAL:
        case GS_ERR_INTERNAL: return 500;
        default: return 400;
    }
}

int run_serve(const RunConfig& config, int port, const std::string& host, const std::string& static_dir) {
    if (const char* env = std::getenv("GRIDSPLIT_PORT"); env && *env) {
        try {
            port = std::stoi(env);
        } catch (const std::exception&) {
            std::cerr << "{\"error\":\"invalid_argument\",\"message\":\"GRIDSPLIT_PORT is not a number\"}\n";
            return 2;
        }
    }
    Session session;
    if (const auto status = open_session(config, session); status != GS_OK) return report_failure(status);
    gs_session* s = session.get();

    httplib::Server server;
    auto artifact_route = [s](gs_artifact kind, const char* content_type, bool needs_r, bool sweep) {
        return [=](const httplib::Request& req, httplib::Response& res) {
            std::size_t r = 0;
            if (needs_r) {
                const auto value = positive_param(req, "r");
                if (!value) return send_error(res, 400, error_body(GS_ERR_INVALID_ARGUMENT, "query parameter r must be a positive integer"));
                r = *value;
            }
            gs_artifact artifact = kind;
            const char* type = content_type;
            if (sweep) {
                if (req.has_param("max")) {
                    const auto value = positive_param(req, "max");
                    if (!value) return send_error(res, 400, error_body(GS_ERR_INVALID_ARGUMENT, "query parameter max must be a positive integer"));
                    r = *value;
                } else if (const auto status = gs_session_vertex_count(s, &r); status != GS_OK) {
                    return send_error(res, http_status(status), gs_last_error_json());
                }
                if (req.get_param_value("format") == "json") {
                    artifact = GS_ARTIFACT_SWEEP_JSON;
                    type = "application/json";
                }
            }
            if (kind == GS_ARTIFACT_GRAPH && req.get_param_value("format") == "dot") {
                artifact = GS_ARTIFACT_GRAPH_DOT;
                type = "text/vnd.graphviz";
            }
            std::string text;
            const auto status = render(s, artifact, r, 0, text);
            if (status == GS_OK || (status == GS_ERR_INFEASIBLE && !text.empty())) {
                res.status = http_status(status);
                res.set_content(text, type);
                return;
            }
            send_error(res, http_status(status), gs_last_error_json());
        };
    };

    server.Get("/case/summary", artifact_route(GS_ARTIFACT_CASE_SUMMARY, "application/json", false, false));
    server.Get("/solve", artifact_route(GS_ARTIFACT_SOLUTION, "application/json", false, false));
    server.Get("/graph", artifact_route(GS_ARTIFACT_GRAPH, "application/json", false, false));
    server.Get("/spectral", artifact_route(GS_ARTIFACT_SPECTRAL, "application/json", false, false));
    server.Get("/dendrogram", artifact_route(GS_ARTIFACT_DENDROGRAM, "application/json", false, false));
    server.Get("/plan", artifact_route(GS_ARTIFACT_PLAN, "application/json", true, false));
    server.Get("/evaluate", artifact_route(GS_ARTIFACT_REPORT, "application/json", true, false));
    server.Get("/sweep", artifact_route(GS_ARTIFACT_SWEEP_CSV, "text/csv", false, true));
    server.Post("/recompute", [s](const httplib::Request&, httplib::Response& res) {
        if (const auto status = gs_session_reload(s); status != GS_OK) {
            return send_error(res, http_status(status), gs_last_error_json());
        }
        std::string text;
        if (const auto status = render(s, GS_ARTIFACT_CASE_SUMMARY, 0, 0, text); status != GS_OK) {
            return send_error(res, http_status(status), gs_last_error_json());
        }
        res.set_content(text, "application/json");
    });
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
        std::cerr << "{\"error\":\"invalid_argument\",\"message\":\"static directory not found\"}\n";
        return 2;
    }

    int bound = port;
    if (port == 0) {
        bound = server.bind_to_any_port(host);
    } else if (!server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) {
        std::cerr << "{\"error\":\"io\",\"message\":\"cannot bind " << host << ":" << port << "\"}\n";
        return 2;
    }
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    server.listen_after_bind();
    return 0;
}

void add_case_options(CLI::App* sub, RunConfig& config) {
    sub->add_option("--case", config.case_path, "Network case (.json or MATPOWER .m)")->required();
    sub->add_option("--zones", config.zones_path, "Zone sidecar JSON {bus_id: zone}");
    sub->add_option("--format", config.format, "Case format")->check(CLI::IsMember({"json", "matpower"}));
    sub->add_flag("--no-external", config.no_external, "Drop external zones instead of collapsing them to X");
    sub->add_option("--tol", config.tolerance, "Power-flow mismatch tolerance, p.u.")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", config.max_iterations, "Newton iteration cap")->check(CLI::PositiveNumber);
    sub->add_flag("--q-limits", config.q_limits, "Enforce generator reactive limits");
    sub->add_option("--loss-margin", config.loss_margin, "Island loss reserve as a fraction of load")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("-k,--k", config.embedding_dim, "Embedding dimension (default: eigengap)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", config.out_dir, "Write artifacts into this directory instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridsplit: spectral zone clustering and controlled islanding analysis", "gridsplit"};
    app.set_version_flag("--version", gs_version());
    app.require_subcommand(1);

    RunConfig config;
    std::size_t r = 1;
    std::size_t max_islands = 9;
    bool sweep_json = false;
    bool dot = false;
    bool export_islands = false;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string static_dir;

    auto* validate = app.add_subcommand("validate", "Check a case against the structural invariants");
    auto* solve = app.add_subcommand("solve", "Newton-Raphson power flow of the intact case");
    auto* build_graph = app.add_subcommand("build-graph", "Weighted zone graph from intact tie-line flows");
    auto* spectral = app.add_subcommand("spectral", "Normalized Laplacian spectrum, eigengap k and embedding");
    auto* cluster = app.add_subcommand("cluster", "Connectivity-constrained Ward dendrogram");
    auto* plan = app.add_subcommand("plan", "Islanding plan for r islands");
    auto* evaluate = app.add_subcommand("evaluate", "Redispatch, shed and solve every island of the r-island plan");
    auto* sweep = app.add_subcommand("sweep", "Imbalance, switching count and p for r = 2..max");
    auto* serve = app.add_subcommand("serve", "Local HTTP analysis service");

    for (auto* sub : {validate, solve, build_graph, spectral, cluster, plan, evaluate, sweep, serve}) {
        add_case_options(sub, config);
    }
    build_graph->add_flag("--dot", dot, "Print GraphViz instead of JSON");
    for (auto* sub : {plan, evaluate}) {
        sub->add_option("-r", r, "Number of islands")->required()->check(CLI::PositiveNumber);
    }
    evaluate->add_flag("--export-islands", export_islands, "Also write each island case (needs --out)");
    sweep->add_option("--max-islands", max_islands, "Largest island count")->check(CLI::Range(2, 1000000));
    sweep->add_flag("--json", sweep_json, "Emit gridsplit-sweep/1 JSON instead of CSV");
    serve->add_option("--port", port, "TCP port, 0 picks a free one (GRIDSPLIT_PORT overrides)")
        ->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--static", static_dir, "Directory served at / (explorer UI build)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    if (*validate) return run_validate(config);
    if (*solve) {
        if (config.out_dir.empty()) return run_artifacts(config, {{GS_ARTIFACT_SOLUTION, "solution.json"}});
        return run_artifacts(config, {{GS_ARTIFACT_SOLUTION, "solution.json"},
                                      {GS_ARTIFACT_SOLVE_TRACE, "solve_trace.txt"}});
    }
    if (*build_graph) {
        if (!config.out_dir.empty()) {
            return run_artifacts(config, {{GS_ARTIFACT_GRAPH, "graph.json"}, {GS_ARTIFACT_GRAPH_DOT, "graph.dot"}});
        }
        return run_artifacts(config, {{dot ? GS_ARTIFACT_GRAPH_DOT : GS_ARTIFACT_GRAPH, "graph.json"}});
    }
    if (*spectral) return run_artifacts(config, {{GS_ARTIFACT_SPECTRAL, "spectral.json"}});
    if (*cluster) return run_artifacts(config, {{GS_ARTIFACT_DENDROGRAM, "dendrogram.json"}});
    if (*plan) return run_artifacts(config, {{GS_ARTIFACT_PLAN, "plan_r" + std::to_string(r) + ".json"}}, r);
    if (*evaluate) return run_evaluate(config, r, export_islands);
    if (*sweep) {
        if (sweep_json) return run_artifacts(config, {{GS_ARTIFACT_SWEEP_JSON, "sweep.json"}}, max_islands);
        return run_artifacts(config, {{GS_ARTIFACT_SWEEP_CSV, "sweep.csv"}}, max_islands);
    }
    if (*serve) return run_serve(config, port, host, static_dir);
    std::cerr << app.help();
    return exit_usage;
}
