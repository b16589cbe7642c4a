#include "gridsplit/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "gridsplit/error.hpp"
#include "json_util.hpp"

namespace gridsplit {

namespace {

constexpr double degrees = 180.0 / std::numbers::pi;

}  // namespace

std::string to_json(const PowerFlowSolution& solution, const NetworkCase& network) {
    const auto positions = bus_positions(network);
    detail::Json doc;
    doc["schema"] = "gridsplit-pf/1";
    doc["converged"] = solution.converged;
    doc["iterations"] = solution.iterations;
    doc["max_mismatch_mw"] = solution.max_mismatch;
    doc["slack_bus"] = solution.slack_bus;
    doc["slack_generation"] = {{"p_mw", solution.slack_injection.real()},
                               {"q_mvar", solution.slack_injection.imag()}};
    auto buses = detail::Json::array();
    for (std::size_t i = 0; i < solution.bus_ids.size(); ++i) {
        buses.push_back({{"id", solution.bus_ids[i]},
                         {"zone", network.buses[positions.at(solution.bus_ids[i])].zone},
                         {"v_mag", solution.v_mag[i]},
                         {"v_ang_deg", solution.v_ang[i] * degrees}});
    }
    doc["buses"] = std::move(buses);
    auto branches = detail::Json::array();
    for (std::size_t b = 0; b < solution.flows.size(); ++b) {
        const auto& flow = solution.flows[b];
        if (!flow) continue;
        const auto& br = network.branches.at(b);
        branches.push_back({{"branch", b},
                            {"from_bus", br.from_bus},
                            {"to_bus", br.to_bus},
                            {"hvdc", br.is_hvdc},
                            {"p_from_mw", flow->s_from.real()},
                            {"q_from_mvar", flow->s_from.imag()},
                            {"p_to_mw", flow->s_to.real()},
                            {"q_to_mvar", flow->s_to.imag()},
                            {"max_mva", flow->max_apparent()},
                            {"rating_mva", br.rating_mva}});
    }
    doc["branches"] = std::move(branches);
    doc["switched_to_pq"] = solution.switched_to_pq;
    return detail::dump(doc);
}

std::string case_summary_json(const NetworkCase& network, const std::vector<std::string>& warnings) {
    detail::Json doc;
    doc["schema"] = "gridsplit-summary/1";
    doc["base_mva"] = network.base_mva;
    doc["counts"] = {{"buses", network.buses.size()},
                     {"branches", network.branches.size()},
                     {"generators", network.generators.size()},
                     {"loads", network.loads.size()},
                     {"shunts", network.shunts.size()}};
    const auto positions = bus_positions(network);
    double total_gen = 0.0;
    double total_load = 0.0;
    auto zones = detail::Json::array();
    for (const auto& zone : ordered_zones(network)) {
        std::size_t bus_count = 0;
        for (const auto& bus : network.buses) bus_count += bus.zone == zone ? 1 : 0;
        double gen = 0.0;
        double load = 0.0;
        for (const auto& g : network.generators) {
            if (g.in_service && network.buses[positions.at(g.bus)].zone == zone) gen += g.p_gen;
        }
        for (const auto& l : network.loads) {
            if (network.buses[positions.at(l.bus)].zone == zone) load += l.p_load;
        }
        total_gen += gen;
        total_load += load;
        const auto name = network.zone_names.find(zone);
        zones.push_back({{"id", zone},
                         {"name", name != network.zone_names.end() ? name->second : zone},
                         {"external", network.external_zones.contains(zone)},
                         {"buses", bus_count},
                         {"generation_mw", gen},
                         {"load_mw", load}});
    }
    doc["zones"] = std::move(zones);
    doc["generation_mw"] = total_gen;
    doc["load_mw"] = total_load;
    doc["warnings"] = warnings;
    return detail::dump(doc);
}

std::string validation_json(const NetworkCase& network, const std::vector<std::string>& warnings) {
    const auto findings = validate(network);
    detail::Json doc;
    doc["schema"] = "gridsplit-validation/1";
    doc["valid"] = findings.empty();
    auto items = detail::Json::array();
    for (const auto& f : findings) items.push_back({{"code", f.code}, {"message", f.message}});
    doc["findings"] = std::move(items);
    doc["warnings"] = warnings;
    return detail::dump(doc);
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
    const auto format = config_.format.value_or(infer_case_format(config_.case_path));
    network_ = parse_case(config_.case_path, format, config_.zones_path, &warnings_);
}

const PowerFlowSolution& Pipeline::intact_solution() {
    std::lock_guard lock(mutex_);
    if (!solution_) {
        auto solution = solve(network_, {}, config_.evaluation.powerflow);
        if (!solution.converged) {
            throw Error(ErrorKind::numerical, "intact case did not converge after " +
                                                  std::to_string(solution.iterations) + " iterations");
        }
        solution_ = std::move(solution);
    }
    return *solution_;
}

const ZoneGraph& Pipeline::graph() {
    const auto& solution = intact_solution();
    std::lock_guard lock(mutex_);
    if (!graph_) {
        GraphOptions options;
        options.include_external = config_.include_external;
        graph_ = build_zone_graph(network_, solution.flows, options);
    }
    return *graph_;
}

const SpectralReport& Pipeline::spectral() {
    const auto& g = graph();
    std::lock_guard lock(mutex_);
    if (!spectral_) spectral_ = spectral_analysis(g, config_.embedding_dim);
    return *spectral_;
}

const Dendrogram& Pipeline::dendrogram() {
    const auto& g = graph();
    const auto& s = spectral();
    std::lock_guard lock(mutex_);
    if (!dendrogram_) dendrogram_ = constrained_ward_cluster(s.embedding, g);
    return *dendrogram_;
}

void Pipeline::check_r(std::size_t r) {
    const auto n = graph().order();
    if (r < 1 || r > n) {
        throw Error(ErrorKind::invalid_argument,
                    "r=" + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
    }
}

std::shared_ptr<const IslandingPlan> Pipeline::plan(std::size_t r) {
    check_r(r);
    const auto& g = graph();
    const auto& d = dendrogram();
    std::lock_guard lock(mutex_);
    auto& slot = plans_[r];
    if (!slot) slot = std::make_shared<const IslandingPlan>(build_plan(network_, g, cut(d, r)));
    return slot;
}

std::shared_ptr<const IslandReport> Pipeline::report(std::size_t r) {
    const auto p = plan(r);
    {
        std::lock_guard lock(mutex_);
        if (const auto it = reports_.find(r); it != reports_.end()) return it->second;
    }
    auto computed = std::make_shared<const IslandReport>(evaluate(network_, *p, config_.evaluation));
    std::lock_guard lock(mutex_);
    return reports_.emplace(r, std::move(computed)).first->second;
}

std::string Pipeline::case_summary_json() { return gridsplit::case_summary_json(network_, warnings_); }

std::string Pipeline::validation_json() { return gridsplit::validation_json(network_, warnings_); }

std::string Pipeline::solution_json() { return to_json(intact_solution(), network_); }

std::string Pipeline::solve_trace_text() {
    const auto& solution = intact_solution();
    std::string out;
    char line[128];
    for (const auto& step : solution.trace) {
        std::snprintf(line, sizeof line, "iteration %2d  max mismatch %.6e p.u.\n", step.iteration,
                      step.max_mismatch_pu);
        out += line;
    }
    std::snprintf(line, sizeof line, "converged after %d iterations, slack bus %d\n", solution.iterations,
                  solution.slack_bus);
    out += line;
    return out;
}

std::string Pipeline::graph_json() { return to_json(graph()); }

std::string Pipeline::graph_dot() { return to_dot(graph()); }

std::string Pipeline::spectral_json() { return to_json(spectral()); }

std::string Pipeline::dendrogram_json() { return to_json(dendrogram()); }

std::string Pipeline::plan_json(std::size_t r) { return to_json(*plan(r), network_); }

std::string Pipeline::report_json(std::size_t r) { return to_json(*report(r)); }

std::string Pipeline::sweep_csv(std::size_t r_max) {
    return sweep_to_csv(sweep_metrics(network_, graph(), dendrogram(), r_max));
}

std::string Pipeline::sweep_json(std::size_t r_max) {
    return sweep_to_json(sweep_metrics(network_, graph(), dendrogram(), r_max));
}

std::string Pipeline::island_case_json(std::size_t r, std::size_t label) {
    const auto p = plan(r);
    const auto redispatched = redispatch_and_shed(network_, *p, config_.evaluation.redispatch);
    return to_json(island_case(redispatched.network, *p, label));
}

}  // namespace gridsplit
