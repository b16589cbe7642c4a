#include "gridsplit/islanding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <unordered_map>

#include "gridsplit/error.hpp"
#include "json_util.hpp"

namespace gridsplit {

namespace {

constexpr double balance_tolerance_mw = 1e-9;

std::string format_number(const char* pattern, double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, pattern, value);
    return buffer;
}

}  // namespace

std::size_t IslandingPlan::island_of_bus(BusId bus) const {
    for (const auto& island : islands) {
        if (std::ranges::binary_search(island.buses, bus)) return island.label;
    }
    return 0;
}

bool IslandReport::all_dispatch_feasible() const {
    return std::ranges::all_of(islands, [](const IslandEvaluation& e) { return e.dispatch_feasible; });
}

double p_metric(const ZoneGraph& graph, const Partition& partition) {
    if (partition.assignment.size() != graph.order()) {
        throw Error(ErrorKind::invalid_argument, "partition does not cover the graph vertices");
    }
    double inter = 0.0;
    double intra = 0.0;
    for (const auto& e : graph.edges()) {
        (partition.assignment[e.i] == partition.assignment[e.j] ? intra : inter) += e.weight;
    }
    if (inter == 0.0) return 0.0;
    if (intra == 0.0) return std::numeric_limits<double>::infinity();
    return inter / intra;
}

IslandingPlan build_plan(const NetworkCase& network, const ZoneGraph& graph, const Partition& partition) {
    if (partition.assignment.size() != graph.order()) {
        throw Error(ErrorKind::invalid_argument, "partition does not cover the graph vertices");
    }
    IslandingPlan plan;
    plan.partition = partition;
    plan.vertices = graph.vertices();
    plan.islands.resize(partition.r);
    for (std::size_t k = 0; k < partition.r; ++k) plan.islands[k].label = k + 1;
    if (const auto x = graph.index_of(external_vertex)) plan.ei_attached = partition.assignment[*x];

    std::map<ZoneId, std::size_t> label_of_zone;
    for (const auto& zone : ordered_zones(network)) {
        const auto vertex = graph_vertex_of_zone(graph, network, zone);
        if (!vertex) {
            if (network.external_zones.contains(zone)) continue;
            throw Error(ErrorKind::invalid_argument, "zone '" + zone + "' is not a vertex of the zone graph");
        }
        const auto label = partition.assignment[*vertex];
        if (label < 1 || label > partition.r) throw Error(ErrorKind::invalid_argument, "partition label out of range");
        label_of_zone.emplace(zone, label);
        plan.islands[label - 1].zones.push_back(zone);
    }

    std::unordered_map<BusId, std::size_t> island_of;
    for (const auto& bus : network.buses) {
        const auto it = label_of_zone.find(bus.zone);
        if (it == label_of_zone.end()) {
            plan.excluded_buses.push_back(bus.id);
            island_of.emplace(bus.id, 0);
            continue;
        }
        island_of.emplace(bus.id, it->second);
        plan.islands[it->second - 1].buses.push_back(bus.id);
    }
    std::ranges::sort(plan.excluded_buses);
    for (auto& island : plan.islands) std::ranges::sort(island.buses);

    for (const auto& gen : network.generators) {
        if (!gen.in_service) continue;
        if (const auto label = island_of.at(gen.bus)) plan.islands[label - 1].generation_mw += gen.p_gen;
    }
    for (const auto& load : network.loads) {
        if (const auto label = island_of.at(load.bus)) plan.islands[label - 1].load_mw += load.p_load;
    }
    for (auto& island : plan.islands) island.imbalance_mw = island.generation_mw - island.load_mw;

    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        const auto& br = network.branches[b];
        if (!br.in_service || br.is_hvdc) continue;
        if (island_of.at(br.from_bus) != island_of.at(br.to_bus)) plan.cut_lines.push_back(b);
    }
    plan.p = p_metric(graph, partition);
    return plan;
}

std::vector<SweepRow> sweep_metrics(const NetworkCase& network, const ZoneGraph& graph,
                                    const Dendrogram& dendrogram, std::size_t r_max, std::size_t r_min) {
    const std::size_t n = dendrogram.leaf_count();
    if (r_min < 1 || r_max > n || r_min > r_max) {
        throw Error(ErrorKind::invalid_argument, "sweep range must satisfy 1 <= r_min <= r_max <= " +
                                                     std::to_string(n));
    }
    std::vector<SweepRow> rows;
    for (std::size_t r = r_min; r <= r_max; ++r) {
        const auto plan = build_plan(network, graph, cut(dendrogram, r));
        SweepRow row;
        row.r = r;
        for (const auto& island : plan.islands) {
            row.max_imbalance_mw = std::max(row.max_imbalance_mw, std::abs(island.imbalance_mw));
        }
        row.switching_count = plan.cut_lines.size();
        row.p = plan.p;
        rows.push_back(row);
    }
    return rows;
}

RedispatchResult redispatch_and_shed(const NetworkCase& network, const IslandingPlan& plan,
                                     const RedispatchOptions& options) {
    if (!(options.loss_margin >= 0.0)) throw Error(ErrorKind::invalid_argument, "loss margin must be >= 0");
    RedispatchResult result{network, {}};
    std::unordered_map<BusId, std::size_t> island_of;
    for (const auto& island : plan.islands) {
        for (auto bus : island.buses) island_of.emplace(bus, island.label);
    }
    auto label_of = [&island_of](BusId bus) -> std::size_t {
        const auto it = island_of.find(bus);
        return it == island_of.end() ? 0 : it->second;
    };

    for (const auto& island : plan.islands) {
        IslandDispatch dispatch;
        dispatch.label = island.label;
        std::vector<Generator*> gens;
        for (auto& gen : result.network.generators) {
            if (gen.in_service && label_of(gen.bus) == island.label) gens.push_back(&gen);
        }
        std::vector<Load*> loads;
        double load = 0.0;
        double sheddable = 0.0;
        for (auto& l : result.network.loads) {
            if (label_of(l.bus) != island.label) continue;
            loads.push_back(&l);
            load += l.p_load;
            sheddable += std::max(0.0, l.p_load * l.sheddable_fraction);
        }
        double generation = 0.0;
        for (const auto* g : gens) generation += g->p_gen;
        const double target = load * (1.0 + options.loss_margin);
        const double delta = target - generation;

        if (delta < -balance_tolerance_mw) {
            double room = 0.0;
            for (const auto* g : gens) room += std::max(0.0, g->p_gen - g->p_min);
            const double cut_mw = std::min(-delta, room);
            if (room > 0.0) {
                for (auto* g : gens) g->p_gen -= cut_mw * std::max(0.0, g->p_gen - g->p_min) / room;
            }
            dispatch.redispatch_mw = -cut_mw;
            if (-delta > room + balance_tolerance_mw) {
                dispatch.feasible = false;
                dispatch.note = "surplus of " + format_number("%.3f", -delta - room) +
                                " MW exceeds downward generator headroom";
            }
        } else if (delta > balance_tolerance_mw) {
            double room = 0.0;
            for (const auto* g : gens) room += std::max(0.0, g->p_max - g->p_gen);
            const double raise = std::min(delta, room);
            if (room > 0.0) {
                for (auto* g : gens) g->p_gen += raise * std::max(0.0, g->p_max - g->p_gen) / room;
            }
            dispatch.redispatch_mw = raise;
            if (delta > room + balance_tolerance_mw) {
                const double gap = delta - room;
                const double shed = std::min(gap, sheddable);
                if (sheddable > 0.0) {
                    for (auto* l : loads) {
                        const double part = std::max(0.0, l->p_load * l->sheddable_fraction);
                        if (part <= 0.0 || l->p_load == 0.0) continue;
                        const double take = shed * part / sheddable;
                        const double ratio = (l->p_load - take) / l->p_load;
                        l->q_load *= ratio;
                        l->p_load -= take;
                    }
                }
                dispatch.shed_mw = shed;
                if (gap > sheddable + balance_tolerance_mw) {
                    dispatch.feasible = false;
                    dispatch.note = "deficit of " + format_number("%.3f", gap - sheddable) +
                                    " MW remains after shedding all sheddable load";
                }
            }
        }
        result.islands.push_back(std::move(dispatch));
    }
    return result;
}

std::optional<BusId> select_island_slack(const NetworkCase& network, const IslandSummary& island) {
    for (const auto& bus : network.buses) {
        if (bus.kind == BusKind::slack && std::ranges::binary_search(island.buses, bus.id)) return bus.id;
    }
    std::optional<BusId> best;
    double best_p_max = -std::numeric_limits<double>::infinity();
    for (const auto& gen : network.generators) {
        if (!gen.in_service || !std::ranges::binary_search(island.buses, gen.bus)) continue;
        if (gen.p_max > best_p_max || (gen.p_max == best_p_max && gen.bus < *best)) {
            best = gen.bus;
            best_p_max = gen.p_max;
        }
    }
    return best;
}

NetworkCase island_case(const NetworkCase& network, const IslandingPlan& plan, std::size_t label) {
    if (label < 1 || label > plan.islands.size()) {
        throw Error(ErrorKind::invalid_argument, "island label " + std::to_string(label) + " outside [1, " +
                                                     std::to_string(plan.islands.size()) + "]");
    }
    const auto& island = plan.islands[label - 1];
    auto inside = [&island](BusId bus) { return std::ranges::binary_search(island.buses, bus); };
    const auto slack = select_island_slack(network, island);

    NetworkCase out;
    out.base_mva = network.base_mva;
    std::set<ZoneId> zones;
    for (const auto& bus : network.buses) {
        if (!inside(bus.id)) continue;
        Bus copy = bus;
        if (slack && bus.id == *slack) copy.kind = BusKind::slack;
        else if (copy.kind == BusKind::slack) copy.kind = BusKind::pv;
        zones.insert(copy.zone);
        out.buses.push_back(std::move(copy));
    }
    for (const auto& br : network.branches) {
        if (inside(br.from_bus) && inside(br.to_bus)) out.branches.push_back(br);
    }
    for (const auto& gen : network.generators) {
        if (inside(gen.bus)) out.generators.push_back(gen);
    }
    for (const auto& load : network.loads) {
        if (inside(load.bus)) out.loads.push_back(load);
    }
    for (const auto& shunt : network.shunts) {
        if (inside(shunt.bus)) out.shunts.push_back(shunt);
    }
    for (const auto& zone : zones) {
        if (const auto it = network.zone_names.find(zone); it != network.zone_names.end()) {
            out.zone_names.emplace(zone, it->second);
        }
        if (network.external_zones.contains(zone)) out.external_zones.insert(zone);
    }
    return out;
}

namespace {

IslandEvaluation evaluate_island(const NetworkCase& redispatched, const IslandingPlan& plan,
                                 const IslandDispatch& dispatch, const EvaluationOptions& options) {
    IslandEvaluation eval;
    eval.label = dispatch.label;
    eval.redispatch_mw = dispatch.redispatch_mw;
    eval.shed_mw = dispatch.shed_mw;
    eval.dispatch_feasible = dispatch.feasible;
    if (!dispatch.note.empty()) eval.notes.push_back(dispatch.note);

    const NetworkCase sub = island_case(redispatched, plan, dispatch.label);
    eval.slack_bus = select_island_slack(redispatched, plan.islands[dispatch.label - 1]);
    if (!eval.slack_bus) {
        eval.notes.push_back("no in-service generator to act as slack");
        return eval;
    }
    double load = 0.0;
    for (const auto& l : sub.loads) load += l.p_load;
    double scheduled_slack = 0.0;
    for (const auto& gen : sub.generators) {
        if (gen.in_service && gen.bus == *eval.slack_bus) scheduled_slack += gen.p_gen;
    }

    try {
        eval.solution = solve(sub, {}, options.powerflow);
    } catch (const Error& e) {
        eval.notes.push_back(std::string("power flow failed: ") + e.what());
        return eval;
    }
    eval.converged = eval.solution.converged;
    eval.iterations = eval.solution.iterations;
    if (!eval.converged) {
        eval.notes.push_back("power flow did not converge (mismatch " +
                             format_number("%.3g", eval.solution.max_mismatch) + " MW)");
        return eval;
    }

    for (std::size_t i = 0; i < eval.solution.bus_ids.size(); ++i) {
        if (!eval.min_voltage_pu || eval.solution.v_mag[i] < *eval.min_voltage_pu) {
            eval.min_voltage_pu = eval.solution.v_mag[i];
            eval.min_voltage_bus = eval.solution.bus_ids[i];
        }
    }
    eval.slack_residual_mw = eval.solution.slack_injection.real() - scheduled_slack;
    for (std::size_t b = 0; b < sub.branches.size(); ++b) {
        const auto& flow = eval.solution.flows[b];
        if (!flow) continue;
        if (sub.branches[b].rating_mva <= 0.0) {
            ++eval.unscreened_branches;
        } else if (flow->max_apparent() > sub.branches[b].rating_mva) {
            ++eval.overloads;
        }
    }

    const bool voltage_ok = *eval.min_voltage_pu >= options.min_voltage_pu;
    const double residual_bound = options.slack_residual_fraction * load;
    const bool residual_ok = std::abs(eval.slack_residual_mw) < std::max(residual_bound, 1e-6);
    if (!voltage_ok) eval.notes.push_back("minimum voltage below " + format_number("%.2f", options.min_voltage_pu) + " p.u.");
    if (!residual_ok) eval.notes.push_back("slack residual exceeds the configured share of island load");
    if (eval.overloads > 0) eval.notes.push_back(std::to_string(eval.overloads) + " branch overload(s)");
    eval.viable = voltage_ok && residual_ok && eval.overloads == 0 && eval.dispatch_feasible;
    return eval;
}

}  // namespace

IslandReport evaluate(const NetworkCase& network, const IslandingPlan& plan, const EvaluationOptions& options) {
    const auto redispatch = redispatch_and_shed(network, plan, options.redispatch);
    IslandReport report;
    report.r = plan.partition.r;
    report.p = plan.p;
    report.switching_count = plan.cut_lines.size();

    if (options.parallel && redispatch.islands.size() > 1) {
        std::vector<std::future<IslandEvaluation>> jobs;
        for (const auto& dispatch : redispatch.islands) {
            jobs.push_back(std::async(std::launch::async, [&, dispatch] {
                return evaluate_island(redispatch.network, plan, dispatch, options);
            }));
        }
        for (auto& job : jobs) report.islands.push_back(job.get());
    } else {
        for (const auto& dispatch : redispatch.islands) {
            report.islands.push_back(evaluate_island(redispatch.network, plan, dispatch, options));
        }
    }
    return report;
}

std::string to_json(const IslandingPlan& plan, const NetworkCase& network) {
    const auto positions = bus_positions(network);
    detail::Json doc;
    doc["schema"] = "gridsplit-plan/1";
    doc["r"] = plan.partition.r;
    doc["vertices"] = plan.vertices;
    doc["assignment"] = plan.partition.assignment;
    doc["ei_attached"] = plan.ei_attached ? detail::Json(*plan.ei_attached) : detail::Json(nullptr);
    auto islands = detail::Json::array();
    for (const auto& island : plan.islands) {
        islands.push_back({{"label", island.label},
                           {"zones", island.zones},
                           {"buses", island.buses},
                           {"generation_mw", island.generation_mw},
                           {"load_mw", island.load_mw},
                           {"imbalance_mw", island.imbalance_mw}});
    }
    doc["islands"] = std::move(islands);
    auto cuts = detail::Json::array();
    for (auto b : plan.cut_lines) {
        const auto& br = network.branches.at(b);
        cuts.push_back({{"branch", b},
                        {"from_bus", br.from_bus},
                        {"to_bus", br.to_bus},
                        {"from_zone", network.buses[positions.at(br.from_bus)].zone},
                        {"to_zone", network.buses[positions.at(br.to_bus)].zone}});
    }
    doc["cut_lines"] = std::move(cuts);
    doc["switching_count"] = plan.cut_lines.size();
    doc["excluded_buses"] = plan.excluded_buses;
    doc["p"] = detail::number_or_null(plan.p);
    auto findings = detail::Json::array();
    if (std::isinf(plan.p)) {
        findings.push_back({{"code", "p-undefined"},
                            {"message", "no edge weight remains inside any island; p is infinite"}});
    }
    doc["findings"] = std::move(findings);
    return detail::dump(doc);
}

std::string to_json(const IslandReport& report) {
    detail::Json doc;
    doc["schema"] = "gridsplit-report/1";
    doc["r"] = report.r;
    doc["p"] = detail::number_or_null(report.p);
    doc["switching_count"] = report.switching_count;
    doc["all_dispatch_feasible"] = report.all_dispatch_feasible();
    doc["all_viable"] = std::ranges::all_of(report.islands, [](const IslandEvaluation& e) { return e.viable; });
    auto islands = detail::Json::array();
    for (const auto& e : report.islands) {
        detail::Json item;
        item["label"] = e.label;
        item["redispatch_mw"] = e.redispatch_mw;
        item["load_shed_mw"] = e.shed_mw;
        item["dispatch_feasible"] = e.dispatch_feasible;
        item["slack_bus"] = e.slack_bus ? detail::Json(*e.slack_bus) : detail::Json(nullptr);
        item["converged"] = e.converged;
        item["iterations"] = e.iterations;
        item["min_voltage_pu"] = e.min_voltage_pu ? detail::Json(*e.min_voltage_pu) : detail::Json(nullptr);
        item["min_voltage_bus"] = e.min_voltage_bus ? detail::Json(*e.min_voltage_bus) : detail::Json(nullptr);
        item["slack_residual_mw"] = e.slack_residual_mw;
        item["overloads"] = e.overloads;
        item["unscreened_branches"] = e.unscreened_branches;
        item["viable"] = e.viable;
        item["notes"] = e.notes;
        auto buses = detail::Json::array();
        if (e.converged) {
            for (std::size_t i = 0; i < e.solution.bus_ids.size(); ++i) {
                buses.push_back({{"id", e.solution.bus_ids[i]},
                                 {"v_mag", e.solution.v_mag[i]},
                                 {"v_ang_deg", e.solution.v_ang[i] * 180.0 / std::numbers::pi}});
            }
        }
        item["buses"] = std::move(buses);
        islands.push_back(std::move(item));
    }
    doc["islands"] = std::move(islands);
    return detail::dump(doc);
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "r,max_imbalance_mw,switching_count,p\n";
    for (const auto& row : rows) {
        out += std::to_string(row.r) + "," + format_number("%.6f", row.max_imbalance_mw) + "," +
               std::to_string(row.switching_count) + "," +
               (std::isinf(row.p) ? std::string("inf") : format_number("%.9g", row.p)) + "\n";
    }
    return out;
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    detail::Json doc;
    doc["schema"] = "gridsplit-sweep/1";
    auto items = detail::Json::array();
    for (const auto& row : rows) {
        items.push_back({{"r", row.r},
                         {"max_imbalance_mw", row.max_imbalance_mw},
                         {"switching_count", row.switching_count},
                         {"p", detail::number_or_null(row.p)}});
    }
    doc["rows"] = std::move(items);
    return detail::dump(doc);
}

}  // namespace gridsplit
