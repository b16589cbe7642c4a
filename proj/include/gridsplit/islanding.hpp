#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gridsplit/clustering.hpp"
#include "gridsplit/network.hpp"
#include "gridsplit/powerflow.hpp"
#include "gridsplit/zone_graph.hpp"

namespace gridsplit {

struct IslandSummary {
    std::size_t label = 0;
    std::vector<ZoneId> zones;  // case zones, X expanded to its external zones
    std::vector<BusId> buses;
    double generation_mw = 0.0;  // in-service p_gen before any redispatch
    double load_mw = 0.0;
    double imbalance_mw = 0.0;  // generation - load
};

struct IslandingPlan {
    Partition partition;
    std::vector<ZoneId> vertices;  // graph vertex order the partition refers to
    std::vector<BranchIndex> cut_lines;  // in-service AC branches between islands
    std::vector<IslandSummary> islands;  // islands[label - 1]
    std::optional<std::size_t> ei_attached;  // label of the island holding X
    // External buses when X is not in the graph; they belong to no island and
    // their ties to study zones are cut.
    std::vector<BusId> excluded_buses;
    double p = 0.0;

    std::size_t island_of_bus(BusId bus) const;  // 0 when excluded
};

// Inter-cluster over intra-cluster edge weight. Infinity when nothing stays
// inside a cluster and something is cut; 0 for a single cluster.
double p_metric(const ZoneGraph& graph, const Partition& partition);

IslandingPlan build_plan(const NetworkCase& network, const ZoneGraph& graph,
                         const Partition& partition);

struct SweepRow {
    std::size_t r = 0;
    double max_imbalance_mw = 0.0;
    std::size_t switching_count = 0;
    double p = 0.0;
};

std::vector<SweepRow> sweep_metrics(const NetworkCase& network, const ZoneGraph& graph,
                                    const Dendrogram& dendrogram, std::size_t r_max,
                                    std::size_t r_min = 2);

struct RedispatchOptions {
    double loss_margin = 0.03;
};

struct IslandDispatch {
    std::size_t label = 0;
    double redispatch_mw = 0.0;  // signed; negative is a reduction
    double shed_mw = 0.0;
    bool feasible = true;
    std::string note;
};

struct RedispatchResult {
    NetworkCase network;
    std::vector<IslandDispatch> islands;
};

// Balances every island to load * (1 + loss_margin) by moving generators in
// proportion to their headroom, shedding sheddable load when capacity runs
// out. Generators and loads outside any island are untouched.
RedispatchResult redispatch_and_shed(const NetworkCase& network, const IslandingPlan& plan,
                                     const RedispatchOptions& options = {});

// Slack for an island: the case slack when the island holds it, otherwise the
// in-service generator bus with the largest p_max (lowest id on ties).
std::optional<BusId> select_island_slack(const NetworkCase& network, const IslandSummary& island);

// Standalone case for one island: its buses, internal branches (cut lines and
// ties to other islands removed), generation, load and shunts, with the
// island slack designated and any other slack demoted to PV.
NetworkCase island_case(const NetworkCase& network, const IslandingPlan& plan, std::size_t label);

struct EvaluationOptions {
    RedispatchOptions redispatch;
    PowerFlowOptions powerflow;
    double min_voltage_pu = 0.90;
    double slack_residual_fraction = 0.05;  // of island load
    bool parallel = true;
};

struct IslandEvaluation {
    std::size_t label = 0;
    double redispatch_mw = 0.0;
    double shed_mw = 0.0;
    bool dispatch_feasible = true;
    std::optional<BusId> slack_bus;
    bool converged = false;
    int iterations = 0;
    std::optional<double> min_voltage_pu;  // only for converged islands
    std::optional<BusId> min_voltage_bus;
    double slack_residual_mw = 0.0;
    std::size_t overloads = 0;
    std::size_t unscreened_branches = 0;
    bool viable = false;
    std::vector<std::string> notes;
    PowerFlowSolution solution;
};

struct IslandReport {
    std::size_t r = 0;
    double p = 0.0;
    std::size_t switching_count = 0;
    std::vector<IslandEvaluation> islands;

    bool all_dispatch_feasible() const;
};

IslandReport evaluate(const NetworkCase& network, const IslandingPlan& plan,
                      const EvaluationOptions& options = {});

std::string to_json(const IslandingPlan& plan, const NetworkCase& network);
std::string to_json(const IslandReport& report);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace gridsplit
