#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "gridsplit/error.hpp"
#include "gridsplit/islanding.hpp"
#include "gridsplit/spectral.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace gridsplit;
using gridsplit::testing::data_dir;
using gridsplit::testing::Rng;
using Catch::Matchers::WithinAbs;

namespace {

// One zone, slack generator at bus 1, load at bus 2.
NetworkCase single_island(double p_gen, double p_max, double p_load) {
    auto network = gridsplit::testing::two_bus_case(0.05, 0.0);
    network.generators[0].p_gen = p_gen;
    network.generators[0].p_min = 0.0;
    network.generators[0].p_max = p_max;
    network.loads[0].p_load = p_load;
    network.loads[0].q_load = 30.0;
    return network;
}

IslandingPlan whole_case_plan(const NetworkCase& network) {
    const ZoneGraph graph({"1"}, {});
    return build_plan(network, graph, Partition{1, {1}});
}

struct Chain {
    NetworkCase network;
    ZoneGraph graph;
    Dendrogram dendrogram;
};

Chain chain_for(NetworkCase network) {
    const auto solution = solve(network);
    auto graph = build_zone_graph(network, branch_flows(solution, network));
    auto dendrogram = constrained_ward_cluster(spectral_analysis(graph).embedding, graph);
    return {std::move(network), std::move(graph), std::move(dendrogram)};
}

Chain case118() {
    return chain_for(parse_case(data_dir() / "case118.m", CaseFormat::matpower, data_dir() / "case118_zones.json"));
}

}  // namespace

TEST_CASE("p metric on a weighted triangle", "[islanding]") {
    const ZoneGraph graph({"a", "b", "c"}, {{0, 1, 5.0}, {1, 2, 0.5}, {0, 2, 0.5}});
    CHECK_THAT(p_metric(graph, {2, {1, 1, 2}}), WithinAbs(0.2, 1e-15));
    CHECK(p_metric(graph, {1, {1, 1, 1}}) == 0.0);
    CHECK(std::isinf(p_metric(graph, {3, {1, 2, 3}})));
    CHECK_THROWS_AS(p_metric(graph, {2, {1, 2}}), Error);
}

TEST_CASE("p metric matches the dense matrix oracle", "[islanding]") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto n = 3 + rng.index(20);
        const auto graph = gridsplit::testing::random_connected_graph(rng, n, 0.2);
        const auto d = constrained_ward_cluster(spectral_analysis(graph).embedding, graph);
        for (std::size_t r = 1; r < n; ++r) {
            const auto partition = cut(d, r);
            const double expected = gridsplit::testing::p_by_matrix(graph, partition);
            CHECK_THAT(p_metric(graph, partition), WithinAbs(expected, 1e-12 * std::max(1.0, expected)));
        }
    }
}

TEST_CASE("p metric never decreases along the dendrogram", "[islanding]") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = 4 + rng.index(25);
        const auto graph = gridsplit::testing::random_connected_graph(rng, n, 0.25);
        const auto d = constrained_ward_cluster(spectral_analysis(graph).embedding, graph);
        double previous = 0.0;
        for (std::size_t r = 1; r <= n; ++r) {
            const double p = p_metric(graph, cut(d, r));
            CHECK(p >= previous);
            previous = p;
        }
    }
}

TEST_CASE("plan metrics agree with an independent recount", "[islanding]") {
    const auto chain = case118();
    for (std::size_t r = 1; r <= chain.graph.order(); ++r) {
        const auto partition = cut(chain.dendrogram, r);
        const auto plan = build_plan(chain.network, chain.graph, partition);
        const auto oracle = gridsplit::testing::recount(chain.network, chain.graph, partition);
        CHECK(plan.cut_lines.size() == oracle.switching_count);
        double worst = 0.0;
        for (std::size_t i = 0; i < plan.islands.size(); ++i) {
            CHECK_THAT(plan.islands[i].imbalance_mw, WithinAbs(oracle.island_imbalance_mw[i], 1e-9));
            worst = std::max(worst, std::abs(plan.islands[i].imbalance_mw));
        }
        CHECK_THAT(worst, WithinAbs(oracle.max_imbalance_mw, 1e-9));
    }
}

TEST_CASE("opening the cut set leaves exactly r bus components", "[islanding]") {
    const auto chain = case118();
    for (std::size_t r = 1; r <= chain.graph.order(); ++r) {
        const auto plan = build_plan(chain.network, chain.graph, cut(chain.dendrogram, r));
        const std::set<BranchIndex> removed(plan.cut_lines.begin(), plan.cut_lines.end());
        const auto components = gridsplit::testing::bus_components(chain.network, removed);
        REQUIRE(components.size() == r);
        for (const auto& island : plan.islands) {
            const std::set<BusId> buses(island.buses.begin(), island.buses.end());
            CHECK(std::ranges::find(components, buses) != components.end());
        }
    }
}

TEST_CASE("island totals conserve the case totals", "[islanding]") {
    const auto chain = case118();
    double load = 0.0;
    double generation = 0.0;
    for (const auto& l : chain.network.loads) load += l.p_load;
    for (const auto& g : chain.network.generators) generation += g.in_service ? g.p_gen : 0.0;
    for (std::size_t r = 1; r <= chain.graph.order(); ++r) {
        const auto plan = build_plan(chain.network, chain.graph, cut(chain.dendrogram, r));
        double island_load = 0.0;
        double island_generation = 0.0;
        std::size_t buses = 0;
        for (const auto& island : plan.islands) {
            island_load += island.load_mw;
            island_generation += island.generation_mw;
            buses += island.buses.size();
        }
        CHECK_THAT(island_load, WithinAbs(load, 1e-6));
        CHECK_THAT(island_generation, WithinAbs(generation, 1e-6));
        CHECK(buses == chain.network.buses.size());
    }
}

TEST_CASE("a single island is the whole case", "[islanding]") {
    const auto network = parse_case(data_dir() / "toy2zone.json", CaseFormat::native_json);
    const auto chain = chain_for(network);
    const auto plan = build_plan(network, chain.graph, cut(chain.dendrogram, 1));
    CHECK(plan.cut_lines.empty());
    CHECK(plan.p == 0.0);
    REQUIRE(plan.islands.size() == 1);
    CHECK(plan.islands[0].buses == std::vector<BusId>{1, 2, 3, 4});
    const auto report = evaluate(network, plan);
    REQUIRE(report.islands.size() == 1);
    CHECK(report.islands[0].converged);
    CHECK(report.islands[0].viable);
}

TEST_CASE("two-zone toy case splits at its only AC tie", "[islanding]") {
    const auto network = parse_case(data_dir() / "toy2zone.json", CaseFormat::native_json);
    const auto chain = chain_for(network);
    const auto plan = build_plan(network, chain.graph, cut(chain.dendrogram, 2));
    CHECK(plan.cut_lines == std::vector<BranchIndex>{2});
    CHECK(std::isinf(plan.p));
    CHECK(plan.island_of_bus(1) == 1);
    CHECK(plan.island_of_bus(4) == 2);
    const auto island = island_case(network, plan, 1);
    CHECK(island.buses.size() == 2);
    CHECK(island.branches.size() == 1);
    CHECK_THROWS_AS(island_case(network, plan, 3), Error);
}

TEST_CASE("deficit within headroom raises generation to load plus margin", "[islanding]") {
    const auto network = single_island(100.0, 150.0, 120.0);
    const auto plan = whole_case_plan(network);
    const auto margin = redispatch_and_shed(network, plan, {.loss_margin = 0.03});
    CHECK_THAT(margin.islands[0].redispatch_mw, WithinAbs(23.6, 1e-9));
    CHECK(margin.islands[0].shed_mw == 0.0);
    CHECK(margin.islands[0].feasible);
    CHECK_THAT(margin.network.generators[0].p_gen, WithinAbs(123.6, 1e-9));

    const auto exact = redispatch_and_shed(network, plan, {.loss_margin = 0.0});
    CHECK_THAT(exact.islands[0].redispatch_mw, WithinAbs(20.0, 1e-9));
}

TEST_CASE("deficit beyond headroom sheds load", "[islanding]") {
    const auto network = single_island(100.0, 110.0, 120.0);
    const auto result = redispatch_and_shed(network, whole_case_plan(network));
    const auto& d = result.islands[0];
    CHECK_THAT(d.redispatch_mw, WithinAbs(10.0, 1e-9));
    CHECK_THAT(d.shed_mw, WithinAbs(13.6, 1e-9));
    CHECK(d.feasible);
    CHECK_THAT(result.network.loads[0].p_load, WithinAbs(106.4, 1e-9));
    CHECK_THAT(result.network.loads[0].q_load, WithinAbs(30.0 * 106.4 / 120.0, 1e-9));
}

TEST_CASE("deficit beyond sheddable load is infeasible", "[islanding]") {
    auto network = single_island(100.0, 110.0, 120.0);
    network.loads[0].sheddable_fraction = 0.1;
    const auto result = redispatch_and_shed(network, whole_case_plan(network));
    CHECK_FALSE(result.islands[0].feasible);
    CHECK_THAT(result.islands[0].shed_mw, WithinAbs(12.0, 1e-9));
    CHECK(result.islands[0].note.find("deficit") != std::string::npos);
}

TEST_CASE("surplus backs generators down toward p_min", "[islanding]") {
    auto network = single_island(200.0, 300.0, 100.0);
    network.generators.push_back({2, 50.0, 0.0, 40.0, 60.0, -10.0, 10.0, true});
    network.buses[1].kind = BusKind::pv;
    network.generators[0].p_min = 50.0;
    const auto result = redispatch_and_shed(network, whole_case_plan(network), {.loss_margin = 0.0});
    // Surplus 150 against headroom 150 + 10.
    CHECK_THAT(result.islands[0].redispatch_mw, WithinAbs(-150.0, 1e-9));
    CHECK(result.islands[0].feasible);
    CHECK_THAT(result.network.generators[0].p_gen, WithinAbs(200.0 - 150.0 * 150.0 / 160.0, 1e-9));
    CHECK_THAT(result.network.generators[1].p_gen, WithinAbs(50.0 - 150.0 * 10.0 / 160.0, 1e-9));

    network.generators[0].p_min = 190.0;
    const auto stuck = redispatch_and_shed(network, whole_case_plan(network), {.loss_margin = 0.0});
    CHECK_FALSE(stuck.islands[0].feasible);
    CHECK(stuck.islands[0].note.find("surplus") != std::string::npos);
}

TEST_CASE("redispatch rejects a negative margin", "[islanding]") {
    const auto network = single_island(100.0, 150.0, 120.0);
    CHECK_THROWS_AS(redispatch_and_shed(network, whole_case_plan(network), {.loss_margin = -0.1}), Error);
}

TEST_CASE("island slack selection", "[islanding]") {
    NetworkCase network;
    network.generators = {{3, 10.0, 0.0, 0.0, 80.0}, {5, 10.0, 0.0, 0.0, 120.0}, {4, 10.0, 0.0, 0.0, 120.0},
                          {6, 10.0, 0.0, 0.0, 500.0, 0.0, 0.0, false}};
    network.buses = {{1, "a", BusKind::slack}, {3, "b", BusKind::pv}, {4, "b", BusKind::pv},
                     {5, "b", BusKind::pv}, {6, "b", BusKind::pv}};
    IslandSummary with_slack;
    with_slack.buses = {1, 3};
    CHECK(select_island_slack(network, with_slack) == 1);
    IslandSummary without;
    without.buses = {3, 4, 5, 6};
    CHECK(select_island_slack(network, without) == 4);
    IslandSummary empty;
    empty.buses = {7};
    CHECK_FALSE(select_island_slack(network, empty).has_value());
}

TEST_CASE("sweep rows cover the requested range", "[islanding]") {
    const auto chain = case118();
    const auto rows = sweep_metrics(chain.network, chain.graph, chain.dendrogram, chain.graph.order());
    REQUIRE(rows.size() == chain.graph.order() - 1);
    CHECK(rows.front().r == 2);
    CHECK_THROWS_AS(sweep_metrics(chain.network, chain.graph, chain.dendrogram, chain.graph.order() + 1), Error);
    CHECK_THROWS_AS(sweep_metrics(chain.network, chain.graph, chain.dendrogram, 2, 3), Error);
    const auto csv = sweep_to_csv(rows);
    CHECK(csv.rfind("r,max_imbalance_mw,switching_count,p\n", 0) == 0);
    CHECK(std::ranges::count(csv, '\n') == static_cast<long>(rows.size() + 1));
}

TEST_CASE("118-bus islands at r = 2 re-solve and round-trip", "[islanding]") {
    const auto chain = case118();
    const auto plan = build_plan(chain.network, chain.graph, cut(chain.dendrogram, 2));
    const auto report = evaluate(chain.network, plan);
    REQUIRE(report.islands.size() == 2);
    const auto balanced = redispatch_and_shed(chain.network, plan).network;
    for (const auto& eval : report.islands) {
        INFO("island " << eval.label);
        CHECK(eval.converged);
        CHECK(eval.viable);
        CHECK(*eval.min_voltage_pu >= 0.90);
        const auto standalone = island_case(balanced, plan, eval.label);
        const auto again = solve(parse_case_json(to_json(standalone)));
        REQUIRE(again.converged);
        for (std::size_t i = 0; i < again.v_mag.size(); ++i) {
            CHECK_THAT(again.v_mag[i], WithinAbs(eval.solution.v_mag[i], 1e-6));
        }
    }
}

TEST_CASE("serial and parallel evaluation agree", "[islanding]") {
    const auto chain = case118();
    const auto plan = build_plan(chain.network, chain.graph, cut(chain.dendrogram, 3));
    EvaluationOptions serial;
    serial.parallel = false;
    CHECK(to_json(evaluate(chain.network, plan, serial)) == to_json(evaluate(chain.network, plan)));
}

TEST_CASE("planted case sheds load only in the community without headroom", "[islanding]") {
    const auto network = gridsplit::testing::planted_case();
    const auto graph = build_zone_graph(network, case_state_flows(network));
    const auto d = constrained_ward_cluster(spectral_analysis(graph).embedding, graph);
    const auto plan = build_plan(network, graph, cut(d, 3));
    CHECK(plan.ei_attached == 1);
    const auto report = evaluate(network, plan);
    REQUIRE(report.islands.size() == 3);
    CHECK(report.islands[0].shed_mw == 0.0);
    CHECK(report.islands[1].shed_mw == 0.0);
    CHECK(report.islands[2].shed_mw > 0.0);
    for (const auto& eval : report.islands) {
        INFO("island " << eval.label);
        CHECK(eval.dispatch_feasible);
        CHECK(eval.converged);
    }
}

TEST_CASE("dropping X excludes external buses and cuts their ties", "[islanding]") {
    const auto network = gridsplit::testing::planted_case();
    const auto graph = build_zone_graph(network, case_state_flows(network), {.include_external = false});
    const auto d = constrained_ward_cluster(spectral_analysis(graph).embedding, graph);
    const auto plan = build_plan(network, graph, cut(d, 3));
    CHECK(plan.excluded_buses == std::vector<BusId>{22});
    CHECK(plan.island_of_bus(22) == 0);
    CHECK_FALSE(plan.ei_attached.has_value());
    std::size_t external_ties = 0;
    for (auto b : plan.cut_lines) {
        external_ties += network.branches[b].from_bus == 22 || network.branches[b].to_bus == 22;
    }
    CHECK(external_ties == 3);
}

TEST_CASE("plan and report JSON", "[islanding]") {
    const auto network = parse_case(data_dir() / "toy2zone.json", CaseFormat::native_json);
    const auto chain = chain_for(network);
    const auto plan = build_plan(network, chain.graph, cut(chain.dendrogram, 2));
    const auto plan_json = to_json(plan, network);
    CHECK(plan_json.find("gridsplit-plan/1") != std::string::npos);
    CHECK(nlohmann::json::parse(plan_json)["p"].is_null());
    const auto report_json = to_json(evaluate(network, plan));
    CHECK(report_json.find("gridsplit-report/1") != std::string::npos);
    CHECK(nlohmann::json::parse(report_json)["all_viable"] == true);
}
