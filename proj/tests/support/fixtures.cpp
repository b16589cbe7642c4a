#include "fixtures.hpp"

#include <cmath>
#include <complex>
#include <set>
#include <string>

namespace gridsplit::testing {

std::filesystem::path data_dir() { return GRIDSPLIT_DATA_DIR; }

ZoneGraph random_connected_graph(Rng& rng, std::size_t n, double density, double w_lo, double w_hi) {
    std::vector<ZoneId> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    std::set<std::pair<std::size_t, std::size_t>> used;
    std::vector<ZoneEdge> edges;
    for (std::size_t i = 1; i < n; ++i) {
        const auto parent = rng.index(i);
        used.emplace(parent, i);
        edges.push_back({parent, i, rng.uniform(w_lo, w_hi)});
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (used.contains({i, j})) continue;
            if (rng.uniform(0.0, 1.0) < density) edges.push_back({i, j, rng.uniform(w_lo, w_hi)});
        }
    }
    return ZoneGraph(std::move(names), std::move(edges));
}

ZoneGraph random_multi_component_graph(Rng& rng, const std::vector<std::size_t>& sizes) {
    std::vector<ZoneId> names;
    std::vector<ZoneEdge> edges;
    std::size_t offset = 0;
    for (auto size : sizes) {
        const auto part = random_connected_graph(rng, size, 0.4);
        for (const auto& e : part.edges()) edges.push_back({e.i + offset, e.j + offset, e.weight});
        offset += size;
    }
    for (std::size_t i = 0; i < offset; ++i) names.push_back("v" + std::to_string(i));
    return ZoneGraph(std::move(names), std::move(edges));
}

ZoneGraph complete_graph(std::size_t n, double weight) {
    std::vector<ZoneId> names;
    std::vector<ZoneEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back("v" + std::to_string(i));
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, weight});
    }
    return ZoneGraph(std::move(names), std::move(edges));
}

std::vector<PlantedEdge> planted_edges() {
    Rng rng(20240607);
    std::vector<PlantedEdge> edges;
    for (int c = 0; c < 3; ++c) {
        for (int i = 1; i <= 7; ++i) {
            for (int j = i + 1; j <= 7; ++j) edges.push_back({7 * c + i, 7 * c + j, rng.uniform(8.0, 10.0)});
        }
    }
    std::set<std::pair<int, int>> inter;
    for (int c = 0; c < 3; ++c) {
        for (int d = c + 1; d < 3; ++d) {
            for (int added = 0; added < 2;) {
                const int a = 7 * c + 1 + static_cast<int>(rng.index(7));
                const int b = 7 * d + 1 + static_cast<int>(rng.index(7));
                if (!inter.emplace(a, b).second) continue;
                edges.push_back({a, b, rng.uniform(0.5, 1.0)});
                ++added;
            }
        }
    }
    std::set<int> attached;
    while (attached.size() < 3) {
        const int a = 1 + static_cast<int>(rng.index(7));
        if (attached.insert(a).second) edges.push_back({22, a, rng.uniform(8.0, 10.0)});
    }
    return edges;
}

std::size_t planted_community(std::size_t vertex_position) {
    if (vertex_position >= 21) return 1;
    return vertex_position / 7 + 1;
}

NetworkCase planted_case() {
    constexpr double base = 100.0;
    NetworkCase network;
    network.base_mva = base;
    auto angle = [](BusId bus) { return bus == 22 ? 0.0 : -0.01 * bus; };
    for (BusId id = 1; id <= 22; ++id) {
        Bus bus;
        bus.id = id;
        bus.zone = id == 22 ? "EI" : std::to_string(id);
        bus.kind = id == 22 ? BusKind::slack : BusKind::pv;
        bus.base_kv = 345.0;
        bus.v_mag = 1.0;
        bus.v_ang = angle(id);
        network.buses.push_back(bus);
    }
    network.external_zones.insert("EI");
    network.zone_names["EI"] = "Eastern Interconnection";

    std::vector<std::complex<double>> injection(23);
    for (const auto& e : planted_edges()) {
        const double delta = angle(e.a) - angle(e.b);
        Branch br;
        br.from_bus = e.a;
        br.to_bus = e.b;
        br.x = 2.0 * std::abs(std::sin(delta / 2.0)) * base / e.weight;
        br.rating_mva = 50.0;
        network.branches.push_back(br);
        const auto va = std::polar(1.0, angle(e.a));
        const auto vb = std::polar(1.0, angle(e.b));
        const std::complex<double> y = 1.0 / std::complex<double>(0.0, br.x);
        injection[static_cast<std::size_t>(e.a)] += va * std::conj(y * (va - vb)) * base;
        injection[static_cast<std::size_t>(e.b)] += vb * std::conj(y * (vb - va)) * base;
    }
    for (BusId id = 1; id <= 22; ++id) {
        const auto s = injection[static_cast<std::size_t>(id)];
        Generator gen;
        gen.bus = id;
        gen.p_gen = 100.0 + s.real();
        gen.q_gen = 20.0 + s.imag();
        gen.p_min = 0.0;
        gen.p_max = id == 22 ? 1000.0 : id >= 15 ? gen.p_gen : 2.0 * gen.p_gen;
        gen.q_min = -9999.0;
        gen.q_max = 9999.0;
        network.generators.push_back(gen);
        network.loads.push_back({id, 100.0, 20.0, 1.0});
    }
    return network;
}

NetworkCase two_bus_case(double x, double p_load_pu) {
    NetworkCase network;
    network.base_mva = 100.0;
    Bus slack;
    slack.id = 1;
    slack.zone = "1";
    slack.kind = BusKind::slack;
    Bus load = slack;
    load.id = 2;
    load.kind = BusKind::pq;
    network.buses = {slack, load};
    Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.x = x;
    network.branches.push_back(br);
    network.generators.push_back({1, 0.0, 0.0, 0.0, 1000.0, -1000.0, 1000.0, true});
    network.loads.push_back({2, p_load_pu * 100.0, 0.0, 1.0});
    return network;
}

}  // namespace gridsplit::testing
