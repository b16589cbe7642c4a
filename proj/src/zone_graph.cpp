#include "gridsplit/zone_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "gridsplit/error.hpp"
#include "json_util.hpp"

namespace gridsplit {

ZoneGraph::ZoneGraph(std::vector<ZoneId> vertices, std::vector<ZoneEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), adjacency_(vertices_.size()) {
    std::set<ZoneId> unique(vertices_.begin(), vertices_.end());
    if (unique.size() != vertices_.size()) throw Error(ErrorKind::invalid_argument, "duplicate graph vertex");
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (auto& e : edges_) {
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.j >= vertices_.size()) throw Error(ErrorKind::invalid_argument, "edge endpoint out of range");
        if (e.i == e.j) throw Error(ErrorKind::invalid_argument, "self-loop on vertex " + vertices_[e.i]);
        if (!(e.weight > 0.0)) throw Error(ErrorKind::invalid_argument, "edge weights must be positive");
        if (!pairs.emplace(e.i, e.j).second) {
            throw Error(ErrorKind::invalid_argument,
                        "multiple edges between " + vertices_[e.i] + " and " + vertices_[e.j]);
        }
    }
    std::ranges::sort(edges_, [](const ZoneEdge& a, const ZoneEdge& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    for (const auto& e : edges_) {
        adjacency_[e.i].push_back(e.j);
        adjacency_[e.j].push_back(e.i);
    }
    for (auto& list : adjacency_) std::ranges::sort(list);
}

std::optional<std::size_t> ZoneGraph::index_of(std::string_view zone) const {
    const auto it = std::ranges::find(vertices_, zone);
    if (it == vertices_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
}

double ZoneGraph::weight(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const auto it = std::ranges::lower_bound(edges_, std::pair{i, j}, {},
                                             [](const ZoneEdge& e) { return std::pair{e.i, e.j}; });
    return it != edges_.end() && it->i == i && it->j == j ? it->weight : 0.0;
}

bool ZoneGraph::has_external_vertex() const { return index_of(external_vertex).has_value(); }

std::optional<std::size_t> graph_vertex_of_zone(const ZoneGraph& graph, const NetworkCase& network,
                                                const ZoneId& zone) {
    if (network.external_zones.contains(zone)) return graph.index_of(external_vertex);
    return graph.index_of(zone);
}

ZoneGraph build_zone_graph(const NetworkCase& network, std::span<const std::optional<BranchFlow>> flows,
                           const GraphOptions& options) {
    if (flows.size() != network.branches.size()) {
        throw Error(ErrorKind::invalid_argument, "flow vector does not match the branch list");
    }
    std::vector<ZoneId> vertices;
    for (const auto& zone : ordered_zones(network)) {
        if (!network.external_zones.contains(zone)) vertices.push_back(zone);
    }
    if (vertices.empty()) throw Error(ErrorKind::validation, "study footprint is empty (every zone is external)");
    const bool with_x = options.include_external && !network.external_zones.empty();
    if (with_x) vertices.emplace_back(external_vertex);

    std::map<ZoneId, std::size_t> vertex_of;
    for (std::size_t i = 0; i < vertices.size(); ++i) vertex_of.emplace(vertices[i], i);
    for (const auto& zone : network.external_zones) {
        if (with_x) vertex_of[zone] = vertices.size() - 1;
        else vertex_of.erase(zone);
    }

    const auto positions = bus_positions(network);
    std::map<std::pair<std::size_t, std::size_t>, double> weights;
    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        const auto& br = network.branches[b];
        if (!br.in_service || br.is_hvdc) continue;
        if (!flows[b]) {
            throw Error(ErrorKind::invalid_argument, "no flow given for in-service branch " + std::to_string(b));
        }
        const auto vf = vertex_of.find(network.buses.at(positions.at(br.from_bus)).zone);
        const auto vt = vertex_of.find(network.buses.at(positions.at(br.to_bus)).zone);
        if (vf == vertex_of.end() || vt == vertex_of.end() || vf->second == vt->second) continue;
        const auto key = std::minmax(vf->second, vt->second);
        weights[{key.first, key.second}] += std::max(flows[b]->max_apparent(), options.weight_floor_mva);
    }
    std::vector<ZoneEdge> edges;
    for (const auto& [key, w] : weights) edges.push_back({key.first, key.second, w});
    return ZoneGraph(std::move(vertices), std::move(edges));
}

double weighted_degree(const ZoneGraph& graph, std::size_t vertex) {
    if (vertex >= graph.order()) throw Error(ErrorKind::invalid_argument, "unknown vertex");
    double degree = 0.0;
    for (const auto& e : graph.edges()) {
        if (e.i == vertex || e.j == vertex) degree += e.weight;
    }
    return degree;
}

double weighted_degree(const ZoneGraph& graph, std::string_view zone) {
    const auto index = graph.index_of(zone);
    if (!index) throw Error(ErrorKind::invalid_argument, "unknown vertex '" + std::string(zone) + "'");
    return weighted_degree(graph, *index);
}

std::size_t component_count(const ZoneGraph& graph) {
    std::vector<bool> seen(graph.order(), false);
    std::size_t components = 0;
    for (std::size_t start = 0; start < graph.order(); ++start) {
        if (seen[start]) continue;
        ++components;
        std::queue<std::size_t> frontier;
        frontier.push(start);
        seen[start] = true;
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            for (auto v : graph.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    frontier.push(v);
                }
            }
        }
    }
    return components;
}

std::string to_json(const ZoneGraph& graph) {
    detail::Json doc;
    doc["schema"] = "gridsplit-graph/1";
    doc["order"] = graph.order();
    doc["vertices"] = graph.vertices();
    auto edges = detail::Json::array();
    for (const auto& e : graph.edges()) {
        edges.push_back({{"i", e.i}, {"j", e.j}, {"from", graph.vertices()[e.i]}, {"to", graph.vertices()[e.j]},
                         {"weight_mva", e.weight}});
    }
    doc["edges"] = std::move(edges);
    auto degrees = detail::Json::array();
    for (std::size_t i = 0; i < graph.order(); ++i) degrees.push_back(weighted_degree(graph, i));
    doc["weighted_degree_mva"] = std::move(degrees);
    return detail::dump(doc);
}

std::string to_dot(const ZoneGraph& graph) {
    double max_weight = 0.0;
    for (const auto& e : graph.edges()) max_weight = std::max(max_weight, e.weight);
    std::ostringstream out;
    out << "graph zones {\n  node [shape=circle];\n";
    for (const auto& v : graph.vertices()) out << "  \"" << v << "\";\n";
    char buffer[160];
    for (const auto& e : graph.edges()) {
        const double width = max_weight > 0.0 ? 0.5 + 7.5 * e.weight / max_weight : 1.0;
        std::snprintf(buffer, sizeof buffer, " [weight=%.6g, penwidth=%.3f, label=\"%.1f\"];\n", e.weight, width,
                      e.weight);
        out << "  \"" << graph.vertices()[e.i] << "\" -- \"" << graph.vertices()[e.j] << "\"" << buffer;
    }
    out << "}\n";
    return out.str();
}

}  // namespace gridsplit
