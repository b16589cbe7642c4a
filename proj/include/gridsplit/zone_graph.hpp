#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gridsplit/network.hpp"
#include "gridsplit/powerflow.hpp"

namespace gridsplit {

// Vertex id used for all external zones collapsed together.
inline constexpr std::string_view external_vertex = "X";

struct ZoneEdge {
    std::size_t i = 0;  // i < j, vertex positions
    std::size_t j = 0;
    double weight = 0.0;  // MVA
};

// Simple weighted undirected graph over zones.
class ZoneGraph {
  public:
    ZoneGraph() = default;
    // Merges nothing: rejects self-loops, duplicate pairs and non-positive weights.
    ZoneGraph(std::vector<ZoneId> vertices, std::vector<ZoneEdge> edges);

    std::size_t order() const { return vertices_.size(); }
    const std::vector<ZoneId>& vertices() const { return vertices_; }
    const std::vector<ZoneEdge>& edges() const { return edges_; }

    std::optional<std::size_t> index_of(std::string_view zone) const;
    double weight(std::size_t i, std::size_t j) const;
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
    bool has_external_vertex() const;

  private:
    std::vector<ZoneId> vertices_;
    std::vector<ZoneEdge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

struct GraphOptions {
    bool include_external = true;
    double weight_floor_mva = 0.1;
};

// w_ij = sum over in-service AC ties between zones i and j of
// max(|S_from|, |S_to|), floored at weight_floor_mva per tie. HVDC ties add
// nothing. External zones collapse to vertex X, or are dropped entirely.
ZoneGraph build_zone_graph(const NetworkCase& network,
                           std::span<const std::optional<BranchFlow>> flows,
                           const GraphOptions& options = {});

// Zone that a bus's zone maps to in the graph, or nullopt when dropped.
std::optional<std::size_t> graph_vertex_of_zone(const ZoneGraph& graph, const NetworkCase& network,
                                                const ZoneId& zone);

double weighted_degree(const ZoneGraph& graph, std::size_t vertex);
double weighted_degree(const ZoneGraph& graph, std::string_view zone);

// Number of connected components (isolated vertices count).
std::size_t component_count(const ZoneGraph& graph);

std::string to_json(const ZoneGraph& graph);
// GraphViz rendering; penwidth scales linearly with weight.
std::string to_dot(const ZoneGraph& graph);

}  // namespace gridsplit
