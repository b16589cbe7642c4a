#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsplit/zone_graph.hpp"

namespace gridsplit {

// Cluster ids: leaves are 0..N-1 (vertex positions), the cluster created by
// merge m gets id N + m.
struct Merge {
    std::size_t cluster_a = 0;  // cluster_a < cluster_b
    std::size_t cluster_b = 0;
    double cost = 0.0;  // Ward distance sqrt(2 * variance increase); Euclidean for singletons
    std::size_t new_cluster = 0;
    std::size_t size = 0;            // leaves in the new cluster
    std::size_t feasible_pairs = 0;  // adjacent cluster pairs available at this step
    bool constraint_binding = false;  // cheapest overall pair was not adjacent
};

struct Dendrogram {
    std::vector<ZoneId> leaves;
    std::vector<Merge> merges;

    std::size_t leaf_count() const { return leaves.size(); }
};

struct Partition {
    std::size_t r = 0;
    std::vector<std::size_t> assignment;  // vertex position -> label 1..r
};

// Ward agglomeration of the embedded rows where only clusters joined by a
// graph edge may merge. Throws Error(validation) naming the remaining
// clusters when the graph is disconnected.
Dendrogram constrained_ward_cluster(const Eigen::MatrixXd& embedding, const ZoneGraph& graph);

// Replays the first N - r merges. Labels follow the lowest vertex position in
// each cluster.
Partition cut(const Dendrogram& dendrogram, std::size_t r);

std::string to_json(const Dendrogram& dendrogram);

}  // namespace gridsplit
