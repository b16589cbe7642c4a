#include "gridsplit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gridsplit/error.hpp"
#include "json_util.hpp"

namespace gridsplit {

namespace {

struct Cluster {
    std::size_t id = 0;
    std::vector<std::size_t> members;
    std::set<std::size_t> neighbors;  // ids of adjacent active clusters
};

bool cheaper(double candidate, double best) {
    if (std::isinf(best)) return candidate < best;
    return candidate < best - 1e-12 * std::max(1.0, std::abs(best));
}

}  // namespace

Dendrogram constrained_ward_cluster(const Eigen::MatrixXd& embedding, const ZoneGraph& graph) {
    const std::size_t n = graph.order();
    if (static_cast<std::size_t>(embedding.rows()) != n) {
        throw Error(ErrorKind::invalid_argument, "embedding row count does not match the graph order");
    }
    Dendrogram out;
    out.leaves = graph.vertices();
    if (n < 2) return out;

    // Squared Ward distances d^2 = 2 n_a n_b / (n_a + n_b) |c_a - c_b|^2,
    // indexed by cluster id and updated with Lance-Williams.
    const std::size_t ids = 2 * n - 1;
    std::vector<double> d2(ids * ids, 0.0);
    auto dist = [&d2, ids](std::size_t a, std::size_t b) -> double& { return d2[a * ids + b]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (embedding.row(static_cast<Eigen::Index>(i)) - embedding.row(static_cast<Eigen::Index>(j)))
                                 .squaredNorm();
            dist(i, j) = v;
            dist(j, i) = v;
        }
    }

    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i) {
        Cluster c{i, {i}, {}};
        for (auto nb : graph.neighbors(i)) c.neighbors.insert(nb);
        active.push_back(std::move(c));
    }

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_a = 0, best_b = 0;
        double best = std::numeric_limits<double>::infinity();
        double global = std::numeric_limits<double>::infinity();
        bool global_adjacent = true;
        std::size_t feasible = 0;
        for (std::size_t x = 0; x < active.size(); ++x) {
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                const double cost = dist(active[x].id, active[y].id);
                const bool adjacent = active[x].neighbors.contains(active[y].id);
                if (cheaper(cost, global)) {
                    global = cost;
                    global_adjacent = adjacent;
                }
                if (!adjacent) continue;
                ++feasible;
                if (cheaper(cost, best)) {
                    best = cost;
                    best_a = x;
                    best_b = y;
                }
            }
        }
        if (feasible == 0) {
            std::string frontier;
            for (const auto& c : active) {
                frontier += frontier.empty() ? "{" : ", {";
                for (std::size_t m = 0; m < c.members.size(); ++m) {
                    frontier += (m ? "," : "") + graph.vertices()[c.members[m]];
                }
                frontier += "}";
            }
            throw Error(ErrorKind::validation,
                        "zone graph is disconnected; no adjacent clusters remain: " + frontier);
        }

        Cluster& a = active[best_a];
        Cluster& b = active[best_b];
        const std::size_t new_id = n + step;
        const double na = static_cast<double>(a.members.size());
        const double nb = static_cast<double>(b.members.size());
        for (const auto& k : active) {
            if (k.id == a.id || k.id == b.id) continue;
            const double nk = static_cast<double>(k.members.size());
            const double v = ((na + nk) * dist(k.id, a.id) + (nb + nk) * dist(k.id, b.id) - nk * best) /
                             (na + nb + nk);
            dist(k.id, new_id) = v;
            dist(new_id, k.id) = v;
        }

        Merge merge;
        merge.cluster_a = a.id;
        merge.cluster_b = b.id;
        merge.cost = std::sqrt(std::max(0.0, best));
        merge.new_cluster = new_id;
        merge.size = a.members.size() + b.members.size();
        merge.feasible_pairs = feasible;
        merge.constraint_binding = !global_adjacent;
        out.merges.push_back(merge);

        Cluster merged{new_id, a.members, {}};
        merged.members.insert(merged.members.end(), b.members.begin(), b.members.end());
        std::ranges::sort(merged.members);
        for (auto nbid : a.neighbors) merged.neighbors.insert(nbid);
        for (auto nbid : b.neighbors) merged.neighbors.insert(nbid);
        merged.neighbors.erase(a.id);
        merged.neighbors.erase(b.id);
        const std::size_t old_a = a.id, old_b = b.id;
        for (auto& c : active) {
            if (c.neighbors.erase(old_a) + c.neighbors.erase(old_b) > 0) c.neighbors.insert(new_id);
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_a));
        active.push_back(std::move(merged));
    }
    return out;
}

Partition cut(const Dendrogram& dendrogram, std::size_t r) {
    const std::size_t n = dendrogram.leaf_count();
    if (r < 1 || r > n) {
        throw Error(ErrorKind::invalid_argument,
                    "cluster count r=" + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
    }
    if (dendrogram.merges.size() + 1 != n) throw Error(ErrorKind::invalid_argument, "incomplete dendrogram");
    std::vector<std::size_t> owner(n);
    for (std::size_t i = 0; i < n; ++i) owner[i] = i;
    for (std::size_t m = 0; m < n - r; ++m) {
        const auto& merge = dendrogram.merges[m];
        for (auto& o : owner) {
            if (o == merge.cluster_a || o == merge.cluster_b) o = merge.new_cluster;
        }
    }
    Partition partition;
    partition.assignment.resize(n);
    std::vector<std::pair<std::size_t, std::size_t>> labels;  // owner -> label
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::ranges::find(labels, owner[i], &std::pair<std::size_t, std::size_t>::first);
        if (it == labels.end()) {
            labels.emplace_back(owner[i], labels.size() + 1);
            it = labels.end() - 1;
        }
        partition.assignment[i] = it->second;
    }
    partition.r = labels.size();
    return partition;
}

std::string to_json(const Dendrogram& dendrogram) {
    detail::Json doc;
    doc["schema"] = "gridsplit-dendro/1";
    doc["leaves"] = dendrogram.leaves;
    doc["linkage"] = {{"method", "ward"},
                      {"cost", "sqrt(2 * within-cluster variance increase)"},
                      {"connectivity_constrained", true},
                      {"tie_break", "lowest (cluster_a, cluster_b)"},
                      {"cluster_ids", "leaves 0..N-1, merge m creates N+m"}};
    auto merges = detail::Json::array();
    for (std::size_t m = 0; m < dendrogram.merges.size(); ++m) {
        const auto& merge = dendrogram.merges[m];
        merges.push_back({{"step", m + 1},
                          {"cluster_a", merge.cluster_a},
                          {"cluster_b", merge.cluster_b},
                          {"cost", merge.cost},
                          {"new_cluster", merge.new_cluster},
                          {"size", merge.size},
                          {"feasible_pairs", merge.feasible_pairs},
                          {"constraint_binding", merge.constraint_binding}});
    }
    doc["merges"] = std::move(merges);
    return detail::dump(doc);
}

}  // namespace gridsplit
