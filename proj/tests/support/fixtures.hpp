#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "gridsplit/network.hpp"
#include "gridsplit/zone_graph.hpp"

namespace gridsplit::testing {

// Portable draws: the standard distributions differ between libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  private:
    std::mt19937_64 engine_;
};

std::filesystem::path data_dir();

// Random connected graph: a random spanning tree plus extra edges with
// probability `density`. Vertex names "v0", "v1", ...
ZoneGraph random_connected_graph(Rng& rng, std::size_t n, double density, double w_lo = 0.5,
                                 double w_hi = 10.0);

// Disjoint union of connected random graphs with the given sizes.
ZoneGraph random_multi_component_graph(Rng& rng, const std::vector<std::size_t>& sizes);

ZoneGraph complete_graph(std::size_t n, double weight = 1.0);

// Three planted 7-zone communities (zones "1".."7", "8".."14", "15".."21")
// with intra weights in [8, 10] and inter weights in [0.5, 1], plus external
// zone "EI" tied to community A. One bus per zone; the case voltages are an
// exact power-flow solution whose tie flows reproduce the planted weights.
// Community C has no upward generator headroom, so isolating it forces load
// shedding.
NetworkCase planted_case();

struct PlantedEdge {
    BusId a = 0;
    BusId b = 0;
    double weight = 0.0;
};
std::vector<PlantedEdge> planted_edges();

// Community label (1, 2, 3) of planted zone "1".."21"; X belongs to 1.
std::size_t planted_community(std::size_t vertex_position);

// Two buses, slack 1.0 at angle 0, lossless line of reactance x, PQ load p at
// bus 2 (p.u. on 100 MVA).
NetworkCase two_bus_case(double x, double p_load_pu);

}  // namespace gridsplit::testing
