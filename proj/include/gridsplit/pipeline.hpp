#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gridsplit/clustering.hpp"
#include "gridsplit/islanding.hpp"
#include "gridsplit/network.hpp"
#include "gridsplit/powerflow.hpp"
#include "gridsplit/spectral.hpp"
#include "gridsplit/zone_graph.hpp"

namespace gridsplit {

struct PipelineConfig {
    std::filesystem::path case_path;
    std::optional<std::filesystem::path> zones_path;
    std::optional<CaseFormat> format;  // inferred from the extension when empty
    bool include_external = true;
    std::optional<std::size_t> embedding_dim;
    EvaluationOptions evaluation;
};

// End-to-end chain parse -> intact solve -> zone graph -> spectral ->
// dendrogram -> plan/evaluate/sweep. Stages are computed on first use and
// cached; all accessors are safe to call concurrently.
class Pipeline {
  public:
    explicit Pipeline(PipelineConfig config);

    const PipelineConfig& config() const { return config_; }
    const NetworkCase& network() const { return network_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    const PowerFlowSolution& intact_solution();
    const ZoneGraph& graph();
    const SpectralReport& spectral();
    const Dendrogram& dendrogram();
    std::shared_ptr<const IslandingPlan> plan(std::size_t r);
    std::shared_ptr<const IslandReport> report(std::size_t r);

    // Serialized artifacts, byte-stable for identical inputs.
    std::string case_summary_json();
    std::string validation_json();
    std::string solution_json();
    std::string solve_trace_text();
    std::string graph_json();
    std::string graph_dot();
    std::string spectral_json();
    std::string dendrogram_json();
    std::string plan_json(std::size_t r);
    std::string report_json(std::size_t r);
    std::string sweep_csv(std::size_t r_max);
    std::string sweep_json(std::size_t r_max);
    std::string island_case_json(std::size_t r, std::size_t label);

  private:
    void check_r(std::size_t r);

    PipelineConfig config_;
    NetworkCase network_;
    std::vector<std::string> warnings_;

    std::mutex mutex_;
    std::optional<PowerFlowSolution> solution_;
    std::optional<ZoneGraph> graph_;
    std::optional<SpectralReport> spectral_;
    std::optional<Dendrogram> dendrogram_;
    std::map<std::size_t, std::shared_ptr<const IslandingPlan>> plans_;
    std::map<std::size_t, std::shared_ptr<const IslandReport>> reports_;
};

std::string to_json(const PowerFlowSolution& solution, const NetworkCase& network);

// gridsplit-summary/1: counts and per-zone totals.
std::string case_summary_json(const NetworkCase& network, const std::vector<std::string>& warnings);

// gridsplit-validation/1 listing every finding of validate().
std::string validation_json(const NetworkCase& network, const std::vector<std::string>& warnings);

}  // namespace gridsplit
