#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nxscreen/case_io.hpp"
#include "nxscreen/dc_sensitivities.hpp"
#include "nxscreen/gbc.hpp"
#include "nxscreen/grid_graph.hpp"
#include "nxscreen/metrics.hpp"

namespace nxscreen {

struct ScreeningConfig {
  std::size_t x = 1;
  int distance = 0;
  int search_level = 0;
  double a_percent = 5.0;
  std::size_t max_candidates = 0;  // 0 = no cap
  std::size_t seed_limit = 0;      // 0 = every top-a% branch seeds a subgraph
  unsigned threads = 1;
  PairExclusion exclusion = PairExclusion::None;
};

struct CandidateSet {
  std::vector<std::size_t> branches;   // ascending
  std::size_t seed = 0;
  std::vector<std::size_t> selection;  // greedy order, seed first
  std::vector<double> gbc_trace;

  double gbc_score() const { return gbc_trace.empty() ? 0.0 : gbc_trace.back(); }
};

struct StageTimings {
  double metrics_ms = 0.0;
  double subgraph_ms = 0.0;  // summed over seeds
  double gbc_ms = 0.0;       // summed over seeds
};

// Everything the per-seed pipelines share. Building it is the metrics stage.
struct ScreeningContext {
  DcSolution dc;
  DcSensitivities sens;
  BranchMetrics metrics;
  GridGraph graph;
  double build_ms = 0.0;
};

ScreeningContext prepare_screening(const NetworkCase& grid);

struct ScreeningResult {
  std::vector<CandidateSet> candidates;  // in seed rank order, deduplicated
  std::vector<std::size_t> seeds;
  std::vector<std::string> notices;
  StageTimings timings;
};

// Throws InvalidParameterError for x = 0, search_level < distance or a
// percentage outside (0, 100].
void check_config(const ScreeningConfig& cfg);

ScreeningResult run_screening(const ScreeningContext& ctx, const NetworkCase& grid, const ScreeningConfig& cfg);
ScreeningResult run_screening(const NetworkCase& grid, const ScreeningConfig& cfg);

}  // namespace nxscreen
