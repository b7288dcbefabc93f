#include "nxscreen/screening.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "nxscreen/parallel.hpp"

namespace nxscreen {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct SeedOutcome {
  std::optional<CandidateSet> candidate;
  std::string notice;
  double subgraph_ms = 0.0;
  double gbc_ms = 0.0;
};

}  // namespace

ScreeningContext prepare_screening(const NetworkCase& grid) {
  auto start = Clock::now();
  ScreeningContext ctx;
  ctx.dc = solve_dc(grid);
  ctx.sens = compute_lodf(grid, ctx.dc);
  ctx.metrics = compute_metrics(ctx.sens, ctx.dc);
  ctx.graph = build_graph(grid, ctx.metrics);
  ctx.build_ms = ms_since(start);
  return ctx;
}

void check_config(const ScreeningConfig& cfg) {
  if (cfg.x == 0) throw InvalidParameterError("x must be at least 1");
  if (cfg.distance < 0) throw InvalidParameterError("distance must be nonnegative");
  if (cfg.search_level < cfg.distance) {
    throw InvalidParameterError(fmt::format("search-level must be >= distance (got search-level {}, distance {})",
                                            cfg.search_level, cfg.distance));
  }
  if (!(cfg.a_percent > 0.0 && cfg.a_percent <= 100.0)) {
    throw InvalidParameterError(fmt::format("top percent must lie in (0, 100], got {}", cfg.a_percent));
  }
}

ScreeningResult run_screening(const ScreeningContext& ctx, const NetworkCase& grid, const ScreeningConfig& cfg) {
  check_config(cfg);
  ScreeningResult result;
  result.timings.metrics_ms = ctx.build_ms;

  auto top = rank_branches(ctx.metrics, cfg.a_percent);
  result.seeds = top;
  if (cfg.seed_limit > 0 && result.seeds.size() > cfg.seed_limit) result.seeds.resize(cfg.seed_limit);

  const SubgraphParams params{cfg.distance, cfg.search_level};
  std::vector<SeedOutcome> outcomes(result.seeds.size());
  parallel_for(result.seeds.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t seed = result.seeds[i];
    SeedOutcome& out = outcomes[i];
    auto start = Clock::now();
    SearchSubgraph sub = build_subgraph(ctx.graph, seed, top, params);
    WeightedGraph view = subgraph_view(ctx.graph, sub);
    out.subgraph_ms = ms_since(start);
    if (view.edges.size() < cfg.x) {
      out.notice = fmt::format("seed {} skipped: subgraph has {} edges, fewer than x = {}", branch_label(grid, seed),
                               view.edges.size(), cfg.x);
      return;
    }
    start = Clock::now();
    GbcResult gbc = select_group(view, cfg.x, {seed}, cfg.exclusion);
    out.gbc_ms = ms_since(start);
    CandidateSet c;
    c.seed = seed;
    c.selection = gbc.group;
    c.gbc_trace = gbc.scores;
    c.branches = gbc.group;
    std::sort(c.branches.begin(), c.branches.end());
    out.candidate = std::move(c);
  });

  // Deterministic merge: seeds in rank order; a repeated branch set keeps the
  // higher final score, the earlier seed on ties, and the earlier position.
  std::map<std::vector<std::size_t>, std::size_t> position;
  for (auto& out : outcomes) {
    result.timings.subgraph_ms += out.subgraph_ms;
    result.timings.gbc_ms += out.gbc_ms;
    if (!out.notice.empty()) result.notices.push_back(std::move(out.notice));
    if (!out.candidate) continue;
    auto [it, inserted] = position.emplace(out.candidate->branches, result.candidates.size());
    if (inserted) {
      result.candidates.push_back(std::move(*out.candidate));
    } else if (out.candidate->gbc_score() > result.candidates[it->second].gbc_score()) {
      result.candidates[it->second] = std::move(*out.candidate);
    }
  }
  if (cfg.max_candidates > 0 && result.candidates.size() > cfg.max_candidates) {
    result.candidates.resize(cfg.max_candidates);
  }
  return result;
}

ScreeningResult run_screening(const NetworkCase& grid, const ScreeningConfig& cfg) {
  check_config(cfg);
  return run_screening(prepare_screening(grid), grid, cfg);
}

}  // namespace nxscreen
