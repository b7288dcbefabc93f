#include "nxscreen/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "nxscreen/metrics.hpp"
#include "nxscreen/parallel.hpp"

namespace nxscreen {

bool more_severe(const ContingencyRecord& a, const ContingencyRecord& b) {
  const auto& ra = a.report;
  const auto& rb = b.report;
  auto key = [](const ViolationReport& r) {
    return std::make_tuple(r.unsolved, r.islanded_load_mw, r.overflow_count,
                           r.undervoltage_count + r.overvoltage_count, r.reserve_limit);
  };
  if (key(ra) != key(rb)) return key(ra) > key(rb);
  return a.branches < b.branches;
}

std::vector<ContingencyRecord> BruteForceResult::violating() const {
  std::vector<ContingencyRecord> out;
  for (const auto& r : records) {
    if (!r.screened && r.record.report.any()) out.push_back(r.record);
  }
  std::sort(out.begin(), out.end(), more_severe);
  return out;
}

bool dc_prescreen_flags(const NetworkCase& grid, const DcSensitivities& sens, const std::vector<std::size_t>& outage) {
  const auto m = static_cast<Eigen::Index>(outage.size());
  for (auto k : outage) {
    if (sens.bridge.at(k)) return true;
  }
  // Flows f~ injected across the outaged branches so that their post-outage
  // flow is zero: f~_i - sum_{j != i} LODF(o_i, o_j) f~_j = f_{o_i}.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    rhs(i) = sens.base_flow[outage[i]];
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j) a(i, j) = -sens.lodf(static_cast<Eigen::Index>(outage[i]), static_cast<Eigen::Index>(outage[j]));
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(DcSensitivities::kBridgeTolerance);
  if (!lu.isInvertible()) return true;  // the set islands part of the grid
  Eigen::VectorXd injected = lu.solve(rhs);

  for (std::size_t l = 0; l < grid.branches.size(); ++l) {
    if (!sens.in_service[l] || grid.branches[l].rate_a <= 0.0) continue;
    if (std::find(outage.begin(), outage.end(), l) != outage.end()) continue;
    double flow = sens.base_flow[l];
    for (Eigen::Index j = 0; j < m; ++j) {
      flow += sens.lodf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(outage[j])) * injected(j);
    }
    if (std::abs(flow) > grid.branches[l].rate_a) return true;
  }
  return false;
}

BruteForceResult brute_force_contingencies(const ContingencyValidator& validator, std::size_t x,
                                           const BruteForceOptions& options) {
  if (x != 1 && x != 2) throw InvalidParameterError("brute force supports x = 1 or x = 2 only");
  const NetworkCase& grid = validator.grid();
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    if (grid.branches[k].status) live.push_back(k);
  }
  std::vector<std::vector<std::size_t>> sets;
  if (x == 1) {
    for (auto k : live) sets.push_back({k});
  } else {
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) sets.push_back({live[i], live[j]});
    }
  }

  DcSensitivities sens;
  if (options.dc_prescreen) sens = compute_lodf(grid, solve_dc(grid));

  BruteForceResult result;
  result.enumerated_count = sets.size();
  result.records.resize(sets.size());
  parallel_for(sets.size(), options.threads, [&](std::size_t i) {
    BruteForceRecord& out = result.records[i];
    if (options.dc_prescreen && !dc_prescreen_flags(grid, sens, sets[i])) {
      out.screened = true;
      out.record.x = x;
      out.record.branches = sets[i];
      return;
    }
    out.record = validator.validate(sets[i]);
  });
  for (const auto& r : result.records) result.screened_count += r.screened ? 1 : 0;
  return result;
}

namespace {

// All shortest paths of every ordered pair, as edge-position bitmasks.
struct PathTable {
  struct Pair {
    std::size_t s, t;
    std::vector<std::uint64_t> paths;
  };
  std::vector<Pair> pairs;
  std::vector<std::uint64_t> node_edges;  // node -> mask of incident edges
};

PathTable enumerate_paths(const WeightedGraph& graph) {
  const std::size_t n = graph.node_count;
  const std::size_t m = graph.edges.size();
  if (m > 64) throw InstanceTooLargeError(fmt::format("instance too large: {} edges, limit 64", m));

  for (const auto& e : graph.edges) {
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw InvalidParameterError("weights must be positive");
  }
  // Path lengths compare with the same relative tolerance the fast scorer
  // uses. Rounding weights to integers is not an option: it can split sums
  // that tie exactly, e.g. 0.5 + 0.5 against 1.0.
  auto same = [](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= GroupBetweenness::kTieTolerance * std::max(a, b);
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, inf));
  PathTable table;
  table.node_edges.assign(n, 0);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t i = 0; i < n; ++i) dist[i][i] = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    auto [u, v, w, id] = graph.edges[e];
    dist[u][v] = std::min(dist[u][v], w);
    dist[v][u] = dist[u][v];
    adj[u].emplace_back(v, e);
    adj[v].emplace_back(u, e);
    table.node_edges[u] |= std::uint64_t{1} << e;
    table.node_edges[v] |= std::uint64_t{1} << e;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double via = dist[i][k] + dist[k][j];
        if (via < dist[i][j] && !same(via, dist[i][j])) dist[i][j] = via;
      }
    }
  }

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t || dist[s][t] == inf) continue;
      PathTable::Pair pair{s, t, {}};
      // Depth-first walk restricted to edges that stay on some shortest s-t path.
      std::vector<std::tuple<std::size_t, std::uint64_t>> stack{{s, 0}};
      while (!stack.empty()) {
        auto [u, mask] = stack.back();
        stack.pop_back();
        if (u == t) {
          pair.paths.push_back(mask);
          continue;
        }
        for (auto [v, e] : adj[u]) {
          if (same(dist[s][u] + graph.edges[e].weight, dist[s][v]) && same(dist[s][v] + dist[v][t], dist[s][t])) {
            stack.emplace_back(v, mask | (std::uint64_t{1} << e));
          }
        }
      }
      table.pairs.push_back(std::move(pair));
    }
  }
  return table;
}

double score_table(const PathTable& table, std::uint64_t group, PairExclusion exclusion) {
  double total = 0.0;
  for (const auto& pair : table.pairs) {
    bool s_in = (table.node_edges[pair.s] & group) != 0;
    bool t_in = (table.node_edges[pair.t] & group) != 0;
    if (exclusion == PairExclusion::EitherEndpoint && (s_in || t_in)) continue;
    if (exclusion == PairExclusion::BothEndpoints && s_in && t_in) continue;
    std::size_t hit = 0;
    for (auto p : pair.paths) hit += (p & group) != 0 ? 1 : 0;
    total += static_cast<double>(hit) / static_cast<double>(pair.paths.size());
  }
  return total;
}

}  // namespace

double gbc_enumerated_score(const WeightedGraph& graph, const std::vector<std::size_t>& edge_ids,
                            PairExclusion exclusion) {
  PathTable table = enumerate_paths(graph);
  std::uint64_t group = 0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (std::find(edge_ids.begin(), edge_ids.end(), graph.edges[e].id) != edge_ids.end()) {
      group |= std::uint64_t{1} << e;
    }
  }
  return score_table(table, group, exclusion);
}

ExhaustiveGbc gbc_exhaustive(const WeightedGraph& graph, std::size_t x, PairExclusion exclusion) {
  const std::size_t m = graph.edges.size();
  if (x > 3 || m > 12) {
    throw InstanceTooLargeError(fmt::format("instance too large: x = {}, {} edges (limits 3 and 12)", x, m));
  }
  if (x == 0 || x > m) throw InvalidParameterError(fmt::format("cannot choose {} of {} edges", x, m));
  PathTable table = enumerate_paths(graph);

  // Positions sorted by id so the enumeration runs in lexicographic id order.
  std::vector<std::size_t> order(m);
  for (std::size_t e = 0; e < m; ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return graph.edges[a].id < graph.edges[b].id; });

  ExhaustiveGbc best;
  bool have = false;
  std::vector<std::size_t> pick(x);
  for (std::size_t e = 0; e < x; ++e) pick[e] = e;
  while (true) {
    std::uint64_t group = 0;
    for (auto p : pick) group |= std::uint64_t{1} << order[p];
    double value = score_table(table, group, exclusion);
    if (!have || value > best.score + 1e-9 * std::max(1.0, std::abs(best.score))) {
      have = true;
      best.score = value;
      best.group.clear();
      for (auto p : pick) best.group.push_back(graph.edges[order[p]].id);
    }
    // Next combination.
    std::size_t i = x;
    while (i > 0 && pick[i - 1] == m - x + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < x; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace nxscreen
