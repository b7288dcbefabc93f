#include "nxscreen/gbc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_map>

#include <fmt/format.h>

namespace nxscreen {

WeightedGraph subgraph_view(const GridGraph& g, const SearchSubgraph& sub) {
  WeightedGraph wg;
  wg.node_count = sub.nodes.size();
  std::vector<std::size_t> local(g.node_count(), GridGraph::kNone);
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) local[sub.nodes[i]] = i;
  for (auto b : sub.edge_set) {
    const auto& e = g.edge_for(b);
    wg.edges.push_back({local[e.u], local[e.v], e.weight, b});
  }
  return wg;
}

GroupBetweenness::GroupBetweenness(const WeightedGraph& graph, PairExclusion exclusion)
    : graph_(graph), exclusion_(exclusion) {
  const std::size_t n = graph_.node_count;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t e = 0; e < graph_.edges.size(); ++e) {
    const auto& edge = graph_.edges[e];
    if (!(edge.weight > 0.0) || !std::isfinite(edge.weight)) {
      throw InvalidParameterError(fmt::format("edge {} has non-positive or non-finite weight", edge.id));
    }
    adj[edge.u].emplace_back(edge.v, e);
    adj[edge.v].emplace_back(edge.u, e);
  }

  const double inf = std::numeric_limits<double>::infinity();
  auto tied = [](double a, double b) { return std::abs(a - b) <= kTieTolerance * std::max(a, b); };

  dags_.resize(n);
  std::vector<double> dist(n);
  std::vector<char> settled(n);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    SourceDag& dag = dags_[s];
    dag.preds.assign(n, {});
    dag.sigma.assign(n, 0.0);
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(settled.begin(), settled.end(), 0);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (settled[u] || d > dist[u]) continue;
      settled[u] = 1;
      dag.order.push_back(u);
      for (auto [v, e] : adj[u]) {
        if (settled[v]) continue;
        double nd = d + graph_.edges[e].weight;
        if (dist[v] == inf || (nd < dist[v] && !tied(nd, dist[v]))) {
          dist[v] = nd;
          dag.preds[v].assign(1, {u, e});
          heap.emplace(nd, v);
        } else if (tied(nd, dist[v])) {
          dag.preds[v].push_back({u, e});
        }
      }
    }
    dag.sigma[s] = 1.0;
    for (std::size_t i = 1; i < dag.order.size(); ++i) {
      auto v = dag.order[i];
      double count = 0.0;
      for (const auto& p : dag.preds[v]) count += dag.sigma[p.node];
      dag.sigma[v] = count;
    }
  }
}

double GroupBetweenness::score_mask(const std::vector<char>& in_group, const std::vector<char>& incident) const {
  const std::size_t n = graph_.node_count;
  std::vector<double> avoid(n, 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const SourceDag& dag = dags_[s];
    if (exclusion_ == PairExclusion::EitherEndpoint && incident[s]) continue;
    avoid[s] = 1.0;
    for (std::size_t i = 1; i < dag.order.size(); ++i) {
      auto t = dag.order[i];
      double count = 0.0;
      for (const auto& p : dag.preds[t]) {
        if (!in_group[p.edge]) count += avoid[p.node];
      }
      avoid[t] = count;
      bool skip = (exclusion_ == PairExclusion::EitherEndpoint && incident[t]) ||
                  (exclusion_ == PairExclusion::BothEndpoints && incident[s] && incident[t]);
      if (!skip) total += (dag.sigma[t] - count) / dag.sigma[t];
    }
    for (auto v : dag.order) avoid[v] = 0.0;
  }
  return total;
}

double GroupBetweenness::score(const std::vector<std::size_t>& edge_ids) const {
  std::vector<char> in_group(graph_.edges.size(), 0);
  std::vector<char> incident(graph_.node_count, 0);
  for (std::size_t e = 0; e < graph_.edges.size(); ++e) {
    if (std::find(edge_ids.begin(), edge_ids.end(), graph_.edges[e].id) == edge_ids.end()) continue;
    in_group[e] = 1;
    incident[graph_.edges[e].u] = 1;
    incident[graph_.edges[e].v] = 1;
  }
  return score_mask(in_group, incident);
}

double gbc_score(const WeightedGraph& graph, const std::vector<std::size_t>& edge_ids, PairExclusion exclusion) {
  return GroupBetweenness(graph, exclusion).score(edge_ids);
}

GbcResult select_group(const WeightedGraph& graph, std::size_t x, const std::vector<std::size_t>& forced,
                       PairExclusion exclusion) {
  if (x == 0) throw InvalidParameterError("group size must be at least 1");
  if (x > graph.edges.size()) {
    throw InvalidParameterError(
        fmt::format("group size {} exceeds the {} available edges", x, graph.edges.size()));
  }
  if (forced.size() > x) throw InvalidParameterError("more forced edges than the requested group size");

  std::unordered_map<std::size_t, std::size_t> position;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) position.emplace(graph.edges[e].id, e);
  for (auto id : forced) {
    if (!position.contains(id)) throw InvalidParameterError(fmt::format("forced edge {} not in graph", id));
  }

  GroupBetweenness gbc(graph, exclusion);
  std::vector<char> in_group(graph.edges.size(), 0);
  std::vector<char> incident(graph.node_count, 0);
  GbcResult result;
  auto add = [&](std::size_t id, double value) {
    auto e = position.at(id);
    in_group[e] = 1;
    incident[graph.edges[e].u] = 1;
    incident[graph.edges[e].v] = 1;
    result.group.push_back(id);
    result.scores.push_back(value);
  };

  for (auto id : forced) {
    if (std::find(result.group.begin(), result.group.end(), id) != result.group.end()) continue;
    auto e = position.at(id);
    auto trial = in_group;
    auto trial_incident = incident;
    trial[e] = 1;
    trial_incident[graph.edges[e].u] = 1;
    trial_incident[graph.edges[e].v] = 1;
    add(id, gbc.score_mask(trial, trial_incident));
  }

  std::vector<std::size_t> by_id(graph.edges.size());
  for (std::size_t e = 0; e < by_id.size(); ++e) by_id[e] = e;
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return graph.edges[a].id < graph.edges[b].id; });

  while (result.group.size() < x) {
    std::size_t best = GridGraph::kNone;
    double best_value = -std::numeric_limits<double>::infinity();
    for (auto e : by_id) {
      if (in_group[e]) continue;
      in_group[e] = 1;
      char saved_u = incident[graph.edges[e].u];
      char saved_v = incident[graph.edges[e].v];
      incident[graph.edges[e].u] = 1;
      incident[graph.edges[e].v] = 1;
      double value = gbc.score_mask(in_group, incident);
      in_group[e] = 0;
      incident[graph.edges[e].u] = saved_u;
      incident[graph.edges[e].v] = saved_v;
      if (best == GridGraph::kNone || value > best_value + 1e-9 * std::max(1.0, std::abs(best_value))) {
        best = e;
        best_value = value;
      }
    }
    add(graph.edges[best].id, best_value);
  }
  return result;
}

}  // namespace nxscreen
