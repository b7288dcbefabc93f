#include "nxscreen/grid_graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <fmt/format.h>

#include "nxscreen/union_find.hpp"

namespace nxscreen {

std::vector<int> SearchSubgraph::node_set(const GridGraph& g) const {
  std::vector<int> ids;
  ids.reserve(nodes.size());
  for (auto n : nodes) ids.push_back(g.bus_id[n]);
  std::sort(ids.begin(), ids.end());
  return ids;
}

GridGraph build_graph(const NetworkCase& grid, const BranchMetrics& metrics) {
  GridGraph g;
  g.node_of_bus.assign(grid.buses.size(), GridGraph::kNone);
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (!grid.buses[i].in_service()) continue;
    g.node_of_bus[i] = g.bus_id.size();
    g.bus_id.push_back(grid.buses[i].id);
  }
  g.adjacency.resize(g.bus_id.size());

  double max_m = 0.0;
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    if (grid.branches[k].status) max_m = std::max(max_m, std::abs(metrics.m_value.at(k)));
  }
  const double eps = 1e-6 * max_m;

  g.edge_of_branch.assign(grid.branches.size(), GridGraph::kNone);
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const Branch& br = grid.branches[k];
    if (!br.status) continue;
    GridGraph::Edge e;
    e.branch = k;
    e.u = g.node_of_bus[grid.bus_index(br.from_bus)];
    e.v = g.node_of_bus[grid.bus_index(br.to_bus)];
    e.weight = max_m > 0.0 ? 1.0 / (std::abs(metrics.m_value[k]) + eps) : 1.0;
    g.edge_of_branch[k] = g.edges.size();
    g.adjacency[e.u].emplace_back(e.v, g.edges.size());
    g.adjacency[e.v].emplace_back(e.u, g.edges.size());
    g.edges.push_back(e);
  }
  return g;
}

std::vector<std::size_t> hop_distances(const GridGraph& g, const std::vector<std::size_t>& sources) {
  std::vector<std::size_t> dist(g.node_count(), kUnreachable);
  std::queue<std::size_t> q;
  for (auto s : sources) {
    if (dist[s] == 0) continue;
    dist[s] = 0;
    q.push(s);
  }
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto [v, edge] : g.adjacency[u]) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

std::size_t branch_hop_distance(const GridGraph& g, std::size_t branch_a, std::size_t branch_b) {
  const auto& a = g.edge_for(branch_a);
  const auto& b = g.edge_for(branch_b);
  auto dist = hop_distances(g, {a.u, a.v});
  return std::min(dist[b.u], dist[b.v]);
}

SearchSubgraph build_subgraph(const GridGraph& g, std::size_t seed, const std::vector<std::size_t>& high_m,
                              SubgraphParams params) {
  if (params.distance < 0 || params.search_level < 0) {
    throw InvalidParameterError("distance and search level must be nonnegative");
  }
  if (params.search_level < params.distance) {
    throw InvalidParameterError(fmt::format("search-level must be >= distance (got search-level {}, distance {})",
                                            params.search_level, params.distance));
  }
  SearchSubgraph sub;
  sub.seed = seed;
  sub.params = params;

  const auto& seed_edge = g.edge_for(seed);
  auto from_seed = hop_distances(g, {seed_edge.u, seed_edge.v});
  sub.desired.push_back(seed);
  for (auto b : high_m) {
    if (b == seed || g.edge_of_branch.at(b) == GridGraph::kNone) continue;
    const auto& e = g.edge_for(b);
    if (std::min(from_seed[e.u], from_seed[e.v]) <= static_cast<std::size_t>(params.distance)) {
      sub.desired.push_back(b);
    }
  }
  std::sort(sub.desired.begin(), sub.desired.end());
  sub.desired.erase(std::unique(sub.desired.begin(), sub.desired.end()), sub.desired.end());

  std::vector<std::size_t> bone;
  for (auto b : sub.desired) {
    bone.push_back(g.edge_for(b).u);
    bone.push_back(g.edge_for(b).v);
  }
  auto reach = hop_distances(g, bone);
  std::vector<bool> inside(g.node_count(), false);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (reach[n] <= static_cast<std::size_t>(params.search_level)) {
      inside[n] = true;
      sub.nodes.push_back(n);
    }
  }
  for (const auto& e : g.edges) {
    if (inside[e.u] && inside[e.v]) sub.edge_set.push_back(e.branch);
  }
  std::sort(sub.edge_set.begin(), sub.edge_set.end());

  std::vector<bool> is_desired_end(g.node_count(), false);
  for (auto n : bone) is_desired_end[n] = true;
  for (auto n : sub.nodes) {
    if (n == seed_edge.u || n == seed_edge.v) {
      sub.roles.push_back(NodeRole::Seed);
    } else if (is_desired_end[n]) {
      sub.roles.push_back(NodeRole::Desired);
    } else {
      sub.roles.push_back(NodeRole::Neighbor);
    }
  }
  return sub;
}

bool is_connected(const GridGraph& g, const SearchSubgraph& sub) {
  if (sub.nodes.empty()) return true;
  std::vector<std::size_t> local(g.node_count(), GridGraph::kNone);
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) local[sub.nodes[i]] = i;
  UnionFind uf(sub.nodes.size());
  std::size_t components = sub.nodes.size();
  for (auto b : sub.edge_set) {
    const auto& e = g.edge_for(b);
    if (uf.unite(local[e.u], local[e.v])) --components;
  }
  return components == 1;
}

std::string to_dot(const NetworkCase& grid, const GridGraph& g, const SearchSubgraph& sub) {
  std::string out = fmt::format("graph subgraph_{} {{\n", grid.branches[sub.seed].from_bus);
  out += fmt::format("  // seed {} d={} sl={}\n", branch_label(grid, sub.seed), sub.params.distance,
                     sub.params.search_level);
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) {
    const char* role = sub.roles[i] == NodeRole::Seed      ? "seed"
                       : sub.roles[i] == NodeRole::Desired ? "desired"
                                                           : "neighbor";
    const char* shape = sub.roles[i] == NodeRole::Seed      ? "star"
                        : sub.roles[i] == NodeRole::Desired ? "diamond"
                                                            : "triangle";
    out += fmt::format("  {} [role={}, shape={}];\n", g.bus_id[sub.nodes[i]], role, shape);
  }
  for (auto b : sub.edge_set) {
    const auto& e = g.edge_for(b);
    bool desired = std::binary_search(sub.desired.begin(), sub.desired.end(), b);
    out += fmt::format("  {} -- {} [branch={}, weight={}{}];\n", g.bus_id[e.u], g.bus_id[e.v], b, e.weight,
                       desired ? ", desired=true" : "");
  }
  out += "}\n";
  return out;
}

}  // namespace nxscreen
