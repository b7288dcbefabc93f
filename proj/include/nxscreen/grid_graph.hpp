#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nxscreen/case_io.hpp"
#include "nxscreen/metrics.hpp"

namespace nxscreen {

// Bus-branch multigraph over in-service elements. Parallel circuits are
// distinct edges; hop distances ignore multiplicity.
struct GridGraph {
  struct Edge {
    std::size_t branch = 0;
    std::size_t u = 0;  // node index
    std::size_t v = 0;
    double weight = 1.0;
  };

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<int> bus_id;                 // node -> bus id
  std::vector<std::size_t> node_of_bus;    // dense bus index -> node or kNone
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_of_branch;  // branch -> edge or kNone
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency;  // node -> (neighbor, edge)

  std::size_t node_count() const { return bus_id.size(); }
  const Edge& edge_for(std::size_t branch) const { return edges.at(edge_of_branch.at(branch)); }
};

enum class NodeRole { Seed, Desired, Neighbor };

struct SubgraphParams {
  int distance = 0;
  int search_level = 0;
};

struct SearchSubgraph {
  std::size_t seed = 0;
  std::vector<std::size_t> desired;    // branch indices, ascending, contains seed
  std::vector<std::size_t> nodes;      // graph node indices, ascending
  std::vector<std::size_t> edge_set;   // branch indices, ascending
  std::vector<NodeRole> roles;         // parallel to `nodes`
  SubgraphParams params;

  std::vector<int> node_set(const GridGraph& g) const;
};

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

// Inverse-impact weights: w = 1 / (|M| + eps) with eps = 1e-6 max|M|; uniform
// unit weights when every M is zero.
GridGraph build_graph(const NetworkCase& grid, const BranchMetrics& metrics);

// Unweighted BFS hop counts from a set of source nodes; kUnreachable where
// no path exists.
std::vector<std::size_t> hop_distances(const GridGraph& g, const std::vector<std::size_t>& sources);

std::size_t branch_hop_distance(const GridGraph& g, std::size_t branch_a, std::size_t branch_b);

// Throws InvalidParameterError when search_level < distance or either is negative.
SearchSubgraph build_subgraph(const GridGraph& g, std::size_t seed, const std::vector<std::size_t>& high_m,
                              SubgraphParams params);

bool is_connected(const GridGraph& g, const SearchSubgraph& sub);

std::string to_dot(const NetworkCase& grid, const GridGraph& g, const SearchSubgraph& sub);

}  // namespace nxscreen
