#pragma once

#include <cstddef>
#include <vector>

#include "nxscreen/grid_graph.hpp"

namespace nxscreen {

// Undirected weighted graph with caller-chosen edge ids (branch indices when
// built from a search subgraph). Weights must be positive and finite.
struct WeightedGraph {
  struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 1.0;
    std::size_t id = 0;
  };
  std::size_t node_count = 0;
  std::vector<Edge> edges;
};

WeightedGraph subgraph_view(const GridGraph& g, const SearchSubgraph& sub);

// Which (s, t) pairs are dropped from the sum for an edge group E.
//   None:           every ordered pair s != t counts.
//   BothEndpoints:  pairs with both s and t incident to E are dropped.
//   EitherEndpoint: pairs with s or t incident to E are dropped.
// Only None keeps the score monotone and submodular in E.
enum class PairExclusion { None, BothEndpoints, EitherEndpoint };

struct GbcResult {
  std::vector<std::size_t> group;  // edge ids in selection order
  std::vector<double> scores;      // score after each addition
};

// Group betweenness of edge sets over one graph. Shortest-path DAGs are built
// once; each score is then linear in the DAG size.
class GroupBetweenness {
 public:
  static constexpr double kTieTolerance = 1e-9;

  explicit GroupBetweenness(const WeightedGraph& graph, PairExclusion exclusion = PairExclusion::None);

  // Sum over ordered pairs of the fraction of minimum-weight s-t paths that
  // use at least one edge of the group. Unknown ids are ignored.
  double score(const std::vector<std::size_t>& edge_ids) const;

  // Same score with the group given as a per-edge-position mask and the
  // matching per-node incidence mask.
  double score_mask(const std::vector<char>& in_group, const std::vector<char>& incident) const;

  std::size_t node_count() const { return graph_.node_count; }
  const WeightedGraph& graph() const { return graph_; }

 private:
  struct Pred {
    std::size_t node;
    std::size_t edge;  // position in graph_.edges
  };
  struct SourceDag {
    std::vector<std::size_t> order;  // reachable nodes by distance, source first
    std::vector<std::vector<Pred>> preds;
    std::vector<double> sigma;
  };

  WeightedGraph graph_;
  PairExclusion exclusion_;
  std::vector<SourceDag> dags_;
};

double gbc_score(const WeightedGraph& graph, const std::vector<std::size_t>& edge_ids,
                 PairExclusion exclusion = PairExclusion::None);

// Greedy selection: `forced` first (in order), then repeatedly the edge with
// the largest score gain, ties to the smallest id. Throws
// InvalidParameterError if x is 0, exceeds the edge count, or is smaller
// than the forced set.
GbcResult select_group(const WeightedGraph& graph, std::size_t x, const std::vector<std::size_t>& forced,
                       PairExclusion exclusion = PairExclusion::None);

}  // namespace nxscreen
