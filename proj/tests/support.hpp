#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nxscreen/case_io.hpp"
#include "nxscreen/gbc.hpp"

namespace testing {

inline std::filesystem::path fixture_path(const std::string& file) {
  return std::filesystem::path(NXSCREEN_DATA_DIR) / file;
}

inline const nxscreen::NetworkCase& case200() {
  static const nxscreen::NetworkCase grid = nxscreen::load_case_file(fixture_path("case_ACTIVSg200.m"));
  return grid;
}

inline const nxscreen::NetworkCase& case500() {
  static const nxscreen::NetworkCase grid = nxscreen::load_case_file(fixture_path("case_ACTIVSg500.m"));
  return grid;
}

inline nxscreen::NetworkCase triangle() { return nxscreen::load_case_file(fixture_path("triangle3.m")); }

// Slack at bus 1, `load_mw` + j`load_mvar` at bus 2, one branch between them.
inline std::string two_bus_text(double load_mw, double load_mvar, double r, double x, double rate = 0.0) {
  return fmt::format(R"(function mpc = two_bus
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	{}	{}	0	0	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	{}	0	999	-999	1	100	1	999	0;
];
mpc.branch = [
	1	2	{}	{}	0	{}	0	0	0	0	1	-360	360;
];
)",
                     load_mw, load_mvar, load_mw, r, x, rate);
}

inline std::size_t branch_of(const nxscreen::NetworkCase& grid, int a, int b, int circuit = 1) {
  auto k = grid.find_branch(a, b, circuit);
  if (!k) throw std::runtime_error(fmt::format("fixture has no branch {}-{}", a, b));
  return *k;
}

// Connected random graph: a random spanning tree plus extra edges, with
// weights drawn from a small set so equal-length paths are common.
inline nxscreen::WeightedGraph random_graph(std::mt19937_64& rng, std::size_t nodes, std::size_t extra_edges,
                                            bool unit_weights = false) {
  nxscreen::WeightedGraph g;
  g.node_count = nodes;
  std::uniform_int_distribution<int> weight(1, 4);
  std::size_t id = 0;
  for (std::size_t v = 1; v < nodes; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    g.edges.push_back({parent(rng), v, unit_weights ? 1.0 : weight(rng) * 0.5, id++});
  }
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  for (std::size_t k = 0; k < extra_edges; ++k) {
    std::size_t u = pick(rng), v = pick(rng);
    if (u == v) continue;
    g.edges.push_back({u, v, unit_weights ? 1.0 : weight(rng) * 0.5, id++});
  }
  return g;
}

}  // namespace testing
