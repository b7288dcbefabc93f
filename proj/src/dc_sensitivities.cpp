#include "nxscreen/dc_sensitivities.hpp"

#include <cmath>
#include <numbers>
#include <queue>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

namespace nxscreen {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double series_susceptance(const Branch& br) { return 1.0 / (br.reactance * br.effective_tap()); }

std::size_t find_slack(const NetworkCase& grid) {
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (grid.buses[i].kind == BusKind::Slack) return i;
  }
  throw SingularSystemError("case has no slack bus");
}

struct Endpoints {
  std::size_t from = 0;
  std::size_t to = 0;
};

std::vector<Endpoints> branch_endpoints(const NetworkCase& grid) {
  std::vector<Endpoints> ends(grid.branches.size());
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    ends[k] = {grid.bus_index(grid.branches[k].from_bus), grid.bus_index(grid.branches[k].to_bus)};
  }
  return ends;
}

// Reduced susceptance matrix over in-service buses without the slack.
// `reduced` maps dense bus index to its row, or -1 for slack/isolated buses.
struct ReducedSystem {
  std::vector<int> reduced;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  int size = 0;
};

void require_connected(const NetworkCase& grid, const std::vector<Endpoints>& ends, std::size_t slack) {
  std::vector<std::vector<std::size_t>> adj(grid.buses.size());
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    if (!grid.branches[k].status) continue;
    adj[ends[k].from].push_back(ends[k].to);
    adj[ends[k].to].push_back(ends[k].from);
  }
  std::vector<bool> seen(grid.buses.size(), false);
  std::queue<std::size_t> q;
  q.push(slack);
  seen[slack] = true;
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (grid.buses[i].in_service() && !seen[i]) {
      throw SingularSystemError(
          fmt::format("in-service network is disconnected (bus {} unreachable from slack)", grid.buses[i].id));
    }
  }
}

void factor(const NetworkCase& grid, const std::vector<Endpoints>& ends, std::size_t slack, ReducedSystem* sys) {
  sys->reduced.assign(grid.buses.size(), -1);
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (i != slack && grid.buses[i].in_service()) sys->reduced[i] = sys->size++;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const Branch& br = grid.branches[k];
    if (!br.status) continue;
    double b = series_susceptance(br);
    int f = sys->reduced[ends[k].from];
    int t = sys->reduced[ends[k].to];
    if (f >= 0) triplets.emplace_back(f, f, b);
    if (t >= 0) triplets.emplace_back(t, t, b);
    if (f >= 0 && t >= 0) {
      triplets.emplace_back(f, t, -b);
      triplets.emplace_back(t, f, -b);
    }
  }
  Eigen::SparseMatrix<double> bmat(sys->size, sys->size);
  bmat.setFromTriplets(triplets.begin(), triplets.end());
  if (sys->size == 0) return;
  sys->solver.compute(bmat);
  if (sys->solver.info() != Eigen::Success) throw SingularSystemError("susceptance matrix factorization failed");
}

}  // namespace

std::vector<double> dc_injections(const NetworkCase& grid) {
  std::vector<double> p(grid.buses.size(), 0.0);
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    p[i] = -grid.buses[i].p_load - grid.buses[i].g_shunt;
  }
  for (const Generator& g : grid.generators) {
    if (g.status) p[grid.bus_index(g.bus)] += g.p_gen;
  }
  return p;
}

DcSolution solve_dc(const NetworkCase& grid) {
  auto ends = branch_endpoints(grid);
  DcSolution sol;
  sol.slack = find_slack(grid);
  require_connected(grid, ends, sol.slack);
  ReducedSystem sys;
  factor(grid, ends, sol.slack, &sys);

  // Phase shifters act as equivalent injection pairs.
  std::vector<double> p = dc_injections(grid);
  std::vector<double> shift_flow(grid.branches.size(), 0.0);
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const Branch& br = grid.branches[k];
    if (!br.status || br.shift_deg == 0.0) continue;
    shift_flow[k] = -series_susceptance(br) * br.shift_deg * kDegToRad * grid.base_mva;
    p[ends[k].from] -= shift_flow[k];
    p[ends[k].to] += shift_flow[k];
  }

  sol.theta.assign(grid.buses.size(), 0.0);
  if (sys.size > 0) {
    Eigen::VectorXd rhs(sys.size);
    for (std::size_t i = 0; i < grid.buses.size(); ++i) {
      if (sys.reduced[i] >= 0) rhs(sys.reduced[i]) = p[i] / grid.base_mva;
    }
    Eigen::VectorXd theta = sys.solver.solve(rhs);
    for (std::size_t i = 0; i < grid.buses.size(); ++i) {
      if (sys.reduced[i] >= 0) sol.theta[i] = theta(sys.reduced[i]);
    }
  }
  double slack_angle = grid.buses[sol.slack].v_ang * kDegToRad;
  for (auto& t : sol.theta) t += slack_angle;

  sol.flows.assign(grid.branches.size(), 0.0);
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const Branch& br = grid.branches[k];
    if (!br.status) continue;
    sol.flows[k] = series_susceptance(br) * (sol.theta[ends[k].from] - sol.theta[ends[k].to]) * grid.base_mva +
                   shift_flow[k];
  }
  return sol;
}

DcSensitivities compute_lodf(const NetworkCase& grid, const DcSolution& dc) {
  auto ends = branch_endpoints(grid);
  std::size_t slack = find_slack(grid);
  require_connected(grid, ends, slack);
  ReducedSystem sys;
  factor(grid, ends, slack, &sys);

  const auto nb = static_cast<Eigen::Index>(grid.buses.size());
  const auto nl = static_cast<Eigen::Index>(grid.branches.size());

  // Reduced inverse, expanded with zero slack/isolated rows and columns.
  Eigen::MatrixXd x_full = Eigen::MatrixXd::Zero(nb, nb);
  if (sys.size > 0) {
    Eigen::MatrixXd x_red = sys.solver.solve(Eigen::MatrixXd::Identity(sys.size, sys.size));
    for (Eigen::Index i = 0; i < nb; ++i) {
      int ri = sys.reduced[i];
      if (ri < 0) continue;
      for (Eigen::Index j = 0; j < nb; ++j) {
        int rj = sys.reduced[j];
        if (rj >= 0) x_full(i, j) = x_red(ri, rj);
      }
    }
  }

  DcSensitivities s;
  s.in_service.resize(grid.branches.size());
  s.isf = Eigen::MatrixXd::Zero(nl, nb);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const Branch& br = grid.branches[l];
    s.in_service[l] = br.status;
    if (!br.status) continue;
    s.isf.row(l) = series_susceptance(br) * (x_full.row(ends[l].from) - x_full.row(ends[l].to));
  }

  s.ptdf = Eigen::MatrixXd::Zero(nl, nl);
  for (Eigen::Index k = 0; k < nl; ++k) {
    if (!s.in_service[k]) continue;
    s.ptdf.col(k) = s.isf.col(ends[k].from) - s.isf.col(ends[k].to);
  }

  s.bridge.assign(grid.branches.size(), false);
  s.lodf = Eigen::MatrixXd::Zero(nl, nl);
  for (Eigen::Index k = 0; k < nl; ++k) {
    double denom = 1.0 - s.ptdf(k, k);
    if (!s.in_service[k] || std::abs(denom) < DcSensitivities::kBridgeTolerance) {
      s.bridge[k] = s.in_service[k];
      s.lodf.col(k).setConstant(DcSensitivities::sentinel());
      continue;
    }
    s.lodf.col(k) = s.ptdf.col(k) / denom;
    s.lodf(k, k) = -1.0;
  }
  s.base_flow = dc.flows;
  return s;
}

std::vector<double> dc_flows_after_outage(const NetworkCase& grid, const std::vector<std::size_t>& outaged) {
  NetworkCase copy = grid;
  for (auto k : outaged) copy.branches.at(k).status = false;
  return solve_dc(copy).flows;
}

std::vector<bool> find_bridges(const NetworkCase& grid) {
  const std::size_t n = grid.buses.size();
  auto ends = branch_endpoints(grid);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbor, branch)
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    if (!grid.branches[k].status) continue;
    adj[ends[k].from].emplace_back(ends[k].to, k);
    adj[ends[k].to].emplace_back(ends[k].from, k);
  }

  std::vector<bool> is_bridge(grid.branches.size(), false);
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> disc(n, kUnvisited), low(n, 0);
  std::size_t timer = 0;

  struct Frame {
    std::size_t node;
    std::size_t parent_edge;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != kUnvisited) continue;
    std::vector<Frame> stack{{root, kUnvisited, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.node].size()) {
        auto [v, edge] = adj[f.node][f.next++];
        if (edge == f.parent_edge) continue;
        if (disc[v] == kUnvisited) {
          disc[v] = low[v] = timer++;
          stack.push_back({v, edge, 0});
        } else {
          low[f.node] = std::min(low[f.node], disc[v]);
        }
        continue;
      }
      Frame done = f;
      stack.pop_back();
      if (!stack.empty()) {
        std::size_t parent = stack.back().node;
        low[parent] = std::min(low[parent], low[done.node]);
        if (low[done.node] > disc[parent]) is_bridge[done.parent_edge] = true;
      }
    }
  }
  return is_bridge;
}

}  // namespace nxscreen
