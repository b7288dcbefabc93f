#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nxscreen/case_io.hpp"

namespace nxscreen {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DcSolution {
  std::vector<double> theta;  // radians, indexed like NetworkCase::buses
  std::vector<double> flows;  // MW, indexed like NetworkCase::branches (0 when out of service)
  std::size_t slack = 0;      // dense bus index
};

// Slack-referenced DC sensitivities. Matrices span every branch of the case;
// out-of-service branches have zero rows and sentinel columns.
struct DcSensitivities {
  Eigen::MatrixXd isf;   // branches x buses
  // ptdf(l, k): flow change on l per 1 p.u. injected at from(k), withdrawn at to(k).
  Eigen::MatrixXd ptdf;  // branches x branches
  Eigen::MatrixXd lodf;  // branches x branches, column k = outage of k
  std::vector<double> base_flow;  // MW
  std::vector<bool> bridge;
  std::vector<bool> in_service;

  static constexpr double kBridgeTolerance = 1e-6;

  // Column entries of bridge or out-of-service branches hold this value.
  static double sentinel() { return std::numeric_limits<double>::quiet_NaN(); }
};

// Bus injections in MW (generation minus load minus shunt conductance).
std::vector<double> dc_injections(const NetworkCase& grid);

DcSolution solve_dc(const NetworkCase& grid);

DcSensitivities compute_lodf(const NetworkCase& grid, const DcSolution& dc);

// Post-outage DC flows with the given branches switched out. Throws
// SingularSystemError if the outage disconnects the network.
std::vector<double> dc_flows_after_outage(const NetworkCase& grid, const std::vector<std::size_t>& outaged);

// Bridges of the in-service bus-branch multigraph, by DFS low-link.
std::vector<bool> find_bridges(const NetworkCase& grid);

}  // namespace nxscreen
