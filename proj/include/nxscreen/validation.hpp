#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "nxscreen/case_io.hpp"

namespace nxscreen {

struct AcOptions {
  double tolerance = 1e-8;  // p.u., max nodal mismatch
  int max_iterations = 20;
  int max_q_rounds = 10;
  bool enforce_q_limits = true;
};

struct AcSolution {
  std::vector<double> v_mag;  // p.u., per bus (0 for isolated buses)
  std::vector<double> v_ang;  // radians
  std::vector<double> p_from, q_from, p_to, q_to;  // MW / MVAr per branch
  std::vector<double> mva_from, mva_to;
  std::vector<double> gen_p, gen_q;  // MW / MVAr per generator (0 when offline)
  bool converged = false;
  bool flat_start = false;
  int iterations = 0;
  double max_mismatch = std::numeric_limits<double>::infinity();  // p.u.
};

// Bus admittance matrix over all buses of the case (p.u.); out-of-service
// branches are skipped and every bus has an explicit diagonal entry.
Eigen::SparseMatrix<std::complex<double>> build_admittance(const NetworkCase& grid);

// Polar Newton-Raphson for one island with one slack bus. Starts from the
// case's bus voltages, falls back to a flat start, and never throws on
// divergence: `converged` is false when both starts fail.
AcSolution solve_ac(const NetworkCase& grid, const AcOptions& options = {});

struct Island {
  NetworkCase grid;                     // sub-case with its own slack
  std::vector<std::size_t> bus_index;   // sub-case bus -> parent bus
  std::vector<std::size_t> branch_index;
  std::vector<std::size_t> gen_index;
  double load_mw = 0.0;
  bool energized = false;               // has online generation
};

struct OutageResult {
  std::vector<Island> islands;  // ordered by smallest parent bus index
  double shed_load_mw = 0.0;    // load in islands without online generation
};

// Switches the branches out and splits the network into islands. Energized
// islands without the original slack get the bus of their largest online
// generator (by p_max, then lowest index) promoted to slack.
OutageResult apply_outage(const NetworkCase& grid, const std::vector<std::size_t>& branches);

enum class ViolationKind { Overflow, Undervoltage, Overvoltage, ReserveMargin, SlackCapacity, Unsolved, ShedLoad };

struct ViolationDetail {
  ViolationKind kind;
  int element = 0;  // bus id, branch index, generator index, or island's first bus id
  double value = 0.0;
  double limit = 0.0;
};

struct ViolationReport {
  int overflow_count = 0;
  int undervoltage_count = 0;
  int overvoltage_count = 0;
  bool reserve_limit = false;
  bool unsolved = false;
  double islanded_load_mw = 0.0;
  double reserve_margin_mw = 0.0;
  double max_mismatch = 0.0;  // p.u., over converged islands
  std::vector<ViolationDetail> details;

  bool any() const {
    return overflow_count > 0 || undervoltage_count > 0 || overvoltage_count > 0 || reserve_limit || unsolved ||
           islanded_load_mw > 0.0;
  }
  // One-line summary, e.g. "2 Overflow, 18 Undervoltage and Reserve Limit".
  std::string summary() const;
};

enum class ValidationMethod { Ac, Dc };

struct ValidationOptions {
  ValidationMethod method = ValidationMethod::Ac;
  // Required spinning reserve in MW; NaN selects the p_max of the largest
  // online generator of the base case.
  double reserve_req_mw = std::numeric_limits<double>::quiet_NaN();
  AcOptions ac;
};

struct ContingencyRecord {
  std::size_t x = 0;
  std::vector<std::size_t> branches;  // ascending
  ViolationReport report;
  double runtime_ms = 0.0;
};

// Per-island power-flow outcome, indexed like OutageResult::islands
// (unsolved entries for de-energized islands are never inspected).
struct IslandSolution {
  bool converged = false;
  std::vector<double> v_mag;
  std::vector<double> mva_from, mva_to;
  std::vector<double> gen_p;
  double max_mismatch = 0.0;
};

ViolationReport classify(const NetworkCase& grid, const OutageResult& outage,
                         const std::vector<IslandSolution>& solutions, double reserve_req_mw);

// Validates outage sets against a fixed base case. Thread-safe: validate()
// only reads shared state.
class ContingencyValidator {
 public:
  ContingencyValidator(NetworkCase grid, ValidationOptions options = {});

  ContingencyRecord validate(const std::vector<std::size_t>& branches) const;

  const NetworkCase& grid() const { return grid_; }
  const AcSolution& base_solution() const { return base_; }
  double reserve_req_mw() const { return reserve_req_mw_; }
  const ValidationOptions& options() const { return options_; }

 private:
  NetworkCase grid_;
  NetworkCase warm_;  // grid_ with bus voltages from the base solution
  ValidationOptions options_;
  AcSolution base_;
  double reserve_req_mw_ = 0.0;
};

}  // namespace nxscreen
