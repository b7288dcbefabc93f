#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "nxscreen/dc_sensitivities.hpp"

namespace nxscreen {

struct BranchMetrics {
  std::vector<double> nlodf;    // uncapped; +inf for bridges and zero-spread columns
  std::vector<double> m_value;  // MW, signed like the base flow
  std::vector<std::size_t> rank;  // in-service branches by descending |M|, then out-of-service
  std::vector<bool> in_service;

  static double sentinel() { return std::numeric_limits<double>::infinity(); }
  double capped_nlodf(std::size_t i) const { return nlodf[i] < 1.0 ? nlodf[i] : 1.0; }
};

class InvalidParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ratio of mean to population standard deviation of `values`; +inf when the
// spread is zero or no values remain.
double mean_over_std(std::span<const double> values);

double compute_nlodf(const DcSensitivities& sens, std::size_t branch);

double compute_m(const DcSolution& dc, double nlodf, std::size_t branch);

BranchMetrics compute_metrics(const DcSensitivities& sens, const DcSolution& dc);

// Branch indices with the largest |M|: ceil(a_percent% of in-service
// branches), ties by ascending index.
std::vector<std::size_t> rank_branches(const BranchMetrics& metrics, double a_percent);

}  // namespace nxscreen
