#include "nxscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace nxscreen {

double mean_over_std(std::span<const double> values) {
  if (values.empty()) return BranchMetrics::sentinel();
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  // Relative test: columns equal up to rounding count as zero spread.
  if (sd <= 1e-12 * mean) return BranchMetrics::sentinel();
  return mean / sd;
}

double compute_nlodf(const DcSensitivities& sens, std::size_t branch) {
  if (!sens.in_service.at(branch) || sens.bridge[branch]) return BranchMetrics::sentinel();
  std::vector<double> magnitudes;
  magnitudes.reserve(sens.in_service.size());
  for (std::size_t l = 0; l < sens.in_service.size(); ++l) {
    if (l == branch || !sens.in_service[l]) continue;
    double v = sens.lodf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(branch));
    if (std::isnan(v)) continue;
    magnitudes.push_back(std::abs(v));
  }
  return mean_over_std(magnitudes);
}

double compute_m(const DcSolution& dc, double nlodf, std::size_t branch) {
  return dc.flows.at(branch) * std::min(nlodf, 1.0);
}

BranchMetrics compute_metrics(const DcSensitivities& sens, const DcSolution& dc) {
  const std::size_t n = sens.in_service.size();
  BranchMetrics m;
  m.nlodf.resize(n);
  m.m_value.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.nlodf[i] = compute_nlodf(sens, i);
    m.m_value[i] = sens.in_service[i] ? compute_m(dc, m.nlodf[i], i) : 0.0;
  }
  m.in_service = sens.in_service;
  m.rank.resize(n);
  std::iota(m.rank.begin(), m.rank.end(), std::size_t{0});
  std::stable_sort(m.rank.begin(), m.rank.end(), [&](std::size_t a, std::size_t b) {
    if (sens.in_service[a] != sens.in_service[b]) return static_cast<bool>(sens.in_service[a]);
    return std::abs(m.m_value[a]) > std::abs(m.m_value[b]);
  });
  return m;
}

std::vector<std::size_t> rank_branches(const BranchMetrics& metrics, double a_percent) {
  if (!(a_percent > 0.0 && a_percent <= 100.0)) {
    throw InvalidParameterError(fmt::format("top percent must lie in (0, 100], got {}", a_percent));
  }
  auto in_service = static_cast<std::size_t>(
      std::count(metrics.in_service.begin(), metrics.in_service.end(), true));
  auto count = static_cast<std::size_t>(std::ceil(a_percent / 100.0 * static_cast<double>(in_service) - 1e-9));
  count = std::min(count, in_service);
  return {metrics.rank.begin(), metrics.rank.begin() + static_cast<std::ptrdiff_t>(count)};
}

}  // namespace nxscreen
