#include "nxscreen/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <stdexcept>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "nxscreen/dc_sensitivities.hpp"

namespace nxscreen {

namespace {

using Complex = std::complex<double>;
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kQLimitSlack = 1e-4;  // MVAr
constexpr double kDivergence = 1e6;    // p.u. mismatch treated as blow-up
constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);
// Ratings are published to 0.01 MVA and synthetic cases load some branches to
// exactly 100%; flows within this relative margin are at, not over, the limit.
constexpr double kRatingTolerance = 1e-4;

enum class NodeType { Off, Slack, PV, PQ };

struct BusData {
  std::vector<NodeType> type;
  std::vector<Complex> s_load;      // p.u.
  std::vector<Complex> s_gen_spec;  // p.u.
  std::vector<double> v_set;
  std::vector<double> q_max, q_min;  // MVAr, summed over online units
  std::vector<std::vector<std::size_t>> gens;  // online generators per bus
};

BusData classify_buses(const NetworkCase& grid) {
  const std::size_t n = grid.buses.size();
  BusData d;
  d.type.assign(n, NodeType::PQ);
  d.s_load.assign(n, {});
  d.s_gen_spec.assign(n, {});
  d.v_set.assign(n, 1.0);
  d.q_max.assign(n, 0.0);
  d.q_min.assign(n, 0.0);
  d.gens.assign(n, {});
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    const Generator& gen = grid.generators[g];
    if (!gen.status) continue;
    auto i = grid.bus_index(gen.bus);
    if (d.gens[i].empty()) d.v_set[i] = gen.v_set;
    d.gens[i].push_back(g);
    d.s_gen_spec[i] += Complex(gen.p_gen, gen.q_gen) / grid.base_mva;
    d.q_max[i] += gen.q_max;
    d.q_min[i] += gen.q_min;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Bus& b = grid.buses[i];
    d.s_load[i] = Complex(b.p_load, b.q_load) / grid.base_mva;
    switch (b.kind) {
      case BusKind::Isolated: d.type[i] = NodeType::Off; break;
      case BusKind::Slack: d.type[i] = NodeType::Slack; break;
      case BusKind::PV: d.type[i] = d.gens[i].empty() ? NodeType::PQ : NodeType::PV; break;
      case BusKind::PQ: d.type[i] = NodeType::PQ; break;
    }
  }
  return d;
}

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double mismatch = std::numeric_limits<double>::infinity();
};

double mismatch_norm(const Eigen::SparseMatrix<Complex>& y, const Eigen::VectorXcd& v,
                     const std::vector<NodeType>& type, const Eigen::VectorXcd& s_bus, Eigen::VectorXcd* injected) {
  *injected = v.cwiseProduct((y * v).conjugate());
  double norm = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Complex mis = (*injected)(i) - s_bus(i);
    if (type[i] == NodeType::PV || type[i] == NodeType::PQ) norm = std::max(norm, std::abs(mis.real()));
    if (type[i] == NodeType::PQ) norm = std::max(norm, std::abs(mis.imag()));
  }
  return std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity();
}

NewtonResult newton(const Eigen::SparseMatrix<Complex>& y, const std::vector<NodeType>& type,
                    const Eigen::VectorXcd& s_bus, const AcOptions& opt, Eigen::VectorXd* vm, Eigen::VectorXd* va) {
  const auto n = static_cast<Eigen::Index>(type.size());
  std::vector<int> col_a(n, -1), col_m(n, -1);
  int dim = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (type[i] == NodeType::PV || type[i] == NodeType::PQ) col_a[i] = dim++;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (type[i] == NodeType::PQ) col_m[i] = dim++;
  }

  NewtonResult res;
  Eigen::VectorXcd v(n), injected;
  auto rebuild = [&] {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar((*vm)(i), (*va)(i));
  };
  rebuild();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0;; ++it) {
    res.mismatch = mismatch_norm(y, v, type, s_bus, &injected);
    res.iterations = it;
    if (res.mismatch < opt.tolerance) {
      res.converged = true;
      return res;
    }
    if (it >= opt.max_iterations || res.mismatch > kDivergence) return res;

    Eigen::VectorXd f(dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex mis = injected(i) - s_bus(i);
      if (col_a[i] >= 0) f(col_a[i]) = mis.real();
      if (col_m[i] >= 0) f(col_m[i]) = mis.imag();
    }

    Eigen::VectorXcd current = y * v;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(y.nonZeros()) * 4);
    for (Eigen::Index k = 0; k < y.outerSize(); ++k) {
      for (Eigen::SparseMatrix<Complex>::InnerIterator it_y(y, k); it_y; ++it_y) {
        const Eigen::Index i = it_y.row();
        if (col_a[i] < 0) continue;
        const Complex yik = it_y.value();
        const Complex vn_k = v(k) / std::abs(v(k));
        Complex d_va = Complex(0.0, 1.0) * v(i) * std::conj(-yik * v(k));
        Complex d_vm = v(i) * std::conj(yik * vn_k);
        if (i == k) {
          d_va += Complex(0.0, 1.0) * v(i) * std::conj(current(i));
          d_vm += std::conj(current(i)) * vn_k;
        }
        if (col_a[k] >= 0) {
          triplets.emplace_back(col_a[i], col_a[k], d_va.real());
          if (col_m[i] >= 0) triplets.emplace_back(col_m[i], col_a[k], d_va.imag());
        }
        if (col_m[k] >= 0) {
          triplets.emplace_back(col_a[i], col_m[k], d_vm.real());
          if (col_m[i] >= 0) triplets.emplace_back(col_m[i], col_m[k], d_vm.imag());
        }
      }
    }
    Eigen::SparseMatrix<double> jac(dim, dim);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    jac.makeCompressed();
    lu.analyzePattern(jac);
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) return res;
    Eigen::VectorXd dx = lu.solve(-f);
    if (lu.info() != Eigen::Success || !dx.allFinite()) return res;

    for (Eigen::Index i = 0; i < n; ++i) {
      if (col_a[i] >= 0) (*va)(i) += dx(col_a[i]);
      if (col_m[i] >= 0) (*vm)(i) += dx(col_m[i]);
    }
    rebuild();
  }
}

// Splits `total` across units proportionally to `share`, equally if all shares are zero.
void split(const std::vector<std::size_t>& units, const std::vector<double>& share, double total,
           std::vector<double>* out) {
  double sum = 0.0;
  for (auto g : units) sum += share[g];
  for (auto g : units) {
    (*out)[g] = sum > 0.0 ? total * share[g] / sum : total / static_cast<double>(units.size());
  }
}

AcSolution attempt(const NetworkCase& grid, const Eigen::SparseMatrix<Complex>& y, const BusData& data,
                   const AcOptions& opt, bool flat) {
  const auto n = static_cast<Eigen::Index>(grid.buses.size());
  std::vector<NodeType> type = data.type;
  Eigen::VectorXd vm(n), va(n);
  double slack_angle = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (type[i] == NodeType::Slack) slack_angle = grid.buses[i].v_ang * kDegToRad;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Bus& b = grid.buses[i];
    if (type[i] == NodeType::Off) {
      vm(i) = 0.0;
      va(i) = 0.0;
      continue;
    }
    vm(i) = flat ? 1.0 : (b.v_mag > 0.0 ? b.v_mag : 1.0);
    va(i) = flat ? slack_angle : b.v_ang * kDegToRad;
    if (type[i] == NodeType::PV || (type[i] == NodeType::Slack && !data.gens[i].empty())) vm(i) = data.v_set[i];
  }

  Eigen::VectorXcd s_bus(n);
  for (Eigen::Index i = 0; i < n; ++i) s_bus(i) = data.s_gen_spec[i] - data.s_load[i];

  AcSolution sol;
  sol.flat_start = flat;
  NewtonResult nr;
  for (int round = 0; round <= opt.max_q_rounds; ++round) {
    nr = newton(y, type, s_bus, opt, &vm, &va);
    sol.iterations += nr.iterations;
    if (!nr.converged || !opt.enforce_q_limits) break;

    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
    Eigen::VectorXcd injected = v.cwiseProduct((y * v).conjugate());
    bool switched = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (type[i] != NodeType::PV) continue;
      double q_gen = injected(i).imag() * grid.base_mva + grid.buses[i].q_load;
      double limit = 0.0;
      if (q_gen > data.q_max[i] + kQLimitSlack) {
        limit = data.q_max[i];
      } else if (q_gen < data.q_min[i] - kQLimitSlack) {
        limit = data.q_min[i];
      } else {
        continue;
      }
      type[i] = NodeType::PQ;
      s_bus(i) = Complex(s_bus(i).real(), limit / grid.base_mva - data.s_load[i].imag());
      switched = true;
    }
    if (!switched || round == opt.max_q_rounds) break;
  }
  sol.converged = nr.converged;
  sol.max_mismatch = nr.mismatch;
  if (!sol.converged) return sol;

  // Report quantities from the converged state.
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
  Eigen::VectorXcd injected = v.cwiseProduct((y * v).conjugate());
  sol.v_mag.assign(vm.data(), vm.data() + n);
  sol.v_ang.assign(va.data(), va.data() + n);

  sol.gen_p.assign(grid.generators.size(), 0.0);
  sol.gen_q.assign(grid.generators.size(), 0.0);
  std::vector<double> p_share(grid.generators.size()), q_share(grid.generators.size());
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    p_share[g] = std::max(grid.generators[g].p_max, 0.0);
    q_share[g] = std::max(grid.generators[g].q_max - grid.generators[g].q_min, 0.0);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& units = data.gens[i];
    if (units.empty()) continue;
    const Bus& b = grid.buses[i];
    if (data.type[i] == NodeType::Slack) {
      split(units, p_share, injected(i).real() * grid.base_mva + b.p_load, &sol.gen_p);
    } else {
      for (auto g : units) sol.gen_p[g] = grid.generators[g].p_gen;
    }
    if (data.type[i] == NodeType::PQ) {
      for (auto g : units) sol.gen_q[g] = grid.generators[g].q_gen;
    } else {
      split(units, q_share, injected(i).imag() * grid.base_mva + b.q_load, &sol.gen_q);
    }
  }

  const std::size_t nl = grid.branches.size();
  sol.p_from.assign(nl, 0.0);
  sol.q_from.assign(nl, 0.0);
  sol.p_to.assign(nl, 0.0);
  sol.q_to.assign(nl, 0.0);
  sol.mva_from.assign(nl, 0.0);
  sol.mva_to.assign(nl, 0.0);
  for (std::size_t k = 0; k < nl; ++k) {
    const Branch& br = grid.branches[k];
    if (!br.status) continue;
    auto f = grid.bus_index(br.from_bus);
    auto t = grid.bus_index(br.to_bus);
    Complex ys = 1.0 / Complex(br.resistance, br.reactance);
    Complex tap = std::polar(br.effective_tap(), br.shift_deg * kDegToRad);
    Complex ytt = ys + Complex(0.0, br.charging / 2.0);
    Complex yff = ytt / (tap * std::conj(tap));
    Complex yft = -ys / std::conj(tap);
    Complex ytf = -ys / tap;
    Complex sf = v(f) * std::conj(yff * v(f) + yft * v(t)) * grid.base_mva;
    Complex st = v(t) * std::conj(ytf * v(f) + ytt * v(t)) * grid.base_mva;
    sol.p_from[k] = sf.real();
    sol.q_from[k] = sf.imag();
    sol.p_to[k] = st.real();
    sol.q_to[k] = st.imag();
    sol.mva_from[k] = std::abs(sf);
    sol.mva_to[k] = std::abs(st);
  }
  return sol;
}

}  // namespace

Eigen::SparseMatrix<Complex> build_admittance(const NetworkCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.buses.size());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Bus& b = grid.buses[i];
    triplets.emplace_back(i, i, Complex(b.g_shunt, b.b_shunt) / grid.base_mva);
  }
  for (const Branch& br : grid.branches) {
    if (!br.status) continue;
    auto f = static_cast<Eigen::Index>(grid.bus_index(br.from_bus));
    auto t = static_cast<Eigen::Index>(grid.bus_index(br.to_bus));
    Complex ys = 1.0 / Complex(br.resistance, br.reactance);
    Complex tap = std::polar(br.effective_tap(), br.shift_deg * kDegToRad);
    Complex ytt = ys + Complex(0.0, br.charging / 2.0);
    triplets.emplace_back(f, f, ytt / (tap * std::conj(tap)));
    triplets.emplace_back(f, t, -ys / std::conj(tap));
    triplets.emplace_back(t, f, -ys / tap);
    triplets.emplace_back(t, t, ytt);
  }
  Eigen::SparseMatrix<Complex> y(n, n);
  y.setFromTriplets(triplets.begin(), triplets.end());
  y.makeCompressed();
  return y;
}

AcSolution solve_ac(const NetworkCase& grid, const AcOptions& options) {
  auto y = build_admittance(grid);
  BusData data = classify_buses(grid);
  AcSolution warm = attempt(grid, y, data, options, false);
  if (warm.converged) return warm;
  AcSolution flat = attempt(grid, y, data, options, true);
  flat.iterations += warm.iterations;
  return flat;
}

OutageResult apply_outage(const NetworkCase& grid, const std::vector<std::size_t>& branches) {
  const std::size_t n = grid.buses.size();
  std::vector<bool> open(grid.branches.size(), false);
  for (auto k : branches) open.at(k) = true;

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    if (!grid.branches[k].status || open[k]) continue;
    auto f = grid.bus_index(grid.branches[k].from_bus);
    auto t = grid.bus_index(grid.branches[k].to_bus);
    adj[f].push_back(t);
    adj[t].push_back(f);
  }
  std::vector<std::size_t> component(n, kNoIndex);
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t root = 0; root < n; ++root) {
    if (!grid.buses[root].in_service() || component[root] != kNoIndex) continue;
    std::vector<std::size_t> comp{root};
    component[root] = members.size();
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (auto v : adj[comp[head]]) {
        if (component[v] == kNoIndex) {
          component[v] = members.size();
          comp.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    members.push_back(std::move(comp));
  }

  OutageResult result;
  for (std::size_t c = 0; c < members.size(); ++c) {
    Island island;
    island.grid.name = grid.name;
    island.grid.base_mva = grid.base_mva;
    std::vector<std::size_t> local(n, kNoIndex);
    bool has_slack = false;
    for (auto i : members[c]) {
      local[i] = island.bus_index.size();
      island.bus_index.push_back(i);
      island.grid.buses.push_back(grid.buses[i]);
      island.load_mw += grid.buses[i].p_load;
      has_slack = has_slack || grid.buses[i].kind == BusKind::Slack;
    }
    for (std::size_t k = 0; k < grid.branches.size(); ++k) {
      const Branch& br = grid.branches[k];
      if (!br.status || open[k]) continue;
      if (component[grid.bus_index(br.from_bus)] != c) continue;
      island.branch_index.push_back(k);
      island.grid.branches.push_back(br);
    }
    std::size_t biggest = kNoIndex;
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
      const Generator& gen = grid.generators[g];
      if (local[grid.bus_index(gen.bus)] == kNoIndex) continue;
      island.gen_index.push_back(g);
      island.grid.generators.push_back(gen);
      if (!gen.status) continue;
      island.energized = true;
      if (biggest == kNoIndex || gen.p_max > grid.generators[biggest].p_max) biggest = g;
    }
    if (island.energized && !has_slack) {
      island.grid.buses[local[grid.bus_index(grid.generators[biggest].bus)]].kind = BusKind::Slack;
    }
    if (!island.energized) result.shed_load_mw += island.load_mw;
    result.islands.push_back(std::move(island));
  }
  return result;
}

std::string ViolationReport::summary() const {
  std::vector<std::string> parts;
  if (overflow_count > 0) parts.push_back(fmt::format("{} Overflow", overflow_count));
  if (undervoltage_count > 0) parts.push_back(fmt::format("{} Undervoltage", undervoltage_count));
  if (overvoltage_count > 0) parts.push_back(fmt::format("{} Overvoltage", overvoltage_count));
  if (islanded_load_mw > 0.0) parts.push_back(fmt::format("Islanded {:.2f} MW", islanded_load_mw));
  if (reserve_limit) parts.emplace_back("Reserve Limit");
  if (unsolved) parts.emplace_back("Unsolved");
  if (parts.empty()) return "None";
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out += (i + 1 == parts.size() ? " and " : ", ") + parts[i];
  return out;
}

ViolationReport classify(const NetworkCase& grid, const OutageResult& outage,
                         const std::vector<IslandSolution>& solutions, double reserve_req_mw) {
  ViolationReport report;
  report.islanded_load_mw = outage.shed_load_mw;
  double margin = 0.0;
  for (std::size_t c = 0; c < outage.islands.size(); ++c) {
    const Island& island = outage.islands[c];
    if (!island.energized) {
      if (island.load_mw > 0.0) {
        report.details.push_back(
            {ViolationKind::ShedLoad, grid.buses[island.bus_index.front()].id, island.load_mw, 0.0});
      }
      continue;
    }
    const IslandSolution& sol = solutions.at(c);
    if (!sol.converged) {
      report.unsolved = true;
      report.details.push_back({ViolationKind::Unsolved, grid.buses[island.bus_index.front()].id, 0.0, 0.0});
    } else {
      report.max_mismatch = std::max(report.max_mismatch, sol.max_mismatch);
      for (std::size_t k = 0; k < island.branch_index.size(); ++k) {
        double rate = island.grid.branches[k].rate_a;
        if (rate <= 0.0) continue;
        double flow = std::max(sol.mva_from[k], sol.mva_to[k]);
        if (flow > rate * (1.0 + kRatingTolerance)) {
          ++report.overflow_count;
          report.details.push_back({ViolationKind::Overflow, static_cast<int>(island.branch_index[k]), flow, rate});
        }
      }
      for (std::size_t i = 0; i < island.bus_index.size() && i < sol.v_mag.size(); ++i) {
        const Bus& b = island.grid.buses[i];
        if (sol.v_mag[i] < b.v_min) {
          ++report.undervoltage_count;
          report.details.push_back({ViolationKind::Undervoltage, b.id, sol.v_mag[i], b.v_min});
        } else if (sol.v_mag[i] > b.v_max) {
          ++report.overvoltage_count;
          report.details.push_back({ViolationKind::Overvoltage, b.id, sol.v_mag[i], b.v_max});
        }
      }
    }
    if (island.load_mw <= 0.0) continue;
    for (std::size_t g = 0; g < island.gen_index.size(); ++g) {
      const Generator& gen = island.grid.generators[g];
      if (!gen.status) continue;
      double p = sol.converged ? sol.gen_p[g] : gen.p_gen;
      margin += gen.p_max - p;
      if (sol.converged && p > gen.p_max + 1e-6) {
        report.reserve_limit = true;
        report.details.push_back({ViolationKind::SlackCapacity, static_cast<int>(island.gen_index[g]), p, gen.p_max});
      }
    }
  }
  report.reserve_margin_mw = margin;
  if (margin < reserve_req_mw) {
    report.reserve_limit = true;
    report.details.push_back({ViolationKind::ReserveMargin, 0, margin, reserve_req_mw});
  }
  return report;
}

ContingencyValidator::ContingencyValidator(NetworkCase grid, ValidationOptions options)
    : grid_(std::move(grid)), options_(options) {
  reserve_req_mw_ = options_.reserve_req_mw;
  if (std::isnan(reserve_req_mw_)) {
    reserve_req_mw_ = 0.0;
    for (const Generator& g : grid_.generators) {
      if (g.status) reserve_req_mw_ = std::max(reserve_req_mw_, g.p_max);
    }
  }
  warm_ = grid_;
  if (options_.method == ValidationMethod::Ac) {
    base_ = solve_ac(grid_, options_.ac);
    if (!base_.converged) throw std::runtime_error("base case AC power flow did not converge");
    for (std::size_t i = 0; i < warm_.buses.size(); ++i) {
      if (!warm_.buses[i].in_service()) continue;
      warm_.buses[i].v_mag = base_.v_mag[i];
      warm_.buses[i].v_ang = base_.v_ang[i] / kDegToRad;
    }
  }
}

ContingencyRecord ContingencyValidator::validate(const std::vector<std::size_t>& branches) const {
  auto start = std::chrono::steady_clock::now();
  ContingencyRecord record;
  record.branches = branches;
  std::sort(record.branches.begin(), record.branches.end());
  record.branches.erase(std::unique(record.branches.begin(), record.branches.end()), record.branches.end());
  for (auto k : record.branches) {
    if (k >= grid_.branches.size() || !grid_.branches[k].status) {
      throw std::invalid_argument(fmt::format("branch {} is not an in-service branch", k));
    }
  }
  record.x = record.branches.size();

  OutageResult outage = apply_outage(warm_, record.branches);
  std::vector<IslandSolution> solutions(outage.islands.size());
  for (std::size_t c = 0; c < outage.islands.size(); ++c) {
    const Island& island = outage.islands[c];
    if (!island.energized) continue;
    IslandSolution& out = solutions[c];
    if (options_.method == ValidationMethod::Ac) {
      AcSolution sol = solve_ac(island.grid, options_.ac);
      out.converged = sol.converged;
      out.max_mismatch = sol.max_mismatch;
      out.v_mag = std::move(sol.v_mag);
      out.mva_from = std::move(sol.mva_from);
      out.mva_to = std::move(sol.mva_to);
      out.gen_p = std::move(sol.gen_p);
      continue;
    }
    try {
      DcSolution dc = solve_dc(island.grid);
      out.converged = true;
      out.mva_from.resize(dc.flows.size());
      for (std::size_t k = 0; k < dc.flows.size(); ++k) out.mva_from[k] = std::abs(dc.flows[k]);
      out.mva_to = out.mva_from;
      // Lossless balance: the slack bus units pick up the island mismatch.
      out.gen_p.assign(island.grid.generators.size(), 0.0);
      double imbalance = 0.0;
      for (double p : dc_injections(island.grid)) imbalance -= p;
      std::vector<std::size_t> slack_units;
      std::vector<double> share(island.grid.generators.size(), 0.0);
      for (std::size_t g = 0; g < island.grid.generators.size(); ++g) {
        const Generator& gen = island.grid.generators[g];
        if (!gen.status) continue;
        out.gen_p[g] = gen.p_gen;
        share[g] = std::max(gen.p_max, 0.0);
        if (island.grid.buses[island.grid.bus_index(gen.bus)].kind == BusKind::Slack) slack_units.push_back(g);
      }
      if (!slack_units.empty()) {
        std::vector<double> extra(island.grid.generators.size(), 0.0);
        split(slack_units, share, imbalance, &extra);
        for (auto g : slack_units) out.gen_p[g] += extra[g];
      }
    } catch (const SingularSystemError&) {
      out.converged = false;
    }
  }
  record.report = classify(grid_, outage, solutions, reserve_req_mw_);
  record.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace nxscreen
