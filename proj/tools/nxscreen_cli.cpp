// nxscreen: N-x contingency screening from the command line.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nxscreen/case_io.hpp"
#include "nxscreen/dc_sensitivities.hpp"
#include "nxscreen/grid_graph.hpp"
#include "nxscreen/metrics.hpp"
#include "nxscreen/oracle.hpp"
#include "nxscreen/parallel.hpp"
#include "nxscreen/report.hpp"
#include "nxscreen/screening.hpp"
#include "nxscreen/validation.hpp"

namespace fs = std::filesystem;
using namespace nxscreen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;

// Thrown for bad flags or inputs; main() turns it into exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

// Short names for the bundled fixtures.
fs::path resolve_case(const std::string& name) {
  if (fs::exists(name)) return name;
  static const std::map<std::string, std::string> aliases = {
      {"case200", "case_ACTIVSg200.m"}, {"case500", "case_ACTIVSg500.m"}, {"triangle3", "triangle3.m"},
      {"case9", "case9.m"},             {"case14", "case14.m"},           {"case30", "case30.m"},
  };
  fs::path dir = NXSCREEN_DATA_DIR;
  if (auto it = aliases.find(name); it != aliases.end()) return dir / it->second;
  if (fs::exists(dir / name)) return dir / name;
  if (fs::exists(dir / (name + ".m"))) return dir / (name + ".m");
  throw InputError(fmt::format("case '{}' not found", name));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read {}", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", p.string()));
  out << text;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

struct CaseArgs {
  std::string path;
  NetworkCase load() const { return load_case_file(resolve_case(path).string()); }
};

struct ValidationArgs {
  std::string method = "ac";
  double reserve_req = std::nan("");

  ValidationOptions options() const {
    ValidationOptions o;
    o.method = method == "dc" ? ValidationMethod::Dc : ValidationMethod::Ac;
    o.reserve_req_mw = reserve_req;
    return o;
  }
};

void add_validation_flags(CLI::App* cmd, ValidationArgs& v) {
  cmd->add_option("--method", v.method, "Validation power flow")->check(CLI::IsMember({"ac", "dc"}));
  cmd->add_option("--reserve-req", v.reserve_req, "Required spinning reserve in MW (default: largest online unit)");
}

PairExclusion parse_exclusion(const std::string& s) {
  if (s == "both") return PairExclusion::BothEndpoints;
  if (s == "either") return PairExclusion::EitherEndpoint;
  return PairExclusion::None;
}

std::pair<std::size_t, std::size_t> parse_sweep(const std::string& s) {
  auto dots = s.find("..");
  if (dots == std::string::npos) throw InputError(fmt::format("--sweep-x expects A..B, got '{}'", s));
  try {
    long a = std::stol(s.substr(0, dots));
    long b = std::stol(s.substr(dots + 2));
    if (a < 1 || b < a) throw InputError(fmt::format("--sweep-x range '{}' is empty or starts below 1", s));
    return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
  } catch (const std::logic_error&) {
    throw InputError(fmt::format("--sweep-x expects A..B, got '{}'", s));
  }
}

void print_rows(const NetworkCase& grid, const std::vector<ReportRow>& rows) {
  for (const auto& row : rows) {
    std::string score = std::isnan(row.gbc_score) ? "" : fmt::format("  gbc {:.3f}", row.gbc_score);
    fmt::print("x={}  {}{}  {}\n", row.record.x, branch_list(grid, row.record.branches), score,
               row.record.report.summary());
  }
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  CaseArgs c;
  ValidationArgs v;
  std::size_t x = 1;
  int distance = 0;
  int search_level = 0;
  double top_percent = 5.0;
  std::string output = "csv";
  std::string out = "out";
  std::size_t seed_limit = 0;
  std::size_t max_candidates = 0;
  std::string sweep;
  unsigned threads = 1;
  std::string exclusion = "none";
  bool timing = false;
  int violation_exit = 1;
};

int cmd_analyze(const AnalyzeArgs& a) {
  fs::path case_path = resolve_case(a.c.path);
  NetworkCase grid = load_case_file(case_path.string());

  ScreeningConfig cfg;
  cfg.x = a.x;
  cfg.distance = a.distance;
  cfg.search_level = a.search_level;
  cfg.a_percent = a.top_percent;
  cfg.seed_limit = a.seed_limit;
  cfg.max_candidates = a.max_candidates;
  cfg.threads = std::max(1u, a.threads);
  cfg.exclusion = parse_exclusion(a.exclusion);
  check_config(cfg);

  std::size_t x_lo = a.x, x_hi = a.x;
  if (!a.sweep.empty()) std::tie(x_lo, x_hi) = parse_sweep(a.sweep);

  RunManifest manifest;
  manifest.case_path = case_path.string();
  manifest.case_hash = sha256_hex(read_file(case_path));
  manifest.config = {{"x", a.sweep.empty() ? nlohmann::ordered_json(a.x) : nlohmann::ordered_json(a.sweep)},
                     {"distance", a.distance},
                     {"search_level", a.search_level},
                     {"top_percent", a.top_percent},
                     {"reserve_req_mw", std::isnan(a.v.reserve_req) ? nlohmann::ordered_json("largest-unit")
                                                                     : nlohmann::ordered_json(a.v.reserve_req)},
                     {"method", a.v.method},
                     {"output", a.output},
                     {"seed_limit", a.seed_limit},
                     {"max_candidates", a.max_candidates},
                     {"pair_exclusion", a.exclusion},
                     {"threads", cfg.threads}};

  auto t0 = Clock::now();
  ScreeningContext ctx = prepare_screening(grid);
  manifest.stages_ms.emplace_back("metrics", ctx.build_ms);
  t0 = Clock::now();
  ContingencyValidator validator(grid, a.v.options());
  manifest.stages_ms.emplace_back("base_solve", ms_since(t0));
  manifest.config["reserve_req_mw_effective"] = validator.reserve_req_mw();

  bool any_violation = false;
  for (std::size_t x = x_lo; x <= x_hi; ++x) {
    cfg.x = x;
    ScreeningResult res = run_screening(ctx, grid, cfg);
    for (const auto& n : res.notices) std::cerr << "notice: " << n << '\n';
    manifest.notices.insert(manifest.notices.end(), res.notices.begin(), res.notices.end());

    t0 = Clock::now();
    std::vector<ReportRow> rows(res.candidates.size());
    parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
      rows[i].record = validator.validate(res.candidates[i].branches);
      rows[i].gbc_score = res.candidates[i].gbc_score();
    });
    double validation_ms = ms_since(t0);

    std::string prefix = a.sweep.empty() ? "" : fmt::format("x{}.", x);
    manifest.stages_ms.emplace_back(prefix + "subgraphs", res.timings.subgraph_ms);
    manifest.stages_ms.emplace_back(prefix + "gbc", res.timings.gbc_ms);
    manifest.stages_ms.emplace_back(prefix + "validation", validation_ms);

    std::string name = a.sweep.empty() ? "report" : fmt::format("report_x{}", x);
    name += a.output == "json" ? ".json" : ".csv";
    std::string body = a.output == "json" ? report_json(grid, rows, a.timing).dump(2) + "\n"
                                          : report_csv(grid, rows, a.timing);
    write_file(fs::path(a.out) / name, body);
    manifest.reports.push_back(name);

    print_rows(grid, rows);
    for (const auto& r : rows) any_violation = any_violation || r.record.report.any();
  }
  write_file(fs::path(a.out) / "manifest.json", manifest_json(manifest).dump(2) + "\n");
  return any_violation ? a.violation_exit : kExitOk;
}

// ---- brute-force -------------------------------------------------------------

struct BruteArgs {
  CaseArgs c;
  ValidationArgs v;
  std::size_t x = 1;
  bool full_ac = false;
  unsigned threads = 1;
  std::string output = "csv";
  std::string out;
  int violation_exit = 1;
};

int cmd_brute_force(const BruteArgs& a) {
  NetworkCase grid = a.c.load();
  if (a.x != 1 && a.x != 2) throw InputError("brute-force supports --x 1 or 2");
  ContingencyValidator validator(grid, a.v.options());
  BruteForceOptions opts;
  opts.dc_prescreen = !a.full_ac;
  opts.threads = std::max(1u, a.threads);
  BruteForceResult res = brute_force_contingencies(validator, a.x, opts);
  std::vector<ReportRow> rows;
  for (auto& r : res.violating()) rows.push_back({std::move(r), std::nan("")});
  std::cerr << fmt::format("enumerated {} sets, {} skipped by DC prescreen, {} violating\n", res.enumerated_count,
                           res.screened_count, rows.size());
  std::string body = a.output == "json" ? report_json(grid, rows).dump(2) + "\n" : report_csv(grid, rows);
  if (a.out.empty()) {
    print_rows(grid, rows);
  } else {
    emit(a.out, body);
  }
  return rows.empty() ? kExitOk : a.violation_exit;
}

// ---- solve -------------------------------------------------------------------

int cmd_solve(const CaseArgs& c, const ValidationArgs& v, const std::string& outage, int violation_exit) {
  NetworkCase grid = c.load();
  std::vector<std::size_t> branches;
  try {
    branches = parse_outage_list(grid, outage);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  ContingencyValidator validator(grid, v.options());
  if (v.method == "ac") {
    const AcSolution& base = validator.base_solution();
    fmt::print("base case: converged in {} iterations, max mismatch {:.3e} p.u.\n", base.iterations,
               base.max_mismatch);
  }
  ContingencyRecord rec = validator.validate(branches);
  fmt::print("outage: {}\n", branches.empty() ? "(none)" : branch_list(grid, rec.branches));
  fmt::print("reserve margin {:.2f} MW (required {:.2f} MW)\n", rec.report.reserve_margin_mw,
             validator.reserve_req_mw());
  if (rec.report.max_mismatch > 0.0) fmt::print("max mismatch {:.3e} p.u.\n", rec.report.max_mismatch);
  fmt::print("violations: {}\n", rec.report.summary());
  for (const auto& d : rec.report.details) {
    switch (d.kind) {
      case ViolationKind::Overflow:
        fmt::print("  overflow     {}  {:.4f} MVA > {:.2f}\n", branch_label(grid, d.element), d.value, d.limit);
        break;
      case ViolationKind::Undervoltage:
        fmt::print("  undervoltage bus {}  {:.4f} < {:.4f}\n", d.element, d.value, d.limit);
        break;
      case ViolationKind::Overvoltage:
        fmt::print("  overvoltage  bus {}  {:.4f} > {:.4f}\n", d.element, d.value, d.limit);
        break;
      case ViolationKind::ReserveMargin:
        fmt::print("  reserve      margin {:.2f} MW < {:.2f}\n", d.value, d.limit);
        break;
      case ViolationKind::SlackCapacity:
        fmt::print("  slack unit   gen {} at bus {}  {:.2f} MW > p_max {:.2f}\n", d.element,
                   grid.generators[d.element].bus, d.value, d.limit);
        break;
      case ViolationKind::Unsolved:
        fmt::print("  unsolved     island of bus {}\n", d.element);
        break;
      case ViolationKind::ShedLoad:
        fmt::print("  shed load    island of bus {}  {:.2f} MW\n", d.element, d.value);
        break;
    }
  }
  return rec.report.any() ? violation_exit : kExitOk;
}

// ---- subgraph ----------------------------------------------------------------

int cmd_subgraph(const CaseArgs& c, const std::string& seed, int distance, int search_level, double top_percent,
                 const std::string& out) {
  NetworkCase grid = c.load();
  ScreeningContext ctx = prepare_screening(grid);
  std::size_t seed_branch = 0;
  if (seed.empty()) {
    auto top = rank_branches(ctx.metrics, top_percent);
    if (top.empty()) throw InputError("no in-service branches");
    seed_branch = top.front();
  } else {
    std::vector<std::size_t> parsed;
    try {
      parsed = parse_outage_list(grid, seed);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    if (parsed.size() != 1) throw InputError("--seed takes exactly one branch");
    seed_branch = parsed.front();
    if (!grid.branches[seed_branch].status) throw InputError("seed branch is out of service");
  }
  auto sub = build_subgraph(ctx.graph, seed_branch, rank_branches(ctx.metrics, top_percent),
                            {distance, search_level});
  emit(out, to_dot(grid, ctx.graph, sub));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-x contingency screening with LODF impact metrics and group betweenness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto case_flag = [](CLI::App* cmd, CaseArgs& c) {
    cmd->add_option("--case", c.path, "Case file or fixture name (case200, case500, triangle3, ...)")->required();
  };

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Screen for critical N-x sets and validate them");
  case_flag(analyze, an.c);
  add_validation_flags(analyze, an.v);
  analyze->add_option("--x", an.x, "Contingency order")->check(CLI::PositiveNumber);
  analyze->add_option("--distance", an.distance, "Hop distance d for desired branches");
  analyze->add_option("--search-level", an.search_level, "Hop radius sl of the search subgraph");
  analyze->add_option("--top-percent", an.top_percent, "Share a of branches used as seeds, in percent");
  analyze->add_option("--output", an.output, "Report format")->check(CLI::IsMember({"csv", "json"}));
  analyze->add_option("--out", an.out, "Output directory");
  analyze->add_option("--seed-limit", an.seed_limit, "Use at most this many seeds (0 = all)");
  analyze->add_option("--max-candidates", an.max_candidates, "Cap on emitted sets (0 = none)");
  analyze->add_option("--sweep-x", an.sweep, "Run every x in A..B");
  analyze->add_option("--threads", an.threads, "Worker threads");
  analyze->add_option("--pair-exclusion", an.exclusion, "Pairs dropped from the betweenness sum")
      ->check(CLI::IsMember({"none", "both", "either"}));
  analyze->add_flag("--timing", an.timing, "Write per-row runtimes into the report");
  analyze->add_option("--violation-exit", an.violation_exit, "Exit code when violations are found");

  CaseArgs lodf_case;
  std::string lodf_out;
  auto* lodf = app.add_subcommand("lodf", "Write the LODF matrix and bridge flags as CSV");
  case_flag(lodf, lodf_case);
  lodf->add_option("--out", lodf_out, "Output file (default stdout)");

  CaseArgs metrics_case;
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Write PF, NLODF, M and rank per branch as CSV");
  case_flag(metrics, metrics_case);
  metrics->add_option("--out", metrics_out, "Output file (default stdout)");

  CaseArgs sub_case;
  std::string sub_seed, sub_out;
  int sub_d = 0, sub_sl = 0;
  double sub_top = 5.0;
  auto* subgraph = app.add_subcommand("subgraph", "Write one seed's search subgraph in DOT format");
  case_flag(subgraph, sub_case);
  subgraph->add_option("--seed", sub_seed, "Seed branch, e.g. 189-187 (default: highest |M|)");
  subgraph->add_option("--distance", sub_d, "Hop distance d");
  subgraph->add_option("--search-level", sub_sl, "Hop radius sl");
  subgraph->add_option("--top-percent", sub_top, "Share of high-impact branches, in percent");
  subgraph->add_option("--out", sub_out, "Output file (default stdout)");

  BruteArgs bf;
  auto* brute = app.add_subcommand("brute-force", "Validate every N-1 or N-2 outage set");
  case_flag(brute, bf.c);
  add_validation_flags(brute, bf.v);
  brute->add_option("--x", bf.x, "Contingency order (1 or 2)");
  brute->add_flag("--full-ac", bf.full_ac, "Solve every set instead of DC prescreening");
  brute->add_option("--threads", bf.threads, "Worker threads");
  brute->add_option("--output", bf.output, "Report format")->check(CLI::IsMember({"csv", "json"}));
  brute->add_option("--out", bf.out, "Report file (default: summary on stdout)");
  brute->add_option("--violation-exit", bf.violation_exit, "Exit code when violations are found");

  CaseArgs solve_case;
  ValidationArgs solve_v;
  std::string solve_outage;
  int solve_exit = 1;
  auto* solve = app.add_subcommand("solve", "Solve the base case or one outage set and classify violations");
  case_flag(solve, solve_case);
  add_validation_flags(solve, solve_v);
  solve->add_option("--outage", solve_outage, "Branches to switch out, e.g. \"[136,133];[135,133]\" or 136-133");
  solve->add_option("--violation-exit", solve_exit, "Exit code when violations are found");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(an);
    if (lodf->parsed()) {
      NetworkCase grid = lodf_case.load();
      emit(lodf_out, lodf_csv(grid, compute_lodf(grid, solve_dc(grid))));
      return kExitOk;
    }
    if (metrics->parsed()) {
      NetworkCase grid = metrics_case.load();
      DcSolution dc = solve_dc(grid);
      DcSensitivities sens = compute_lodf(grid, dc);
      emit(metrics_out, metrics_csv(grid, sens, compute_metrics(sens, dc)));
      return kExitOk;
    }
    if (subgraph->parsed()) return cmd_subgraph(sub_case, sub_seed, sub_d, sub_sl, sub_top, sub_out);
    if (brute->parsed()) return cmd_brute_force(bf);
    if (solve->parsed()) return cmd_solve(solve_case, solve_v, solve_outage, solve_exit);
  } catch (const std::exception& e) {
    // Bad case files, flags, disconnected grids and a diverging base case all
    // count as input errors.
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
