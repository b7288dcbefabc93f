#include "nxscreen/report.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace nxscreen {

namespace {

std::string number_or_empty(double v, const char* spec) {
  if (std::isnan(v)) return "";
  return fmt::format(fmt::runtime(spec), v);
}

std::string real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.9g}", v);
}

int parse_int(std::string_view s, std::string_view token) {
  int value = 0;
  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') neg = true, ++i;
  if (i == s.size()) throw std::invalid_argument(fmt::format("malformed branch token '{}'", token));
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw std::invalid_argument(fmt::format("malformed branch token '{}'", token));
    }
    value = value * 10 + (s[i] - '0');
  }
  return neg ? -value : value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string branch_list(const NetworkCase& grid, const std::vector<std::size_t>& branches) {
  std::string out;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (i > 0) out += ';';
    out += branch_label(grid, branches[i]);
  }
  return out;
}

std::vector<std::size_t> parse_outage_list(const NetworkCase& grid, std::string_view text) {
  // Split on ';', and on whitespace or ',' outside brackets.
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    char c = i < text.size() ? text[i] : ';';
    if (c == '[') ++depth;
    if (c == ']') --depth;
    bool sep = c == ';' || (depth == 0 && (c == ',' || std::isspace(static_cast<unsigned char>(c))));
    if (!sep) continue;
    auto tok = trim(text.substr(start, i - start));
    if (!tok.empty()) tokens.push_back(tok);
    start = i + 1;
  }

  std::vector<std::size_t> out;
  for (auto tok : tokens) {
    std::string_view body = tok;
    int circuit = 1;
    if (auto hash = body.find('#'); hash != std::string_view::npos) {
      circuit = parse_int(body.substr(hash + 1), tok);
      body = body.substr(0, hash);
    }
    std::string_view a, b;
    if (body.size() > 2 && body.front() == '[' && body.back() == ']') {
      body = body.substr(1, body.size() - 2);
      auto comma = body.find(',');
      if (comma == std::string_view::npos) throw std::invalid_argument(fmt::format("malformed branch '{}'", tok));
      a = trim(body.substr(0, comma));
      b = trim(body.substr(comma + 1));
    } else {
      auto dash = body.find('-', 1);
      if (dash == std::string_view::npos) throw std::invalid_argument(fmt::format("malformed branch '{}'", tok));
      a = body.substr(0, dash);
      b = body.substr(dash + 1);
    }
    auto k = grid.find_branch(parse_int(a, tok), parse_int(b, tok), circuit);
    if (!k) throw std::invalid_argument(fmt::format("no branch {} in case", tok));
    out.push_back(*k);
  }
  return out;
}

std::string report_csv(const NetworkCase& grid, const std::vector<ReportRow>& rows, bool timing) {
  std::string out =
      "x,branches,overflow,undervoltage,overvoltage,reserve_limit,unsolved,islanded_load_mw,gbc_score,runtime_ms\n";
  for (const auto& row : rows) {
    const auto& r = row.record.report;
    out += fmt::format("{},\"{}\",{},{},{},{},{},{:.3f},{},{}\n", row.record.x, branch_list(grid, row.record.branches),
                       r.overflow_count, r.undervoltage_count, r.overvoltage_count, r.reserve_limit ? 1 : 0,
                       r.unsolved ? 1 : 0, r.islanded_load_mw, number_or_empty(row.gbc_score, "{:.6f}"),
                       timing ? fmt::format("{:.3f}", row.record.runtime_ms) : "");
  }
  return out;
}

nlohmann::ordered_json report_json(const NetworkCase& grid, const std::vector<ReportRow>& rows, bool timing) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    const auto& r = row.record.report;
    nlohmann::ordered_json j;
    j["x"] = row.record.x;
    auto pairs = nlohmann::ordered_json::array();
    for (auto k : row.record.branches) pairs.push_back({grid.branches[k].from_bus, grid.branches[k].to_bus});
    j["branches"] = pairs;
    j["branch_index"] = row.record.branches;
    j["overflow"] = r.overflow_count;
    j["undervoltage"] = r.undervoltage_count;
    j["overvoltage"] = r.overvoltage_count;
    j["reserve_limit"] = r.reserve_limit;
    j["unsolved"] = r.unsolved;
    // Rounded like the CSV so both formats are equally stable.
    j["islanded_load_mw"] = std::round(r.islanded_load_mw * 1000.0) / 1000.0;
    j["gbc_score"] = std::isnan(row.gbc_score) ? nlohmann::ordered_json() : nlohmann::ordered_json(std::round(row.gbc_score * 1e6) / 1e6);
    j["runtime_ms"] = timing ? nlohmann::ordered_json(row.record.runtime_ms) : nlohmann::ordered_json();
    j["summary"] = r.summary();
    out.push_back(std::move(j));
  }
  return out;
}

std::string lodf_csv(const NetworkCase& grid, const DcSensitivities& sens) {
  std::string out = "branch,from,to,bridge";
  for (std::size_t k = 0; k < grid.branches.size(); ++k) out += ",\"out " + branch_label(grid, k) + "\"";
  out += '\n';
  for (std::size_t l = 0; l < grid.branches.size(); ++l) {
    const Branch& br = grid.branches[l];
    out += fmt::format("{},{},{},{}", l, br.from_bus, br.to_bus, sens.bridge[l] ? 1 : 0);
    for (std::size_t k = 0; k < grid.branches.size(); ++k) {
      out += ',';
      out += real(sens.lodf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

std::string metrics_csv(const NetworkCase& grid, const DcSensitivities& sens, const BranchMetrics& metrics) {
  std::vector<std::size_t> position(grid.branches.size());
  for (std::size_t r = 0; r < metrics.rank.size(); ++r) position[metrics.rank[r]] = r + 1;
  std::string out = "branch,from,to,pf_mw,nlodf,m,rank\n";
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const Branch& br = grid.branches[k];
    out += fmt::format("{},{},{},{},{},{},{}\n", k, br.from_bus, br.to_bus, real(sens.base_flow[k]),
                       real(metrics.nlodf[k]), real(metrics.m_value[k]),
                       metrics.in_service[k] ? std::to_string(position[k]) : std::string());
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string out;
  for (unsigned int i = 0; i < length; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

nlohmann::ordered_json manifest_json(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["tool"] = "nxscreen";
  j["version"] = std::string(kToolVersion);
  j["case"] = {{"path", manifest.case_path}, {"sha256", manifest.case_hash}};
  j["config"] = manifest.config;
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const auto& [name, ms] : manifest.stages_ms) stages[name] = ms;
  j["stages_ms"] = stages;
  j["reports"] = manifest.reports;
  j["notices"] = manifest.notices;
  return j;
}

}  // namespace nxscreen
