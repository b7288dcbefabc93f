#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nxscreen/case_io.hpp"
#include "nxscreen/dc_sensitivities.hpp"
#include "nxscreen/metrics.hpp"
#include "nxscreen/validation.hpp"

namespace nxscreen {

inline constexpr std::string_view kToolVersion = "0.3.1";

struct ReportRow {
  ContingencyRecord record;
  double gbc_score = std::numeric_limits<double>::quiet_NaN();  // NaN for brute-force rows
};

// "[136,133];[135,133]" with "#c" circuit suffixes; parse_outage_list reads it back.
std::string branch_list(const NetworkCase& grid, const std::vector<std::size_t>& branches);

// Accepts "[f,t]" or "f-t" tokens, optionally with "#c", separated by ';',
// ',' between tokens of the dash form, or whitespace. Throws
// std::invalid_argument for unknown branches.
std::vector<std::size_t> parse_outage_list(const NetworkCase& grid, std::string_view text);

// runtime_ms cells stay empty unless `timing` is set, keeping reports
// byte-stable across runs; measured times go to the manifest.
std::string report_csv(const NetworkCase& grid, const std::vector<ReportRow>& rows, bool timing = false);
nlohmann::ordered_json report_json(const NetworkCase& grid, const std::vector<ReportRow>& rows, bool timing = false);

std::string lodf_csv(const NetworkCase& grid, const DcSensitivities& sens);
std::string metrics_csv(const NetworkCase& grid, const DcSensitivities& sens, const BranchMetrics& metrics);

std::string sha256_hex(std::string_view bytes);

struct RunManifest {
  nlohmann::ordered_json config;
  std::string case_path;
  std::string case_hash;
  std::vector<std::pair<std::string, double>> stages_ms;
  std::vector<std::string> reports;
  std::vector<std::string> notices;
};

nlohmann::ordered_json manifest_json(const RunManifest& manifest);

}  // namespace nxscreen
