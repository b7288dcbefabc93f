#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nxscreen {

enum class BusKind { PQ = 1, PV = 2, Slack = 3, Isolated = 4 };

// Columns the model does not interpret are kept, in file order, in `extra`
// so they survive a parse/serialize round trip.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;   // MW
  double q_load = 0.0;   // MVAr
  double g_shunt = 0.0;  // MW at 1 p.u.
  double b_shunt = 0.0;  // MVAr at 1 p.u.
  double v_mag = 1.0;    // p.u.
  double v_ang = 0.0;    // degrees
  double base_kv = 0.0;
  double v_min = 0.95;
  double v_max = 1.05;
  std::vector<double> extra;

  bool in_service() const { return kind != BusKind::Isolated; }
  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double resistance = 0.0;
  double reactance = 0.0;
  double charging = 0.0;
  double rate_a = 0.0;      // MVA, 0 = unlimited
  double tap_ratio = 0.0;   // 0 = line (unity)
  double shift_deg = 0.0;
  bool status = true;
  std::vector<double> extra;

  double effective_tap() const { return tap_ratio == 0.0 ? 1.0 : tap_ratio; }
  bool operator==(const Branch&) const = default;
};

struct Generator {
  int bus = 0;
  double p_gen = 0.0;  // MW
  double q_gen = 0.0;  // MVAr
  double q_max = 0.0;
  double q_min = 0.0;
  double v_set = 1.0;  // p.u.
  double p_max = 0.0;
  double p_min = 0.0;
  bool status = true;
  std::vector<double> extra;

  bool operator==(const Generator&) const = default;
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  // Dense position of a bus id in `buses`; throws std::out_of_range.
  std::size_t bus_index(int id) const;
  std::optional<std::size_t> find_bus(int id) const;
  // Dense position of an in-service branch joining the two buses in either
  // orientation; `circuit` selects among parallel branches (1-based).
  std::optional<std::size_t> find_branch(int bus_a, int bus_b, int circuit = 1) const;
  // 1-based ordinal of `branch` among branches sharing its end buses.
  int circuit_of(std::size_t branch) const;
  std::size_t in_service_branch_count() const;

  bool operator==(const NetworkCase& other) const {
    return base_mva == other.base_mva && buses == other.buses &&
           branches == other.branches && generators == other.generators;
  }
};

class CaseFormatError : public std::runtime_error {
 public:
  CaseFormatError(std::size_t line_number, const std::string& description);

  std::size_t line_number() const { return line_number_; }
  const std::string& description() const { return description_; }

 private:
  std::size_t line_number_;
  std::string description_;
};

NetworkCase parse_case(std::string_view text);
NetworkCase load_case_file(const std::filesystem::path& path);
std::string serialize_case(const NetworkCase& grid);

// Checks the model invariants the parser enforces; `line_number` 0 is used
// for errors raised outside of parsing.
void validate_case(const NetworkCase& grid);

// "[from,to]" with a "#k" suffix for the k-th parallel circuit (k > 1).
std::string branch_label(const NetworkCase& grid, std::size_t branch);

}  // namespace nxscreen
