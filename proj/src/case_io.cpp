#include "nxscreen/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "nxscreen/union_find.hpp"

namespace nxscreen {

namespace {

// Column positions of the open tabular case format (0-based).
namespace bus_col {
constexpr std::size_t kId = 0, kType = 1, kPd = 2, kQd = 3, kGs = 4, kBs = 5, kVm = 7,
                      kVa = 8, kBaseKv = 9, kVmax = 11, kVmin = 12, kMinWidth = 13;
}
namespace gen_col {
constexpr std::size_t kBus = 0, kPg = 1, kQg = 2, kQmax = 3, kQmin = 4, kVg = 5, kStatus = 7,
                      kPmax = 8, kPmin = 9, kMinWidth = 10;
}
namespace branch_col {
constexpr std::size_t kFrom = 0, kTo = 1, kR = 2, kX = 3, kB = 4, kRateA = 5, kRatio = 8,
                      kAngle = 9, kStatus = 10, kMinWidth = 11;
}

constexpr double kDefaultVmin = 0.95;
constexpr double kDefaultVmax = 1.05;

template <std::size_t N>
bool is_named(std::size_t col, const std::size_t (&named)[N]) {
  return std::find(std::begin(named), std::end(named), col) != std::end(named);
}

constexpr std::size_t kBusNamed[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 11, 12};
constexpr std::size_t kGenNamed[] = {0, 1, 2, 3, 4, 5, 7, 8, 9};
constexpr std::size_t kBranchNamed[] = {0, 1, 2, 3, 4, 5, 8, 9, 10};

template <std::size_t N>
std::vector<double> collect_extra(const std::vector<double>& row, const std::size_t (&named)[N]) {
  std::vector<double> extra;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (!is_named(c, named)) extra.push_back(row[c]);
  }
  return extra;
}

// Rebuilds a full row: named columns from `named_values`, the remaining slots
// filled in order from `extra` (or `fill` once `extra` runs out).
template <std::size_t N>
std::vector<double> assemble_row(std::size_t min_width, const std::size_t (&named)[N],
                                 const std::map<std::size_t, double>& named_values,
                                 const std::vector<double>& extra,
                                 const std::map<std::size_t, double>& fill) {
  std::size_t unnamed_slots = min_width - N;
  std::size_t width = min_width + (extra.size() > unnamed_slots ? extra.size() - unnamed_slots : 0);
  std::vector<double> row(width, 0.0);
  std::size_t next_extra = 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (is_named(c, named)) {
      row[c] = named_values.at(c);
    } else if (next_extra < extra.size()) {
      row[c] = extra[next_extra++];
    } else if (auto it = fill.find(c); it != fill.end()) {
      row[c] = it->second;
    }
  }
  return row;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view line) {
  auto pos = line.find('%');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

double parse_number(std::string_view token, std::size_t line_no) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw CaseFormatError(line_no, fmt::format("malformed number '{}'", token));
  }
  return value;
}

enum class Table { None, Bus, Gen, Branch, Skip };

struct Row {
  std::vector<double> values;
  std::size_t line = 0;
};

struct RawCase {
  std::optional<double> base_mva;
  std::size_t base_line = 0;
  std::vector<Row> bus, gen, branch;
  std::size_t bus_header = 0, gen_header = 0, branch_header = 0;
  std::string name;
};

// Matches "<prefix.>name = <rest>" and returns (name, rest).
std::optional<std::pair<std::string_view, std::string_view>> split_assignment(std::string_view line) {
  auto eq = line.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  auto lhs = trim(line.substr(0, eq));
  auto dot = lhs.rfind('.');
  if (dot != std::string_view::npos) lhs = lhs.substr(dot + 1);
  return std::make_pair(lhs, trim(line.substr(eq + 1)));
}

void add_row_tokens(std::string_view chunk, std::size_t line_no, std::vector<Row>* rows) {
  Row row;
  row.line = line_no;
  std::size_t i = 0;
  while (i < chunk.size()) {
    while (i < chunk.size() && (chunk[i] == ' ' || chunk[i] == '\t' || chunk[i] == ',' || chunk[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < chunk.size() && chunk[j] != ' ' && chunk[j] != '\t' && chunk[j] != ',' && chunk[j] != '\r') ++j;
    if (j > i) row.values.push_back(parse_number(chunk.substr(i, j - i), line_no));
    i = j;
  }
  if (!row.values.empty() && rows != nullptr) rows->push_back(std::move(row));
}

RawCase scan(std::string_view text) {
  RawCase raw;
  Table table = Table::None;
  bool in_cell = false;
  std::vector<Row>* target = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (in_cell) {
      if (line.find('}') != std::string_view::npos) in_cell = false;
      continue;
    }
    std::string_view body = trim(strip_comment(line));
    if (body.empty()) {
      if (pos > text.size()) break;
      continue;
    }

    if (table == Table::None) {
      if (body.starts_with("function")) {
        auto eq = body.find('=');
        if (eq != std::string_view::npos) raw.name = std::string(trim(body.substr(eq + 1)));
        continue;
      }
      auto assignment = split_assignment(body);
      if (!assignment) continue;
      auto [name, rest] = *assignment;
      if (rest.starts_with("{")) {
        if (rest.find('}') == std::string_view::npos) in_cell = true;
        continue;
      }
      if (name == "baseMVA") {
        auto value = trim(rest);
        if (value.ends_with(';')) value.remove_suffix(1);
        raw.base_mva = parse_number(trim(value), line_no);
        raw.base_line = line_no;
        continue;
      }
      if (!rest.starts_with("[")) continue;
      if (name == "bus") {
        table = Table::Bus;
        target = &raw.bus;
        raw.bus_header = line_no;
      } else if (name == "gen") {
        table = Table::Gen;
        target = &raw.gen;
        raw.gen_header = line_no;
      } else if (name == "branch") {
        table = Table::Branch;
        target = &raw.branch;
        raw.branch_header = line_no;
      } else {
        table = Table::Skip;
        target = nullptr;
      }
      body = trim(rest.substr(1));
      if (body.empty()) continue;
    }

    // Inside a matrix: rows end at ';' or end of line, matrix ends at ']'.
    bool closes = false;
    if (auto close = body.find(']'); close != std::string_view::npos) {
      closes = true;
      body = body.substr(0, close);
    }
    std::size_t start = 0;
    while (start <= body.size()) {
      auto semi = body.find(';', start);
      auto chunk = body.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start);
      add_row_tokens(chunk, line_no, target);
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    if (closes) {
      table = Table::None;
      target = nullptr;
    }
    if (pos > text.size()) break;
  }
  if (table != Table::None) throw CaseFormatError(line_no, "unterminated matrix");
  return raw;
}

BusKind bus_kind(double code, std::size_t line_no) {
  switch (static_cast<int>(code)) {
    case 1: return BusKind::PQ;
    case 2: return BusKind::PV;
    case 3: return BusKind::Slack;
    case 4: return BusKind::Isolated;
    default:
      throw CaseFormatError(line_no, fmt::format("unknown bus type code {}", code));
  }
}

void require_width(const Row& row, std::size_t width, std::string_view table) {
  if (row.values.size() < width) {
    throw CaseFormatError(row.line, fmt::format("{} row has {} columns, expected at least {}", table,
                                                row.values.size(), width));
  }
}

bool is_integral(double v) { return v == static_cast<double>(static_cast<long long>(v)); }

// Shared invariant checker; line numbers are 0 when the case was not parsed.
void check_invariants(const NetworkCase& grid, std::span<const std::size_t> bus_lines,
                      std::span<const std::size_t> branch_lines, std::span<const std::size_t> gen_lines,
                      std::size_t bus_header) {
  auto line_of = [](std::span<const std::size_t> lines, std::size_t i) -> std::size_t {
    return i < lines.size() ? lines[i] : 0;
  };
  if (!(grid.base_mva > 0.0)) throw CaseFormatError(0, "baseMVA must be positive");
  if (grid.buses.empty()) throw CaseFormatError(bus_header, "bus table is empty");

  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    const Bus& b = grid.buses[i];
    if (!index.emplace(b.id, i).second) {
      throw CaseFormatError(line_of(bus_lines, i), fmt::format("duplicate bus id {}", b.id));
    }
    if (b.v_min != 0.0 && b.v_max != 0.0 && !(b.v_min < b.v_max)) {
      throw CaseFormatError(line_of(bus_lines, i),
                            fmt::format("bus {} has v_min {} not below v_max {}", b.id, b.v_min, b.v_max));
    }
  }
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const Branch& br = grid.branches[k];
    for (int end : {br.from_bus, br.to_bus}) {
      if (!index.contains(end)) {
        throw CaseFormatError(line_of(branch_lines, k),
                              fmt::format("branch references bus {} absent from bus table", end));
      }
    }
    if (!br.status) continue;
    if (br.reactance == 0.0) {
      throw CaseFormatError(line_of(branch_lines, k),
                            fmt::format("in-service branch [{},{}] has zero reactance", br.from_bus, br.to_bus));
    }
    if (br.from_bus == br.to_bus) {
      throw CaseFormatError(line_of(branch_lines, k), fmt::format("branch loops on bus {}", br.from_bus));
    }
    if (!grid.buses[index.at(br.from_bus)].in_service() || !grid.buses[index.at(br.to_bus)].in_service()) {
      throw CaseFormatError(line_of(branch_lines, k),
                            fmt::format("in-service branch [{},{}] touches an isolated bus", br.from_bus, br.to_bus));
    }
  }
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    if (!index.contains(grid.generators[g].bus)) {
      throw CaseFormatError(line_of(gen_lines, g),
                            fmt::format("generator references bus {} absent from bus table", grid.generators[g].bus));
    }
  }

  // Exactly one slack per island of in-service buses.
  UnionFind islands(grid.buses.size());
  for (const Branch& br : grid.branches) {
    if (br.status) islands.unite(index.at(br.from_bus), index.at(br.to_bus));
  }
  std::map<std::size_t, std::vector<std::size_t>> slack_of_root;
  std::map<std::size_t, std::size_t> first_bus_of_root;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (!grid.buses[i].in_service()) continue;
    auto root = islands.find(i);
    first_bus_of_root.try_emplace(root, i);
    if (grid.buses[i].kind == BusKind::Slack) slack_of_root[root].push_back(i);
  }
  for (auto [root, first] : first_bus_of_root) {
    auto it = slack_of_root.find(root);
    if (it == slack_of_root.end()) {
      throw CaseFormatError(bus_header, fmt::format("missing slack bus in island containing bus {}",
                                                    grid.buses[first].id));
    }
    if (it->second.size() > 1) {
      throw CaseFormatError(line_of(bus_lines, it->second[1]),
                            fmt::format("more than one slack bus in island containing bus {}",
                                        grid.buses[first].id));
    }
  }
}

}  // namespace

CaseFormatError::CaseFormatError(std::size_t line_number, const std::string& description)
    : std::runtime_error(line_number > 0 ? fmt::format("line {}: {}", line_number, description) : description),
      line_number_(line_number),
      description_(description) {}

std::optional<std::size_t> NetworkCase::find_bus(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t NetworkCase::bus_index(int id) const {
  auto found = find_bus(id);
  if (!found) throw std::out_of_range(fmt::format("no bus with id {}", id));
  return *found;
}

std::optional<std::size_t> NetworkCase::find_branch(int bus_a, int bus_b, int circuit) const {
  int seen = 0;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const Branch& br = branches[k];
    bool match = (br.from_bus == bus_a && br.to_bus == bus_b) || (br.from_bus == bus_b && br.to_bus == bus_a);
    if (match && ++seen == circuit) return k;
  }
  return std::nullopt;
}

int NetworkCase::circuit_of(std::size_t branch) const {
  const Branch& target = branches.at(branch);
  int ordinal = 0;
  for (std::size_t k = 0; k <= branch; ++k) {
    const Branch& br = branches[k];
    if ((br.from_bus == target.from_bus && br.to_bus == target.to_bus) ||
        (br.from_bus == target.to_bus && br.to_bus == target.from_bus)) {
      ++ordinal;
    }
  }
  return ordinal;
}

std::size_t NetworkCase::in_service_branch_count() const {
  return static_cast<std::size_t>(std::count_if(branches.begin(), branches.end(),
                                                [](const Branch& b) { return b.status; }));
}

NetworkCase parse_case(std::string_view text) {
  RawCase raw = scan(text);
  if (!raw.base_mva) throw CaseFormatError(0, "missing baseMVA");
  if (raw.bus_header == 0) throw CaseFormatError(0, "missing bus table");
  if (raw.branch_header == 0) throw CaseFormatError(0, "missing branch table");

  NetworkCase grid;
  grid.name = raw.name;
  grid.base_mva = *raw.base_mva;
  std::vector<std::size_t> bus_lines, gen_lines, branch_lines;

  for (const Row& row : raw.bus) {
    require_width(row, bus_col::kMinWidth, "bus");
    const auto& v = row.values;
    if (!is_integral(v[bus_col::kId])) throw CaseFormatError(row.line, "bus id must be an integer");
    Bus b;
    b.id = static_cast<int>(v[bus_col::kId]);
    b.kind = bus_kind(v[bus_col::kType], row.line);
    b.p_load = v[bus_col::kPd];
    b.q_load = v[bus_col::kQd];
    b.g_shunt = v[bus_col::kGs];
    b.b_shunt = v[bus_col::kBs];
    b.v_mag = v[bus_col::kVm];
    b.v_ang = v[bus_col::kVa];
    b.base_kv = v[bus_col::kBaseKv];
    b.v_max = v[bus_col::kVmax];
    b.v_min = v[bus_col::kVmin];
    if (b.v_min == 0.0 && b.v_max == 0.0) {
      b.v_min = kDefaultVmin;
      b.v_max = kDefaultVmax;
    }
    b.extra = collect_extra(v, kBusNamed);
    grid.buses.push_back(std::move(b));
    bus_lines.push_back(row.line);
  }
  for (const Row& row : raw.gen) {
    require_width(row, gen_col::kMinWidth, "gen");
    const auto& v = row.values;
    Generator g;
    g.bus = static_cast<int>(v[gen_col::kBus]);
    g.p_gen = v[gen_col::kPg];
    g.q_gen = v[gen_col::kQg];
    g.q_max = v[gen_col::kQmax];
    g.q_min = v[gen_col::kQmin];
    g.v_set = v[gen_col::kVg];
    g.status = v[gen_col::kStatus] > 0.0;
    g.p_max = v[gen_col::kPmax];
    g.p_min = v[gen_col::kPmin];
    g.extra = collect_extra(v, kGenNamed);
    grid.generators.push_back(std::move(g));
    gen_lines.push_back(row.line);
  }
  for (const Row& row : raw.branch) {
    require_width(row, branch_col::kMinWidth, "branch");
    const auto& v = row.values;
    Branch br;
    br.from_bus = static_cast<int>(v[branch_col::kFrom]);
    br.to_bus = static_cast<int>(v[branch_col::kTo]);
    br.resistance = v[branch_col::kR];
    br.reactance = v[branch_col::kX];
    br.charging = v[branch_col::kB];
    br.rate_a = v[branch_col::kRateA];
    br.tap_ratio = v[branch_col::kRatio];
    br.shift_deg = v[branch_col::kAngle];
    br.status = v[branch_col::kStatus] > 0.0;
    br.extra = collect_extra(v, kBranchNamed);
    grid.branches.push_back(std::move(br));
    branch_lines.push_back(row.line);
  }

  check_invariants(grid, bus_lines, branch_lines, gen_lines, raw.bus_header);
  return grid;
}

void validate_case(const NetworkCase& grid) { check_invariants(grid, {}, {}, {}, 0); }

NetworkCase load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open case file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  NetworkCase grid = parse_case(buffer.str());
  if (grid.name.empty()) grid.name = path.stem().string();
  return grid;
}

std::string serialize_case(const NetworkCase& grid) {
  std::string out;
  auto row_text = [](const std::vector<double>& row) {
    std::string s = "\t";
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) s += '\t';
      s += fmt::format("{}", row[i]);
    }
    s += ";\n";
    return s;
  };

  out += fmt::format("function mpc = {}\n", grid.name.empty() ? "nxscreen_case" : grid.name);
  out += "mpc.version = '2';\n\n";
  out += fmt::format("mpc.baseMVA = {};\n\n", grid.base_mva);

  out += "%% bus data\n";
  out += "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out += "mpc.bus = [\n";
  for (const Bus& b : grid.buses) {
    std::map<std::size_t, double> named = {
        {bus_col::kId, b.id},          {bus_col::kType, static_cast<double>(b.kind)},
        {bus_col::kPd, b.p_load},      {bus_col::kQd, b.q_load},
        {bus_col::kGs, b.g_shunt},     {bus_col::kBs, b.b_shunt},
        {bus_col::kVm, b.v_mag},       {bus_col::kVa, b.v_ang},
        {bus_col::kBaseKv, b.base_kv}, {bus_col::kVmax, b.v_max},
        {bus_col::kVmin, b.v_min}};
    out += row_text(assemble_row(bus_col::kMinWidth, kBusNamed, named, b.extra, {{6, 1.0}, {10, 1.0}}));
  }
  out += "];\n\n";

  out += "%% generator data\n";
  out += "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  out += "mpc.gen = [\n";
  for (const Generator& g : grid.generators) {
    std::map<std::size_t, double> named = {
        {gen_col::kBus, g.bus},         {gen_col::kPg, g.p_gen},     {gen_col::kQg, g.q_gen},
        {gen_col::kQmax, g.q_max},      {gen_col::kQmin, g.q_min},   {gen_col::kVg, g.v_set},
        {gen_col::kStatus, g.status ? 1.0 : 0.0}, {gen_col::kPmax, g.p_max}, {gen_col::kPmin, g.p_min}};
    out += row_text(assemble_row(gen_col::kMinWidth, kGenNamed, named, g.extra, {{6, grid.base_mva}}));
  }
  out += "];\n\n";

  out += "%% branch data\n";
  out += "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\n";
  out += "mpc.branch = [\n";
  for (const Branch& br : grid.branches) {
    std::map<std::size_t, double> named = {
        {branch_col::kFrom, br.from_bus},     {branch_col::kTo, br.to_bus},
        {branch_col::kR, br.resistance},      {branch_col::kX, br.reactance},
        {branch_col::kB, br.charging},        {branch_col::kRateA, br.rate_a},
        {branch_col::kRatio, br.tap_ratio},   {branch_col::kAngle, br.shift_deg},
        {branch_col::kStatus, br.status ? 1.0 : 0.0}};
    out += row_text(assemble_row(branch_col::kMinWidth, kBranchNamed, named, br.extra, {}));
  }
  out += "];\n";
  return out;
}

std::string branch_label(const NetworkCase& grid, std::size_t branch) {
  const Branch& br = grid.branches.at(branch);
  int circuit = grid.circuit_of(branch);
  if (circuit > 1) return fmt::format("[{},{}]#{}", br.from_bus, br.to_bus, circuit);
  return fmt::format("[{},{}]", br.from_bus, br.to_bus);
}

}  // namespace nxscreen
