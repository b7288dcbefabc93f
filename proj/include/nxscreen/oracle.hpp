#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nxscreen/gbc.hpp"
#include "nxscreen/validation.hpp"

namespace nxscreen {

struct BruteForceRecord {
  ContingencyRecord record;
  bool screened = false;  // skipped by the DC prescreen, report left empty
};

struct BruteForceResult {
  std::vector<BruteForceRecord> records;  // every enumerated set, lexicographic
  std::size_t enumerated_count = 0;
  std::size_t screened_count = 0;

  // Sets with any violation, most severe first.
  std::vector<ContingencyRecord> violating() const;
};

struct BruteForceOptions {
  bool dc_prescreen = true;
  unsigned threads = 1;
};

// Severity order: unsolved, then shed load, overflow count, voltage count,
// reserve; remaining ties by branch list.
bool more_severe(const ContingencyRecord& a, const ContingencyRecord& b);

// Validates every x-subset of in-service branches (x in {1, 2}). With the DC
// prescreen, sets that neither island the grid nor overload any branch in the
// DC post-outage solution are marked screened and not solved.
BruteForceResult brute_force_contingencies(const ContingencyValidator& validator, std::size_t x,
                                           const BruteForceOptions& options = {});

// True when the DC prescreen would send the outage set on to validation.
bool dc_prescreen_flags(const NetworkCase& grid, const DcSensitivities& sens, const std::vector<std::size_t>& outage);

class InstanceTooLargeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Score by explicit enumeration of every shortest path (Floyd-Warshall plus
// a depth-first walk). Lengths tie under the scorer's relative tolerance.
// Up to 64 edges.
double gbc_enumerated_score(const WeightedGraph& graph, const std::vector<std::size_t>& edge_ids,
                            PairExclusion exclusion = PairExclusion::None);

struct ExhaustiveGbc {
  std::vector<std::size_t> group;  // ascending ids
  double score = 0.0;
};

// Best x-subset over all subsets (x <= 3, at most 12 edges), ties to the
// lexicographically smallest id list.
ExhaustiveGbc gbc_exhaustive(const WeightedGraph& graph, std::size_t x,
                             PairExclusion exclusion = PairExclusion::None);

}  // namespace nxscreen
