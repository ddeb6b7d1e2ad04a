#pragma once

// Adversarial input distribution for low-query one-pass algorithms: given the
// query schedule of a short run (T reads on a length-n input), carve [n] into
// size-p parts so that each stage of the schedule has a reserve of parts it
// never touched, then sample inputs that assign one uniform value per part.
// Any value assignment keeps every occurrence count a multiple of p.

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "oq/noe.hpp"
#include "oq/query_model.hpp"

namespace oq::adversary {

// A run of T queries split into stages of floor(n/2) consecutive queries
// (the last stage may be short). Q_k is the set of distinct indices queried
// in stage k, so |Q_k| <= n/2 by construction.
struct StageSchedule {
  std::uint64_t n = 0;
  std::uint64_t total_queries = 0;
  std::vector<std::set<std::uint64_t>> stages;

  static StageSchedule from_trace(std::span<const NamedTraceEntry> entries, std::uint64_t n);
  // Synthetic schedules for tests and experiments; validates |Q_k| <= n/2 and
  // index ranges. total_queries is taken at face value.
  static StageSchedule from_query_sets(std::uint64_t n, std::uint64_t total_queries,
                                       std::vector<std::set<std::uint64_t>> stages);
};

struct PPartition {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t reserved_per_stage = 0;  // r: parts reserved against each stage
  // Each part holds exactly p indices, sorted ascending.
  std::vector<std::vector<std::uint64_t>> parts;
  // Stage (1-based) each part was reserved against; 0 for the leftover fill.
  std::vector<std::uint64_t> provenance;

  // Disjointness, full coverage of [n], part size p. Throws on violation.
  void validate() const;
};

// Deterministic construction: for each stage k in order, reserve
// r = floor(n^2 / (4*T*p)) parts of size p from the lowest-numbered indices
// not yet reserved and not in Q_k; afterwards fill the remainder of [n] into
// parts by ascending index. Preconditions (checked, violations name the
// failing inequality): p | n, r >= 1, and r * stages * p <= n / 2.
PPartition build_partition(const StageSchedule& schedule, std::uint64_t p);

// One draw from the adversarial distribution: a uniform value c in [n] per
// part, every index of the part set to c. The result always satisfies the
// counts-divisible-by-p promise.
noe::NoeInstance sample_D(const PPartition& partition, RandomStream& stream);

}  // namespace oq::adversary
