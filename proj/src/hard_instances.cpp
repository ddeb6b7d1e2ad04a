#include "oq/hard_instances.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "oq/mathutil.hpp"

namespace oq::adversary {

namespace {

void check_indices(const std::set<std::uint64_t>& q, std::uint64_t n) {
  for (std::uint64_t i : q)
    if (i < 1 || i > n)
      throw std::invalid_argument("StageSchedule: queried index " + std::to_string(i) +
                                  " outside [1, " + std::to_string(n) + "]");
}

}  // namespace

StageSchedule StageSchedule::from_trace(std::span<const NamedTraceEntry> entries,
                                        std::uint64_t n) {
  if (n < 2) throw std::invalid_argument("StageSchedule: n must be at least 2");
  StageSchedule s;
  s.n = n;
  s.total_queries = entries.size();
  const std::uint64_t stage_size = n / 2;
  for (std::uint64_t start = 0; start < entries.size(); start += stage_size) {
    const std::uint64_t end = std::min<std::uint64_t>(start + stage_size, entries.size());
    std::set<std::uint64_t> q;
    for (std::uint64_t i = start; i < end; ++i) q.insert(entries[i].index);
    check_indices(q, n);
    s.stages.push_back(std::move(q));
  }
  return s;
}

StageSchedule StageSchedule::from_query_sets(std::uint64_t n, std::uint64_t total_queries,
                                             std::vector<std::set<std::uint64_t>> stages) {
  if (n < 2) throw std::invalid_argument("StageSchedule: n must be at least 2");
  for (const auto& q : stages) {
    if (q.size() > n / 2)
      throw std::invalid_argument("StageSchedule: a stage queries more than n/2 indices");
    check_indices(q, n);
  }
  StageSchedule s;
  s.n = n;
  s.total_queries = total_queries;
  s.stages = std::move(stages);
  return s;
}

void PPartition::validate() const {
  if (parts.size() != provenance.size())
    throw std::logic_error("PPartition: provenance size mismatch");
  std::vector<bool> seen(n + 1, false);
  std::uint64_t covered = 0;
  for (const auto& part : parts) {
    if (part.size() != p)
      throw std::logic_error("PPartition: part of size " + std::to_string(part.size()) +
                             ", expected " + std::to_string(p));
    if (!std::is_sorted(part.begin(), part.end()))
      throw std::logic_error("PPartition: part not sorted");
    for (std::uint64_t i : part) {
      if (i < 1 || i > n) throw std::logic_error("PPartition: index outside [1, n]");
      if (seen[i]) throw std::logic_error("PPartition: index " + std::to_string(i) +
                                          " appears in two parts");
      seen[i] = true;
      ++covered;
    }
  }
  if (covered != n) throw std::logic_error("PPartition: parts do not cover [n]");
}

PPartition build_partition(const StageSchedule& schedule, std::uint64_t p) {
  const std::uint64_t n = schedule.n;
  const std::uint64_t t = schedule.total_queries;
  if (p == 0 || n % p != 0)
    throw std::invalid_argument("build_partition: p must divide n");
  if (t == 0) throw std::invalid_argument("build_partition: empty schedule");
  const std::uint64_t stages = schedule.stages.size();
  const std::uint64_t r = (n * n) / (4 * t * p);
  if (r < 1)
    throw std::invalid_argument("build_partition: r = floor(n^2/(4*T*p)) = 0 < 1 (T=" +
                                std::to_string(t) + " too large for n=" + std::to_string(n) +
                                ", p=" + std::to_string(p) + ")");
  if (r * stages * p > n / 2)
    throw std::invalid_argument(
        "build_partition: infeasible reservation, r*stages*p = " +
        std::to_string(r * stages * p) + " > n/2 = " + std::to_string(n / 2));

  PPartition out;
  out.n = n;
  out.p = p;
  out.reserved_per_stage = r;

  std::vector<bool> reserved(n + 1, false);
  for (std::uint64_t k = 0; k < stages; ++k) {
    const std::set<std::uint64_t>& q = schedule.stages[k];
    std::vector<std::uint64_t> part;
    std::uint64_t taken = 0;
    // Lowest available indices first: skip anything already reserved or
    // queried during this stage. Feasibility above guarantees enough room.
    for (std::uint64_t i = 1; i <= n && taken < r * p; ++i) {
      if (reserved[i] || q.count(i)) continue;
      part.push_back(i);
      reserved[i] = true;
      ++taken;
      if (part.size() == p) {
        out.parts.push_back(std::move(part));
        out.provenance.push_back(k + 1);
        part.clear();
      }
    }
    if (taken < r * p)
      throw std::logic_error("build_partition: ran out of indices in stage " +
                             std::to_string(k + 1));
  }

  // Leftover fill: everything not reserved, grouped by ascending index. The
  // leftover count is a multiple of p because n and the reservation both are.
  std::vector<std::uint64_t> part;
  for (std::uint64_t i = 1; i <= n; ++i) {
    if (reserved[i]) continue;
    part.push_back(i);
    if (part.size() == p) {
      out.parts.push_back(std::move(part));
      out.provenance.push_back(0);
      part.clear();
    }
  }
  if (!part.empty()) throw std::logic_error("build_partition: leftover not divisible by p");
  out.validate();
  return out;
}

noe::NoeInstance sample_D(const PPartition& partition, RandomStream& stream) {
  std::vector<Value> values(partition.n, 0);
  for (const auto& part : partition.parts) {
    const std::uint64_t c = 1 + stream.uniform_below(partition.n);
    for (std::uint64_t i : part) values[i - 1] = static_cast<Value>(c);
  }
  // p prime is required by NoeInstance; the partition construction itself
  // only needs p | n, so this is where a composite p would surface.
  return noe::NoeInstance(partition.n, partition.p, std::move(values));
}

}  // namespace oq::adversary
