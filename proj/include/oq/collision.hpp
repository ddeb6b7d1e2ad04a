#pragma once

// Collision finding between two value lists (and within one list) by
// divide-and-conquer over aligned interval pairs: an oblivious distinctness
// oracle decides whether an interval pair can hold a collision; pairs it
// clears are pruned, the rest split into four half-length children. The
// batched variant runs up to S sibling subproblems in lockstep through the
// oracle's fixed read schedule, deduplicating reads that hit the same cell in
// the same step. The recursion itself branches on verdicts, so only the
// oracle layer is oblivious; end-to-end traces depend on where collisions
// sit, not on what the colliding values are.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "oq/query_model.hpp"

namespace oq::collision {

struct CollisionTriple {
  std::uint64_t i = 0;  // 1-based position in the first list
  std::uint64_t j = 0;  // 1-based position in the second list
  Value x = 0;
  auto operator<=>(const CollisionTriple&) const = default;
};

struct CollisionInstance {
  Tape a;
  Tape b;
  // Informational flags; validated by tests, not by the constructor.
  bool a_duplicate_free = false;
  bool b_duplicate_free = false;

  CollisionInstance(std::vector<Value> a_values, std::vector<Value> b_values);
};

bool is_duplicate_free(std::span<const Value> values);

// A streaming distinctness test with a data-independent read schedule. The
// oracle never touches tapes itself: the caller walks the schedule, performs
// the reads (deduplicating them when several instances run in lockstep) and
// feeds each instance's state. may_prune() certifies that the two intervals
// share no value.
class DistinctnessOracle {
 public:
  struct Step {
    bool on_b = false;        // first interval when false, second when true
    std::uint64_t offset = 0;  // 0-based offset within the interval
  };

  class State {
   public:
    virtual ~State() = default;
    virtual void feed(Value v) = 0;
    virtual bool may_prune() const = 0;
  };

  virtual ~DistinctnessOracle() = default;
  virtual std::string_view name() const = 0;
  virtual std::vector<Step> schedule(std::uint64_t len) const = 0;
  virtual std::unique_ptr<State> make_state(std::uint64_t len) const = 0;
  virtual std::uint64_t state_words(std::uint64_t len) const = 0;
};

// Element distinctness over the concatenation: prunes iff all 2*len fed
// values are pairwise distinct. Sound for pruning on any input; on lists with
// internal duplicates it under-prunes rather than mis-prunes.
class EdReferenceOracle : public DistinctnessOracle {
 public:
  std::string_view name() const override { return "ed_reference"; }
  std::vector<Step> schedule(std::uint64_t len) const override;
  std::unique_ptr<State> make_state(std::uint64_t len) const override;
  std::uint64_t state_words(std::uint64_t len) const override { return 2 * len + 2; }
};

// Cross-list collision detection: prunes iff no value of the first interval
// reappears in the second. Internal duplicates are ignored.
class LdReferenceOracle : public DistinctnessOracle {
 public:
  std::string_view name() const override { return "ld_reference"; }
  std::vector<Step> schedule(std::uint64_t len) const override;
  std::unique_ptr<State> make_state(std::uint64_t len) const override;
  std::uint64_t state_words(std::uint64_t len) const override { return 2 * len + 2; }
};

// Uninstrumented one-shot forms of the two verdicts (equal-length spans).
bool ed_distinct(std::span<const Value> a, std::span<const Value> b);
bool ld_collides(std::span<const Value> a, std::span<const Value> b);

struct PairTask {
  std::uint64_t s = 0;        // 1-based start of the first interval
  std::uint64_t s_prime = 0;  // 1-based start of the second interval
};

struct LevelStats {
  std::uint64_t invoked = 0;  // tasks that entered the level
  std::uint64_t pruned = 0;   // tasks the oracle cleared
  std::uint64_t emitted = 0;  // leaf tasks that produced a collision
};

struct CollisionRunStats {
  std::map<std::uint64_t, LevelStats> per_level;  // keyed by interval length
  std::map<std::uint64_t, std::uint64_t> initial_calls_per_level;
  std::uint64_t oracle_instances = 0;
  std::uint64_t logical_queries = 0;   // as if every instance read independently
  std::uint64_t physical_queries = 0;  // after in-step deduplication
};

struct CollisionOptions {
  // Brute-check every prune against the raw values; throws std::logic_error
  // on an unsound prune. Quadratic per prune, test builds only.
  bool validate_prunes = false;
  // Stop after this many emitted collisions (checked between calls).
  std::optional<std::uint64_t> max_outputs;
};

struct CollisionResult {
  std::set<CollisionTriple> triples;
  CollisionRunStats stats;
  std::uint64_t padded_length = 0;
};

struct LockstepResult {
  std::vector<bool> prune;  // per task
  std::uint64_t logical_reads = 0;
  std::uint64_t physical_reads = 0;
};

// Runs |tasks| oracle instances of interval length len over tapes a and b in
// lockstep: at every schedule step the reads of that step are performed once
// per distinct target and fanned out. base_a/base_b shift task coordinates
// into the tapes. All instances share one schedule; with per-instance
// schedules of unequal length the shorter ones would idle on no-ops, but the
// oracles here derive the schedule from len alone, so the case cannot arise.
LockstepResult lockstep_run(RunContext& ctx, const Tape& a, const Tape& b,
                            std::uint64_t base_a, std::uint64_t base_b,
                            std::span<const PairTask> tasks,
                            const DistinctnessOracle& oracle, std::uint64_t len);

// Sequential divide-and-conquer from the full interval pair (lists padded to
// a power of two with per-list sentinels above every real value, so padding
// never collides; triples touching padding are filtered out regardless).
CollisionResult alg2_setcollision(RunContext& ctx, const CollisionInstance& inst,
                                  const DistinctnessOracle& oracle,
                                  CollisionOptions options = {});

// Batched variant: starts at the aligned sqrt(n)-level with all interval
// pairs, grouped so each initial batch carries at most `space` tasks built
// from a pair of start-groups of size floor(sqrt(space)). Children accumulate
// in a queue flushed at `space` tasks and at the end of the enclosing call.
// space = 1 reproduces the sequential recursion's order below the entry
// level.
CollisionResult alg3_parallel(RunContext& ctx, const CollisionInstance& inst,
                              const DistinctnessOracle& oracle, std::uint64_t space,
                              CollisionOptions options = {});

struct NCollisionResult {
  std::set<CollisionTriple> triples;  // i < j positions in the one input list
  CollisionRunStats stats;
};

// Up to n collisions within a single list: the position pairs are covered by
// complete bipartite pieces (for each level t, the two halves of every
// aligned segment of length n/2^(t-1)), and each piece runs the batched
// cross-list search with a shared output budget of n.
NCollisionResult n_collision(RunContext& ctx, const Tape& list, std::uint64_t space);

// Exact quadratic references.
std::set<CollisionTriple> collision_bruteforce(const CollisionInstance& inst);
std::set<CollisionTriple> single_list_bruteforce(std::span<const Value> values);

}  // namespace oq::collision
