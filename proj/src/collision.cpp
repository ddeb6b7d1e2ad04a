#include "oq/collision.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "oq/mathutil.hpp"

namespace oq::collision {

CollisionInstance::CollisionInstance(std::vector<Value> a_values, std::vector<Value> b_values) {
  if (a_values.empty() || a_values.size() != b_values.size())
    throw std::invalid_argument("CollisionInstance: lists must be non-empty and equal length");
  a_duplicate_free = is_duplicate_free(a_values);
  b_duplicate_free = is_duplicate_free(b_values);
  a = Tape("A", std::move(a_values));
  b = Tape("B", std::move(b_values));
}

bool is_duplicate_free(std::span<const Value> values) {
  std::unordered_set<Value> seen;
  for (Value v : values)
    if (!seen.insert(v).second) return false;
  return true;
}

namespace {

std::vector<DistinctnessOracle::Step> interval_pair_schedule(std::uint64_t len) {
  std::vector<DistinctnessOracle::Step> steps;
  steps.reserve(2 * len);
  for (std::uint64_t off = 0; off < len; ++off) steps.push_back({false, off});
  for (std::uint64_t off = 0; off < len; ++off) steps.push_back({true, off});
  return steps;
}

class EdState : public DistinctnessOracle::State {
 public:
  void feed(Value v) override {
    if (!seen_.insert(v).second) duplicate_ = true;
  }
  bool may_prune() const override { return !duplicate_; }

 private:
  std::unordered_set<Value> seen_;
  bool duplicate_ = false;
};

class LdState : public DistinctnessOracle::State {
 public:
  explicit LdState(std::uint64_t len) : remaining_first_(len) {}

  void feed(Value v) override {
    if (remaining_first_ > 0) {
      first_.insert(v);
      --remaining_first_;
    } else if (first_.count(v)) {
      cross_ = true;
    }
  }
  bool may_prune() const override { return !cross_; }

 private:
  std::uint64_t remaining_first_;
  std::unordered_set<Value> first_;
  bool cross_ = false;
};

}  // namespace

std::vector<DistinctnessOracle::Step> EdReferenceOracle::schedule(std::uint64_t len) const {
  return interval_pair_schedule(len);
}

std::unique_ptr<DistinctnessOracle::State> EdReferenceOracle::make_state(std::uint64_t) const {
  return std::make_unique<EdState>();
}

std::vector<DistinctnessOracle::Step> LdReferenceOracle::schedule(std::uint64_t len) const {
  return interval_pair_schedule(len);
}

std::unique_ptr<DistinctnessOracle::State> LdReferenceOracle::make_state(
    std::uint64_t len) const {
  return std::make_unique<LdState>(len);
}

namespace {

bool run_schedule_raw(const DistinctnessOracle& oracle, std::span<const Value> a,
                      std::span<const Value> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distinctness oracle: interval lengths differ");
  auto state = oracle.make_state(a.size());
  for (const auto& step : oracle.schedule(a.size()))
    state->feed(step.on_b ? b[step.offset] : a[step.offset]);
  return state->may_prune();
}

}  // namespace

bool ed_distinct(std::span<const Value> a, std::span<const Value> b) {
  return run_schedule_raw(EdReferenceOracle{}, a, b);
}

bool ld_collides(std::span<const Value> a, std::span<const Value> b) {
  return !run_schedule_raw(LdReferenceOracle{}, a, b);
}

namespace {

LockstepResult lockstep_core(RunContext& ctx, const Tape& a, const Tape& b,
                             std::uint64_t base_a, std::uint64_t base_b,
                             std::span<const PairTask> tasks,
                             const DistinctnessOracle& oracle, std::uint64_t len,
                             const std::vector<DistinctnessOracle::Step>& steps) {
  LockstepResult out;
  std::vector<std::unique_ptr<DistinctnessOracle::State>> states;
  states.reserve(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) states.push_back(oracle.make_state(len));

  std::vector<std::pair<std::uint64_t, Value>> step_reads;  // dedup within one step
  for (const auto& step : steps) {
    step_reads.clear();
    const Tape& tape = step.on_b ? b : a;
    const std::uint64_t base = step.on_b ? base_b : base_a;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const std::uint64_t start = step.on_b ? tasks[t].s_prime : tasks[t].s;
      const std::uint64_t pos = base + start + step.offset;
      Value v = 0;
      bool found = false;
      for (const auto& [seen_pos, seen_val] : step_reads)
        if (seen_pos == pos) {
          v = seen_val;
          found = true;
          break;
        }
      if (!found) {
        v = ctx.read(tape, pos);
        step_reads.emplace_back(pos, v);
        ++out.physical_reads;
      }
      ++out.logical_reads;
      states[t]->feed(v);
    }
  }
  out.prune.resize(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) out.prune[t] = states[t]->may_prune();
  return out;
}

// Shared divide-and-conquer core. The sequential search is the space = 1
// special case: the child queue then flushes after every push, which walks
// the four children depth-first in a fixed order.
class Engine {
 public:
  // Emit gets 1-based positions in the padded coordinate system (before the
  // base shift) and returns whether the triple was kept; kept triples count
  // against the output budget.
  using EmitFn = std::function<bool(std::uint64_t, std::uint64_t, Value)>;

  Engine(RunContext& ctx, const Tape& a, const Tape& b, std::uint64_t base_a,
         std::uint64_t base_b, const DistinctnessOracle& oracle, std::uint64_t space,
         const CollisionOptions& options, CollisionRunStats& stats, EmitFn emit)
      : ctx_(ctx),
        a_(a),
        b_(b),
        base_a_(base_a),
        base_b_(base_b),
        oracle_(oracle),
        space_(space),
        options_(options),
        stats_(stats),
        emit_(std::move(emit)) {
    if (space_ == 0) throw std::invalid_argument("collision search: space must be >= 1");
  }

  bool budget_exhausted() const {
    return options_.max_outputs && emitted_ >= *options_.max_outputs;
  }

  void run(std::uint64_t len, const std::vector<PairTask>& tasks) {
    if (tasks.empty() || budget_exhausted()) return;
    stats_.per_level[len].invoked += tasks.size();
    if (len == 1) {
      leaf(tasks);
      return;
    }
    const std::vector<bool> prune = step_oracles(len, tasks);
    const std::uint64_t half = len / 2;
    const std::pair<std::uint64_t, std::uint64_t> offsets[4] = {
        {0, 0}, {half, 0}, {0, half}, {half, half}};
    std::vector<PairTask> queue;
    queue.reserve(space_);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (prune[t]) {
        ++stats_.per_level[len].pruned;
        continue;
      }
      for (auto [da, db] : offsets) {
        queue.push_back(PairTask{tasks[t].s + da, tasks[t].s_prime + db});
        if (queue.size() == space_) {
          run(half, queue);
          queue.clear();
          if (budget_exhausted()) return;
        }
      }
    }
    if (!queue.empty()) run(half, queue);
  }

 private:
  const std::vector<DistinctnessOracle::Step>& schedule_for(std::uint64_t len) {
    auto it = schedules_.find(len);
    if (it == schedules_.end()) it = schedules_.emplace(len, oracle_.schedule(len)).first;
    return it->second;
  }

  std::vector<bool> step_oracles(std::uint64_t len, const std::vector<PairTask>& tasks) {
    LockstepResult lr =
        lockstep_core(ctx_, a_, b_, base_a_, base_b_, tasks, oracle_, len, schedule_for(len));
    stats_.oracle_instances += tasks.size();
    stats_.logical_queries += lr.logical_reads;
    stats_.physical_queries += lr.physical_reads;
    if (options_.validate_prunes)
      for (std::size_t t = 0; t < tasks.size(); ++t)
        if (lr.prune[t]) validate_prune(len, tasks[t]);
    return lr.prune;
  }

  void validate_prune(std::uint64_t len, const PairTask& task) const {
    const auto a_vals = a_.raw().subspan(base_a_ + task.s - 1, len);
    const auto b_vals = b_.raw().subspan(base_b_ + task.s_prime - 1, len);
    for (Value av : a_vals)
      for (Value bv : b_vals)
        if (av == bv)
          throw std::logic_error("collision search: oracle pruned an interval pair holding " +
                                 std::to_string(av));
  }

  void leaf(const std::vector<PairTask>& tasks) {
    std::vector<Value> va(tasks.size()), vb(tasks.size());
    std::vector<std::pair<std::uint64_t, Value>> step_reads;
    for (int phase = 0; phase < 2; ++phase) {
      step_reads.clear();
      const bool on_b = phase == 1;
      const Tape& tape = on_b ? b_ : a_;
      const std::uint64_t base = on_b ? base_b_ : base_a_;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const std::uint64_t pos = base + (on_b ? tasks[t].s_prime : tasks[t].s);
        Value v = 0;
        bool found = false;
        for (const auto& [seen_pos, seen_val] : step_reads)
          if (seen_pos == pos) {
            v = seen_val;
            found = true;
            break;
          }
        if (!found) {
          v = ctx_.read(tape, pos);
          step_reads.emplace_back(pos, v);
          ++stats_.physical_queries;
        }
        ++stats_.logical_queries;
        (on_b ? vb : va)[t] = v;
      }
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (va[t] != vb[t]) continue;
      if (budget_exhausted()) return;
      if (emit_(tasks[t].s, tasks[t].s_prime, va[t])) {
        ++emitted_;
        ++stats_.per_level[1].emitted;
      }
    }
  }

  RunContext& ctx_;
  const Tape& a_;
  const Tape& b_;
  std::uint64_t base_a_;
  std::uint64_t base_b_;
  const DistinctnessOracle& oracle_;
  std::uint64_t space_;
  CollisionOptions options_;
  CollisionRunStats& stats_;
  EmitFn emit_;
  std::uint64_t emitted_ = 0;
  std::map<std::uint64_t, std::vector<DistinctnessOracle::Step>> schedules_;
};

struct PaddedTapes {
  Tape a;
  Tape b;
  std::uint64_t padded_length = 0;
};

std::vector<Value> pad_values(std::span<const Value> values, std::uint64_t target,
                              Value sentinel_base) {
  std::vector<Value> out(values.begin(), values.end());
  for (std::uint64_t t = out.size(); t < target; ++t) out.push_back(sentinel_base++);
  return out;
}

Value sentinel_base_for(std::span<const Value> a, std::span<const Value> b) {
  Value mx = std::numeric_limits<Value>::min();
  for (Value v : a) mx = std::max(mx, v);
  for (Value v : b) mx = std::max(mx, v);
  if (mx > (Value{1} << 62))
    throw std::invalid_argument("collision search: values too large to pad safely");
  return mx + 1;
}

PaddedTapes pad_pair(const CollisionInstance& inst) {
  const std::uint64_t n = inst.a.length();
  const std::uint64_t npad = next_pow2(n);
  const Value base = sentinel_base_for(inst.a.raw(), inst.b.raw());
  // Per-list sentinel ranges are disjoint, so padding never collides with
  // anything, real or padded.
  return PaddedTapes{Tape("A", pad_values(inst.a.raw(), npad, base)),
                     Tape("B", pad_values(inst.b.raw(), npad, base + (npad - n))),
                     npad};
}

// Entry batches at the aligned sqrt level: starts grouped into runs of
// floor(sqrt(space)), one engine call per ordered group pair.
void run_batched_entry(Engine& engine, CollisionRunStats& stats, std::uint64_t len,
                       std::uint64_t space) {
  const unsigned q = ceil_log2(len);
  const std::uint64_t entry_len = std::uint64_t{1} << ((q + 1) / 2);
  const std::uint64_t num_starts = len / entry_len;
  const std::uint64_t group = std::max<std::uint64_t>(1, floor_sqrt(space));
  for (std::uint64_t ga = 0; ga < num_starts; ga += group) {
    const std::uint64_t ga_end = std::min(ga + group, num_starts);
    for (std::uint64_t gb = 0; gb < num_starts; gb += group) {
      const std::uint64_t gb_end = std::min(gb + group, num_starts);
      std::vector<PairTask> tasks;
      tasks.reserve((ga_end - ga) * (gb_end - gb));
      for (std::uint64_t sa = ga; sa < ga_end; ++sa)
        for (std::uint64_t sb = gb; sb < gb_end; ++sb)
          tasks.push_back(PairTask{sa * entry_len + 1, sb * entry_len + 1});
      stats.initial_calls_per_level[entry_len] += tasks.size();
      engine.run(entry_len, tasks);
      if (engine.budget_exhausted()) return;
    }
  }
}

std::uint64_t declared_space(const DistinctnessOracle& oracle, std::uint64_t space,
                             std::uint64_t entry_len, std::uint64_t padded) {
  // Reduction state per recursion level: the task batch, the child queue and
  // the verdict bits; oracle state peaks at the entry level.
  const std::uint64_t depth = ceil_log2(padded) + 1;
  return depth * (5 * space + 4) + space * oracle.state_words(entry_len);
}

}  // namespace

LockstepResult lockstep_run(RunContext& ctx, const Tape& a, const Tape& b,
                            std::uint64_t base_a, std::uint64_t base_b,
                            std::span<const PairTask> tasks,
                            const DistinctnessOracle& oracle, std::uint64_t len) {
  if (len == 0) throw std::invalid_argument("lockstep_run: empty intervals");
  return lockstep_core(ctx, a, b, base_a, base_b, tasks, oracle, len, oracle.schedule(len));
}

CollisionResult alg2_setcollision(RunContext& ctx, const CollisionInstance& inst,
                                  const DistinctnessOracle& oracle,
                                  CollisionOptions options) {
  const PaddedTapes padded = pad_pair(inst);
  const std::uint64_t n = inst.a.length();
  CollisionResult result;
  result.padded_length = padded.padded_length;
  SetSink<CollisionTriple> sink(ctx);
  Engine engine(
      ctx, padded.a, padded.b, 0, 0, oracle, 1, options, result.stats,
      [&](std::uint64_t i, std::uint64_t j, Value x) {
        if (i > n || j > n) return false;  // sentinel region, cannot happen with fresh pads
        return sink.emit(CollisionTriple{i, j, x});
      });
  ctx.note_space(declared_space(oracle, 1, padded.padded_length, padded.padded_length));
  result.stats.initial_calls_per_level[padded.padded_length] += 1;
  engine.run(padded.padded_length, {PairTask{1, 1}});
  result.triples = sink.items();
  return result;
}

CollisionResult alg3_parallel(RunContext& ctx, const CollisionInstance& inst,
                              const DistinctnessOracle& oracle, std::uint64_t space,
                              CollisionOptions options) {
  const PaddedTapes padded = pad_pair(inst);
  const std::uint64_t n = inst.a.length();
  CollisionResult result;
  result.padded_length = padded.padded_length;
  SetSink<CollisionTriple> sink(ctx);
  Engine engine(
      ctx, padded.a, padded.b, 0, 0, oracle, space, options, result.stats,
      [&](std::uint64_t i, std::uint64_t j, Value x) {
        if (i > n || j > n) return false;
        return sink.emit(CollisionTriple{i, j, x});
      });
  const unsigned q = ceil_log2(padded.padded_length);
  const std::uint64_t entry_len = std::uint64_t{1} << ((q + 1) / 2);
  ctx.note_space(declared_space(oracle, space, entry_len, padded.padded_length));
  run_batched_entry(engine, result.stats, padded.padded_length, space);
  result.triples = sink.items();
  return result;
}

NCollisionResult n_collision(RunContext& ctx, const Tape& list, std::uint64_t space) {
  const std::uint64_t n = list.length();
  if (n == 0) throw std::invalid_argument("n_collision: empty list");
  const std::uint64_t npad = next_pow2(n);
  const Value base = sentinel_base_for(list.raw(), {});
  const Tape padded("L", pad_values(list.raw(), npad, base));
  const LdReferenceOracle oracle;  // internal duplicates must not block pruning

  NCollisionResult result;
  SetSink<CollisionTriple> sink(ctx);
  ctx.note_space(declared_space(oracle, space, npad / 2 ? npad / 2 : 1, npad));
  const auto finish = [&]() {
    result.triples = sink.items();
    return result;
  };

  // Pieces: for every aligned segment, its left half against its right half.
  // Every unordered position pair lands in exactly one piece, so triples are
  // distinct across pieces and i < j always holds.
  for (std::uint64_t piece_len = npad / 2; piece_len >= 1; piece_len /= 2) {
    const std::uint64_t segment = 2 * piece_len;
    for (std::uint64_t seg_base = 0; seg_base < npad; seg_base += segment) {
      const std::uint64_t found = sink.items().size();
      if (found >= n) return finish();
      CollisionOptions options;
      options.max_outputs = n - found;
      Engine engine(
          ctx, padded, padded, seg_base, seg_base + piece_len, oracle, space, options,
          result.stats, [&](std::uint64_t i, std::uint64_t j, Value x) {
            const std::uint64_t gi = seg_base + i;
            const std::uint64_t gj = seg_base + piece_len + j;
            if (gi > n || gj > n) return false;
            return sink.emit(CollisionTriple{gi, gj, x});
          });
      run_batched_entry(engine, result.stats, piece_len, space);
    }
    if (piece_len == 1) break;
  }
  return finish();
}

std::set<CollisionTriple> collision_bruteforce(const CollisionInstance& inst) {
  std::set<CollisionTriple> out;
  const auto a = inst.a.raw();
  const auto b = inst.b.raw();
  for (std::uint64_t i = 0; i < a.size(); ++i)
    for (std::uint64_t j = 0; j < b.size(); ++j)
      if (a[i] == b[j]) out.insert(CollisionTriple{i + 1, j + 1, a[i]});
  return out;
}

std::set<CollisionTriple> single_list_bruteforce(std::span<const Value> values) {
  std::set<CollisionTriple> out;
  for (std::uint64_t i = 0; i < values.size(); ++i)
    for (std::uint64_t j = i + 1; j < values.size(); ++j)
      if (values[i] == values[j]) out.insert(CollisionTriple{i + 1, j + 1, values[i]});
  return out;
}

}  // namespace oq::collision
