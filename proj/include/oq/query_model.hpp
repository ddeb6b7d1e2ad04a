#pragma once

// Instrumented read-only tapes, one-way random bit streams, query traces and
// cost accounting. Every algorithm in this project runs inside a RunContext:
// each tape read appends a (tape, index) entry to the context's trace, so
// obliviousness (exact trace equality across same-shaped inputs under the
// same seed) can be checked directly rather than argued.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace oq {

using Value = std::int64_t;

// Immutable value array. Reads are instrumented only when routed through a
// RunContext; raw() is the uninstrumented escape hatch for reference oracles
// and test accounting and must never be used by an algorithm under
// measurement.
class Tape {
 public:
  Tape() = default;
  Tape(std::string id, std::vector<Value> values)
      : id_(std::move(id)), values_(std::move(values)) {}

  const std::string& id() const { return id_; }
  std::uint64_t length() const { return values_.size(); }
  std::span<const Value> raw() const { return values_; }

 private:
  std::string id_;
  std::vector<Value> values_;
};

struct TraceEntry {
  std::uint32_t tape = 0;  // context-local tape number, assigned in first-read order
  std::uint64_t index = 0;  // 1-based
  auto operator<=>(const TraceEntry&) const = default;
};

struct QueryTrace {
  std::vector<TraceEntry> entries;

  std::uint64_t size() const { return entries.size(); }
  bool operator==(const QueryTrace&) const = default;
};

// Position of the first entry where the traces differ; a strict prefix
// diverges at the shorter length. Equal traces yield nullopt.
std::optional<std::uint64_t> first_divergence(const QueryTrace& a, const QueryTrace& b);

// Deterministic one-way bit stream. Bit t of the stream is bit (t mod 64) of
// block(t / 64), where block(j) is the j-th output of a SplitMix64 sequence
// keyed by the seed. The cursor is bit-granular and never moves backwards, so
// two draws of k bits each see exactly the same bits as one draw of 2k bits.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t cursor() const { return cursor_; }  // bits consumed so far

  // Next k bits in stream order.
  std::vector<std::uint8_t> draw_bits(std::uint64_t k);

  // Next k (<= 64) bits packed LSB-first.
  std::uint64_t draw_word(unsigned k);

  // Uniform value in [0, bound) via a full 64-bit draw reduced mod bound.
  // No rejection: the bias is below bound / 2^64 <= 2^-32 for bound <= 2^32.
  std::uint64_t uniform_below(std::uint64_t bound);

 private:
  std::uint64_t block(std::uint64_t j) const;

  std::uint64_t seed_ = 0;
  std::uint64_t cursor_ = 0;
};

struct CostReport {
  std::map<std::string, std::uint64_t> queries_per_tape;
  std::uint64_t total_queries = 0;  // equals the trace length, always
  std::uint64_t space_words = 0;    // self-reported peak working storage
  std::uint64_t outputs_emitted = 0;
};

// One run of one algorithm: owns the trace, the per-tape query counters, the
// random stream and the output counter. Contexts are cheap; make a fresh one
// per run.
class RunContext {
 public:
  explicit RunContext(std::uint64_t seed) : rng_(seed) {}

  RunContext(const RunContext&) = delete;
  RunContext& operator=(const RunContext&) = delete;

  Value read(const Tape& tape, std::uint64_t index) {
    if (index < 1 || index > tape.length())
      throw std::out_of_range("RunContext::read: index " + std::to_string(index) +
                              " outside tape '" + tape.id() + "' of length " +
                              std::to_string(tape.length()));
    const std::uint32_t id = intern(tape);
    trace_.entries.push_back(TraceEntry{id, index});
    ++tape_queries_[id];
    return tape.raw()[index - 1];
  }

  RandomStream& rng() { return rng_; }
  const QueryTrace& trace() const { return trace_; }
  std::uint64_t total_queries() const { return trace_.entries.size(); }

  // Algorithms report their declared working storage here; the peak is kept.
  void note_space(std::uint64_t words);

  // Called by output sinks when a new (deduplicated) statement lands.
  void count_output() { ++outputs_; }

  CostReport report() const;
  void dump_trace(std::ostream& out) const;  // one "tape_id<TAB>index" line per entry

 private:
  std::uint32_t intern(const Tape& tape) {
    auto [it, fresh] =
        tape_ids_.try_emplace(&tape, static_cast<std::uint32_t>(tape_names_.size()));
    if (fresh) {
      tape_names_.push_back(tape.id());
      tape_queries_.push_back(0);
    }
    return it->second;
  }

  RandomStream rng_;
  QueryTrace trace_;
  std::unordered_map<const Tape*, std::uint32_t> tape_ids_;
  std::vector<std::string> tape_names_;
  std::vector<std::uint64_t> tape_queries_;
  std::uint64_t space_peak_ = 0;
  std::uint64_t outputs_ = 0;
};

// Set-valued output sink: duplicate statements are permitted and collapse to
// one; only new statements reach the context's output counter.
template <typename T>
class SetSink {
 public:
  explicit SetSink(RunContext& ctx) : ctx_(&ctx) {}

  bool emit(const T& v) {
    if (!items_.insert(v).second) return false;
    ctx_->count_output();
    return true;
  }

  const std::set<T>& items() const { return items_; }

 private:
  RunContext* ctx_;
  std::set<T> items_;
};

// Keyed statement sink: repeating a statement is fine, contradicting one is a
// bug in the emitting algorithm.
template <typename K, typename V>
class MapSink {
 public:
  explicit MapSink(RunContext& ctx) : ctx_(&ctx) {}

  void emit(const K& key, const V& value) {
    auto [it, fresh] = items_.try_emplace(key, value);
    if (fresh) {
      ctx_->count_output();
      return;
    }
    if (it->second != value)
      throw std::logic_error("MapSink: conflicting statements for one key");
  }

  const std::map<K, V>& items() const { return items_; }

 private:
  RunContext* ctx_;
  std::map<K, V> items_;
};

struct ObliviousReport {
  bool oblivious = true;
  std::size_t runs = 0;
  // Earliest trace position where some run disagrees with run 0.
  std::optional<std::uint64_t> divergence_pos;
  std::pair<std::size_t, std::size_t> divergent_runs{0, 0};
};

// Runs `run` once per input, each time in a fresh context seeded identically,
// and compares the traces. `shape` maps an input to a comparable shape
// descriptor (e.g. tape lengths); inputs of different shapes are rejected
// before anything runs.
template <typename Input, typename RunFn, typename ShapeFn>
ObliviousReport check_oblivious(RunFn&& run, std::span<const Input> inputs,
                                std::uint64_t seed, ShapeFn&& shape) {
  if (inputs.empty()) throw std::invalid_argument("check_oblivious: no inputs");
  const auto expected = shape(inputs.front());
  for (const Input& in : inputs.subspan(1))
    if (shape(in) != expected)
      throw std::invalid_argument("check_oblivious: input shapes differ");

  ObliviousReport report;
  report.runs = inputs.size();
  QueryTrace reference;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    RunContext ctx(seed);
    run(ctx, inputs[i]);
    if (i == 0) {
      reference = ctx.trace();
      continue;
    }
    if (auto pos = first_divergence(reference, ctx.trace())) {
      report.oblivious = false;
      if (!report.divergence_pos || *pos < *report.divergence_pos) {
        report.divergence_pos = pos;
        report.divergent_runs = {0, i};
      }
    }
  }
  return report;
}

template <typename Input, typename RunFn, typename ShapeFn>
ObliviousReport check_oblivious(RunFn&& run, const std::vector<Input>& inputs,
                                std::uint64_t seed, ShapeFn&& shape) {
  return check_oblivious(std::forward<RunFn>(run), std::span<const Input>(inputs), seed,
                         std::forward<ShapeFn>(shape));
}

struct NamedTraceEntry {
  std::string tape;
  std::uint64_t index = 0;
};

// Parses the dump_trace format back in. Malformed lines throw.
std::vector<NamedTraceEntry> load_trace(std::istream& in);

}  // namespace oq
