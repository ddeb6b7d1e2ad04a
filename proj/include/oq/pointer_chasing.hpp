#pragma once

// Two-step pointer chasing: given f: [n] -> [n] on a tape, produce
// (x, f(f(x))) for every x. Three algorithms with different query behavior:
//   - pc2_adaptive: the obvious 2n-query algorithm whose second read depends
//     on the first value (so its trace is input-dependent),
//   - pc2_randomized_oblivious: random-subset rounds whose reads depend only
//     on the seed,
//   - pc2_alg1: deterministic and oblivious, routing second hops through the
//     lexicographically smallest matching of a small-set expander.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oq/query_model.hpp"

namespace oq::pc2 {

struct PcInstance {
  std::uint64_t n = 0;
  Tape f;

  // Validates all values in [n].
  PcInstance(std::uint64_t n, std::vector<Value> values);
};

// Left vertex set [n], right vertex set [m], 1-based everywhere. Parallel
// edges collapse; adjacency is kept sorted on both sides.
class BipartiteGraph {
 public:
  BipartiteGraph(std::uint64_t n_left, std::uint64_t m_right,
                 const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges);

  std::uint64_t n_left() const { return n_left_; }
  std::uint64_t m_right() const { return m_right_; }
  std::uint64_t edge_count() const { return edge_count_; }
  std::span<const std::uint64_t> neighbors(std::uint64_t v) const;
  std::span<const std::uint64_t> right_neighbors(std::uint64_t y) const;
  bool has_edge(std::uint64_t v, std::uint64_t y) const;

  // File format: first line "n m", then one "v y" edge per line.
  static BipartiteGraph load(std::istream& in);
  void save(std::ostream& out) const;

 private:
  std::uint64_t n_left_ = 0;
  std::uint64_t m_right_ = 0;
  std::uint64_t edge_count_ = 0;
  std::vector<std::vector<std::uint64_t>> left_adj_;
  std::vector<std::vector<std::uint64_t>> right_adj_;
};

struct ExpanderCheck {
  bool ok = true;
  std::vector<std::uint64_t> witness;  // a violating left set when !ok
};

// Exhaustively verifies |N(L)| >= |L| for every left set of size <= k.
// Exponential in k by nature; refuses k > 20.
ExpanderCheck verify_expander(const BipartiteGraph& g, unsigned k);

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeneratedExpander {
  BipartiteGraph graph;
  unsigned attempts = 0;
};

// Samples left-regular random graphs (each left vertex gets `degree` distinct
// right neighbors) until one passes verify_expander, up to max_attempts.
GeneratedExpander gen_candidate_expander(std::uint64_t n, unsigned k, unsigned degree,
                                         std::uint64_t m, RandomStream& stream,
                                         unsigned max_attempts = 100);

// Default right-side size for generated graphs: ceil(k^(1+alpha) * log2(n)^2).
std::uint64_t default_right_size(std::uint64_t n, unsigned k, double alpha = 0.5);

struct NoMatchingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatchingResult {
  std::map<std::uint64_t, std::uint64_t> pairs;  // left -> right, injective
};

// Lexicographically smallest full matching of L (|L| <= k) into the right
// side: processes L ascending and gives each vertex its smallest unused
// neighbor that leaves the rest of L matchable. Throws NoMatchingError when L
// has no full matching.
MatchingResult lex_min_matching(const BipartiteGraph& g, const std::vector<std::uint64_t>& l,
                                unsigned k);

// The unique left vertex the lex-min matching of L sends to y, if any.
// Duplicates in l are collapsed before matching.
std::optional<std::uint64_t> expander_matching(const BipartiteGraph& g,
                                               std::vector<std::uint64_t> l, std::uint64_t y,
                                               unsigned k);

// Baseline: for x ascending, read f(x) then f(f(x)). 2n queries, trace
// depends on the values read.
std::vector<std::pair<std::uint64_t, Value>> pc2_adaptive(RunContext& ctx,
                                                          const PcInstance& inst);

std::uint64_t default_rounds(std::uint64_t n, std::uint64_t space);  // ceil(3(n/S)ln n)

struct Pc2RandomResult {
  std::vector<std::pair<std::uint64_t, Value>> outputs;  // sorted by x
  double coverage = 0.0;                                 // fraction of [n] answered
  std::uint64_t rounds = 0;
  std::uint64_t subset_size = 0;
  std::uint64_t pair_capacity = 0;
};

// Per round: sample subsets X, Y of [n] with |X| = |Y| = ceil(sqrt(n*S)),
// read f on X keeping up to ceil(S*log2 n) pairs (x, f(x)) with f(x) in Y
// (earliest x wins), then read f on Y and emit (x, f(f(x))) for kept pairs.
// Reads depend only on the stream, never on values.
Pc2RandomResult pc2_randomized_oblivious(RunContext& ctx, const PcInstance& inst,
                                         std::uint64_t space, RandomStream& stream,
                                         std::uint64_t rounds);

struct Pc2Alg1Result {
  std::vector<std::pair<std::uint64_t, Value>> outputs;  // sorted by x, all of [n]
  std::uint64_t matching_workspace_words = 0;  // reported separately from ctx space
  std::uint64_t query_count_bound = 0;         // closed form the run must meet exactly
};

// Deterministic oblivious algorithm. Blocks B_1..B_{n/k} of k consecutive
// positions; stages of S blocks. Per (stage, right vertex y): re-read each of
// the stage's blocks and route y back through the lex-min matching of the
// block image to a candidate u_i; read f over y's left neighborhood to attach
// f(u_i); then read f over the stage's positions and emit (x, f(u_i)) whenever
// f(x) = u_i. Requires k | n, (k*S) | n, and g a verified small-set expander
// with left size n (unverified graphs surface as NoMatchingError).
Pc2Alg1Result pc2_alg1(RunContext& ctx, const PcInstance& inst, const BipartiteGraph& g,
                       unsigned k, std::uint64_t space);

// Instance file format: first line n, then n values f(1), ..., f(n).
PcInstance read_pc_instance(std::istream& in);

}  // namespace oq::pc2
