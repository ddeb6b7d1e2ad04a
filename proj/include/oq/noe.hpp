#pragma once

// One-pass detection and enumeration of non-occurring elements of [n] for
// inputs promised to repeat every value a multiple of p times (p prime,
// p | n). Two halves:
//   - a low-space algebraic sketch over F_p that accepts exactly the inputs
//     whose occurrence counts all vanish mod p (one-sided error),
//   - a sampling enumerator that walks the occurring values in ascending
//     order and reports the gaps between them.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "oq/query_model.hpp"

namespace oq::noe {

struct NoeInstance {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  Tape x;

  // Validates: p prime, p | n, n >= p >= 2, all values in [n].
  NoeInstance(std::uint64_t n, std::uint64_t p, std::vector<Value> values);
};

// Sketch dimensions for a given (n, p).
//
// d is the per-variable degree cap, the smallest integer with d^2 >= p, and
// m is the number of variables, the smallest integer with p^m >= n^2 (the
// integer form of 2*log(n)/log(p), exact for perfect powers). Together they
// guarantee d^m >= n, so every value in [n] gets a distinct exponent vector.
struct SketchParams {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t d = 0;
  unsigned m = 0;
  // True when m*d < p, i.e. the accept-by-accident fraction m*d/p of a
  // violating input is actually below 1 and the soundness bound says
  // something. Callers should warn when this is false.
  bool bound_nontrivial = false;

  static SketchParams for_instance(std::uint64_t n, std::uint64_t p);
};

struct SketchSeed {
  std::vector<std::uint64_t> betas;  // m field elements, each in [0, p)
};

SketchSeed draw_seed(RandomStream& stream, const SketchParams& params);

// Coefficient assigned to value c in [n]: the product over variables of
// beta_i raised to the i-th base-d digit of (c - 1), least significant digit
// first. A zero exponent contributes factor 1 even when beta_i is 0.
std::uint64_t monomial_coeff(std::uint64_t c, const SketchSeed& seed,
                             const SketchParams& params);

enum class SketchVerdict { accept, reject };

// One left-to-right pass: accept iff the coefficient sum of all read values
// vanishes mod p. Inputs with all counts divisible by p are always accepted;
// for anything else a uniformly drawn seed accepts with probability at most
// m*d/p (the sum is a nonzero polynomial of total degree < m*d in the betas).
SketchVerdict sketch_pass(RunContext& ctx, const Tape& x, const SketchSeed& seed,
                          const SketchParams& params);

struct PromiseCheckOptions {
  // Each repetition conceptually re-reads the input, and by default each
  // position is read once per repetition so the trace and the query count
  // reflect that cost. Setting this false reads each position once and feeds
  // all accumulators from the single read.
  bool charge_repetitions = true;
};

// reps independent sketch passes interleaved into one physical left-to-right
// sweep; accept iff every accumulator lands on zero. Seeds are drawn from the
// stream up front, before the first read.
SketchVerdict promise_check(RunContext& ctx, const Tape& x, const SketchParams& params,
                            RandomStream& stream, unsigned reps,
                            PromiseCheckOptions options = {});

// Same pass with caller-supplied seeds (reps = seeds.size()).
SketchVerdict promise_check_seeded(RunContext& ctx, const Tape& x,
                                   const SketchParams& params,
                                   std::span<const SketchSeed> seeds,
                                   PromiseCheckOptions options = {});

std::uint64_t default_reps(std::uint64_t n);  // smallest r with 2^r >= n

// Number of index draws per sampling round: ceil(3 * (n/p) * ln n).
std::uint64_t sampler_draws_per_round(std::uint64_t n, std::uint64_t p);

struct SamplerResult {
  std::set<std::uint64_t> outputs;
  // True iff, in hindsight, every round's sample hit every occurring value
  // (established by one uninstrumented reference scan; the algorithm itself
  // never uses it). When true, outputs is exactly the non-occurring set of
  // any input that keeps at most n/p distinct values.
  bool success = false;
  std::uint64_t rounds = 0;
  std::uint64_t draws_per_round = 0;
};

// ceil(n/p) rounds; each round draws its sample positions sequentially from
// the stream, advances a cursor j to the smallest sampled value above j, and
// emits the integers skipped over. Queries depend only on (n, p, seed). The
// values above the final cursor are emitted after the last round; that flush
// costs no reads.
SamplerResult noe_sampler(RunContext& ctx, const Tape& x, std::uint64_t n,
                          std::uint64_t p, RandomStream& stream);

struct NoeSolveResult {
  std::set<std::uint64_t> output;  // empty whenever the check rejected
  bool promise_accepted = false;
  bool sampler_success = false;
  unsigned reps = 0;
  std::uint64_t sampler_rounds = 0;
  std::uint64_t sampler_draws_per_round = 0;
};

// Full pipeline: promise_check with ceil(log2 n) repetitions, then the
// sampler. The sampler runs (and reads) regardless of the verdict so the
// trace never depends on input values; a rejected run just discards the
// sampler's statements and returns the empty set.
NoeSolveResult noe_solve(RunContext& ctx, const NoeInstance& inst, RandomStream& stream);

// Uninstrumented exact reference: the non-occurring set if every count is a
// multiple of p, otherwise the empty set.
std::set<std::uint64_t> noe_bruteforce(const NoeInstance& inst);

// Instance file format: first line "n p", second line n whitespace-separated
// values in [n].
NoeInstance read_noe_instance(std::istream& in);
void write_noe_instance(std::ostream& out, const NoeInstance& inst);

}  // namespace oq::noe
