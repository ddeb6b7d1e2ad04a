#include "oq/noe.hpp"

#include <cassert>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "oq/mathutil.hpp"

namespace oq::noe {

NoeInstance::NoeInstance(std::uint64_t n_, std::uint64_t p_, std::vector<Value> values)
    : n(n_), p(p_), x("X", std::move(values)) {
  if (p < 2 || !is_prime(p))
    throw std::invalid_argument("NoeInstance: p must be prime, got " + std::to_string(p));
  if (n == 0 || n % p != 0)
    throw std::invalid_argument("NoeInstance: p must divide n");
  if (x.length() != n)
    throw std::invalid_argument("NoeInstance: expected " + std::to_string(n) + " values, got " +
                                std::to_string(x.length()));
  for (Value v : x.raw())
    if (v < 1 || static_cast<std::uint64_t>(v) > n)
      throw std::invalid_argument("NoeInstance: value " + std::to_string(v) +
                                  " outside [1, " + std::to_string(n) + "]");
}

SketchParams SketchParams::for_instance(std::uint64_t n, std::uint64_t p) {
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("SketchParams: p must be prime");
  if (p >= (std::uint64_t{1} << 31))
    throw std::invalid_argument("SketchParams: p must fit in 31 bits");
  if (n < 2) throw std::invalid_argument("SketchParams: n must be at least 2");
  SketchParams out;
  out.n = n;
  out.p = p;
  out.d = ceil_sqrt(p);
  out.m = ceil_log_base(p, n * n);
  out.bound_nontrivial = out.m * out.d < p;
  if (!pow_at_least(out.d, out.m, n))
    throw std::logic_error("SketchParams: d^m < n, exponent vectors would collide");
  return out;
}

SketchSeed draw_seed(RandomStream& stream, const SketchParams& params) {
  SketchSeed seed;
  seed.betas.reserve(params.m);
  for (unsigned i = 0; i < params.m; ++i) seed.betas.push_back(stream.uniform_below(params.p));
  return seed;
}

std::uint64_t monomial_coeff(std::uint64_t c, const SketchSeed& seed,
                             const SketchParams& params) {
  if (c < 1 || c > params.n)
    throw std::out_of_range("monomial_coeff: value outside [1, n]");
  if (seed.betas.size() != params.m)
    throw std::invalid_argument("monomial_coeff: seed arity mismatch");
  std::uint64_t rem = c - 1;
  std::uint64_t out = 1 % params.p;
  for (unsigned i = 0; i < params.m; ++i) {
    const std::uint64_t digit = rem % params.d;
    rem /= params.d;
    if (digit != 0) out = out * pow_mod(seed.betas[i], digit, params.p) % params.p;
  }
  assert(rem == 0);  // guaranteed by d^m >= n
  return out;
}

SketchVerdict sketch_pass(RunContext& ctx, const Tape& x, const SketchSeed& seed,
                          const SketchParams& params) {
  const std::uint64_t n = x.length();
  ctx.note_space(params.m + 2);  // seed, accumulator, position
  std::uint64_t acc = 0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const Value v = ctx.read(x, i);
    acc = (acc + monomial_coeff(static_cast<std::uint64_t>(v), seed, params)) % params.p;
  }
  return acc == 0 ? SketchVerdict::accept : SketchVerdict::reject;
}

SketchVerdict promise_check_seeded(RunContext& ctx, const Tape& x,
                                   const SketchParams& params,
                                   std::span<const SketchSeed> seeds,
                                   PromiseCheckOptions options) {
  const std::uint64_t n = x.length();
  const std::size_t reps = seeds.size();
  if (reps == 0) throw std::invalid_argument("promise_check: need at least one seed");
  ctx.note_space(reps * (params.m + 1) + 1);  // seeds, accumulators, position
  std::vector<std::uint64_t> acc(reps, 0);
  for (std::uint64_t i = 1; i <= n; ++i) {
    if (options.charge_repetitions) {
      for (std::size_t r = 0; r < reps; ++r) {
        const Value v = ctx.read(x, i);
        acc[r] = (acc[r] + monomial_coeff(static_cast<std::uint64_t>(v), seeds[r], params)) %
                 params.p;
      }
    } else {
      const Value v = ctx.read(x, i);
      for (std::size_t r = 0; r < reps; ++r)
        acc[r] = (acc[r] + monomial_coeff(static_cast<std::uint64_t>(v), seeds[r], params)) %
                 params.p;
    }
  }
  for (std::uint64_t a : acc)
    if (a != 0) return SketchVerdict::reject;
  return SketchVerdict::accept;
}

SketchVerdict promise_check(RunContext& ctx, const Tape& x, const SketchParams& params,
                            RandomStream& stream, unsigned reps,
                            PromiseCheckOptions options) {
  std::vector<SketchSeed> seeds;
  seeds.reserve(reps);
  for (unsigned r = 0; r < reps; ++r) seeds.push_back(draw_seed(stream, params));
  return promise_check_seeded(ctx, x, params, seeds, options);
}

std::uint64_t default_reps(std::uint64_t n) { return ceil_log2(n); }

std::uint64_t sampler_draws_per_round(std::uint64_t n, std::uint64_t p) {
  return static_cast<std::uint64_t>(
      std::ceil(3.0 * (static_cast<double>(n) / static_cast<double>(p)) *
                std::log(static_cast<double>(n))));
}

SamplerResult noe_sampler(RunContext& ctx, const Tape& x, std::uint64_t n,
                          std::uint64_t p, RandomStream& stream) {
  if (x.length() != n) throw std::invalid_argument("noe_sampler: tape length != n");
  if (p == 0 || n % p != 0) throw std::invalid_argument("noe_sampler: p must divide n");
  SamplerResult result;
  result.rounds = ceil_div(n, p);
  result.draws_per_round = sampler_draws_per_round(n, p);
  ctx.note_space(4);  // cursor, candidate, sample value, round counter

  // Reference occurrence scan, used only to fill in the hindsight success
  // flag; the algorithm below never consults it.
  std::vector<bool> occurring(n + 1, false);
  for (Value v : x.raw()) occurring[static_cast<std::uint64_t>(v)] = true;

  SetSink<std::uint64_t> sink(ctx);
  bool all_rounds_complete = true;
  std::uint64_t j = 0;
  for (std::uint64_t round = 0; round < result.rounds; ++round) {
    std::uint64_t candidate = n + 1;
    std::vector<bool> hit(n + 1, false);
    for (std::uint64_t t = 0; t < result.draws_per_round; ++t) {
      const std::uint64_t pos = 1 + stream.uniform_below(n);
      const auto v = static_cast<std::uint64_t>(ctx.read(x, pos));
      hit[v] = true;
      if (v > j && v < candidate) candidate = v;
    }
    for (std::uint64_t c = 1; c <= n; ++c)
      if (occurring[c] && !hit[c]) all_rounds_complete = false;
    for (std::uint64_t y = j + 1; y < candidate; ++y) sink.emit(y);
    j = candidate;
  }
  // Everything above the final cursor was never claimed occurring; emitting it
  // here costs no reads and completes the walk when all n/p distinct values
  // were consumed by the rounds.
  for (std::uint64_t y = j + 1; y <= n; ++y) sink.emit(y);

  result.success = all_rounds_complete;
  result.outputs = sink.items();
  return result;
}

NoeSolveResult noe_solve(RunContext& ctx, const NoeInstance& inst, RandomStream& stream) {
  NoeSolveResult result;
  result.reps = static_cast<unsigned>(default_reps(inst.n));
  const SketchParams params = SketchParams::for_instance(inst.n, inst.p);
  result.promise_accepted =
      promise_check(ctx, inst.x, params, stream, result.reps) == SketchVerdict::accept;
  // The sampler always runs so the query trace is a function of (n, p, seed)
  // alone; on a rejected check its statements are discarded.
  SamplerResult sampled = noe_sampler(ctx, inst.x, inst.n, inst.p, stream);
  result.sampler_rounds = sampled.rounds;
  result.sampler_draws_per_round = sampled.draws_per_round;
  result.sampler_success = sampled.success;
  if (result.promise_accepted) result.output = std::move(sampled.outputs);
  return result;
}

std::set<std::uint64_t> noe_bruteforce(const NoeInstance& inst) {
  std::vector<std::uint64_t> count(inst.n + 1, 0);
  for (Value v : inst.x.raw()) ++count[static_cast<std::uint64_t>(v)];
  std::set<std::uint64_t> out;
  for (std::uint64_t c = 1; c <= inst.n; ++c)
    if (count[c] % inst.p != 0) return {};
  for (std::uint64_t c = 1; c <= inst.n; ++c)
    if (count[c] == 0) out.insert(c);
  return out;
}

NoeInstance read_noe_instance(std::istream& in) {
  std::uint64_t n = 0, p = 0;
  if (!(in >> n >> p)) throw std::runtime_error("noe instance: missing n p header");
  std::vector<Value> values(n);
  for (std::uint64_t i = 0; i < n; ++i)
    if (!(in >> values[i]))
      throw std::runtime_error("noe instance: expected " + std::to_string(n) + " values");
  return NoeInstance(n, p, std::move(values));
}

void write_noe_instance(std::ostream& out, const NoeInstance& inst) {
  out << inst.n << ' ' << inst.p << '\n';
  for (std::uint64_t i = 0; i < inst.n; ++i)
    out << inst.x.raw()[i] << (i + 1 == inst.n ? '\n' : ' ');
}

}  // namespace oq::noe
