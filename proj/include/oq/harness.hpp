#pragma once

// Experiment drivers: seeded trial grids over the solvers, success-rate
// estimation with Wilson intervals, scaling-exponent fits and CSV artifacts.
// Every record is a pure function of (config, base seed): trial i of every
// grid point runs under seed base_seed + i, the instance generator draws from
// an independent stream derived from that seed, and the algorithm's own
// randomness comes from the run context.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oq/collision.hpp"
#include "oq/noe.hpp"
#include "oq/pointer_chasing.hpp"
#include "oq/query_model.hpp"

namespace oq::harness {

// Problem ids: noe, pc2_random, pc2_alg1, collision_alg2, collision_alg3.
struct ExperimentConfig {
  std::string problem;
  std::vector<std::uint64_t> n_values;
  std::vector<std::uint64_t> p_values{0};  // noe only; others keep the 0 placeholder
  std::vector<std::uint64_t> s_values{1};  // space budgets
  unsigned k = 0;          // pc2_alg1 block size; 0 picks 4
  std::uint64_t reps = 0;  // pc2_random round override; 0 keeps the derived default
  std::uint64_t trials = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  bool timings = false;  // fill wall_time; off keeps the CSV byte-reproducible
};

struct ExperimentRecord {
  std::string problem;
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t space = 0;  // the S grid value
  std::uint64_t seed = 0;
  // Charged query count; exceeds physical_queries only where batched runs
  // deduplicate lockstep reads.
  std::uint64_t total_queries = 0;
  std::uint64_t physical_queries = 0;  // instrumented reads, the trace length
  std::uint64_t space_words = 0;
  bool success = false;
  std::uint64_t outputs_emitted = 0;
  std::optional<double> wall_time;  // seconds; set only when timings requested
};

// Instance generators. Callers keep the returned structures' raw values for
// ground-truth checks; the algorithms only ever see the tapes.
noe::NoeInstance make_random_promise_instance(std::uint64_t n, std::uint64_t p,
                                              RandomStream& stream);
pc2::PcInstance make_random_function(std::uint64_t n, RandomStream& stream);
collision::CollisionInstance make_permutation_pair(std::uint64_t n, RandomStream& stream);

// One record per (n, p, S, trial), in grid order n -> p -> S -> trial.
// Success per problem: noe matches noe_bruteforce; pc2 answers all of [n]
// correctly; collision matches collision_bruteforce.
std::vector<ExperimentRecord> run_trials(const ExperimentConfig& config);

struct WilsonInterval {
  double rate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// 95% Wilson score interval (z = 1.959964).
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials);

struct GridSuccess {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t space = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  WilsonInterval interval;
};

std::vector<GridSuccess> estimate_success(const ExperimentConfig& config);
std::vector<GridSuccess> aggregate_success(std::span<const ExperimentRecord> records);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t distinct_n = 0;
};

// Least squares on (log2 n, log2 mean total_queries), one point per distinct
// n. Requires >= 3 distinct n values.
ExponentFit fit_exponent(std::span<const ExperimentRecord> records);

// CSV: first line `# schema=1`, then a fixed header row, then one line per
// record in order. The wall_time column is left empty unless the record
// carries a timing.
void write_csv(std::ostream& out, std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> read_csv(std::istream& in);

// run_trials + write_csv to config.output_path.
std::vector<ExperimentRecord> run_suite(const ExperimentConfig& config);

}  // namespace oq::harness
