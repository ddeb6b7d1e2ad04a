#include "oq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "oq/mathutil.hpp"

namespace oq::harness {

namespace {

constexpr std::uint64_t kGeneratorSalt = 0x9E3779B97F4A7C15ull;
constexpr double kZ95 = 1.959964;

constexpr const char* kCsvHeader =
    "problem,n,p,S,seed,total_queries,physical_queries,space_words,success,"
    "outputs_emitted,wall_time";

void shuffle_values(std::vector<Value>& values, RandomStream& stream) {
  for (std::uint64_t i = values.size(); i > 1; --i)
    std::swap(values[i - 1], values[stream.uniform_below(i)]);
}

std::vector<Value> random_permutation(std::uint64_t n, RandomStream& stream) {
  std::vector<Value> values(n);
  for (std::uint64_t i = 0; i < n; ++i) values[i] = static_cast<Value>(i + 1);
  shuffle_values(values, stream);
  return values;
}

}  // namespace

noe::NoeInstance make_random_promise_instance(std::uint64_t n, std::uint64_t p,
                                              RandomStream& stream) {
  if (p == 0 || n == 0 || n % p != 0)
    throw std::invalid_argument("promise instance: need p >= 1 dividing n");
  const std::uint64_t blocks = n / p;
  const std::uint64_t t = 1 + stream.uniform_below(blocks);  // distinct occurring values

  std::vector<std::uint64_t> chosen;
  std::unordered_set<std::uint64_t> used;
  while (chosen.size() < t) {
    const std::uint64_t v = 1 + stream.uniform_below(n);
    if (used.insert(v).second) chosen.push_back(v);
  }

  std::vector<std::uint64_t> block_count(t, 1);
  for (std::uint64_t extra = blocks - t; extra > 0; --extra)
    ++block_count[stream.uniform_below(t)];

  std::vector<Value> values;
  values.reserve(n);
  for (std::uint64_t i = 0; i < t; ++i)
    for (std::uint64_t c = 0; c < block_count[i] * p; ++c)
      values.push_back(static_cast<Value>(chosen[i]));
  shuffle_values(values, stream);
  return noe::NoeInstance(n, p, std::move(values));
}

pc2::PcInstance make_random_function(std::uint64_t n, RandomStream& stream) {
  std::vector<Value> values(n);
  for (auto& v : values) v = static_cast<Value>(1 + stream.uniform_below(n));
  return pc2::PcInstance(n, std::move(values));
}

collision::CollisionInstance make_permutation_pair(std::uint64_t n, RandomStream& stream) {
  return collision::CollisionInstance(random_permutation(n, stream),
                                      random_permutation(n, stream));
}

namespace {

bool outputs_match_composition(const std::vector<std::pair<std::uint64_t, Value>>& outputs,
                               const pc2::PcInstance& inst) {
  if (outputs.size() != inst.n) return false;
  const auto f = inst.f.raw();
  for (const auto& [x, y] : outputs) {
    if (x < 1 || x > inst.n) return false;
    if (y != f[static_cast<std::uint64_t>(f[x - 1]) - 1]) return false;
  }
  return true;
}

ExperimentRecord run_one(const ExperimentConfig& config, std::uint64_t n, std::uint64_t p,
                         std::uint64_t space, std::uint64_t seed) {
  ExperimentRecord rec;
  rec.problem = config.problem;
  rec.n = n;
  rec.p = p;
  rec.space = space;
  rec.seed = seed;

  RunContext ctx(seed);
  RandomStream gen(seed ^ kGeneratorSalt);
  const auto started = std::chrono::steady_clock::now();
  std::uint64_t charged = 0;

  if (config.problem == "noe") {
    const noe::NoeInstance inst = make_random_promise_instance(n, p, gen);
    const noe::NoeSolveResult res = noe::noe_solve(ctx, inst, ctx.rng());
    rec.success = res.output == noe::noe_bruteforce(inst);
  } else if (config.problem == "pc2_random") {
    const pc2::PcInstance inst = make_random_function(n, gen);
    const std::uint64_t rounds =
        config.reps > 0 ? config.reps : pc2::default_rounds(n, space);
    const pc2::Pc2RandomResult res =
        pc2::pc2_randomized_oblivious(ctx, inst, space, ctx.rng(), rounds);
    rec.success = outputs_match_composition(res.outputs, inst);
  } else if (config.problem == "pc2_alg1") {
    const pc2::PcInstance inst = make_random_function(n, gen);
    const unsigned k = config.k > 0 ? config.k : 4;
    const pc2::GeneratedExpander expander =
        pc2::gen_candidate_expander(n, k, k + 2, pc2::default_right_size(n, k), gen);
    const pc2::Pc2Alg1Result res = pc2::pc2_alg1(ctx, inst, expander.graph, k, space);
    rec.success = outputs_match_composition(res.outputs, inst);
  } else if (config.problem == "collision_alg2" || config.problem == "collision_alg3") {
    const collision::CollisionInstance inst = make_permutation_pair(n, gen);
    const collision::EdReferenceOracle oracle;
    const collision::CollisionResult res =
        config.problem == "collision_alg2"
            ? collision::alg2_setcollision(ctx, inst, oracle)
            : collision::alg3_parallel(ctx, inst, oracle, space);
    rec.success = res.triples == collision::collision_bruteforce(inst);
    charged = res.stats.logical_queries;
  } else {
    throw std::invalid_argument("unknown problem id: " + config.problem);
  }

  const auto stopped = std::chrono::steady_clock::now();
  const CostReport report = ctx.report();
  rec.physical_queries = report.total_queries;
  rec.total_queries = charged > 0 ? charged : report.total_queries;
  rec.space_words = report.space_words;
  rec.outputs_emitted = report.outputs_emitted;
  if (config.timings)
    rec.wall_time = std::chrono::duration<double>(stopped - started).count();
  return rec;
}

void validate_config(const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  for (std::uint64_t n : config.n_values)
    if (n == 0) throw std::invalid_argument("config: n values must be positive");
  for (std::uint64_t s : config.s_values)
    if (s == 0) throw std::invalid_argument("config: S values must be positive");
  if (config.problem == "noe")
    for (std::uint64_t p : config.p_values)
      if (p == 0) throw std::invalid_argument("config: noe needs positive p values");
}

}  // namespace

std::vector<ExperimentRecord> run_trials(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<ExperimentRecord> records;
  records.reserve(config.n_values.size() * config.p_values.size() *
                  config.s_values.size() * config.trials);
  for (std::uint64_t n : config.n_values)
    for (std::uint64_t p : config.p_values)
      for (std::uint64_t s : config.s_values)
        for (std::uint64_t trial = 0; trial < config.trials; ++trial)
          records.push_back(run_one(config, n, p, s, config.base_seed + trial));
  return records;
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  const double t = static_cast<double>(trials);
  const double rate = static_cast<double>(successes) / t;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / t;
  const double center = (rate + z2 / (2.0 * t)) / denom;
  const double half =
      kZ95 * std::sqrt(rate * (1.0 - rate) / t + z2 / (4.0 * t * t)) / denom;
  return WilsonInterval{rate, std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<GridSuccess> aggregate_success(std::span<const ExperimentRecord> records) {
  std::vector<GridSuccess> out;
  for (const ExperimentRecord& rec : records) {
    if (out.empty() || out.back().n != rec.n || out.back().p != rec.p ||
        out.back().space != rec.space) {
      out.push_back(GridSuccess{rec.n, rec.p, rec.space, 0, 0, {}});
    }
    ++out.back().trials;
    if (rec.success) ++out.back().successes;
  }
  for (GridSuccess& g : out) g.interval = wilson_interval(g.successes, g.trials);
  return out;
}

std::vector<GridSuccess> estimate_success(const ExperimentConfig& config) {
  const std::vector<ExperimentRecord> records = run_trials(config);
  return aggregate_success(records);
}

ExponentFit fit_exponent(std::span<const ExperimentRecord> records) {
  std::map<std::uint64_t, std::pair<double, std::uint64_t>> by_n;  // n -> (sum, count)
  for (const ExperimentRecord& rec : records) {
    auto& [sum, count] = by_n[rec.n];
    sum += static_cast<double>(rec.total_queries);
    ++count;
  }
  if (by_n.size() < 3)
    throw std::invalid_argument("fit_exponent: need at least 3 distinct n values");

  std::vector<double> xs, ys;
  for (const auto& [n, agg] : by_n) {
    const double mean = agg.first / static_cast<double>(agg.second);
    if (mean <= 0.0) throw std::invalid_argument("fit_exponent: zero-query group");
    xs.push_back(std::log2(static_cast<double>(n)));
    ys.push_back(std::log2(mean));
  }
  const double count = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_exponent: degenerate grid");

  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.distinct_n = xs.size();
  double sq = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sq += r * r;
  }
  fit.residual_rms = std::sqrt(sq / count);
  return fit;
}

void write_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << "# schema=1\n" << kCsvHeader << "\n";
  char wall[32];
  for (const ExperimentRecord& rec : records) {
    wall[0] = '\0';
    if (rec.wall_time) std::snprintf(wall, sizeof wall, "%.6f", *rec.wall_time);
    out << rec.problem << ',' << rec.n << ',' << rec.p << ',' << rec.space << ','
        << rec.seed << ',' << rec.total_queries << ',' << rec.physical_queries << ','
        << rec.space_words << ',' << (rec.success ? 1 : 0) << ',' << rec.outputs_emitted
        << ',' << wall << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::vector<ExperimentRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# schema=1")
    throw std::runtime_error("csv: missing `# schema=1` first line");
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("csv: header row does not match schema 1");

  std::vector<ExperimentRecord> records;
  std::uint64_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 11)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 11 fields");
    try {
      ExperimentRecord rec;
      rec.problem = f[0];
      rec.n = std::stoull(f[1]);
      rec.p = std::stoull(f[2]);
      rec.space = std::stoull(f[3]);
      rec.seed = std::stoull(f[4]);
      rec.total_queries = std::stoull(f[5]);
      rec.physical_queries = std::stoull(f[6]);
      rec.space_words = std::stoull(f[7]);
      rec.success = std::stoull(f[8]) != 0;
      rec.outputs_emitted = std::stoull(f[9]);
      if (!f[10].empty()) rec.wall_time = std::stod(f[10]);
      records.push_back(std::move(rec));
    } catch (const std::logic_error&) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad numeric field");
    }
  }
  return records;
}

std::vector<ExperimentRecord> run_suite(const ExperimentConfig& config) {
  if (config.output_path.empty())
    throw std::invalid_argument("run_suite: config has no output path");
  std::vector<ExperimentRecord> records = run_trials(config);
  std::ofstream out(config.output_path);
  if (!out) throw std::runtime_error("run_suite: cannot write " + config.output_path);
  write_csv(out, records);
  if (!out.flush()) throw std::runtime_error("run_suite: write failed: " + config.output_path);
  return records;
}

}  // namespace oq::harness
