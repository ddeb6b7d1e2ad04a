// Command-line front end: instrumented runs of the solvers over instance
// files, adversarial instance construction from trace dumps, and the
// experiment suite. All subcommand results go to --out (stdout by default);
// run summaries go to stderr.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oq/collision.hpp"
#include "oq/harness.hpp"
#include "oq/hard_instances.hpp"
#include "oq/mathutil.hpp"
#include "oq/noe.hpp"
#include "oq/pointer_chasing.hpp"
#include "oq/query_model.hpp"

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "csv";
  std::string trace_out;
};

// Owns the output file when --out was given, otherwise aliases stdout.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish() {
    stream().flush();
    if (file_.is_open() && !file_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

void maybe_dump_trace(const oq::RunContext& ctx, const GlobalOpts& global) {
  if (global.trace_out.empty()) return;
  std::ofstream out(global.trace_out);
  if (!out) throw std::runtime_error("cannot write " + global.trace_out);
  ctx.dump_trace(out);
}

// List file: first integer the length, then that many values.
std::vector<oq::Value> read_value_list(std::istream& in, const std::string& what) {
  std::uint64_t n = 0;
  if (!(in >> n)) throw std::runtime_error(what + ": missing length");
  std::vector<oq::Value> values(n);
  for (std::uint64_t i = 0; i < n; ++i)
    if (!(in >> values[i]))
      throw std::runtime_error(what + ": expected " + std::to_string(n) + " values");
  return values;
}

void print_triples(std::ostream& out, const std::set<oq::collision::CollisionTriple>& triples) {
  for (const auto& t : triples) out << t.i << ' ' << t.j << ' ' << t.x << '\n';
}

void print_run_costs(const oq::RunContext& ctx) {
  const oq::CostReport report = ctx.report();
  std::cerr << "queries=" << report.total_queries << " space_words=" << report.space_words
            << " outputs=" << report.outputs_emitted << '\n';
}

int run_noe_solve(const GlobalOpts& global, const std::string& input) {
  auto in = open_input(input);
  const oq::noe::NoeInstance inst = oq::noe::read_noe_instance(in);
  oq::RunContext ctx(global.seed);
  const oq::noe::NoeSolveResult res = oq::noe::noe_solve(ctx, inst, ctx.rng());
  OutputTarget out(global.out_path);
  if (res.promise_accepted)
    for (std::uint64_t v : res.output) out.stream() << v << '\n';
  out.finish();
  std::cerr << "verdict=" << (res.promise_accepted ? "accept" : "reject")
            << " reps=" << res.reps << " sampler_rounds=" << res.sampler_rounds
            << " draws_per_round=" << res.sampler_draws_per_round << '\n';
  print_run_costs(ctx);
  maybe_dump_trace(ctx, global);
  return 0;
}

int run_noe_check(const GlobalOpts& global, const std::string& input, std::uint64_t reps) {
  auto in = open_input(input);
  const oq::noe::NoeInstance inst = oq::noe::read_noe_instance(in);
  oq::RunContext ctx(global.seed);
  const oq::noe::SketchParams params = oq::noe::SketchParams::for_instance(inst.n, inst.p);
  const unsigned use_reps = reps > 0 ? static_cast<unsigned>(reps)
                                     : static_cast<unsigned>(oq::noe::default_reps(inst.n));
  const oq::noe::SketchVerdict verdict =
      oq::noe::promise_check(ctx, inst.x, params, ctx.rng(), use_reps);
  OutputTarget out(global.out_path);
  out.stream() << (verdict == oq::noe::SketchVerdict::accept ? "accept" : "reject") << '\n';
  out.finish();
  std::cerr << "d=" << params.d << " m=" << params.m
            << " bound_nontrivial=" << (params.bound_nontrivial ? 1 : 0) << '\n';
  print_run_costs(ctx);
  maybe_dump_trace(ctx, global);
  return 0;
}

int run_noe_brute(const GlobalOpts& global, const std::string& input) {
  auto in = open_input(input);
  const oq::noe::NoeInstance inst = oq::noe::read_noe_instance(in);
  const std::set<std::uint64_t> missing = oq::noe::noe_bruteforce(inst);
  OutputTarget out(global.out_path);
  for (std::uint64_t v : missing) out.stream() << v << '\n';
  out.finish();
  if (missing.empty()) std::cerr << "promise violated: some count is not a multiple of p\n";
  return 0;
}

int run_adversary_build(const GlobalOpts& global, std::uint64_t n, std::uint64_t p,
                        const std::string& trace_path, std::uint64_t samples) {
  auto in = open_input(trace_path);
  const std::vector<oq::NamedTraceEntry> entries = oq::load_trace(in);
  const oq::adversary::StageSchedule schedule =
      oq::adversary::StageSchedule::from_trace(entries, n);
  const oq::adversary::PPartition partition = oq::adversary::build_partition(schedule, p);
  partition.validate();

  OutputTarget out(global.out_path);
  out.stream() << "# n=" << partition.n << " p=" << partition.p
               << " T=" << schedule.total_queries << " stages=" << schedule.stages.size()
               << " reserved_per_stage=" << partition.reserved_per_stage << '\n';
  for (std::size_t i = 0; i < partition.parts.size(); ++i) {
    out.stream() << partition.provenance[i];
    for (std::uint64_t idx : partition.parts[i]) out.stream() << ' ' << idx;
    out.stream() << '\n';
  }
  out.finish();

  oq::RandomStream stream(global.seed);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const oq::noe::NoeInstance inst = oq::adversary::sample_D(partition, stream);
    if (global.out_path.empty()) {
      std::cout << "# sample " << s << '\n';
      oq::noe::write_noe_instance(std::cout, inst);
    } else {
      const std::string path = global.out_path + ".sample" + std::to_string(s);
      std::ofstream sample_out(path);
      if (!sample_out) throw std::runtime_error("cannot write " + path);
      oq::noe::write_noe_instance(sample_out, inst);
    }
  }
  std::cerr << "parts=" << partition.parts.size() << " samples=" << samples << '\n';
  return 0;
}

int run_pc2(const GlobalOpts& global, const std::string& algo, const std::string& input,
            const std::string& graph_path, unsigned k, std::uint64_t space,
            std::uint64_t rounds) {
  auto in = open_input(input);
  const oq::pc2::PcInstance inst = oq::pc2::read_pc_instance(in);
  oq::RunContext ctx(global.seed);
  OutputTarget out(global.out_path);

  if (algo == "adaptive") {
    const auto outputs = oq::pc2::pc2_adaptive(ctx, inst);
    for (const auto& [x, y] : outputs) out.stream() << x << ' ' << y << '\n';
  } else if (algo == "random") {
    const std::uint64_t r = rounds > 0 ? rounds : oq::pc2::default_rounds(inst.n, space);
    const oq::pc2::Pc2RandomResult res =
        oq::pc2::pc2_randomized_oblivious(ctx, inst, space, ctx.rng(), r);
    for (const auto& [x, y] : res.outputs) out.stream() << x << ' ' << y << '\n';
    std::cerr << "coverage=" << res.coverage << " rounds=" << res.rounds
              << " subset_size=" << res.subset_size
              << " pair_capacity=" << res.pair_capacity << '\n';
  } else {  // expander
    if (graph_path.empty()) throw std::runtime_error("--algo expander needs --graph");
    auto gin = open_input(graph_path);
    const oq::pc2::BipartiteGraph graph = oq::pc2::BipartiteGraph::load(gin);
    const oq::pc2::Pc2Alg1Result res = oq::pc2::pc2_alg1(ctx, inst, graph, k, space);
    for (const auto& [x, y] : res.outputs) out.stream() << x << ' ' << y << '\n';
    std::cerr << "query_count_bound=" << res.query_count_bound
              << " matching_workspace_words=" << res.matching_workspace_words << '\n';
  }
  out.finish();
  print_run_costs(ctx);
  maybe_dump_trace(ctx, global);
  return 0;
}

int run_pc2_gen_graph(const GlobalOpts& global, std::uint64_t n, unsigned k, unsigned degree,
                      std::uint64_t m) {
  if (m == 0) m = oq::pc2::default_right_size(n, k);
  oq::RandomStream stream(global.seed);
  const oq::pc2::GeneratedExpander gen =
      oq::pc2::gen_candidate_expander(n, k, degree, m, stream);
  OutputTarget out(global.out_path);
  gen.graph.save(out.stream());
  out.finish();
  std::cerr << "attempts=" << gen.attempts << " m=" << m
            << " edges=" << gen.graph.edge_count() << '\n';
  return 0;
}

int run_collision_set(const GlobalOpts& global, const std::string& a_path,
                      const std::string& b_path, std::uint64_t space,
                      const std::string& algo, const std::string& oracle_name) {
  auto a_in = open_input(a_path);
  auto b_in = open_input(b_path);
  const oq::collision::CollisionInstance inst(read_value_list(a_in, a_path),
                                              read_value_list(b_in, b_path));
  const oq::collision::EdReferenceOracle ed;
  const oq::collision::LdReferenceOracle ld;
  const oq::collision::DistinctnessOracle& oracle =
      oracle_name == "ld" ? static_cast<const oq::collision::DistinctnessOracle&>(ld) : ed;

  oq::RunContext ctx(global.seed);
  const oq::collision::CollisionResult res =
      algo == "alg3" ? oq::collision::alg3_parallel(ctx, inst, oracle, space)
                     : oq::collision::alg2_setcollision(ctx, inst, oracle);
  OutputTarget out(global.out_path);
  print_triples(out.stream(), res.triples);
  out.finish();
  std::cerr << "triples=" << res.triples.size() << " padded=" << res.padded_length
            << " oracle=" << oracle.name()
            << " logical_queries=" << res.stats.logical_queries
            << " physical_queries=" << res.stats.physical_queries << '\n';
  print_run_costs(ctx);
  maybe_dump_trace(ctx, global);
  return 0;
}

int run_collision_ncol(const GlobalOpts& global, const std::string& input,
                       std::uint64_t space) {
  auto in = open_input(input);
  const oq::Tape list("L", read_value_list(in, input));
  oq::RunContext ctx(global.seed);
  const oq::collision::NCollisionResult res = oq::collision::n_collision(ctx, list, space);
  OutputTarget out(global.out_path);
  print_triples(out.stream(), res.triples);
  out.finish();
  std::cerr << "triples=" << res.triples.size()
            << " logical_queries=" << res.stats.logical_queries
            << " physical_queries=" << res.stats.physical_queries << '\n';
  print_run_costs(ctx);
  maybe_dump_trace(ctx, global);
  return 0;
}

int run_experiment_run(const GlobalOpts& global, oq::harness::ExperimentConfig config) {
  config.base_seed = global.seed;
  config.output_path = global.out_path;
  std::vector<oq::harness::ExperimentRecord> records;
  if (config.output_path.empty()) {
    records = oq::harness::run_trials(config);
    oq::harness::write_csv(std::cout, records);
  } else {
    records = oq::harness::run_suite(config);
  }
  const auto grid = oq::harness::aggregate_success(records);
  for (const auto& g : grid)
    std::cerr << "n=" << g.n << " p=" << g.p << " S=" << g.space << " rate="
              << g.interval.rate << " wilson95=[" << g.interval.lo << ',' << g.interval.hi
              << "]\n";
  return 0;
}

int run_experiment_fit(const GlobalOpts& global, const std::string& input) {
  auto in = open_input(input);
  const std::vector<oq::harness::ExperimentRecord> records = oq::harness::read_csv(in);
  const oq::harness::ExponentFit fit = oq::harness::fit_exponent(records);
  OutputTarget out(global.out_path);
  out.stream() << "slope=" << fit.slope << " intercept=" << fit.intercept
               << " residual_rms=" << fit.residual_rms << " distinct_n=" << fit.distinct_n
               << '\n';
  out.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-counting runs of sketch, pointer-chasing and collision solvers"};
  app.require_subcommand(1);
  GlobalOpts global;
  app.add_option("--seed", global.seed, "Base seed for all randomness")
      ->envname("OQ_SEED");
  app.add_option("--out", global.out_path, "Write results here instead of stdout");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"csv"}));
  app.add_option("--trace-out", global.trace_out, "Dump the query trace to this file");

  // noe
  auto* noe = app.add_subcommand("noe", "Non-occurring element search");
  noe->require_subcommand(1);
  noe->fallthrough();
  std::string noe_input;
  std::uint64_t noe_reps = 0;
  auto* noe_solve = noe->add_subcommand("solve", "Check the promise, then list missing values");
  noe_solve->fallthrough();
  noe_solve->add_option("--input", noe_input, "Instance file: `n p` then n values")
      ->required();
  auto* noe_check = noe->add_subcommand("check", "Promise check only");
  noe_check->fallthrough();
  noe_check->add_option("--input", noe_input, "Instance file: `n p` then n values")
      ->required();
  noe_check->add_option("--reps", noe_reps, "Sketch repetitions (0 = ceil(log2 n))");
  auto* noe_brute = noe->add_subcommand("brute", "Uninstrumented exact reference");
  noe_brute->fallthrough();
  noe_brute->add_option("--input", noe_input, "Instance file: `n p` then n values")
      ->required();

  // adversary
  auto* adv = app.add_subcommand("adversary", "Adversarial partition and distribution");
  adv->require_subcommand(1);
  adv->fallthrough();
  std::uint64_t adv_n = 0, adv_p = 0, adv_samples = 0;
  std::string adv_trace;
  auto* adv_build = adv->add_subcommand("build", "Partition [n] against a query trace");
  adv_build->fallthrough();
  adv_build->add_option("--n", adv_n, "Input length")->required();
  adv_build->add_option("--p", adv_p, "Part size (prime dividing n)")->required();
  adv_build->add_option("--trace", adv_trace, "Trace dump file")->required();
  adv_build->add_option("--samples", adv_samples, "Instances to sample from the distribution");

  // pc2
  auto* pc2 = app.add_subcommand("pc2", "Two-step pointer chasing");
  pc2->require_subcommand(1);
  pc2->fallthrough();
  std::string pc2_algo = "adaptive", pc2_input, pc2_graph;
  unsigned pc2_k = 4;
  std::uint64_t pc2_space = 1, pc2_rounds = 0, pc2_n = 0, pc2_m = 0;
  unsigned pc2_degree = 6;
  auto* pc2_run = pc2->add_subcommand("run", "Answer f(f(x)) for every x");
  pc2_run->fallthrough();
  pc2_run->add_option("--algo", pc2_algo, "adaptive | random | expander")
      ->check(CLI::IsMember({"adaptive", "random", "expander"}));
  pc2_run->add_option("--input", pc2_input, "Instance file: n then n values")->required();
  pc2_run->add_option("--graph", pc2_graph, "Expander file: `n m` then `v y` edges");
  pc2_run->add_option("--k", pc2_k, "Expansion parameter / block size");
  pc2_run->add_option("--space", pc2_space, "Space budget S");
  pc2_run->add_option("--rounds", pc2_rounds, "Round override for --algo random");
  auto* pc2_gen = pc2->add_subcommand("gen-graph", "Sample and verify a small-set expander");
  pc2_gen->fallthrough();
  pc2_gen->add_option("--n", pc2_n, "Left vertex count")->required();
  pc2_gen->add_option("--k", pc2_k, "Expansion parameter");
  pc2_gen->add_option("--degree", pc2_degree, "Neighbors per left vertex");
  pc2_gen->add_option("--m", pc2_m, "Right vertex count (0 = derived default)");

  // collision
  auto* col = app.add_subcommand("collision", "Collision finding between or within lists");
  col->require_subcommand(1);
  col->fallthrough();
  std::string col_a, col_b, col_algo = "alg2", col_oracle = "ed", col_input;
  std::uint64_t col_space = 1;
  auto* col_set = col->add_subcommand("set", "All collisions between two lists");
  col_set->fallthrough();
  col_set->add_option("--a", col_a, "First list file: length then values")->required();
  col_set->add_option("--b", col_b, "Second list file: length then values")->required();
  col_set->add_option("--space", col_space, "Batch budget S");
  col_set->add_option("--algo", col_algo, "alg2 | alg3")
      ->check(CLI::IsMember({"alg2", "alg3"}));
  col_set->add_option("--oracle", col_oracle, "ed | ld")
      ->check(CLI::IsMember({"ed", "ld"}));
  auto* col_ncol = col->add_subcommand("ncol", "Up to n collisions within one list");
  col_ncol->fallthrough();
  col_ncol->add_option("--input", col_input, "List file: length then values")->required();
  col_ncol->add_option("--space", col_space, "Batch budget S");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Seeded trial grids and CSV artifacts");
  exp->require_subcommand(1);
  exp->fallthrough();
  oq::harness::ExperimentConfig config;
  std::string fit_input;
  auto* exp_run = exp->add_subcommand("run", "Run a trial grid, emit schema=1 CSV");
  exp_run->fallthrough();
  exp_run->add_option("--problem", config.problem,
                      "noe | pc2_random | pc2_alg1 | collision_alg2 | collision_alg3")
      ->required();
  exp_run->add_option("--n", config.n_values, "Input sizes")->required();
  exp_run->add_option("--p", config.p_values, "Primes (noe)");
  exp_run->add_option("--space", config.s_values, "Space budgets");
  exp_run->add_option("--k", config.k, "Block size (pc2_alg1)");
  exp_run->add_option("--reps", config.reps, "Round override (pc2_random)");
  exp_run->add_option("--trials", config.trials, "Trials per grid point");
  exp_run->add_flag("--timings", config.timings, "Fill the wall_time column");
  auto* exp_fit = exp->add_subcommand("fit", "Fit a scaling exponent to a CSV");
  exp_fit->fallthrough();
  exp_fit->add_option("--input", fit_input, "CSV produced by `experiment run`")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (noe_solve->parsed()) return run_noe_solve(global, noe_input);
    if (noe_check->parsed()) return run_noe_check(global, noe_input, noe_reps);
    if (noe_brute->parsed()) return run_noe_brute(global, noe_input);
    if (adv_build->parsed())
      return run_adversary_build(global, adv_n, adv_p, adv_trace, adv_samples);
    if (pc2_run->parsed())
      return run_pc2(global, pc2_algo, pc2_input, pc2_graph, pc2_k, pc2_space, pc2_rounds);
    if (pc2_gen->parsed()) return run_pc2_gen_graph(global, pc2_n, pc2_k, pc2_degree, pc2_m);
    if (col_set->parsed())
      return run_collision_set(global, col_a, col_b, col_space, col_algo, col_oracle);
    if (col_ncol->parsed()) return run_collision_ncol(global, col_input, col_space);
    if (exp_run->parsed()) return run_experiment_run(global, config);
    if (exp_fit->parsed()) return run_experiment_fit(global, fit_input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
