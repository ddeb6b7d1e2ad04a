#include <random>
#include <sstream>

#include "doctest.h"
#include "oq/pointer_chasing.hpp"
#include "support/oracles.hpp"

namespace oq::pc2 {
namespace {

std::vector<Value> random_function(std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Value> f(n);
  for (auto& v : f) v = static_cast<Value>(1 + rng() % n);
  return f;
}

// Every left vertex gets `degree` distinct neighbors; degree >= k makes the
// small-set expansion automatic (any union already has >= degree rights).
BipartiteGraph regular_graph(std::uint64_t n, std::uint64_t m, unsigned degree,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  for (std::uint64_t v = 1; v <= n; ++v) {
    std::vector<std::uint64_t> rights(m);
    for (std::uint64_t y = 0; y < m; ++y) rights[y] = y + 1;
    std::shuffle(rights.begin(), rights.end(), rng);
    for (unsigned e = 0; e < degree; ++e) edges.emplace_back(v, rights[e]);
  }
  return BipartiteGraph(n, m, edges);
}

TEST_SUITE("pointer_chasing") {
  TEST_CASE("instance validation and file parsing") {
    CHECK_NOTHROW(PcInstance(4, {2, 3, 4, 1}));
    CHECK_THROWS_AS(PcInstance(4, {2, 3, 4}), std::invalid_argument);
    CHECK_THROWS_AS(PcInstance(4, {2, 3, 4, 5}), std::invalid_argument);
    CHECK_THROWS_AS(PcInstance(4, {0, 3, 4, 1}), std::invalid_argument);

    std::stringstream good("4\n2 3 4 1\n");
    const PcInstance inst = read_pc_instance(good);
    CHECK(inst.n == 4);
    CHECK(inst.f.raw()[2] == 4);
    std::stringstream missing("4\n2 3");
    CHECK_THROWS(read_pc_instance(missing));
  }

  TEST_CASE("graph basics: dedup, sorted adjacency, range checks, file round-trip") {
    const BipartiteGraph g(3, 5, {{1, 5}, {1, 2}, {1, 2}, {2, 3}, {3, 3}});
    CHECK(g.edge_count() == 4);  // the duplicate (1,2) collapses
    CHECK(std::vector<std::uint64_t>(g.neighbors(1).begin(), g.neighbors(1).end()) ==
          std::vector<std::uint64_t>{2, 5});
    CHECK(std::vector<std::uint64_t>(g.right_neighbors(3).begin(),
                                     g.right_neighbors(3).end()) ==
          std::vector<std::uint64_t>{2, 3});
    CHECK(g.has_edge(1, 2));
    CHECK(!g.has_edge(1, 3));
    CHECK_THROWS_AS(g.neighbors(0), std::out_of_range);
    CHECK_THROWS_AS(g.neighbors(4), std::out_of_range);
    CHECK_THROWS_AS(g.right_neighbors(6), std::out_of_range);
    CHECK_THROWS_AS(BipartiteGraph(3, 5, {{1, 6}}), std::invalid_argument);

    std::stringstream io;
    g.save(io);
    const BipartiteGraph back = BipartiteGraph::load(io);
    CHECK(back.n_left() == 3);
    CHECK(back.m_right() == 5);
    CHECK(back.edge_count() == 4);
    for (std::uint64_t v = 1; v <= 3; ++v)
      CHECK(std::vector<std::uint64_t>(back.neighbors(v).begin(), back.neighbors(v).end()) ==
            std::vector<std::uint64_t>(g.neighbors(v).begin(), g.neighbors(v).end()));
    std::stringstream empty;
    CHECK_THROWS_AS(BipartiteGraph::load(empty), std::runtime_error);
  }

  TEST_CASE("verify_expander accepts a perfect matching and rejects a shared neighbor") {
    const BipartiteGraph id(4, 4, {{1, 1}, {2, 2}, {3, 3}, {4, 4}});
    CHECK(verify_expander(id, 4).ok);

    const BipartiteGraph shared(2, 2, {{1, 1}, {2, 1}});
    const ExpanderCheck check = verify_expander(shared, 2);
    CHECK(!check.ok);
    CHECK(check.witness == std::vector<std::uint64_t>{1, 2});

    CHECK(verify_expander(shared, 0).ok);  // vacuous
    CHECK_THROWS_AS(verify_expander(id, 21), std::invalid_argument);
  }

  TEST_CASE("verify_expander agrees with the Hall-condition oracle on random graphs") {
    std::mt19937_64 rng(5151);
    for (int trial = 0; trial < 50; ++trial) {
      const std::uint64_t n = 2 + rng() % 6;
      const std::uint64_t m = 2 + rng() % 6;
      std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
      for (std::uint64_t v = 1; v <= n; ++v) {
        const unsigned deg = 1 + rng() % 3;
        for (unsigned e = 0; e < deg; ++e) edges.emplace_back(v, 1 + rng() % m);
      }
      const BipartiteGraph g(n, m, edges);
      const unsigned k = 1 + rng() % 4;
      CAPTURE(trial);
      CHECK(verify_expander(g, k).ok == testsupport::hall_expander_check(g, k));
    }
  }

  TEST_CASE("gen_candidate_expander returns a verified graph, first try when degree >= k") {
    RandomStream stream(17);
    const GeneratedExpander gen = gen_candidate_expander(12, 3, 3, 8, stream);
    CHECK(gen.attempts == 1);
    CHECK(gen.graph.n_left() == 12);
    CHECK(gen.graph.m_right() == 8);
    CHECK(gen.graph.edge_count() == 36);  // left-regular, distinct neighbors
    CHECK(verify_expander(gen.graph, 3).ok);
  }

  TEST_CASE("gen_candidate_expander gives up on impossible parameters") {
    // Six left vertices with one neighbor each among three rights: some pair
    // always shares its lone neighbor, so no attempt can verify.
    RandomStream stream(3);
    try {
      gen_candidate_expander(6, 2, 1, 3, stream, 20);
      FAIL("expected GenerationError");
    } catch (const GenerationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("20 attempts") != std::string::npos);
      CHECK(msg.find("n=6") != std::string::npos);
      CHECK(msg.find("degree=1") != std::string::npos);
    }
    RandomStream other(3);
    CHECK_THROWS_AS(gen_candidate_expander(4, 2, 5, 4, other), std::invalid_argument);
  }

  TEST_CASE("default_right_size follows ceil(k^1.5 log2(n)^2)") {
    CHECK(default_right_size(32, 4) == 200);  // 8 * 25
    CHECK(default_right_size(16, 1) == 16);   // 1 * 16
  }

  TEST_CASE("lex_min_matching picks smallest neighbors and swaps when forced") {
    const BipartiteGraph g(2, 5, {{1, 3}, {1, 5}, {2, 1}});
    const MatchingResult single = lex_min_matching(g, {1}, 4);
    CHECK(single.pairs == std::map<std::uint64_t, std::uint64_t>{{1, 3}});

    // 1 would prefer right 1, but that starves 2.
    const BipartiteGraph forced(2, 2, {{1, 1}, {1, 2}, {2, 1}});
    const MatchingResult both = lex_min_matching(forced, {1, 2}, 2);
    CHECK(both.pairs == std::map<std::uint64_t, std::uint64_t>{{1, 2}, {2, 1}});

    const BipartiteGraph starved(2, 2, {{1, 1}, {2, 1}});
    CHECK_THROWS_AS(lex_min_matching(starved, {1, 2}, 2), NoMatchingError);
    CHECK_THROWS_AS(lex_min_matching(g, {1, 2}, 1), std::invalid_argument);  // |L| > k
    CHECK_THROWS_AS(lex_min_matching(g, {7}, 2), std::invalid_argument);
  }

  TEST_CASE("lex_min_matching equals the backtracking minimum on random sets") {
    std::mt19937_64 rng(909);
    for (int trial = 0; trial < 40; ++trial) {
      const std::uint64_t n = 6 + rng() % 4;
      const BipartiteGraph g = regular_graph(n, 6 + rng() % 4, 3, rng());
      const std::uint64_t size = 1 + rng() % 3;  // degree 3 guarantees matchable
      std::vector<std::uint64_t> l;
      while (l.size() < size) {
        const std::uint64_t v = 1 + rng() % n;
        if (std::find(l.begin(), l.end(), v) == l.end()) l.push_back(v);
      }
      const auto brute = testsupport::brute_lex_min_matching(g, l);
      REQUIRE(brute.has_value());
      CAPTURE(trial);
      CHECK(lex_min_matching(g, l, 3).pairs == *brute);
    }
  }

  TEST_CASE("expander_matching inverts the matching and collapses duplicates") {
    const BipartiteGraph forced(2, 2, {{1, 1}, {1, 2}, {2, 1}});
    CHECK(expander_matching(forced, {1, 2}, 1, 2) == 2);
    CHECK(expander_matching(forced, {1, 2}, 2, 2) == 1);
    CHECK(expander_matching(forced, {1, 1, 2, 2}, 1, 2) == 2);  // dups collapse
    CHECK(expander_matching(forced, {1}, 2, 2) == std::nullopt);  // 1 alone takes right 1
  }

  TEST_CASE("adaptive baseline: correct answers, 2n queries, value-dependent trace") {
    const PcInstance id(3, {1, 2, 3});
    RunContext ctx(0);
    const auto out = pc2_adaptive(ctx, id);
    CHECK(out == std::vector<std::pair<std::uint64_t, Value>>{{1, 1}, {2, 2}, {3, 3}});
    CHECK(ctx.total_queries() == 6);

    const PcInstance rot(3, {2, 3, 1});
    RunContext rctx(0);
    CHECK(pc2_adaptive(rctx, rot) ==
          std::vector<std::pair<std::uint64_t, Value>>{{1, 3}, {2, 1}, {3, 2}});

    const std::vector<Value> f = random_function(256, 42);
    const PcInstance big(256, f);
    RunContext bctx(1);
    const auto got = pc2_adaptive(bctx, big);
    CHECK(got == testsupport::compose_table(f));
    CHECK(bctx.total_queries() == 512);

    // The second read of each step lands on f(x), so the trace moves with
    // the values: that is exactly what the oblivious algorithms avoid.
    const std::vector<PcInstance> pair{PcInstance(4, {1, 2, 3, 4}),
                                       PcInstance(4, {4, 3, 2, 1})};
    const auto report = check_oblivious(
        [](RunContext& c, const PcInstance& i) { pc2_adaptive(c, i); }, pair, 7,
        [](const PcInstance& i) { return i.n; });
    CHECK(!report.oblivious);
    CHECK(report.divergence_pos == 1);
  }

  TEST_CASE("randomized oblivious: parameters, exact trace arithmetic, soundness") {
    const std::vector<Value> f = random_function(16, 8);
    const PcInstance inst(16, f);
    RunContext ctx(21);
    const Pc2RandomResult res = pc2_randomized_oblivious(ctx, inst, 4, ctx.rng(), 7);
    CHECK(res.subset_size == 8);     // ceil(sqrt(16 * 4))
    CHECK(res.pair_capacity == 16);  // ceil(4 * log2 16)
    CHECK(res.rounds == 7);
    CHECK(ctx.total_queries() == 7 * 2 * 8);

    const auto truth = testsupport::compose_table(f);
    for (auto [x, ffx] : res.outputs) CHECK(ffx == truth[x - 1].second);

    CHECK_THROWS_AS(pc2_randomized_oblivious(ctx, inst, 0, ctx.rng(), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(pc2_randomized_oblivious(ctx, inst, 17, ctx.rng(), 1),
                    std::invalid_argument);
  }

  TEST_CASE("randomized oblivious: whole-domain subsets give full coverage in one round") {
    const PcInstance inst(4, {2, 3, 4, 1});
    RunContext ctx(5);
    const Pc2RandomResult res = pc2_randomized_oblivious(ctx, inst, 4, ctx.rng(), 1);
    CHECK(res.subset_size == 4);
    CHECK(res.coverage == 1.0);
    CHECK(res.outputs == testsupport::compose_table(inst.f.raw()));
  }

  TEST_CASE("randomized oblivious: default rounds reach full coverage") {
    CHECK(default_rounds(4, 4) == 5);  // ceil(3 * 1 * ln 4)
    std::uint64_t full = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const PcInstance inst(256, random_function(256, seed));
      RunContext ctx(seed);
      const std::uint64_t rounds = default_rounds(256, 16);
      const Pc2RandomResult res = pc2_randomized_oblivious(ctx, inst, 16, ctx.rng(), rounds);
      if (res.coverage == 1.0) {
        ++full;
        CHECK(res.outputs == testsupport::compose_table(inst.f.raw()));
      }
    }
    CHECK(full >= 95);  // per-x miss prob ~ (15/16)^267, union ~ 1.4e-5
  }

  TEST_CASE("randomized oblivious reads are value-independent") {
    std::vector<PcInstance> inputs;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      inputs.push_back(PcInstance(16, random_function(16, 100 + seed)));
    const auto report = check_oblivious(
        [](RunContext& c, const PcInstance& i) {
          pc2_randomized_oblivious(c, i, 4, c.rng(), 3);
        },
        inputs, 13, [](const PcInstance& i) { return i.n; });
    CHECK(report.oblivious);
  }

  TEST_CASE("deterministic oblivious: identity instance, exact query bound") {
    const BipartiteGraph g = regular_graph(16, 8, 2, 1);
    REQUIRE(verify_expander(g, 2).ok);
    std::vector<Value> id(16);
    for (std::uint64_t i = 0; i < 16; ++i) id[i] = static_cast<Value>(i + 1);
    const PcInstance inst(16, id);
    RunContext ctx(0);
    const Pc2Alg1Result res = pc2_alg1(ctx, inst, g, 2, 2);
    CHECK(res.outputs == testsupport::compose_table(inst.f.raw()));
    // stages * (2*m*k*S + |E|) with stages = 16/(2*2) = 4.
    CHECK(res.query_count_bound == 4 * (2 * 8 * 2 * 2 + 32));
    CHECK(ctx.total_queries() == res.query_count_bound);
    CHECK(ctx.report().outputs_emitted == 16);
  }

  TEST_CASE("deterministic oblivious matches the lookup oracle on random functions") {
    RandomStream gstream(77);
    const GeneratedExpander gen = gen_candidate_expander(32, 4, 6, 16, gstream);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const std::vector<Value> f = random_function(32, 500 + seed);
      const PcInstance inst(32, f);
      RunContext ctx(seed);
      const Pc2Alg1Result res = pc2_alg1(ctx, inst, gen.graph, 4, 2);
      CAPTURE(seed);
      CHECK(res.outputs == testsupport::compose_table(f));
      CHECK(ctx.total_queries() == res.query_count_bound);
    }
  }

  TEST_CASE("deterministic oblivious traces are identical across inputs") {
    const BipartiteGraph g = regular_graph(16, 8, 3, 9);
    REQUIRE(verify_expander(g, 2).ok);
    std::vector<PcInstance> inputs;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      inputs.push_back(PcInstance(16, random_function(16, 900 + seed)));
    const auto report = check_oblivious(
        [&](RunContext& c, const PcInstance& i) { pc2_alg1(c, i, g, 2, 4); }, inputs, 0,
        [](const PcInstance& i) { return i.n; });
    CHECK(report.oblivious);
  }

  TEST_CASE("deterministic oblivious rejects bad shapes and non-expanders") {
    const BipartiteGraph g = regular_graph(16, 8, 2, 1);
    const PcInstance inst(16, std::vector<Value>(16, 1));
    RunContext ctx(0);
    CHECK_THROWS_AS(pc2_alg1(ctx, inst, g, 3, 2), std::invalid_argument);   // k nmid n
    CHECK_THROWS_AS(pc2_alg1(ctx, inst, g, 2, 3), std::invalid_argument);   // kS nmid n
    const BipartiteGraph wrong = regular_graph(8, 8, 2, 1);
    CHECK_THROWS_AS(pc2_alg1(ctx, inst, wrong, 2, 2), std::invalid_argument);

    // All left vertices share one right neighbor: the first block image
    // {1, 2} has no full matching and the failure surfaces by name.
    const BipartiteGraph cone(4, 2, {{1, 1}, {2, 1}, {3, 1}, {4, 1}});
    const PcInstance small(4, {1, 2, 3, 4});
    RunContext cctx(0);
    CHECK_THROWS_AS(pc2_alg1(cctx, small, cone, 2, 2), NoMatchingError);
  }
}

}  // namespace
}  // namespace oq::pc2
