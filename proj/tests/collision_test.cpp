#include <random>

#include "doctest.h"
#include "oq/collision.hpp"
#include "support/oracles.hpp"

namespace oq::collision {
namespace {

std::vector<Value> random_list(std::uint64_t len, Value lo, Value hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Value> out(len);
  for (auto& v : out) v = lo + static_cast<Value>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  return out;
}

std::vector<Value> relabel(std::span<const Value> values,
                           const std::vector<Value>& sigma) {
  std::vector<Value> out(values.begin(), values.end());
  for (auto& v : out) v = sigma[static_cast<std::uint64_t>(v) - 1];
  return out;
}

TEST_SUITE("collision") {
  TEST_CASE("instance validation and duplicate-freeness flags") {
    const CollisionInstance inst({1, 2, 3}, {3, 3, 5});
    CHECK(inst.a_duplicate_free);
    CHECK(!inst.b_duplicate_free);
    CHECK(inst.a.length() == 3);
    CHECK_THROWS_AS(CollisionInstance({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(CollisionInstance({1}, {1, 2}), std::invalid_argument);

    CHECK(is_duplicate_free(std::vector<Value>{}));
    CHECK(is_duplicate_free(std::vector<Value>{5, 1, 9}));
    CHECK(!is_duplicate_free(std::vector<Value>{5, 1, 5}));
  }

  TEST_CASE("distinctness verdicts on the reference pairs") {
    const std::vector<Value> a12{1, 2}, b34{3, 4}, b29{2, 9}, a11{1, 1}, b23{2, 3};
    CHECK(ed_distinct(a12, b34));
    CHECK(!ed_distinct(a12, b29));
    CHECK(ld_collides(a12, b29));
    CHECK(!ld_collides(a12, b34));
    // Internal duplicates: not a cross collision, but enough to block the
    // all-distinct verdict. This is exactly where the two oracles differ.
    CHECK(!ld_collides(a11, b23));
    CHECK(!ed_distinct(a11, b23));
    CHECK_THROWS_AS(ed_distinct(a12, std::vector<Value>{3}), std::invalid_argument);
  }

  TEST_CASE("distinctness verdicts match the quadratic scans on random intervals") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 200; ++trial) {
      const std::uint64_t len = 1 + rng() % 6;
      const auto a = random_list(len, 1, 6, rng());
      const auto b = random_list(len, 1, 6, rng());
      CAPTURE(trial);
      CHECK(ed_distinct(a, b) == testsupport::scan_all_distinct(a, b));
      CHECK(ld_collides(a, b) == testsupport::scan_cross_collision(a, b));
    }
  }

  TEST_CASE("oracle schedules read the first interval, then the second") {
    const EdReferenceOracle ed;
    const auto steps = ed.schedule(3);
    REQUIRE(steps.size() == 6);
    for (std::uint64_t i = 0; i < 3; ++i) {
      CHECK(!steps[i].on_b);
      CHECK(steps[i].offset == i);
      CHECK(steps[3 + i].on_b);
      CHECK(steps[3 + i].offset == i);
    }
    CHECK(ed.state_words(3) == 8);
    CHECK(LdReferenceOracle{}.schedule(4).size() == 8);
  }

  TEST_CASE("lockstep collapses identical reads within a step") {
    const Tape a("A", {1, 2, 7, 8});
    const Tape b("B", {3, 4, 9, 10});
    const EdReferenceOracle oracle;

    SUBCASE("identical tasks cost one task's reads") {
      const std::vector<PairTask> tasks(4, PairTask{1, 1});
      RunContext ctx(0);
      const LockstepResult res = lockstep_run(ctx, a, b, 0, 0, tasks, oracle, 2);
      CHECK(res.physical_reads == 4);  // 2 * len
      CHECK(res.logical_reads == 16);
      CHECK(ctx.total_queries() == 4);
      for (bool p : res.prune) CHECK(p);
    }

    SUBCASE("tasks sharing one side dedup only that side") {
      const std::vector<PairTask> tasks{PairTask{1, 1}, PairTask{3, 1}};
      RunContext ctx(0);
      const LockstepResult res = lockstep_run(ctx, a, b, 0, 0, tasks, oracle, 2);
      CHECK(res.physical_reads == 6);  // 3 * len: A sides disjoint, B side shared
      CHECK(res.logical_reads == 8);
    }

    SUBCASE("empty intervals are rejected") {
      RunContext ctx(0);
      CHECK_THROWS_AS(lockstep_run(ctx, a, b, 0, 0, std::vector<PairTask>{}, oracle, 0),
                      std::invalid_argument);
    }
  }

  TEST_CASE("lockstep verdicts equal the one-shot verdicts on random batches") {
    std::mt19937_64 rng(606);
    const EdReferenceOracle ed;
    const LdReferenceOracle ld;
    for (int trial = 0; trial < 100; ++trial) {
      const std::uint64_t n = 8;
      const Tape a("A", random_list(n, 1, 5, rng()));
      const Tape b("B", random_list(n, 1, 5, rng()));
      const std::uint64_t len = 1 + rng() % 3;
      std::vector<PairTask> tasks;
      for (int t = 0; t < 5; ++t)
        tasks.push_back(PairTask{1 + rng() % (n - len + 1), 1 + rng() % (n - len + 1)});
      const DistinctnessOracle& oracle =
          (trial % 2 == 0) ? static_cast<const DistinctnessOracle&>(ed)
                           : static_cast<const DistinctnessOracle&>(ld);
      RunContext ctx(0);
      const LockstepResult res = lockstep_run(ctx, a, b, 0, 0, tasks, oracle, len);
      CHECK(ctx.total_queries() == res.physical_reads);
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto av = a.raw().subspan(tasks[t].s - 1, len);
        const auto bv = b.raw().subspan(tasks[t].s_prime - 1, len);
        const bool expected = (trial % 2 == 0) ? testsupport::scan_all_distinct(av, bv)
                                               : !testsupport::scan_cross_collision(av, bv);
        CAPTURE(trial);
        CHECK(res.prune[t] == expected);
      }
    }
  }

  TEST_CASE("sequential search: frozen two-element run, including the exact trace") {
    const CollisionInstance inst({1, 2}, {2, 1});
    RunContext ctx(0);
    const CollisionResult res = alg2_setcollision(ctx, inst, EdReferenceOracle{});
    CHECK(res.triples ==
          std::set<CollisionTriple>{CollisionTriple{1, 2, 1}, CollisionTriple{2, 1, 2}});
    CHECK(res.padded_length == 2);
    CHECK(res.stats.physical_queries == 12);
    CHECK(res.stats.logical_queries == 12);  // nothing batched, nothing shared
    CHECK(ctx.total_queries() == 12);

    // Root oracle pass over both intervals, then the four leaves depth-first.
    const std::vector<TraceEntry> expected{
        {0, 1}, {0, 2}, {1, 1}, {1, 2},  // root: A then B
        {0, 1}, {1, 1},                  // leaf (1,1)
        {0, 2}, {1, 1},                  // leaf (2,1) -> emit (2,1,2)
        {0, 1}, {1, 2},                  // leaf (1,2) -> emit (1,2,1)
        {0, 2}, {1, 2},                  // leaf (2,2)
    };
    CHECK(ctx.trace().entries == expected);
    CHECK(res.stats.per_level.at(2).invoked == 1);
    CHECK(res.stats.per_level.at(2).pruned == 0);
    CHECK(res.stats.per_level.at(1).invoked == 4);
    CHECK(res.stats.per_level.at(1).emitted == 2);
    CHECK(res.stats.initial_calls_per_level.at(2) == 1);
    CHECK(ctx.report().outputs_emitted == 2);
  }

  TEST_CASE("sequential search: disjoint lists prune at the root") {
    const CollisionInstance inst({1, 2}, {3, 4});
    RunContext ctx(0);
    const CollisionResult res = alg2_setcollision(ctx, inst, EdReferenceOracle{});
    CHECK(res.triples.empty());
    CHECK(res.stats.per_level.at(2).invoked == 1);
    CHECK(res.stats.per_level.at(2).pruned == 1);
    CHECK(ctx.total_queries() == 4);
  }

  TEST_CASE("sequential search matches bruteforce with prune validation on") {
    std::mt19937_64 rng(7001);
    CollisionOptions options;
    options.validate_prunes = true;
    for (int trial = 0; trial < 100; ++trial) {
      const std::uint64_t n = 1 + rng() % 9;  // exercises every padding amount
      const CollisionInstance inst(random_list(n, 1, 8, rng()), random_list(n, 1, 8, rng()));
      RunContext ctx(0);
      const CollisionResult res = alg2_setcollision(ctx, inst, EdReferenceOracle{}, options);
      CAPTURE(trial);
      CHECK(res.triples == collision_bruteforce(inst));
      CHECK(res.padded_length >= n);
      CHECK((res.padded_length & (res.padded_length - 1)) == 0);
      CHECK(ctx.total_queries() == res.stats.physical_queries);
      CHECK(res.stats.logical_queries >= res.stats.physical_queries);
    }
  }

  TEST_CASE("surviving interval pairs are bounded by the collisions they contain") {
    std::mt19937_64 rng(7002);
    for (int trial = 0; trial < 30; ++trial) {
      // Duplicate-free lists keep the all-distinct oracle exact, which makes
      // the bound an equality-or-less per level rather than a heuristic.
      std::vector<Value> a(16), b(16);
      for (std::uint64_t i = 0; i < 16; ++i) {
        a[i] = static_cast<Value>(i + 1);
        b[i] = static_cast<Value>(rng() % 2 == 0 ? i + 1 : i + 17);
      }
      std::shuffle(a.begin(), a.end(), rng);
      std::shuffle(b.begin(), b.end(), rng);
      const CollisionInstance inst(a, b);
      const std::uint64_t collisions = collision_bruteforce(inst).size();
      RunContext ctx(0);
      const CollisionResult res = alg2_setcollision(ctx, inst, EdReferenceOracle{});
      for (const auto& [len, stats] : res.stats.per_level) {
        if (len == 1) continue;  // leaves read directly, no oracle verdict
        CAPTURE(trial);
        CAPTURE(len);
        CHECK(stats.invoked - stats.pruned <= collisions);
      }
    }
  }

  TEST_CASE("output budget stops the search exactly") {
    const CollisionInstance inst({1, 2, 1, 4}, {1, 1, 3, 3});
    REQUIRE(collision_bruteforce(inst).size() == 4);
    CollisionOptions options;
    options.max_outputs = 2;
    RunContext ctx(0);
    const CollisionResult res = alg2_setcollision(ctx, inst, EdReferenceOracle{}, options);
    CHECK(res.triples.size() == 2);
    const auto truth = collision_bruteforce(inst);
    for (const auto& t : res.triples) CHECK(truth.count(t) == 1);
  }

  TEST_CASE("batched search: frozen three-element run") {
    const CollisionInstance inst({1, 2, 3}, {3, 4, 5});
    RunContext ctx(0);
    const CollisionResult res = alg3_parallel(ctx, inst, EdReferenceOracle{}, 4);
    CHECK(res.triples == std::set<CollisionTriple>{CollisionTriple{3, 1, 3}});
    CHECK(res.padded_length == 4);
    // One entry batch of four length-2 tasks sharing two starts per side,
    // then the four leaves of the one surviving pair.
    CHECK(res.stats.logical_queries == 24);
    CHECK(res.stats.physical_queries == 12);
    CHECK(res.stats.initial_calls_per_level.at(2) == 4);
    CHECK(res.stats.per_level.at(2).invoked == 4);
    CHECK(res.stats.per_level.at(2).pruned == 3);
    CHECK(res.stats.per_level.at(1).invoked == 4);
    CHECK(ctx.total_queries() == 12);
  }

  TEST_CASE("batched search matches bruteforce across space budgets") {
    std::mt19937_64 rng(7003);
    CollisionOptions options;
    options.validate_prunes = true;
    for (const std::uint64_t space : {1ull, 4ull, 16ull}) {
      for (int trial = 0; trial < 40; ++trial) {
        const std::uint64_t n = 1 + rng() % 40;
        const CollisionInstance inst(random_list(n, 1, 16, rng()),
                                     random_list(n, 1, 16, rng()));
        RunContext ctx(0);
        const CollisionResult res = alg3_parallel(ctx, inst, EdReferenceOracle{}, space, options);
        CAPTURE(space);
        CAPTURE(trial);
        CHECK(res.triples == collision_bruteforce(inst));
        CHECK(ctx.total_queries() == res.stats.physical_queries);
      }
    }
  }

  TEST_CASE("batched search at space 1 never shares a read") {
    const CollisionInstance inst({5, 1, 2, 5, 9, 2, 4, 4}, {2, 2, 7, 5, 8, 1, 1, 3});
    RunContext ctx(0);
    const CollisionResult res = alg3_parallel(ctx, inst, EdReferenceOracle{}, 1);
    CHECK(res.stats.logical_queries == res.stats.physical_queries);
    CHECK(res.triples == collision_bruteforce(inst));
  }

  TEST_CASE("batching buys strictly fewer physical reads on permutation inputs") {
    std::mt19937_64 rng(7004);
    std::vector<Value> a(256), b(256);
    for (std::uint64_t i = 0; i < 256; ++i) a[i] = b[i] = static_cast<Value>(i + 1);
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    const CollisionInstance inst(a, b);

    RunContext seq(0);
    const CollisionResult r2 = alg2_setcollision(seq, inst, EdReferenceOracle{});
    RunContext par(0);
    const CollisionResult r3 = alg3_parallel(par, inst, EdReferenceOracle{}, 16);
    CHECK(r2.triples == r3.triples);
    CHECK(r2.triples.size() == 256);  // both permutations of the same value set
    CHECK(r3.stats.physical_queries < r2.stats.physical_queries);
  }

  TEST_CASE("traces depend on collision positions, not on value labels") {
    const std::vector<Value> base_a = random_list(32, 1, 8, 31337);
    const std::vector<Value> base_b = random_list(32, 1, 8, 31338);
    std::mt19937_64 rng(9);
    std::vector<CollisionInstance> inputs;
    inputs.emplace_back(base_a, base_b);
    for (int i = 0; i < 9; ++i) {
      std::vector<Value> sigma(8);
      for (std::uint64_t v = 0; v < 8; ++v) sigma[v] = static_cast<Value>(v + 1);
      std::shuffle(sigma.begin(), sigma.end(), rng);
      inputs.emplace_back(relabel(base_a, sigma), relabel(base_b, sigma));
    }
    const auto report = check_oblivious(
        [](RunContext& ctx, const CollisionInstance& inst) {
          alg3_parallel(ctx, inst, EdReferenceOracle{}, 4);
        },
        inputs, 0,
        [](const CollisionInstance& inst) {
          return std::pair{inst.a.length(), inst.b.length()};
        });
    CHECK(report.oblivious);
  }

  TEST_CASE("single-list search: distinct lists emit nothing") {
    const Tape list("L", {4, 1, 7, 2, 9, 3});
    RunContext ctx(0);
    const NCollisionResult res = n_collision(ctx, list, 2);
    CHECK(res.triples.empty());
    CHECK(ctx.total_queries() == res.stats.physical_queries);
  }

  TEST_CASE("single-list search: frozen six-element run") {
    const Tape list("L", {5, 1, 5, 2, 1, 5});
    RunContext ctx(0);
    const NCollisionResult res = n_collision(ctx, list, 2);
    CHECK(res.triples == std::set<CollisionTriple>{
                             CollisionTriple{1, 3, 5},
                             CollisionTriple{1, 6, 5},
                             CollisionTriple{2, 5, 1},
                             CollisionTriple{3, 6, 5},
                         });
    CHECK(res.triples == single_list_bruteforce(list.raw()));
  }

  TEST_CASE("single-list search stops at n outputs on collision-heavy lists") {
    const Tape list("L", std::vector<Value>(8, 42));
    RunContext ctx(0);
    const NCollisionResult res = n_collision(ctx, list, 4);
    CHECK(res.triples.size() == 8);  // 28 pairs exist, the budget is n = 8
    const auto truth = single_list_bruteforce(list.raw());
    for (const auto& t : res.triples) CHECK(truth.count(t) == 1);
  }

  TEST_CASE("single-list search matches bruteforce up to the budget") {
    std::mt19937_64 rng(7005);
    for (const std::uint64_t space : {1ull, 2ull, 7ull}) {
      for (int trial = 0; trial < 25; ++trial) {
        const std::uint64_t n = 1 + rng() % 128;
        const Tape list("L", random_list(n, 1, 32, rng()));
        RunContext ctx(0);
        const NCollisionResult res = n_collision(ctx, list, space);
        const auto truth = single_list_bruteforce(list.raw());
        CAPTURE(space);
        CAPTURE(trial);
        CHECK(res.triples.size() == std::min<std::uint64_t>(n, truth.size()));
        for (const auto& t : res.triples) CHECK(truth.count(t) == 1);
        CHECK(res.stats.logical_queries >= res.stats.physical_queries);
      }
    }
  }

  TEST_CASE("single-list traces ignore value labels too") {
    const std::vector<Value> base = random_list(24, 1, 6, 515);
    std::mt19937_64 rng(16);
    std::vector<Tape> inputs;
    inputs.emplace_back("L", base);
    for (int i = 0; i < 9; ++i) {
      std::vector<Value> sigma(6);
      for (std::uint64_t v = 0; v < 6; ++v) sigma[v] = static_cast<Value>(v + 1);
      std::shuffle(sigma.begin(), sigma.end(), rng);
      inputs.emplace_back("L", relabel(base, sigma));
    }
    const auto report = check_oblivious(
        [](RunContext& ctx, const Tape& list) { n_collision(ctx, list, 3); }, inputs, 0,
        [](const Tape& list) { return list.length(); });
    CHECK(report.oblivious);
  }

  TEST_CASE("oversized values are refused before padding could alias them") {
    const Value huge = (Value{1} << 62) + 5;
    const Tape list("L", {huge, huge});
    RunContext ctx(0);
    CHECK_THROWS_AS(n_collision(ctx, list, 1), std::invalid_argument);
    CHECK_THROWS_AS(n_collision(ctx, Tape("L", {}), 1), std::invalid_argument);
    const CollisionInstance inst({huge}, {huge});
    RunContext ctx2(0);
    CHECK_THROWS_AS(alg2_setcollision(ctx2, inst, EdReferenceOracle{}), std::invalid_argument);
  }

  TEST_CASE("space zero is rejected") {
    const CollisionInstance inst({1, 2}, {2, 1});
    RunContext ctx(0);
    CHECK_THROWS_AS(alg3_parallel(ctx, inst, EdReferenceOracle{}, 0), std::invalid_argument);
  }
}

}  // namespace
}  // namespace oq::collision
