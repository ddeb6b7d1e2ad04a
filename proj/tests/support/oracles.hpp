#pragma once

// Independent reference implementations for tests. Everything here takes a
// different algorithmic route than the code under test: digit tables built by
// counting instead of division, acceptance fractions by full seed
// enumeration, matchings by exhaustive search, distinctness by quadratic
// scans. Nothing reads through an instrumented context.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oq/pointer_chasing.hpp"
#include "oq/query_model.hpp"

namespace oq::testsupport {

// Base-d digit vectors (least significant first, m digits) for c = 1..n,
// built by incrementing a digit counter, no division anywhere.
std::vector<std::vector<unsigned>> exponent_table(std::uint64_t n, std::uint64_t d,
                                                  unsigned m);

// prod_i betas[i]^digits[i] mod p by repeated multiplication; 0^0 = 1.
std::uint64_t eval_monomial(std::span<const unsigned> digits,
                            std::span<const std::uint64_t> betas, std::uint64_t p);

struct SeedEnumeration {
  std::uint64_t total_seeds = 0;  // p^m
  std::uint64_t accepting = 0;    // seeds whose coefficient sum vanishes mod p
};

// Exhausts all p^m seeds for the coefficient-sum test on `values` (each in
// [n]). Parameters d and m are derived here by linear search so the check
// does not trust the tested module's arithmetic. Refuses p^m > 10^7.
SeedEnumeration enumerate_seed_accepts(std::span<const Value> values, std::uint64_t n,
                                       std::uint64_t p);

// f(f(x)) for all x by table lookup.
std::vector<std::pair<std::uint64_t, Value>> compose_table(std::span<const Value> f);

// Expansion check via Hall's route: for every left subset of size <= k, a
// maximum matching must saturate the subset.
bool hall_expander_check(const pc2::BipartiteGraph& g, unsigned k);

// Minimum over all full matchings of l, enumerated by backtracking; compares
// right sequences in ascending-left order lexicographically. nullopt when no
// full matching exists.
std::optional<std::map<std::uint64_t, std::uint64_t>> brute_lex_min_matching(
    const pc2::BipartiteGraph& g, std::vector<std::uint64_t> l);

// Quadratic distinctness scans.
bool scan_all_distinct(std::span<const Value> a, std::span<const Value> b);
bool scan_cross_collision(std::span<const Value> a, std::span<const Value> b);

// Pearson statistic against a uniform expectation.
double chi_square_uniform(std::span<const std::uint64_t> counts, double expected);

}  // namespace oq::testsupport
