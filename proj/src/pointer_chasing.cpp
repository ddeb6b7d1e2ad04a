#include "oq/pointer_chasing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "oq/mathutil.hpp"

namespace oq::pc2 {

PcInstance::PcInstance(std::uint64_t n_, std::vector<Value> values)
    : n(n_), f("f", std::move(values)) {
  if (f.length() != n)
    throw std::invalid_argument("PcInstance: expected " + std::to_string(n) + " values");
  for (Value v : f.raw())
    if (v < 1 || static_cast<std::uint64_t>(v) > n)
      throw std::invalid_argument("PcInstance: f value outside [1, n]");
}

BipartiteGraph::BipartiteGraph(
    std::uint64_t n_left, std::uint64_t m_right,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges)
    : n_left_(n_left), m_right_(m_right), left_adj_(n_left), right_adj_(m_right) {
  for (auto [v, y] : edges) {
    if (v < 1 || v > n_left_ || y < 1 || y > m_right_)
      throw std::invalid_argument("BipartiteGraph: edge (" + std::to_string(v) + ", " +
                                  std::to_string(y) + ") out of range");
    left_adj_[v - 1].push_back(y);
  }
  for (std::uint64_t v = 1; v <= n_left_; ++v) {
    auto& adj = left_adj_[v - 1];
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    edge_count_ += adj.size();
    for (std::uint64_t y : adj) right_adj_[y - 1].push_back(v);
  }
  // Right lists come out sorted because left vertices were visited ascending.
}

std::span<const std::uint64_t> BipartiteGraph::neighbors(std::uint64_t v) const {
  if (v < 1 || v > n_left_) throw std::out_of_range("BipartiteGraph: left vertex out of range");
  return left_adj_[v - 1];
}

std::span<const std::uint64_t> BipartiteGraph::right_neighbors(std::uint64_t y) const {
  if (y < 1 || y > m_right_)
    throw std::out_of_range("BipartiteGraph: right vertex out of range");
  return right_adj_[y - 1];
}

bool BipartiteGraph::has_edge(std::uint64_t v, std::uint64_t y) const {
  auto adj = neighbors(v);
  return std::binary_search(adj.begin(), adj.end(), y);
}

BipartiteGraph BipartiteGraph::load(std::istream& in) {
  std::uint64_t n = 0, m = 0;
  if (!(in >> n >> m)) throw std::runtime_error("graph file: missing n m header");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  std::uint64_t v = 0, y = 0;
  while (in >> v >> y) edges.emplace_back(v, y);
  return BipartiteGraph(n, m, edges);
}

void BipartiteGraph::save(std::ostream& out) const {
  out << n_left_ << ' ' << m_right_ << '\n';
  for (std::uint64_t v = 1; v <= n_left_; ++v)
    for (std::uint64_t y : neighbors(v)) out << v << ' ' << y << '\n';
}

namespace {

int popcount_words(const std::vector<std::uint64_t>& w) {
  int c = 0;
  for (std::uint64_t x : w) c += __builtin_popcountll(x);
  return c;
}

// Depth-first enumeration of left sets. A branch whose neighborhood already
// holds k distinct right vertices cannot produce a violation at any size
// <= k, so it is pruned.
bool expander_dfs(const BipartiteGraph& g, unsigned k, std::uint64_t first,
                  std::vector<std::uint64_t>& chosen,
                  const std::vector<std::uint64_t>& nbhd,
                  std::vector<std::uint64_t>& witness) {
  for (std::uint64_t v = first; v <= g.n_left(); ++v) {
    std::vector<std::uint64_t> next = nbhd;
    for (std::uint64_t y : g.neighbors(v)) next[(y - 1) / 64] |= 1ull << ((y - 1) % 64);
    chosen.push_back(v);
    const int grown = popcount_words(next);
    if (static_cast<std::uint64_t>(grown) < chosen.size()) {
      witness = chosen;
      return false;
    }
    if (chosen.size() < k && static_cast<unsigned>(grown) < k)
      if (!expander_dfs(g, k, v + 1, chosen, next, witness)) return false;
    chosen.pop_back();
  }
  return true;
}

}  // namespace

ExpanderCheck verify_expander(const BipartiteGraph& g, unsigned k) {
  if (k > 20)
    throw std::invalid_argument("verify_expander: exhaustive check refuses k > 20");
  ExpanderCheck out;
  if (k == 0) return out;
  std::vector<std::uint64_t> empty((g.m_right() + 63) / 64, 0);
  std::vector<std::uint64_t> chosen;
  out.ok = expander_dfs(g, k, 1, chosen, empty, out.witness);
  return out;
}

GeneratedExpander gen_candidate_expander(std::uint64_t n, unsigned k, unsigned degree,
                                         std::uint64_t m, RandomStream& stream,
                                         unsigned max_attempts) {
  if (degree == 0 || degree > m)
    throw std::invalid_argument("gen_candidate_expander: degree must be in [1, m]");
  for (unsigned attempt = 1; attempt <= max_attempts; ++attempt) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
    edges.reserve(n * degree);
    for (std::uint64_t v = 1; v <= n; ++v) {
      std::vector<bool> used(m + 1, false);
      for (unsigned e = 0; e < degree; ++e) {
        std::uint64_t y;
        do {
          y = 1 + stream.uniform_below(m);
        } while (used[y]);
        used[y] = true;
        edges.emplace_back(v, y);
      }
    }
    BipartiteGraph g(n, m, edges);
    if (verify_expander(g, k).ok) return GeneratedExpander{std::move(g), attempt};
  }
  throw GenerationError("gen_candidate_expander: no verified graph after " +
                        std::to_string(max_attempts) + " attempts (n=" + std::to_string(n) +
                        ", k=" + std::to_string(k) + ", degree=" + std::to_string(degree) +
                        ", m=" + std::to_string(m) + ")");
}

std::uint64_t default_right_size(std::uint64_t n, unsigned k, double alpha) {
  const double lg = std::log2(static_cast<double>(n));
  return static_cast<std::uint64_t>(
      std::ceil(std::pow(static_cast<double>(k), 1.0 + alpha) * lg * lg));
}

namespace {

// Can `remaining` be fully matched into rights outside `used`? Augmenting
// path search, small inputs only (|remaining| <= k).
bool fully_matchable(const BipartiteGraph& g, std::span<const std::uint64_t> remaining,
                     const std::vector<bool>& used) {
  std::map<std::uint64_t, std::uint64_t> right_to_left;
  for (std::uint64_t v : remaining) {
    std::map<std::uint64_t, bool> visited;
    // Iterative DFS is overkill at these sizes; recursive lambda.
    auto augment = [&](auto&& self, std::uint64_t left) -> bool {
      for (std::uint64_t y : g.neighbors(left)) {
        if (used[y] || visited[y]) continue;
        visited[y] = true;
        auto it = right_to_left.find(y);
        if (it == right_to_left.end() || self(self, it->second)) {
          right_to_left[y] = left;
          return true;
        }
      }
      return false;
    };
    if (!augment(augment, v)) return false;
  }
  return true;
}

}  // namespace

MatchingResult lex_min_matching(const BipartiteGraph& g, const std::vector<std::uint64_t>& l,
                                unsigned k) {
  std::vector<std::uint64_t> left(l);
  std::sort(left.begin(), left.end());
  left.erase(std::unique(left.begin(), left.end()), left.end());
  if (left.size() > k)
    throw std::invalid_argument("lex_min_matching: |L| exceeds k");
  for (std::uint64_t v : left)
    if (v < 1 || v > g.n_left())
      throw std::invalid_argument("lex_min_matching: left vertex out of range");

  MatchingResult out;
  std::vector<bool> used(g.m_right() + 1, false);
  for (std::size_t i = 0; i < left.size(); ++i) {
    const std::span<const std::uint64_t> rest(left.data() + i + 1, left.size() - i - 1);
    bool assigned = false;
    for (std::uint64_t y : g.neighbors(left[i])) {
      if (used[y]) continue;
      used[y] = true;
      if (fully_matchable(g, rest, used)) {
        out.pairs[left[i]] = y;
        assigned = true;
        break;
      }
      used[y] = false;
    }
    if (!assigned)
      throw NoMatchingError("lex_min_matching: no full matching for the given set");
  }
  return out;
}

std::optional<std::uint64_t> expander_matching(const BipartiteGraph& g,
                                               std::vector<std::uint64_t> l, std::uint64_t y,
                                               unsigned k) {
  MatchingResult m = lex_min_matching(g, l, k);
  for (auto [left, right] : m.pairs)
    if (right == y) return left;
  return std::nullopt;
}

std::vector<std::pair<std::uint64_t, Value>> pc2_adaptive(RunContext& ctx,
                                                          const PcInstance& inst) {
  ctx.note_space(2);
  MapSink<std::uint64_t, Value> sink(ctx);
  for (std::uint64_t x = 1; x <= inst.n; ++x) {
    const Value fx = ctx.read(inst.f, x);
    const Value ffx = ctx.read(inst.f, static_cast<std::uint64_t>(fx));
    sink.emit(x, ffx);
  }
  return {sink.items().begin(), sink.items().end()};
}

std::uint64_t default_rounds(std::uint64_t n, std::uint64_t space) {
  return static_cast<std::uint64_t>(
      std::ceil(3.0 * (static_cast<double>(n) / static_cast<double>(space)) *
                std::log(static_cast<double>(n))));
}

Pc2RandomResult pc2_randomized_oblivious(RunContext& ctx, const PcInstance& inst,
                                         std::uint64_t space, RandomStream& stream,
                                         std::uint64_t rounds) {
  const std::uint64_t n = inst.n;
  if (space < 1 || space > n)
    throw std::invalid_argument("pc2_randomized_oblivious: space must be in [1, n]");
  Pc2RandomResult result;
  result.rounds = rounds;
  result.subset_size = std::min<std::uint64_t>(n, ceil_sqrt(n * space));
  result.pair_capacity = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(space) * std::log2(static_cast<double>(n))));
  ctx.note_space(2 * result.pair_capacity + 4);

  MapSink<std::uint64_t, Value> sink(ctx);
  std::vector<bool> in_y(n + 1, false);

  auto sample_subset = [&](std::vector<std::uint64_t>& out) {
    out.clear();
    std::vector<bool> taken(n + 1, false);
    while (out.size() < result.subset_size) {
      const std::uint64_t v = 1 + stream.uniform_below(n);
      if (taken[v]) continue;
      taken[v] = true;
      out.push_back(v);
    }
    std::sort(out.begin(), out.end());
  };

  std::vector<std::uint64_t> xs, ys;
  for (std::uint64_t round = 0; round < rounds; ++round) {
    sample_subset(xs);
    sample_subset(ys);
    for (std::uint64_t y : ys) in_y[y] = true;

    // Pairs kept this round, ordered by x because xs is scanned ascending.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> kept;
    for (std::uint64_t x : xs) {
      const Value fx = ctx.read(inst.f, x);
      if (kept.size() < result.pair_capacity && in_y[static_cast<std::uint64_t>(fx)])
        kept.emplace_back(x, static_cast<std::uint64_t>(fx));
    }
    for (std::uint64_t y : ys) {
      const Value fy = ctx.read(inst.f, y);
      for (auto [x, fx] : kept)
        if (fx == y) sink.emit(x, fy);
    }
    for (std::uint64_t y : ys) in_y[y] = false;
  }

  result.outputs.assign(sink.items().begin(), sink.items().end());
  result.coverage = static_cast<double>(result.outputs.size()) / static_cast<double>(n);
  return result;
}

Pc2Alg1Result pc2_alg1(RunContext& ctx, const PcInstance& inst, const BipartiteGraph& g,
                       unsigned k, std::uint64_t space) {
  const std::uint64_t n = inst.n;
  if (k == 0 || n % k != 0)
    throw std::invalid_argument("pc2_alg1: k must divide n");
  if (space == 0 || n % (k * space) != 0)
    throw std::invalid_argument("pc2_alg1: k*space must divide n");
  if (g.n_left() != n)
    throw std::invalid_argument("pc2_alg1: graph left size must equal n");

  const std::uint64_t m = g.m_right();
  const std::uint64_t num_stages = n / (k * space);
  Pc2Alg1Result result;
  result.query_count_bound = num_stages * (2 * m * k * space + g.edge_count());
  result.matching_workspace_words = 2 * m + 2 * k + 4;
  ctx.note_space(2 * space + 4);  // candidates and their attached values

  MapSink<std::uint64_t, Value> sink(ctx);
  std::vector<std::uint64_t> block_vals;
  for (std::uint64_t stage = 0; stage < num_stages; ++stage) {
    const std::uint64_t first_pos = stage * space * k + 1;  // stage covers k*space positions
    for (std::uint64_t y = 1; y <= m; ++y) {
      // Candidate per block: the left vertex the block image's lex-min
      // matching routes to y, if any.
      std::vector<std::optional<std::uint64_t>> candidate(space);
      std::vector<Value> attached(space, 0);
      for (std::uint64_t i = 0; i < space; ++i) {
        block_vals.clear();
        const std::uint64_t block_first = first_pos + i * k;
        for (std::uint64_t off = 0; off < k; ++off)
          block_vals.push_back(
              static_cast<std::uint64_t>(ctx.read(inst.f, block_first + off)));
        candidate[i] = expander_matching(g, block_vals, y, k);
      }
      for (std::uint64_t v : g.right_neighbors(y)) {
        const Value fv = ctx.read(inst.f, v);
        for (std::uint64_t i = 0; i < space; ++i)
          if (candidate[i] && *candidate[i] == v) attached[i] = fv;
      }
      for (std::uint64_t off = 0; off < space * k; ++off) {
        const std::uint64_t x = first_pos + off;
        const auto fx = static_cast<std::uint64_t>(ctx.read(inst.f, x));
        for (std::uint64_t i = 0; i < space; ++i)
          if (candidate[i] && *candidate[i] == fx) sink.emit(x, attached[i]);
      }
    }
  }

  if (sink.items().size() != n)
    throw std::logic_error("pc2_alg1: incomplete output, matchings did not cover [n]");
  result.outputs.assign(sink.items().begin(), sink.items().end());
  return result;
}

PcInstance read_pc_instance(std::istream& in) {
  std::uint64_t n = 0;
  if (!(in >> n)) throw std::runtime_error("pc2 instance: missing n header");
  std::vector<Value> values(n);
  for (std::uint64_t i = 0; i < n; ++i)
    if (!(in >> values[i]))
      throw std::runtime_error("pc2 instance: expected " + std::to_string(n) + " values");
  return PcInstance(n, std::move(values));
}

}  // namespace oq::pc2
