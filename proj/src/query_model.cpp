#include "oq/query_model.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace oq {

std::optional<std::uint64_t> first_divergence(const QueryTrace& a, const QueryTrace& b) {
  const std::uint64_t common = std::min(a.size(), b.size());
  for (std::uint64_t i = 0; i < common; ++i)
    if (a.entries[i] != b.entries[i]) return i;
  if (a.size() != b.size()) return common;
  return std::nullopt;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t RandomStream::block(std::uint64_t j) const {
  return mix64(seed_ + (j + 1) * 0x9E3779B97F4A7C15ull);
}

std::vector<std::uint8_t> RandomStream::draw_bits(std::uint64_t k) {
  std::vector<std::uint8_t> bits;
  bits.reserve(k);
  for (std::uint64_t t = 0; t < k; ++t) {
    const std::uint64_t pos = cursor_ + t;
    bits.push_back(static_cast<std::uint8_t>((block(pos / 64) >> (pos % 64)) & 1));
  }
  cursor_ += k;
  return bits;
}

std::uint64_t RandomStream::draw_word(unsigned k) {
  if (k > 64) throw std::invalid_argument("RandomStream::draw_word: k > 64");
  if (k == 0) return 0;
  std::uint64_t out;
  if (cursor_ % 64 == 0 && k == 64) {
    out = block(cursor_ / 64);  // aligned full-word fast path
  } else {
    out = 0;
    for (unsigned t = 0; t < k; ++t) {
      const std::uint64_t pos = cursor_ + t;
      out |= ((block(pos / 64) >> (pos % 64)) & 1) << t;
    }
  }
  cursor_ += k;
  return out;
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RandomStream::uniform_below: zero bound");
  if (bound > (std::uint64_t{1} << 32))
    throw std::invalid_argument("RandomStream::uniform_below: bound exceeds 2^32");
  return draw_word(64) % bound;
}

void RunContext::note_space(std::uint64_t words) {
  space_peak_ = std::max(space_peak_, words);
}

CostReport RunContext::report() const {
  CostReport r;
  for (std::size_t i = 0; i < tape_names_.size(); ++i)
    r.queries_per_tape[tape_names_[i]] += tape_queries_[i];
  r.total_queries = trace_.entries.size();
  r.space_words = space_peak_;
  r.outputs_emitted = outputs_;
  return r;
}

void RunContext::dump_trace(std::ostream& out) const {
  for (const TraceEntry& e : trace_.entries)
    out << tape_names_[e.tape] << '\t' << e.index << '\n';
}

std::vector<NamedTraceEntry> load_trace(std::istream& in) {
  std::vector<NamedTraceEntry> entries;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error("load_trace: malformed line " + std::to_string(lineno));
    NamedTraceEntry e;
    e.tape = line.substr(0, tab);
    try {
      e.index = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("load_trace: bad index on line " + std::to_string(lineno));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace oq
