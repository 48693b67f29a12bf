#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "derivata/derivation.hpp"
#include "derivata/oracle.hpp"

namespace derivata {

struct AlignmentTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> render_gold(const GoldAnswer& g) {
  switch (g.kind) {
    case GoldAnswer::Kind::Number: return {g.number.to_string()};
    case GoldAnswer::Kind::SpanSet: return g.spans;
    default: return {lit_ynu_name(g.literal)};
  }
}

namespace detail {

inline std::vector<std::string> ws_split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space_byte(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space_byte(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double bag_f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : a) ++counts[t];
  int overlap = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double p = double(overlap) / double(a.size());
  double r = double(overlap) / double(b.size());
  return 2 * p * r / (p + r);
}

}  // namespace detail

// F1 of a single aligned answer pair. If both sides are (normalized) numbers
// the pair is scored purely by value equality, which keeps "94.0" vs "94" at
// 1 and mismatched numbers at 0; otherwise it is token-level F1 over the
// normalized bags of words.
inline double pair_f1(const std::string& pred, const std::string& gold) {
  std::string np = normalize_text(pred);
  std::string ng = normalize_text(gold);
  auto pn = parse_gold_number(np);
  auto gn = parse_gold_number(ng);
  if (pn && gn) return detail::numbers_close(*pn, *gn) ? 1.0 : 0.0;
  return detail::bag_f1(detail::ws_split(np), detail::ws_split(ng));
}

inline constexpr std::size_t kMaxAlignment = 8;

// Multi-answer F1: the shorter list is padded with empty strings, then the
// best one-to-one alignment over all permutations is taken and averaged.
// Answer lists in this DSL have at most two elements; anything past
// kMaxAlignment refuses rather than going exponential.
inline double drop_f1(std::vector<std::string> pred, std::vector<std::string> gold) {
  std::size_t n = std::max(pred.size(), gold.size());
  if (n > kMaxAlignment)
    throw AlignmentTooLarge("answer lists of size " + std::to_string(n) +
                            " exceed the alignment limit of " +
                            std::to_string(kMaxAlignment));
  if (n == 0) return 1.0;
  pred.resize(n);
  gold.resize(n);
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = pair_f1(pred[i], gold[j]);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0;
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += m[i][perm[i]];
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / double(n);
}

inline bool exact_match(const AnswerValue& pred, const GoldAnswer& gold) {
  return matches(pred, gold);
}

inline double answer_f1(const AnswerValue& pred, const GoldAnswer& gold) {
  return drop_f1(render_answer(pred), render_gold(gold));
}

inline const char* gold_type_name(const GoldAnswer& g) {
  switch (g.kind) {
    case GoldAnswer::Kind::Number: return "number";
    case GoldAnswer::Kind::SpanSet: return g.spans.size() > 1 ? "spans" : "span";
    default: return "literal";
  }
}

struct EvalReport {
  struct Slice {
    std::size_t count = 0;
    double em_sum = 0;
    double f1_sum = 0;
    double em() const { return count ? em_sum / double(count) : 0.0; }
    double f1() const { return count ? f1_sum / double(count) : 0.0; }
  };
  Slice total;
  std::map<std::string, Slice> by_type;

  void add(const AnswerValue& pred, const GoldAnswer& gold) {
    double em = exact_match(pred, gold) ? 1.0 : 0.0;
    double f1;
    try {
      f1 = answer_f1(pred, gold);
    } catch (const AlignmentTooLarge&) {
      f1 = em;  // oversize span sets fall back to exact match
    }
    auto bump = [&](Slice& s) {
      ++s.count;
      s.em_sum += em;
      s.f1_sum += f1;
    };
    bump(total);
    bump(by_type[gold_type_name(gold)]);
  }
};

// Seeded round-robin fold assignment: a shuffled copy of [0, n) dealt into k
// folds. Every index lands in exactly one fold and fold sizes differ by at
// most one.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k,
                                                        std::uint64_t seed) {
  if (k == 0) throw ConfigError("fold count must be positive");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
  return folds;
}

}  // namespace derivata
