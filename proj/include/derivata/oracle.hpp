#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "derivata/corpus.hpp"
#include "derivata/derivation.hpp"
#include "derivata/enumerate.hpp"

namespace derivata {

namespace detail {

inline bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

}  // namespace detail

// Answer-text normalization used by both gold matching and the F1 metric:
// lowercase ASCII, split on whitespace, and per piece either canonicalize it
// as a number (so "94.0", "94" and "25,532"/"25532" agree) or strip ASCII
// punctuation; then drop the articles a/an/the and re-join with single
// spaces. Non-ASCII bytes pass through, so "£100," becomes "£100".
inline std::string normalize_text(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space_byte(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !detail::is_space_byte(text[j])) ++j;
    if (j > i) {
      std::string piece(text.substr(i, j - i));
      for (char& c : piece)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (auto num = parse_gold_number(piece)) {
        piece = num->to_string();
      } else {
        piece.erase(std::remove_if(piece.begin(), piece.end(), detail::is_ascii_punct),
                    piece.end());
        if (piece == "a" || piece == "an" || piece == "the") piece.clear();
      }
      if (!piece.empty()) {
        if (!out.empty()) out += ' ';
        out += piece;
      }
    }
    i = j;
  }
  return out;
}

namespace detail {

inline const Decimal& match_tolerance() {
  static const Decimal tol = *Decimal::parse("0.000000001");
  return tol;
}

inline bool numbers_close(const Decimal& a, const Decimal& b) {
  if (a == b) return true;
  try {
    Decimal d = a - b;
    if (d.is_negative()) d = -d;
    return d <= match_tolerance();
  } catch (const ExecutionError&) {
    double x = a.to_double() - b.to_double();
    return (x < 0 ? -x : x) <= 1e-9;
  }
}

inline std::optional<Decimal> normalized_number(std::string_view text) {
  return parse_gold_number(normalize_text(text));
}

}  // namespace detail

// Whether an executed answer counts as correct against a gold answer:
//   number vs number        exact, or within 1e-9
//   span_set vs span_set    equal multisets of normalized texts
//   literal vs literal      identical
//   number vs 1-span set    the span's normalized text parses to an equal
//                           number (both directions)
inline bool matches(const AnswerValue& value, const GoldAnswer& gold) {
  using VK = AnswerValue::Kind;
  using GK = GoldAnswer::Kind;
  switch (gold.kind) {
    case GK::Number:
      if (value.kind == VK::Number) return detail::numbers_close(value.number, gold.number);
      if (value.kind == VK::SpanSet && value.spans.size() == 1) {
        auto v = detail::normalized_number(value.spans[0]);
        return v && detail::numbers_close(*v, gold.number);
      }
      return false;
    case GK::SpanSet:
      if (value.kind == VK::Number && gold.spans.size() == 1) {
        auto g = detail::normalized_number(gold.spans[0]);
        return g && detail::numbers_close(value.number, *g);
      }
      if (value.kind == VK::SpanSet) {
        if (value.spans.size() != gold.spans.size()) return false;
        std::vector<std::string> a, b;
        for (const auto& s : value.spans) a.push_back(normalize_text(s));
        for (const auto& s : gold.spans) b.push_back(normalize_text(s));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
      }
      return false;
    case GK::Literal:
      return value.kind == VK::Literal && value.literal == gold.literal;
  }
  return false;
}

// The derivations of an example that execute to its gold answer, in canonical
// enumeration order, truncated at `cap`. `truncated` reports whether more
// matches exist beyond the cap.
struct OracleSet {
  std::vector<Derivation> derivations;
  bool truncated = false;

  bool empty() const { return derivations.empty(); }
  std::size_t size() const { return derivations.size(); }
};

inline constexpr std::size_t kDefaultOracleCap = 64;

inline OracleSet find_oracle_derivations(const Example& ex, const OpConfig& cfg,
                                         std::size_t cap = kDefaultOracleCap) {
  OracleSet out;
  if (!ex.gold) return out;
  const GoldAnswer& gold = *ex.gold;

  auto add = [&](const Derivation& d) -> bool {
    AnswerValue v;
    try {
      v = execute(d, ex);
    } catch (const ExecutionError&) {
      return true;
    }
    if (!matches(v, gold)) return true;
    if (out.derivations.size() < cap) {
      out.derivations.push_back(d);
      return true;
    }
    out.truncated = true;  // one match beyond the cap is enough to know
    return false;
  };

  const bool gold_span1 = gold.kind == GoldAnswer::Kind::SpanSet && gold.spans.size() == 1;
  const bool gold_span2 = gold.kind == GoldAnswer::Kind::SpanSet && gold.spans.size() == 2;
  // Numeric results can also match one-element span_set golds whose text is a
  // number, so numeric ops stay in play for those.
  const bool want_numeric = gold.kind == GoldAnswer::Kind::Number || gold_span1;
  const bool want_span1 = want_numeric;  // 1-token..n-token spans vs number/1-span golds
  const std::size_t n = ex.numbers.size();
  const std::size_t p = ex.passage.size();

  if (cfg.literals) {
    for (int i = 0; i < kNumLiterals; ++i)
      if (!add(LiteralD{static_cast<Lit13>(i)})) goto done;
  }
  if (cfg.spans && want_span1) {
    for (std::size_t s = 0; s < p; ++s) {
      std::size_t last = std::min(p - 1, s + cfg.max_span_len - 1);
      for (std::size_t e = s; e <= last; ++e)
        if (!add(SpanD{s, e})) goto done;
    }
  }
  if (cfg.sum && want_numeric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!add(SumD{i, j})) goto done;
  }
  if (cfg.diff && want_numeric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !add(DiffD{i, j})) goto done;
  }
  if (cfg.diff100 && want_numeric) {
    for (std::size_t i = 0; i < n; ++i)
      if (!add(Diff100D{i})) goto done;
  }
  if (cfg.mul && want_numeric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!add(MulD{i, j})) goto done;
  }
  if (cfg.div && want_numeric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !ex.numbers[j].value.is_zero() && !add(DivD{i, j})) goto done;
  }
  if (cfg.sum3 && want_numeric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j && !add(Sum3D{SumD{i, j}, k})) goto done;
  }
  if (cfg.merge && gold_span2) {
    // Only spans whose normalized text equals one of the two gold elements
    // can participate, so scan those instead of all span pairs.
    const std::string g0 = normalize_text(gold.spans[0]);
    const std::string g1 = normalize_text(gold.spans[1]);
    std::vector<SpanD> hits;
    std::vector<int> which;  // bit 0: matches g0, bit 1: matches g1
    for (std::size_t s = 0; s < p; ++s) {
      std::size_t last = std::min(p - 1, s + cfg.max_span_len - 1);
      for (std::size_t e = s; e <= last; ++e) {
        std::string norm = normalize_text(join_tokens(ex.passage, s, e + 1));
        int w = (norm == g0 ? 1 : 0) | (norm == g1 ? 2 : 0);
        if (w) {
          hits.push_back(SpanD{s, e});
          which.push_back(w);
        }
      }
    }
    for (std::size_t ai = 0; ai < hits.size(); ++ai) {
      for (std::size_t bi = ai + 1; bi < hits.size(); ++bi) {
        if (hits[bi].start <= hits[ai].end) continue;
        // the pair must cover both gold elements as a multiset
        int wa = which[ai], wb = which[bi];
        bool covers = (wa & 1 && wb & 2) || (wa & 2 && wb & 1);
        if (g0 == g1) covers = (wa & 1) && (wb & 1);
        if (covers && !add(MergeD{hits[ai], hits[bi]})) goto done;
      }
    }
  }
done:
  return out;
}

// Aggregate oracle statistics over a dataset slice.
struct OracleStats {
  std::size_t count = 0;       // examples carrying a gold answer
  std::size_t covered = 0;     // of those, non-empty oracle set
  std::size_t ambiguous = 0;   // oracle set with >= 2 members
  std::size_t truncated = 0;   // matches beyond the cap existed
  std::size_t sum_alternatives = 0;

  void add(const OracleSet& o) {
    ++count;
    if (!o.empty()) {
      ++covered;
      sum_alternatives += o.size();
      if (o.size() >= 2) ++ambiguous;
    }
    if (o.truncated) ++truncated;
  }
  double coverage() const { return count ? double(covered) / double(count) : 0.0; }
  double ambiguous_fraction() const {
    return covered ? double(ambiguous) / double(covered) : 0.0;
  }
  double mean_alternatives() const {
    return covered ? double(sum_alternatives) / double(covered) : 0.0;
  }
  double within_cap() const {
    return count ? 1.0 - double(truncated) / double(count) : 1.0;
  }
};

}  // namespace derivata
