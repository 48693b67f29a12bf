#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "derivata/derivation.hpp"

namespace derivata {

// Depth-1 candidate space in canonical order:
//   literals (Yes, No, Unknown, 0..9)
//   spans by (start asc, end asc), length <= max_span_len
//   Sum pairs i < j, lexicographic
//   Diff ordered pairs i != j, lexicographic
//   Diff100 by mention index
//   Mul pairs i < j, lexicographic
//   Div ordered pairs i != j, lexicographic, divisor-zero pairs dropped
inline std::vector<Derivation> enumerate_base(const Example& ex, const OpConfig& cfg) {
  std::vector<Derivation> out;
  const std::size_t n = ex.numbers.size();
  const std::size_t p = ex.passage.size();
  if (cfg.literals) {
    for (int i = 0; i < kNumLiterals; ++i) out.push_back(LiteralD{static_cast<Lit13>(i)});
  }
  if (cfg.spans) {
    for (std::size_t s = 0; s < p; ++s) {
      std::size_t last = std::min(p - 1, s + cfg.max_span_len - 1);
      for (std::size_t e = s; e <= last; ++e) out.push_back(SpanD{s, e});
    }
  }
  if (cfg.sum) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out.push_back(SumD{i, j});
  }
  if (cfg.diff) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) out.push_back(DiffD{i, j});
  }
  if (cfg.diff100) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(Diff100D{i});
  }
  if (cfg.mul) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out.push_back(MulD{i, j});
  }
  if (cfg.div) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !ex.numbers[j].value.is_zero()) out.push_back(DivD{i, j});
  }
  return out;
}

// Indices of the k highest scores; ties broken toward the lower index. The
// returned indices are sorted ascending, i.e. the kept subset in original
// order.
inline std::vector<std::size_t> topk_kept_indices(const std::vector<double>& scores,
                                                  std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (scores.size() > k) {
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (scores[a] != scores[b]) return scores[a] > scores[b];
                        return a < b;
                      });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

// Depth-2 candidates (Sum3 then Merge), composed from the base list. When
// score vectors are given (parallel to the span / sum sublists of `base`, in
// base order), only the top_k_compose survivors of each are composed;
// null score vectors mean "keep everything" (oracle search).
// Output order: Sum3 by (inner sum base order, k asc); Merge by canonical
// span pair order over the kept spans.
inline std::vector<Derivation> compose_topk(const std::vector<Derivation>& base,
                                            const std::vector<double>* span_scores,
                                            const std::vector<double>* sum_scores,
                                            const Example& ex, const OpConfig& cfg) {
  std::vector<Derivation> out;
  if (!cfg.sum3 && !cfg.merge) return out;
  std::vector<SpanD> spans;
  std::vector<SumD> sums;
  for (const auto& d : base) {
    if (std::holds_alternative<SpanD>(d)) spans.push_back(std::get<SpanD>(d));
    else if (std::holds_alternative<SumD>(d)) sums.push_back(std::get<SumD>(d));
  }
  auto keep = [&](std::size_t count, const std::vector<double>* scores) {
    std::vector<std::size_t> kept(count);
    std::iota(kept.begin(), kept.end(), 0);
    if (scores) kept = topk_kept_indices(*scores, cfg.top_k_compose);
    return kept;
  };
  if (cfg.sum3) {
    const std::size_t n = ex.numbers.size();
    for (std::size_t si : keep(sums.size(), sum_scores)) {
      const SumD& s = sums[si];
      for (std::size_t k = 0; k < n; ++k) {
        if (k != s.i && k != s.j) out.push_back(Sum3D{s, k});
      }
    }
  }
  if (cfg.merge) {
    std::vector<std::size_t> kept = keep(spans.size(), span_scores);
    for (std::size_t ai = 0; ai < kept.size(); ++ai) {
      const SpanD& a = spans[kept[ai]];
      for (std::size_t bi = ai + 1; bi < kept.size(); ++bi) {
        const SpanD& b = spans[kept[bi]];
        if (b.start > a.end) out.push_back(MergeD{a, b});
      }
    }
  }
  return out;
}

}  // namespace derivata
