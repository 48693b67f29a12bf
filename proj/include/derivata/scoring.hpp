#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "derivata/encoder.hpp"
#include "derivata/enumerate.hpp"

namespace derivata {

// Single-hidden-layer MLP, ReLU activation, hidden width = model dim.
struct Mlp {
  Mat w1;  // hidden x in
  Vec b1;  // hidden
  Mat w2;  // out x hidden
  Vec b2;  // out

  static Mlp zeros(Eigen::Index in, Eigen::Index hidden, Eigen::Index out) {
    Mlp m;
    m.w1 = Mat::Zero(hidden, in);
    m.b1 = Vec::Zero(hidden);
    m.w2 = Mat::Zero(out, hidden);
    m.b2 = Vec::Zero(out);
    return m;
  }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".w1", w1);
    f(prefix + ".b1", b1);
    f(prefix + ".w2", w2);
    f(prefix + ".b2", b2);
  }

  // x: n x in, returns n x out; hpre_out receives the hidden pre-activations
  // needed by backward.
  Mat forward(const Mat& x, Mat* hpre_out = nullptr) const {
    Mat hpre = (x * w1.transpose()).rowwise() + b1.transpose();
    Mat out = (hpre.cwiseMax(0.0) * w2.transpose()).rowwise() + b2.transpose();
    if (hpre_out) *hpre_out = std::move(hpre);
    return out;
  }

  void backward(const Mat& x, const Mat& hpre, const Mat& d_out, Mlp& grads,
                Mat* d_x = nullptr) const {
    Mat hact = hpre.cwiseMax(0.0);
    grads.w2 += d_out.transpose() * hact;
    grads.b2 += d_out.colwise().sum().transpose();
    Mat dhpre =
        ((d_out * w2).array() * (hpre.array() > 0.0).cast<double>()).matrix();
    grads.w1 += dhpre.transpose() * x;
    grads.b1 += dhpre.colwise().sum().transpose();
    if (d_x) *d_x = dhpre * w1;
  }
};

enum class BinaryOp { Sum, Diff, Mul, Div };

// Scoring heads over encoder states:
//   literal L     w_lit[L] . mlp_lit(h_cls)
//   span          w_span . mlp_span([h_start; h_end])
//   binary op     w_op . mlp_binary([h_i; h_j; h_i*h_j])
//   Diff100       w_diff100 . mlp_unary(h_i)
//   Sum3          w_sum3 . mlp_sum3([rep(inner sum); h_k])
//   Merge         w_merge . mlp_merge([rep(a); rep(b); rep(a)*rep(b)])
// where rep(.) is the corresponding argument's hidden representation.
struct ScoreModel {
  std::size_t dim = 0;
  Mlp mlp_lit, mlp_binary, mlp_unary, mlp_span, mlp_sum3, mlp_merge;
  Mat w_lit;  // kNumLiterals x d
  Vec w_sum, w_diff, w_mul, w_div;
  Vec w_diff100, w_span, w_sum3, w_merge;

  template <class F>
  void visit(F&& f) {
    mlp_lit.visit("lit", f);
    mlp_binary.visit("binary", f);
    mlp_unary.visit("unary", f);
    mlp_span.visit("span", f);
    mlp_sum3.visit("sum3", f);
    mlp_merge.visit("merge", f);
    f("w_lit", w_lit);
    f("w_sum", w_sum);
    f("w_diff", w_diff);
    f("w_mul", w_mul);
    f("w_div", w_div);
    f("w_diff100", w_diff100);
    f("w_span", w_span);
    f("w_sum3", w_sum3);
    f("w_merge", w_merge);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<ScoreModel*>(this)->visit(
        [&](const std::string& n, const auto& m) { f(n, m); });
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    visit([&](const std::string&, const auto& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  static ScoreModel zeros(std::size_t dim) {
    if (dim == 0) throw ConfigError("score model dim must be positive");
    const auto d = static_cast<Eigen::Index>(dim);
    ScoreModel m;
    m.dim = dim;
    m.mlp_lit = Mlp::zeros(d, d, d);
    m.mlp_binary = Mlp::zeros(3 * d, d, d);
    m.mlp_unary = Mlp::zeros(d, d, d);
    m.mlp_span = Mlp::zeros(2 * d, d, d);
    m.mlp_sum3 = Mlp::zeros(2 * d, d, d);
    m.mlp_merge = Mlp::zeros(3 * d, d, d);
    m.w_lit = Mat::Zero(kNumLiterals, d);
    m.w_sum = Vec::Zero(d);
    m.w_diff = Vec::Zero(d);
    m.w_mul = Vec::Zero(d);
    m.w_div = Vec::Zero(d);
    m.w_diff100 = Vec::Zero(d);
    m.w_span = Vec::Zero(d);
    m.w_sum3 = Vec::Zero(d);
    m.w_merge = Vec::Zero(d);
    return m;
  }
};

inline ScoreModel init_score_model(std::uint64_t seed, std::size_t dim) {
  ScoreModel m = ScoreModel::zeros(dim);
  detail::fill_uniform(m, seed, 1.0 / std::sqrt(static_cast<double>(dim)));
  return m;
}

// ---- single-candidate scoring (reference path, one derivation at a time)

inline double score_literal(const ScoreModel& m, const EncoderOutput& enc, Lit13 lit) {
  Mat rep = m.mlp_lit.forward(enc.h.row(static_cast<Eigen::Index>(enc.cls_row())));
  return rep.row(0).dot(m.w_lit.row(static_cast<int>(lit)));
}

inline double score_span(const ScoreModel& m, const EncoderOutput& enc,
                         std::size_t start_row, std::size_t end_row) {
  const auto d = static_cast<Eigen::Index>(m.dim);
  Mat x(1, 2 * d);
  x << enc.h.row(static_cast<Eigen::Index>(start_row)),
      enc.h.row(static_cast<Eigen::Index>(end_row));
  return m.mlp_span.forward(x).row(0).dot(m.w_span);
}

inline const Vec& binary_weight(const ScoreModel& m, BinaryOp op) {
  switch (op) {
    case BinaryOp::Sum: return m.w_sum;
    case BinaryOp::Diff: return m.w_diff;
    case BinaryOp::Mul: return m.w_mul;
    default: return m.w_div;
  }
}

inline double score_binary(const ScoreModel& m, const EncoderOutput& enc, BinaryOp op,
                           std::size_t i_row, std::size_t j_row) {
  const auto d = static_cast<Eigen::Index>(m.dim);
  auto hi = enc.h.row(static_cast<Eigen::Index>(i_row));
  auto hj = enc.h.row(static_cast<Eigen::Index>(j_row));
  Mat x(1, 3 * d);
  x << hi, hj, hi.cwiseProduct(hj);
  return m.mlp_binary.forward(x).row(0).dot(binary_weight(m, op));
}

inline double score_diff100(const ScoreModel& m, const EncoderOutput& enc,
                            std::size_t i_row) {
  Mat rep = m.mlp_unary.forward(enc.h.row(static_cast<Eigen::Index>(i_row)));
  return rep.row(0).dot(m.w_diff100);
}

inline double score_sum3(const ScoreModel& m, const EncoderOutput& enc, std::size_t i_row,
                         std::size_t j_row, std::size_t k_row) {
  const auto d = static_cast<Eigen::Index>(m.dim);
  auto hi = enc.h.row(static_cast<Eigen::Index>(i_row));
  auto hj = enc.h.row(static_cast<Eigen::Index>(j_row));
  Mat xin(1, 3 * d);
  xin << hi, hj, hi.cwiseProduct(hj);
  Mat inner_rep = m.mlp_binary.forward(xin);
  Mat x(1, 2 * d);
  x << inner_rep.row(0), enc.h.row(static_cast<Eigen::Index>(k_row));
  return m.mlp_sum3.forward(x).row(0).dot(m.w_sum3);
}

inline double score_merge(const ScoreModel& m, const EncoderOutput& enc,
                          std::size_t a_start_row, std::size_t a_end_row,
                          std::size_t b_start_row, std::size_t b_end_row) {
  const auto d = static_cast<Eigen::Index>(m.dim);
  Mat xa(1, 2 * d), xb(1, 2 * d);
  xa << enc.h.row(static_cast<Eigen::Index>(a_start_row)),
      enc.h.row(static_cast<Eigen::Index>(a_end_row));
  xb << enc.h.row(static_cast<Eigen::Index>(b_start_row)),
      enc.h.row(static_cast<Eigen::Index>(b_end_row));
  Mat ra = m.mlp_span.forward(xa);
  Mat rb = m.mlp_span.forward(xb);
  Mat x(1, 3 * d);
  x << ra.row(0), rb.row(0), ra.row(0).cwiseProduct(rb.row(0));
  return m.mlp_merge.forward(x).row(0).dot(m.w_merge);
}

// The k highest-scoring items, ordered by score descending with ties broken
// toward earlier enumeration order.
template <class T>
std::vector<T> prune_topk(const std::vector<T>& items, const std::vector<double>& scores,
                          std::size_t k) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  if (idx.size() > k) idx.resize(k);
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items[i]);
  return out;
}

inline Vec softmax(const Vec& scores) {
  if (scores.size() == 0) return scores;
  Vec p = (scores.array() - scores.maxCoeff()).exp();
  return p / p.sum();
}

// ---- batched scoring of the full candidate space

struct ScoringTrace {
  enum Group { kLit = 0, kSpan, kPair, kUnary, kSum3, kMerge };
  struct Ref {
    int group = 0;
    std::size_t index = 0;  // row within the group
    int op = 0;             // kPair only: BinaryOp; kLit: literal id
  };
  std::vector<Ref> refs;  // one per candidate

  bool has_lit = false;
  Mat lit_x, lit_hpre, lit_rep;
  std::vector<std::pair<std::size_t, std::size_t>> span_rows;  // (start, end) seq rows
  Mat span_x, span_hpre, span_rep;
  std::vector<std::pair<std::size_t, std::size_t>> pair_rows;  // (i, j) seq rows
  Mat pair_x, pair_hpre, pair_rep;
  std::vector<std::size_t> unary_rows;
  Mat unary_x, unary_hpre, unary_rep;
  std::vector<std::pair<std::size_t, std::size_t>> sum3_refs;  // (pair row, k seq row)
  Mat sum3_x, sum3_hpre, sum3_rep;
  std::vector<std::pair<std::size_t, std::size_t>> merge_refs;  // (span row, span row)
  Mat merge_x, merge_hpre, merge_rep;

  // base scores of the span / sum sublists in enumeration order; these drive
  // the composition pruning and let callers inspect what survived
  std::vector<double> span_scores, sum_scores;
};

struct ScoredCandidates {
  std::vector<Derivation> candidates;  // canonical order: base then compositions
  Vec scores;
  Vec probs;
};

// Scores every candidate of the example in canonical order. Depth-2
// candidates are composed from the top_k_compose highest-scoring spans and
// sums only. Pass a trace to enable score_all_backward.
inline ScoredCandidates score_all(const ScoreModel& model, const EncoderOutput& enc,
                                  const Example& ex, const OpConfig& cfg,
                                  ScoringTrace* trace_out = nullptr) {
  ScoringTrace local;
  ScoringTrace& tr = trace_out ? *trace_out : local;
  tr = ScoringTrace{};
  const auto d = static_cast<Eigen::Index>(model.dim);

  ScoredCandidates out;
  out.candidates = enumerate_base(ex, cfg);
  auto mention_row = [&](std::size_t m) {
    return enc.passage_row(ex.numbers[m].token_index);
  };

  // first pass: assemble group membership
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_slot;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> span_slot;
  auto intern_pair = [&](std::size_t i_row, std::size_t j_row) {
    auto key = std::make_pair(i_row, j_row);
    auto it = pair_slot.find(key);
    if (it != pair_slot.end()) return it->second;
    std::size_t slot = tr.pair_rows.size();
    tr.pair_rows.push_back(key);
    pair_slot.emplace(key, slot);
    return slot;
  };
  for (const auto& c : out.candidates) {
    ScoringTrace::Ref ref;
    if (const auto* v = std::get_if<LiteralD>(&c)) {
      tr.has_lit = true;
      ref = {ScoringTrace::kLit, 0, static_cast<int>(v->value)};
    } else if (const auto* v = std::get_if<SpanD>(&c)) {
      ref = {ScoringTrace::kSpan, tr.span_rows.size(), 0};
      span_slot.emplace(std::make_pair(v->start, v->end), tr.span_rows.size());
      tr.span_rows.emplace_back(enc.passage_row(v->start), enc.passage_row(v->end));
    } else if (const auto* v = std::get_if<SumD>(&c)) {
      ref = {ScoringTrace::kPair, intern_pair(mention_row(v->i), mention_row(v->j)),
             static_cast<int>(BinaryOp::Sum)};
    } else if (const auto* v = std::get_if<DiffD>(&c)) {
      ref = {ScoringTrace::kPair, intern_pair(mention_row(v->i), mention_row(v->j)),
             static_cast<int>(BinaryOp::Diff)};
    } else if (const auto* v = std::get_if<Diff100D>(&c)) {
      ref = {ScoringTrace::kUnary, tr.unary_rows.size(), 0};
      tr.unary_rows.push_back(mention_row(v->i));
    } else if (const auto* v = std::get_if<MulD>(&c)) {
      ref = {ScoringTrace::kPair, intern_pair(mention_row(v->i), mention_row(v->j)),
             static_cast<int>(BinaryOp::Mul)};
    } else if (const auto* v = std::get_if<DivD>(&c)) {
      ref = {ScoringTrace::kPair, intern_pair(mention_row(v->i), mention_row(v->j)),
             static_cast<int>(BinaryOp::Div)};
    }
    tr.refs.push_back(ref);
  }

  // batched representations for the base groups
  auto row = [&](std::size_t r) { return enc.h.row(static_cast<Eigen::Index>(r)); };
  if (tr.has_lit) {
    tr.lit_x = row(enc.cls_row());
    tr.lit_rep = model.mlp_lit.forward(tr.lit_x, &tr.lit_hpre);
  }
  if (!tr.span_rows.empty()) {
    tr.span_x = Mat(static_cast<Eigen::Index>(tr.span_rows.size()), 2 * d);
    for (std::size_t r = 0; r < tr.span_rows.size(); ++r) {
      tr.span_x.row(static_cast<Eigen::Index>(r)) << row(tr.span_rows[r].first),
          row(tr.span_rows[r].second);
    }
    tr.span_rep = model.mlp_span.forward(tr.span_x, &tr.span_hpre);
  }
  if (!tr.pair_rows.empty()) {
    tr.pair_x = Mat(static_cast<Eigen::Index>(tr.pair_rows.size()), 3 * d);
    for (std::size_t r = 0; r < tr.pair_rows.size(); ++r) {
      auto hi = row(tr.pair_rows[r].first);
      auto hj = row(tr.pair_rows[r].second);
      tr.pair_x.row(static_cast<Eigen::Index>(r)) << hi, hj, hi.cwiseProduct(hj);
    }
    tr.pair_rep = model.mlp_binary.forward(tr.pair_x, &tr.pair_hpre);
  }
  if (!tr.unary_rows.empty()) {
    tr.unary_x = Mat(static_cast<Eigen::Index>(tr.unary_rows.size()), d);
    for (std::size_t r = 0; r < tr.unary_rows.size(); ++r)
      tr.unary_x.row(static_cast<Eigen::Index>(r)) = row(tr.unary_rows[r]);
    tr.unary_rep = model.mlp_unary.forward(tr.unary_x, &tr.unary_hpre);
  }

  // base scores, plus the span/sum score lists that drive composition pruning
  std::vector<double> base_scores(out.candidates.size());
  std::vector<double> span_scores, sum_scores;
  for (std::size_t c = 0; c < out.candidates.size(); ++c) {
    const auto& ref = tr.refs[c];
    double s = 0;
    switch (ref.group) {
      case ScoringTrace::kLit:
        s = tr.lit_rep.row(0).dot(model.w_lit.row(ref.op));
        break;
      case ScoringTrace::kSpan:
        s = tr.span_rep.row(static_cast<Eigen::Index>(ref.index)).dot(model.w_span);
        span_scores.push_back(0);  // placeholder, overwritten below
        break;
      case ScoringTrace::kPair:
        s = tr.pair_rep.row(static_cast<Eigen::Index>(ref.index))
                .dot(binary_weight(model, static_cast<BinaryOp>(ref.op)));
        break;
      default:
        s = tr.unary_rep.row(static_cast<Eigen::Index>(ref.index)).dot(model.w_diff100);
        break;
    }
    base_scores[c] = s;
    if (ref.group == ScoringTrace::kSpan) span_scores.back() = s;
    if (ref.group == ScoringTrace::kPair &&
        ref.op == static_cast<int>(BinaryOp::Sum))
      sum_scores.push_back(s);
  }

  // depth-2 candidates over the pruned argument sets
  std::vector<Derivation> comp =
      compose_topk(out.candidates, &span_scores, &sum_scores, ex, cfg);
  for (const auto& c : comp) {
    if (const auto* v = std::get_if<Sum3D>(&c)) {
      std::size_t p = pair_slot.at({mention_row(v->inner.i), mention_row(v->inner.j)});
      tr.refs.push_back({ScoringTrace::kSum3, tr.sum3_refs.size(), 0});
      tr.sum3_refs.emplace_back(p, mention_row(v->k));
    } else {
      const auto& m = std::get<MergeD>(c);
      std::size_t a = span_slot.at({m.a.start, m.a.end});
      std::size_t b = span_slot.at({m.b.start, m.b.end});
      tr.refs.push_back({ScoringTrace::kMerge, tr.merge_refs.size(), 0});
      tr.merge_refs.emplace_back(a, b);
    }
  }
  if (!tr.sum3_refs.empty()) {
    tr.sum3_x = Mat(static_cast<Eigen::Index>(tr.sum3_refs.size()), 2 * d);
    for (std::size_t r = 0; r < tr.sum3_refs.size(); ++r) {
      tr.sum3_x.row(static_cast<Eigen::Index>(r))
          << tr.pair_rep.row(static_cast<Eigen::Index>(tr.sum3_refs[r].first)),
          row(tr.sum3_refs[r].second);
    }
    tr.sum3_rep = model.mlp_sum3.forward(tr.sum3_x, &tr.sum3_hpre);
  }
  if (!tr.merge_refs.empty()) {
    tr.merge_x = Mat(static_cast<Eigen::Index>(tr.merge_refs.size()), 3 * d);
    for (std::size_t r = 0; r < tr.merge_refs.size(); ++r) {
      auto ra = tr.span_rep.row(static_cast<Eigen::Index>(tr.merge_refs[r].first));
      auto rb = tr.span_rep.row(static_cast<Eigen::Index>(tr.merge_refs[r].second));
      tr.merge_x.row(static_cast<Eigen::Index>(r)) << ra, rb, ra.cwiseProduct(rb);
    }
    tr.merge_rep = model.mlp_merge.forward(tr.merge_x, &tr.merge_hpre);
  }

  const std::size_t total = out.candidates.size() + comp.size();
  out.scores = Vec(static_cast<Eigen::Index>(total));
  for (std::size_t c = 0; c < base_scores.size(); ++c)
    out.scores[static_cast<Eigen::Index>(c)] = base_scores[c];
  for (std::size_t c = 0; c < comp.size(); ++c) {
    const auto& ref = tr.refs[out.candidates.size() + c];
    double s = ref.group == ScoringTrace::kSum3
                   ? tr.sum3_rep.row(static_cast<Eigen::Index>(ref.index)).dot(model.w_sum3)
                   : tr.merge_rep.row(static_cast<Eigen::Index>(ref.index)).dot(model.w_merge);
    out.scores[static_cast<Eigen::Index>(out.candidates.size() + c)] = s;
  }
  out.candidates.insert(out.candidates.end(), comp.begin(), comp.end());
  out.probs = softmax(out.scores);
  return out;
}

// Reverse-mode gradients of score_all: d_scores is dLoss/dscores over the
// candidate list; gradients accumulate into mgrads and d_h (seq x d).
inline void score_all_backward(const ScoreModel& model, const Mat& h,
                               const ScoringTrace& tr, const Vec& d_scores,
                               ScoreModel& mgrads, Mat& d_h) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  Mat dlit_rep, dspan_rep, dpair_rep, dunary_rep, dsum3_rep, dmerge_rep;
  if (tr.has_lit) dlit_rep = Mat::Zero(1, d);
  if (!tr.span_rows.empty())
    dspan_rep = Mat::Zero(static_cast<Eigen::Index>(tr.span_rows.size()), d);
  if (!tr.pair_rows.empty())
    dpair_rep = Mat::Zero(static_cast<Eigen::Index>(tr.pair_rows.size()), d);
  if (!tr.unary_rows.empty())
    dunary_rep = Mat::Zero(static_cast<Eigen::Index>(tr.unary_rows.size()), d);
  if (!tr.sum3_refs.empty())
    dsum3_rep = Mat::Zero(static_cast<Eigen::Index>(tr.sum3_refs.size()), d);
  if (!tr.merge_refs.empty())
    dmerge_rep = Mat::Zero(static_cast<Eigen::Index>(tr.merge_refs.size()), d);

  for (std::size_t c = 0; c < tr.refs.size(); ++c) {
    double g = d_scores[static_cast<Eigen::Index>(c)];
    if (g == 0.0) continue;
    const auto& ref = tr.refs[c];
    const auto idx = static_cast<Eigen::Index>(ref.index);
    switch (ref.group) {
      case ScoringTrace::kLit:
        mgrads.w_lit.row(ref.op) += g * tr.lit_rep.row(0);
        dlit_rep.row(0) += g * model.w_lit.row(ref.op);
        break;
      case ScoringTrace::kSpan:
        mgrads.w_span += g * tr.span_rep.row(idx).transpose();
        dspan_rep.row(idx) += g * model.w_span.transpose();
        break;
      case ScoringTrace::kPair: {
        auto op = static_cast<BinaryOp>(ref.op);
        Vec& gw = op == BinaryOp::Sum    ? mgrads.w_sum
                  : op == BinaryOp::Diff ? mgrads.w_diff
                  : op == BinaryOp::Mul  ? mgrads.w_mul
                                         : mgrads.w_div;
        gw += g * tr.pair_rep.row(idx).transpose();
        dpair_rep.row(idx) += g * binary_weight(model, op).transpose();
        break;
      }
      case ScoringTrace::kUnary:
        mgrads.w_diff100 += g * tr.unary_rep.row(idx).transpose();
        dunary_rep.row(idx) += g * model.w_diff100.transpose();
        break;
      case ScoringTrace::kSum3:
        mgrads.w_sum3 += g * tr.sum3_rep.row(idx).transpose();
        dsum3_rep.row(idx) += g * model.w_sum3.transpose();
        break;
      default:
        mgrads.w_merge += g * tr.merge_rep.row(idx).transpose();
        dmerge_rep.row(idx) += g * model.w_merge.transpose();
        break;
    }
  }

  // compositions first, so their input gradients reach the argument reps
  if (!tr.merge_refs.empty()) {
    Mat dmerge_x;
    model.mlp_merge.backward(tr.merge_x, tr.merge_hpre, dmerge_rep, mgrads.mlp_merge,
                             &dmerge_x);
    for (std::size_t r = 0; r < tr.merge_refs.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const auto a = static_cast<Eigen::Index>(tr.merge_refs[r].first);
      const auto b = static_cast<Eigen::Index>(tr.merge_refs[r].second);
      dspan_rep.row(a) += dmerge_x.row(ri).segment(0, d) +
                          dmerge_x.row(ri).segment(2 * d, d).cwiseProduct(tr.span_rep.row(b));
      dspan_rep.row(b) += dmerge_x.row(ri).segment(d, d) +
                          dmerge_x.row(ri).segment(2 * d, d).cwiseProduct(tr.span_rep.row(a));
    }
  }
  if (!tr.sum3_refs.empty()) {
    Mat dsum3_x;
    model.mlp_sum3.backward(tr.sum3_x, tr.sum3_hpre, dsum3_rep, mgrads.mlp_sum3, &dsum3_x);
    for (std::size_t r = 0; r < tr.sum3_refs.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      dpair_rep.row(static_cast<Eigen::Index>(tr.sum3_refs[r].first)) +=
          dsum3_x.row(ri).segment(0, d);
      d_h.row(static_cast<Eigen::Index>(tr.sum3_refs[r].second)) +=
          dsum3_x.row(ri).segment(d, d);
    }
  }
  if (!tr.span_rows.empty()) {
    Mat dspan_x;
    model.mlp_span.backward(tr.span_x, tr.span_hpre, dspan_rep, mgrads.mlp_span, &dspan_x);
    for (std::size_t r = 0; r < tr.span_rows.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      d_h.row(static_cast<Eigen::Index>(tr.span_rows[r].first)) +=
          dspan_x.row(ri).segment(0, d);
      d_h.row(static_cast<Eigen::Index>(tr.span_rows[r].second)) +=
          dspan_x.row(ri).segment(d, d);
    }
  }
  if (!tr.pair_rows.empty()) {
    Mat dpair_x;
    model.mlp_binary.backward(tr.pair_x, tr.pair_hpre, dpair_rep, mgrads.mlp_binary,
                              &dpair_x);
    for (std::size_t r = 0; r < tr.pair_rows.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const auto i_row = static_cast<Eigen::Index>(tr.pair_rows[r].first);
      const auto j_row = static_cast<Eigen::Index>(tr.pair_rows[r].second);
      d_h.row(i_row) += dpair_x.row(ri).segment(0, d) +
                        dpair_x.row(ri).segment(2 * d, d).cwiseProduct(h.row(j_row));
      d_h.row(j_row) += dpair_x.row(ri).segment(d, d) +
                        dpair_x.row(ri).segment(2 * d, d).cwiseProduct(h.row(i_row));
    }
  }
  if (!tr.unary_rows.empty()) {
    Mat dunary_x;
    model.mlp_unary.backward(tr.unary_x, tr.unary_hpre, dunary_rep, mgrads.mlp_unary,
                             &dunary_x);
    for (std::size_t r = 0; r < tr.unary_rows.size(); ++r)
      d_h.row(static_cast<Eigen::Index>(tr.unary_rows[r])) +=
          dunary_x.row(static_cast<Eigen::Index>(r));
  }
  if (tr.has_lit) {
    Mat dlit_x;
    model.mlp_lit.backward(tr.lit_x, tr.lit_hpre, dlit_rep, mgrads.mlp_lit, &dlit_x);
    d_h.row(0) += dlit_x.row(0);
  }
}

struct Prediction {
  Derivation derivation = LiteralD{Lit13::Unknown};
  AnswerValue answer = AnswerValue::of_literal(LitYNU::Unknown);
  double prob = 0.0;
};

// Highest-scoring executable candidate. An empty candidate space yields the
// Unknown literal with probability zero.
inline Prediction predict_answer(const ScoreModel& model, const EncoderParams& params,
                                 const Example& ex, const OpConfig& cfg) {
  EncoderOutput enc = encode(params, ex.question, ex.passage);
  ScoredCandidates sc = score_all(model, enc, ex, cfg);
  Prediction out;
  if (sc.candidates.empty()) return out;
  std::vector<std::size_t> order(sc.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double sa = sc.scores[static_cast<Eigen::Index>(a)];
    double sb = sc.scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  for (std::size_t c : order) {
    try {
      out.answer = execute(sc.candidates[c], ex);
      out.derivation = sc.candidates[c];
      out.prob = sc.probs[static_cast<Eigen::Index>(c)];
      return out;
    } catch (const ExecutionError&) {
      continue;  // numerically inexecutable candidates are skipped
    }
  }
  return out;
}

}  // namespace derivata
