#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "derivata/derivation.hpp"  // ConfigError, corpus types

namespace derivata {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct SequenceTooLong : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t layers = 2;
  std::size_t vocab = 8192;
};

inline constexpr std::size_t kMaxPositions = 512;

// Reserved token ids; every other token hashes into [3, vocab).
inline constexpr int kClsId = 0;
inline constexpr int kSepId = 1;
inline constexpr int kNumId = 2;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline int token_id(std::string_view text, std::size_t vocab) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return 3 + static_cast<int>(fnv1a64(lower) % (vocab - 3));
}

struct AttentionBlockParams {
  Mat wq, wk, wv, wo;  // d x d
  Vec bq, bk, bv, bo;  // d
  Mat w1;              // 4d x d
  Vec b1;              // 4d
  Mat w2;              // d x 4d
  Vec b2;              // d
};

struct EncoderParams {
  EncoderConfig config;
  Mat embed;    // vocab x d
  Mat pos;      // kMaxPositions x d
  Vec num_mag;  // d, scaled by log1p(value) for numeric tokens
  std::vector<AttentionBlockParams> layers;

  template <class F>
  void visit(F&& f) {
    f("embed", embed);
    f("pos", pos);
    f("num_mag", num_mag);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::string p = "layers." + std::to_string(l) + ".";
      auto& b = layers[l];
      f(p + "wq", b.wq);
      f(p + "bq", b.bq);
      f(p + "wk", b.wk);
      f(p + "bk", b.bk);
      f(p + "wv", b.wv);
      f(p + "bv", b.bv);
      f(p + "wo", b.wo);
      f(p + "bo", b.bo);
      f(p + "w1", b.w1);
      f(p + "b1", b.b1);
      f(p + "w2", b.w2);
      f(p + "b2", b.b2);
    }
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<EncoderParams*>(this)->visit(
        [&](const std::string& n, const auto& m) { f(n, m); });
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    visit([&](const std::string&, const auto& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  static EncoderParams zeros(EncoderConfig cfg) {
    if (cfg.vocab < 4) throw ConfigError("vocab must be at least 4");
    if (cfg.dim == 0 || cfg.layers == 0) throw ConfigError("dim and layers must be positive");
    EncoderParams p;
    p.config = cfg;
    const auto d = static_cast<Eigen::Index>(cfg.dim);
    p.embed = Mat::Zero(static_cast<Eigen::Index>(cfg.vocab), d);
    p.pos = Mat::Zero(static_cast<Eigen::Index>(kMaxPositions), d);
    p.num_mag = Vec::Zero(d);
    p.layers.resize(cfg.layers);
    for (auto& b : p.layers) {
      b.wq = Mat::Zero(d, d);
      b.wk = Mat::Zero(d, d);
      b.wv = Mat::Zero(d, d);
      b.wo = Mat::Zero(d, d);
      b.bq = Vec::Zero(d);
      b.bk = Vec::Zero(d);
      b.bv = Vec::Zero(d);
      b.bo = Vec::Zero(d);
      b.w1 = Mat::Zero(4 * d, d);
      b.b1 = Vec::Zero(4 * d);
      b.w2 = Mat::Zero(d, 4 * d);
      b.b2 = Vec::Zero(d);
    }
    return p;
  }
};

namespace detail {

template <class Params>
void fill_uniform(Params& p, std::uint64_t seed, double bound) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  p.visit([&](const std::string&, auto& m) {
    double* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = dist(rng);
  });
}

}  // namespace detail

// Every parameter drawn uniformly from [-1/sqrt(d), 1/sqrt(d)].
inline EncoderParams init_encoder(std::uint64_t seed, EncoderConfig cfg) {
  EncoderParams p = EncoderParams::zeros(cfg);
  detail::fill_uniform(p, seed, 1.0 / std::sqrt(static_cast<double>(cfg.dim)));
  return p;
}

namespace detail {

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

inline double gelu_prime(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014327;
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline void softmax_rows_inplace(Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

}  // namespace detail

struct EncoderTrace {
  std::vector<int> ids;
  Vec mags;
  std::vector<Mat> xs;  // layer inputs; xs[0] is the embedded sequence
  struct LayerTrace {
    Mat q, k, v;     // seq x d
    Mat probs;       // seq x seq attention weights
    Mat ctx;         // probs * v
    Mat x1;          // post-attention residual stream, input to the FFN
    Mat hpre, hact;  // seq x 4d FFN hidden pre-activation / activation
  };
  std::vector<LayerTrace> layers;
};

struct EncoderOutput {
  Mat h;  // seq x d
  std::size_t q_len = 0;
  std::size_t p_len = 0;

  std::size_t seq_len() const { return q_len + p_len + 2; }
  std::size_t cls_row() const { return 0; }
  std::size_t question_row(std::size_t i) const { return 1 + i; }
  std::size_t sep_row() const { return 1 + q_len; }
  std::size_t passage_row(std::size_t i) const { return 2 + q_len + i; }
};

// Forward pass over [CLS] question [SEP] passage. Numeric tokens map to a
// shared NUM id plus a log1p(value)-scaled magnitude direction. Layers are
// pre-softmax single-head attention blocks with GELU feed-forwards and
// residual connections, no normalization.
inline EncoderOutput encode(const EncoderParams& params, const TokenSeq& question,
                            const TokenSeq& passage, EncoderTrace* trace = nullptr) {
  const auto& cfg = params.config;
  const std::size_t seq = question.size() + passage.size() + 2;
  if (seq > kMaxPositions)
    throw SequenceTooLong("sequence of " + std::to_string(seq) +
                          " tokens exceeds the position table");
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  const auto s = static_cast<Eigen::Index>(seq);

  std::vector<int> ids(seq);
  Vec mags = Vec::Zero(s);
  ids[0] = kClsId;
  std::size_t t = 1;
  auto place = [&](const Token& tok) {
    if (auto num = parse_number_token(tok.text)) {
      ids[t] = kNumId;
      mags[static_cast<Eigen::Index>(t)] = std::log1p(num->to_double());
    } else {
      ids[t] = token_id(tok.text, cfg.vocab);
    }
    ++t;
  };
  for (const auto& tok : question) place(tok);
  ids[t++] = kSepId;
  for (const auto& tok : passage) place(tok);

  Mat x(s, d);
  for (Eigen::Index r = 0; r < s; ++r) {
    x.row(r) = params.embed.row(ids[static_cast<std::size_t>(r)]) + params.pos.row(r);
    if (mags[r] != 0.0) x.row(r) += mags[r] * params.num_mag.transpose();
  }

  if (trace) {
    trace->ids = ids;
    trace->mags = mags;
    trace->xs.clear();
    trace->layers.clear();
    trace->xs.push_back(x);
  }

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  for (const auto& b : params.layers) {
    Mat q = (x * b.wq.transpose()).rowwise() + b.bq.transpose();
    Mat k = (x * b.wk.transpose()).rowwise() + b.bk.transpose();
    Mat v = (x * b.wv.transpose()).rowwise() + b.bv.transpose();
    Mat probs = q * k.transpose() * inv_sqrt_d;
    detail::softmax_rows_inplace(probs);
    Mat ctx = probs * v;
    Mat x1 = x + ((ctx * b.wo.transpose()).rowwise() + b.bo.transpose());
    Mat hpre = (x1 * b.w1.transpose()).rowwise() + b.b1.transpose();
    Mat hact = hpre.unaryExpr([](double z) { return detail::gelu(z); });
    x = x1 + ((hact * b.w2.transpose()).rowwise() + b.b2.transpose());
    if (trace) {
      trace->layers.push_back(EncoderTrace::LayerTrace{std::move(q), std::move(k),
                                                       std::move(v), std::move(probs),
                                                       std::move(ctx), std::move(x1),
                                                       std::move(hpre), std::move(hact)});
      trace->xs.push_back(x);
    }
  }

  EncoderOutput out;
  out.h = std::move(x);
  out.q_len = question.size();
  out.p_len = passage.size();
  return out;
}

// Exact reverse-mode gradients of encode. d_h is dLoss/dOutput; gradients
// accumulate into `grads`, which must have the same shapes as `params`.
inline void encoder_backward(const EncoderParams& params, const EncoderTrace& trace,
                             const Mat& d_h, EncoderParams& grads) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.config.dim));
  Mat dx = d_h;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& b = params.layers[li];
    auto& gb = grads.layers[li];
    const auto& t = trace.layers[li];
    const Mat& x = trace.xs[li];

    // feed-forward: x2 = x1 + gelu(x1 w1^T + b1) w2^T + b2
    gb.w2 += dx.transpose() * t.hact;
    gb.b2 += dx.colwise().sum().transpose();
    Mat dhact = dx * b.w2;
    Mat dhpre = (dhact.array() *
                 t.hpre.unaryExpr([](double z) { return detail::gelu_prime(z); }).array())
                    .matrix();
    gb.w1 += dhpre.transpose() * t.x1;
    gb.b1 += dhpre.colwise().sum().transpose();
    Mat dx1 = dx + dhpre * b.w1;

    // attention: x1 = x + (probs v) wo^T + bo, probs = softmax(q k^T / sqrt(d))
    gb.wo += dx1.transpose() * t.ctx;
    gb.bo += dx1.colwise().sum().transpose();
    Mat dctx = dx1 * b.wo;
    Mat dprobs = dctx * t.v.transpose();
    Mat dv = t.probs.transpose() * dctx;
    Mat dscores(dprobs.rows(), dprobs.cols());
    for (Eigen::Index r = 0; r < dprobs.rows(); ++r) {
      double dot = dprobs.row(r).dot(t.probs.row(r));
      dscores.row(r) = t.probs.row(r).array() * (dprobs.row(r).array() - dot);
    }
    Mat dq = dscores * t.k * inv_sqrt_d;
    Mat dk = dscores.transpose() * t.q * inv_sqrt_d;
    gb.wq += dq.transpose() * x;
    gb.bq += dq.colwise().sum().transpose();
    gb.wk += dk.transpose() * x;
    gb.bk += dk.colwise().sum().transpose();
    gb.wv += dv.transpose() * x;
    gb.bv += dv.colwise().sum().transpose();
    dx = dx1 + dq * b.wq + dk * b.wk + dv * b.wv;
  }
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    grads.embed.row(trace.ids[static_cast<std::size_t>(r)]) += dx.row(r);
    grads.pos.row(r) += dx.row(r);
    if (trace.mags[r] != 0.0) grads.num_mag += trace.mags[r] * dx.row(r).transpose();
  }
}

}  // namespace derivata
