// Copyright 2026 The TimeColor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "timecolor/correspond.hpp"
#include "timecolor/denoiser/attention.hpp"
#include "timecolor/rope.hpp"
#include "timecolor/tokengrid.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace timecolor::denoiser {

inline constexpr int kNumModalities = 5;

struct ModelConfig {
  int dim = 128;
  int blocks = 4;
  int heads = 4;
  int ffn_mult = 4;
  int patch_dim = 12;  // patch * patch * latent channels
  int text_vocab = 32;
  int max_text_tokens = 8;
  int rope_offset_h = 16;
  int rope_offset_w = 16;
  double rope_theta = 10000.0;

  int head_dim() const { return dim / heads; }
  rope::RopeConfig rope() const {
    return rope::RopeConfig::for_head_dim(head_dim(), rope_offset_h, rope_offset_w, rope_theta);
  }
  void validate() const {
    if (dim <= 0 || heads <= 0 || blocks <= 0 || ffn_mult <= 0 || patch_dim <= 0)
      throw Error("model config: sizes must be positive");
    if (dim % heads != 0) throw Error("model config: dim must be divisible by heads");
    if (dim % 2 != 0) throw Error("model config: dim must be even");
    rope();
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelConfig, dim, blocks, heads, ffn_mult, patch_dim, text_vocab,
                                                max_text_tokens, rope_offset_h, rope_offset_w, rope_theta)

template <typename Scalar>
struct BlockParams {
  Matrix<Scalar> ada_w, ada_b;  // -> [shift1 | scale1 | shift2 | scale2]
  Matrix<Scalar> wq, wk, wv, wo, bo;
  Matrix<Scalar> fc1_w, fc1_b, fc2_w, fc2_b;
};

/// Every trainable tensor. Also used as the gradient accumulator.
template <typename Scalar>
struct ModelParams {
  Matrix<Scalar> patch_w, patch_b;
  Matrix<Scalar> text_table;
  Matrix<Scalar> modality_table;
  Matrix<Scalar> time_w1, time_b1, time_w2, time_b2;
  std::vector<BlockParams<Scalar>> blocks;
  Matrix<Scalar> final_ada_w, final_ada_b;
  Matrix<Scalar> out_w, out_b;

  static ModelParams zeros(const ModelConfig& c) {
    ModelParams p;
    const int d = c.dim, h = c.dim * c.ffn_mult;
    auto z = [](int r, int cols) { return Matrix<Scalar>::Zero(r, cols); };
    p.patch_w = z(c.patch_dim, d);
    p.patch_b = z(1, d);
    p.text_table = z(c.text_vocab, d);
    p.modality_table = z(kNumModalities, d);
    p.time_w1 = z(d, d);
    p.time_b1 = z(1, d);
    p.time_w2 = z(d, d);
    p.time_b2 = z(1, d);
    for (int b = 0; b < c.blocks; ++b) {
      BlockParams<Scalar> bp;
      bp.ada_w = z(d, 4 * d);
      bp.ada_b = z(1, 4 * d);
      bp.wq = z(d, d);
      bp.wk = z(d, d);
      bp.wv = z(d, d);
      bp.wo = z(d, d);
      bp.bo = z(1, d);
      bp.fc1_w = z(d, h);
      bp.fc1_b = z(1, h);
      bp.fc2_w = z(h, d);
      bp.fc2_b = z(1, d);
      p.blocks.push_back(std::move(bp));
    }
    p.final_ada_w = z(d, 2 * d);
    p.final_ada_b = z(1, 2 * d);
    p.out_w = z(d, c.patch_dim);
    p.out_b = z(1, c.patch_dim);
    return p;
  }

  /// Calls f(name, matrix) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  std::int64_t count() const {
    std::int64_t n = 0;
    visit([&](const std::string&, const Matrix<Scalar>& m) { n += m.size(); });
    return n;
  }

  void set_zero() {
    visit([](const std::string&, Matrix<Scalar>& m) { m.setZero(); });
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    f("patch_embed.weight", self.patch_w);
    f("patch_embed.bias", self.patch_b);
    f("text_embed.weight", self.text_table);
    f("modality_embed.weight", self.modality_table);
    f("time_mlp.fc1.weight", self.time_w1);
    f("time_mlp.fc1.bias", self.time_b1);
    f("time_mlp.fc2.weight", self.time_w2);
    f("time_mlp.fc2.bias", self.time_b2);
    for (std::size_t b = 0; b < self.blocks.size(); ++b) {
      auto& bp = self.blocks[b];
      const std::string p = "blocks." + std::to_string(b) + ".";
      f(p + "ada.weight", bp.ada_w);
      f(p + "ada.bias", bp.ada_b);
      f(p + "attn.q.weight", bp.wq);
      f(p + "attn.k.weight", bp.wk);
      f(p + "attn.v.weight", bp.wv);
      f(p + "attn.out.weight", bp.wo);
      f(p + "attn.out.bias", bp.bo);
      f(p + "ffn.fc1.weight", bp.fc1_w);
      f(p + "ffn.fc1.bias", bp.fc1_b);
      f(p + "ffn.fc2.weight", bp.fc2_w);
      f(p + "ffn.fc2.bias", bp.fc2_b);
    }
    f("final.ada.weight", self.final_ada_w);
    f("final.ada.bias", self.final_ada_b);
    f("final.out.weight", self.out_w);
    f("final.out.bias", self.out_b);
  }
};

namespace detail {

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

inline constexpr double kLayerNormEps = 1e-6;

template <typename Scalar>
void layer_norm(const Matrix<Scalar>& x, Matrix<Scalar>& normed, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& inv_std) {
  const auto d = static_cast<Scalar>(x.cols());
  normed.resize(x.rows(), x.cols());
  inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).sum() / d;
    const auto centered = (x.row(r).array() - mean).matrix();
    const Scalar var = centered.squaredNorm() / d;
    inv_std(r) = Scalar(1) / std::sqrt(var + static_cast<Scalar>(kLayerNormEps));
    normed.row(r) = centered * inv_std(r);
  }
}

template <typename Scalar>
Matrix<Scalar> layer_norm_backward(const Matrix<Scalar>& d_normed, const Matrix<Scalar>& normed,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& inv_std) {
  const auto d = static_cast<Scalar>(normed.cols());
  Matrix<Scalar> dx(normed.rows(), normed.cols());
  for (Eigen::Index r = 0; r < normed.rows(); ++r) {
    const Scalar mean_g = d_normed.row(r).sum() / d;
    const Scalar mean_gn = d_normed.row(r).dot(normed.row(r)) / d;
    dx.row(r) = inv_std(r) * (d_normed.row(r).array() - mean_g - normed.row(r).array() * mean_gn).matrix();
  }
  return dx;
}

template <typename Scalar>
Scalar gelu(Scalar x) {
  const Scalar c = static_cast<Scalar>(std::sqrt(2.0 / std::numbers::pi));
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(c * (x + Scalar(0.044715) * x * x * x)));
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
  const Scalar c = static_cast<Scalar>(std::sqrt(2.0 / std::numbers::pi));
  const Scalar t = std::tanh(c * (x + Scalar(0.044715) * x * x * x));
  return Scalar(0.5) * (Scalar(1) + t) +
         Scalar(0.5) * x * (Scalar(1) - t * t) * c * (Scalar(1) + Scalar(3 * 0.044715) * x * x);
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Scalar silu(Scalar x) {
  return x * sigmoid(x);
}

template <typename Scalar>
Scalar silu_grad(Scalar x) {
  const Scalar s = sigmoid(x);
  return s + x * s * (Scalar(1) - s);
}

template <typename Scalar>
RowVector<Scalar> timestep_embedding(int step, int dim) {
  RowVector<Scalar> e(dim);
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / half);
    e(k) = static_cast<Scalar>(std::sin(step * freq));
    e(half + k) = static_cast<Scalar>(std::cos(step * freq));
  }
  return e;
}

}  // namespace detail

template <typename Scalar>
struct BlockCache {
  detail::RowVector<Scalar> mod;
  Matrix<Scalar> x_in, n1, a, q, k, v, o, x_mid, n2, b, h1, g;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std1, inv_std2;
  std::vector<Matrix<Scalar>> probs;  // per head, queries x keys
};

template <typename Scalar>
struct ForwardCache {
  const tokens::TokenSequence<Scalar>* seq = nullptr;
  const correspond::AttentionGate* gate = nullptr;
  int step = 0;
  rope::RopeTable<Scalar> rope;
  detail::RowVector<Scalar> temb, t_h1, t_a1, t_c, t_cs, final_mod;
  Matrix<Scalar> x0;
  std::vector<BlockCache<Scalar>> blocks;
  Matrix<Scalar> x_final, nf, zf;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_stdf;
};

/// Minimal DiT: shared visual patch embedding plus a modality embedding,
/// adaLN-modulated pre-norm blocks with gated multi-head self-attention
/// (rotary Q/K) and a GELU feed-forward, and a linear noise head read out on
/// TARGET tokens only. Parameter shapes depend on the config alone.
template <typename Scalar>
class DenoiserModel {
 public:
  using Mat = Matrix<Scalar>;
  using Row = detail::RowVector<Scalar>;

  DenoiserModel() = default;
  explicit DenoiserModel(const ModelConfig& config, std::uint64_t seed = 0)
      : config_(config), params_(ModelParams<Scalar>::zeros(config)) {
    config_.validate();
    rope_ = config_.rope();
    initialize(seed);
  }

  const ModelConfig& config() const { return config_; }
  const rope::RopeConfig& rope_config() const { return rope_; }
  ModelParams<Scalar>& params() { return params_; }
  const ModelParams<Scalar>& params() const { return params_; }
  std::int64_t parameter_count() const { return params_.count(); }

  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](Mat& m, double stddev) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(normal(rng) * stddev);
    };
    const double d = config_.dim, h = config_.dim * config_.ffn_mult;
    const double depth = 1.0 / std::sqrt(2.0 * config_.blocks);
    fill(params_.patch_w, 1.0 / std::sqrt(double(config_.patch_dim)));
    fill(params_.text_table, 0.1);
    fill(params_.modality_table, 0.1);
    fill(params_.time_w1, 1.0 / std::sqrt(d));
    fill(params_.time_w2, 1.0 / std::sqrt(d));
    for (auto& b : params_.blocks) {
      fill(b.ada_w, 0.02);
      fill(b.wq, 1.0 / std::sqrt(d));
      fill(b.wk, 1.0 / std::sqrt(d));
      fill(b.wv, 1.0 / std::sqrt(d));
      fill(b.wo, depth / std::sqrt(d));
      fill(b.fc1_w, 1.0 / std::sqrt(d));
      fill(b.fc2_w, depth / std::sqrt(h));
    }
    fill(params_.final_ada_w, 0.02);
    fill(params_.out_w, 0.02);
  }

  /// Predicted noise for each TARGET patch (n_target x patch_dim).
  Mat forward(const tokens::TokenSequence<Scalar>& seq, const correspond::AttentionGate& gate, int step,
              ForwardCache<Scalar>* cache = nullptr) const {
    check_inputs(seq, gate);
    ForwardCache<Scalar> local;
    ForwardCache<Scalar>& c = cache ? *cache : local;
    c.seq = &seq;
    c.gate = &gate;
    c.step = step;
    c.rope = rope::RopeTable<Scalar>::build(seq.tokens, rope_);
    const auto& p = params_;
    const int n = seq.size(), d = config_.dim;

    c.temb = detail::timestep_embedding<Scalar>(step, d);
    c.t_h1 = c.temb * p.time_w1 + p.time_b1;
    c.t_a1 = c.t_h1.unaryExpr([](Scalar x) { return detail::silu(x); });
    c.t_c = c.t_a1 * p.time_w2 + p.time_b2;
    c.t_cs = c.t_c.unaryExpr([](Scalar x) { return detail::silu(x); });

    c.x0.resize(n, d);
    const int nv = n - seq.n_text;
    if (nv > 0)
      c.x0.bottomRows(nv) = (seq.features.bottomRows(nv) * p.patch_w).rowwise() + p.patch_b.row(0);
    for (int r = 0; r < seq.n_text; ++r) c.x0.row(r) = p.text_table.row(seq.tokens[std::size_t(r)].text_id);
    for (int r = 0; r < n; ++r) c.x0.row(r) += p.modality_table.row(static_cast<int>(seq.tokens[std::size_t(r)].modality));

    c.blocks.resize(p.blocks.size());
    Mat x = c.x0;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) x = block_forward(p.blocks[b], x, c, c.blocks[b]);

    c.x_final = x;
    detail::layer_norm(x, c.nf, c.inv_stdf);
    c.final_mod = c.t_cs * p.final_ada_w + p.final_ada_b;
    const Row shift = c.final_mod.leftCols(d), scale = c.final_mod.rightCols(d);
    c.zf = (c.nf.array().rowwise() * (scale.array() + Scalar(1))).matrix().rowwise() + shift;
    return (c.zf.middleRows(seq.target_offset(), seq.n_target) * p.out_w).rowwise() + p.out_b.row(0);
  }

  /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void backward(const ForwardCache<Scalar>& c, const Mat& d_out, ModelParams<Scalar>& grads) const {
    const auto& seq = *c.seq;
    const auto& p = params_;
    const int n = seq.size(), d = config_.dim;
    if (d_out.rows() != seq.n_target || d_out.cols() != config_.patch_dim)
      throw ShapeError("backward: output gradient shape mismatch");

    const auto zt = c.zf.middleRows(seq.target_offset(), seq.n_target);
    grads.out_w.noalias() += zt.transpose() * d_out;
    grads.out_b += d_out.colwise().sum();
    Mat dz = Mat::Zero(n, d);
    dz.middleRows(seq.target_offset(), seq.n_target).noalias() = d_out * p.out_w.transpose();

    Row d_cs = Row::Zero(d);
    {
      const Row scale = c.final_mod.rightCols(d);
      Row d_mod(2 * d);
      d_mod.leftCols(d) = dz.colwise().sum();
      d_mod.rightCols(d) = (dz.array() * c.nf.array()).colwise().sum();
      grads.final_ada_w.noalias() += c.t_cs.transpose() * d_mod;
      grads.final_ada_b += d_mod;
      d_cs.noalias() += d_mod * p.final_ada_w.transpose();
      const Mat dn = (dz.array().rowwise() * (scale.array() + Scalar(1))).matrix();
      dz = detail::layer_norm_backward(dn, c.nf, c.inv_stdf);
    }

    Mat dx = std::move(dz);
    for (std::size_t b = p.blocks.size(); b-- > 0;)
      dx = block_backward(p.blocks[b], c.blocks[b], c, dx, grads.blocks[b], d_cs);

    const int nv = n - seq.n_text;
    if (nv > 0) {
      grads.patch_w.noalias() += seq.features.bottomRows(nv).transpose() * dx.bottomRows(nv);
      grads.patch_b += dx.bottomRows(nv).colwise().sum();
    }
    for (int r = 0; r < seq.n_text; ++r) grads.text_table.row(seq.tokens[std::size_t(r)].text_id) += dx.row(r);
    for (int r = 0; r < n; ++r) grads.modality_table.row(static_cast<int>(seq.tokens[std::size_t(r)].modality)) += dx.row(r);

    const Row dc = d_cs.cwiseProduct(c.t_c.unaryExpr([](Scalar x) { return detail::silu_grad(x); }));
    grads.time_w2.noalias() += c.t_a1.transpose() * dc;
    grads.time_b2 += dc;
    const Row dh1 = (dc * p.time_w2.transpose()).cwiseProduct(c.t_h1.unaryExpr([](Scalar x) { return detail::silu_grad(x); }));
    grads.time_w1.noalias() += c.temb.transpose() * dh1;
    grads.time_b1 += dh1;
  }

 private:
  void check_inputs(const tokens::TokenSequence<Scalar>& seq, const correspond::AttentionGate& gate) const {
    if (seq.features.cols() != config_.patch_dim)
      throw ShapeError("forward: patch dim " + std::to_string(seq.features.cols()) + " != model patch dim " +
                       std::to_string(config_.patch_dim));
    if (seq.features.rows() != seq.size()) throw ShapeError("forward: feature rows != token count");
    if (gate.size() != seq.size() || gate.allowed.cols() != seq.size())
      throw ShapeError("forward: gate is " + std::to_string(gate.size()) + " but sequence has " +
                       std::to_string(seq.size()) + " tokens");
    if (seq.n_target <= 0) throw ShapeError("forward: no target tokens");
    if (seq.n_text > config_.max_text_tokens) throw ShapeError("forward: too many text tokens");
    for (int r = 0; r < seq.n_text; ++r) {
      const auto& t = seq.tokens[std::size_t(r)];
      if (t.modality != tokens::Modality::text || t.text_id < 0 || t.text_id >= config_.text_vocab)
        throw ShapeError("forward: invalid text token at " + std::to_string(r));
    }
    rope_.check_grid(seq.grid_rows, seq.grid_cols);
  }

  Mat block_forward(const BlockParams<Scalar>& bp, const Mat& x, const ForwardCache<Scalar>& c,
                    BlockCache<Scalar>& bc) const {
    const int d = config_.dim, dh = config_.head_dim();
    bc.mod = c.t_cs * bp.ada_w + bp.ada_b;
    const Row sh1 = bc.mod.segment(0, d), sc1 = bc.mod.segment(d, d);
    const Row sh2 = bc.mod.segment(2 * d, d), sc2 = bc.mod.segment(3 * d, d);

    bc.x_in = x;
    detail::layer_norm(x, bc.n1, bc.inv_std1);
    bc.a = (bc.n1.array().rowwise() * (sc1.array() + Scalar(1))).matrix().rowwise() + sh1;
    bc.q.noalias() = bc.a * bp.wq;
    bc.k.noalias() = bc.a * bp.wk;
    bc.v.noalias() = bc.a * bp.wv;
    for (int h = 0; h < config_.heads; ++h) {
      c.rope.rotate(bc.q, h * dh);
      c.rope.rotate(bc.k, h * dh);
    }
    bc.o.resize(x.rows(), d);
    bc.probs.resize(std::size_t(config_.heads));
    for (int h = 0; h < config_.heads; ++h)
      bc.o.middleCols(h * dh, dh) = masked_attention<Scalar>(bc.q.middleCols(h * dh, dh), bc.k.middleCols(h * dh, dh),
                                                             bc.v.middleCols(h * dh, dh), *c.gate, &bc.probs[std::size_t(h)]);
    bc.x_mid = x;
    bc.x_mid.noalias() += bc.o * bp.wo;
    bc.x_mid.rowwise() += bp.bo.row(0);

    detail::layer_norm(bc.x_mid, bc.n2, bc.inv_std2);
    bc.b = (bc.n2.array().rowwise() * (sc2.array() + Scalar(1))).matrix().rowwise() + sh2;
    bc.h1 = (bc.b * bp.fc1_w).rowwise() + bp.fc1_b.row(0);
    bc.g = bc.h1.unaryExpr([](Scalar v) { return detail::gelu(v); });
    Mat out = bc.x_mid;
    out.noalias() += bc.g * bp.fc2_w;
    out.rowwise() += bp.fc2_b.row(0);
    return out;
  }

  Mat block_backward(const BlockParams<Scalar>& bp, const BlockCache<Scalar>& bc, const ForwardCache<Scalar>& c,
                     const Mat& dx_out, BlockParams<Scalar>& gp, Row& d_cs) const {
    const int d = config_.dim, dh = config_.head_dim();
    const Row sc1 = bc.mod.segment(d, d), sc2 = bc.mod.segment(3 * d, d);
    Row d_mod(4 * d);

    // Feed-forward branch.
    gp.fc2_w.noalias() += bc.g.transpose() * dx_out;
    gp.fc2_b += dx_out.colwise().sum();
    Mat dh1 = dx_out * bp.fc2_w.transpose();
    dh1 = dh1.cwiseProduct(bc.h1.unaryExpr([](Scalar v) { return detail::gelu_grad(v); }));
    gp.fc1_w.noalias() += bc.b.transpose() * dh1;
    gp.fc1_b += dh1.colwise().sum();
    const Mat db = dh1 * bp.fc1_w.transpose();
    d_mod.segment(2 * d, d) = db.colwise().sum();
    d_mod.segment(3 * d, d) = (db.array() * bc.n2.array()).colwise().sum();
    Mat dx_mid = dx_out + detail::layer_norm_backward<Scalar>(
                              (db.array().rowwise() * (sc2.array() + Scalar(1))).matrix(), bc.n2, bc.inv_std2);

    // Attention branch.
    gp.wo.noalias() += bc.o.transpose() * dx_mid;
    gp.bo += dx_mid.colwise().sum();
    const Mat d_o = dx_mid * bp.wo.transpose();
    Mat dq(bc.q.rows(), d), dk(bc.k.rows(), d), dv(bc.v.rows(), d);
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
    for (int h = 0; h < config_.heads; ++h) {
      const auto& prob = bc.probs[std::size_t(h)];
      const auto doh = d_o.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh).noalias() = prob.transpose() * doh;
      const Mat dp = doh * bc.v.middleCols(h * dh, dh).transpose();
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_dot = (dp.array() * prob.array()).rowwise().sum();
      const Mat ds = (prob.array() * (dp.array().colwise() - row_dot.array())).matrix() * scale;
      dq.middleCols(h * dh, dh).noalias() = ds * bc.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh).noalias() = ds.transpose() * bc.q.middleCols(h * dh, dh);
    }
    for (int h = 0; h < config_.heads; ++h) {
      c.rope.rotate(dq, h * dh, true);
      c.rope.rotate(dk, h * dh, true);
    }
    gp.wq.noalias() += bc.a.transpose() * dq;
    gp.wk.noalias() += bc.a.transpose() * dk;
    gp.wv.noalias() += bc.a.transpose() * dv;
    Mat da = dq * bp.wq.transpose();
    da.noalias() += dk * bp.wk.transpose();
    da.noalias() += dv * bp.wv.transpose();
    d_mod.segment(0, d) = da.colwise().sum();
    d_mod.segment(d, d) = (da.array() * bc.n1.array()).colwise().sum();
    Mat dx_in = dx_mid + detail::layer_norm_backward<Scalar>(
                             (da.array().rowwise() * (sc1.array() + Scalar(1))).matrix(), bc.n1, bc.inv_std1);

    gp.ada_w.noalias() += c.t_cs.transpose() * d_mod;
    gp.ada_b += d_mod;
    d_cs.noalias() += d_mod * bp.ada_w.transpose();
    return dx_in;
  }

  ModelConfig config_;
  rope::RopeConfig rope_;
  ModelParams<Scalar> params_;
};

/// Copies parameters across precisions (e.g. a float checkpoint into a double model).
template <typename To, typename From>
DenoiserModel<To> cast_model(const DenoiserModel<From>& model) {
  DenoiserModel<To> out(model.config());
  std::vector<const Matrix<From>*> src;
  model.params().visit([&](const std::string&, const Matrix<From>& m) { src.push_back(&m); });
  std::size_t k = 0;
  out.params().visit([&](const std::string&, Matrix<To>& m) { m = src[k++]->template cast<To>(); });
  return out;
}

}  // namespace timecolor::denoiser
