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
#include "timecolor/curation.hpp"
#include "timecolor/metrics.hpp"
#include "timecolor/pipeline.hpp"
#include "timecolor/synthcartoon.hpp"
#include "timecolor/denoiser/attention.hpp"
#include "timecolor/denoiser/model.hpp"
#include "timecolor/denoiser/schedule.hpp"
#include "timecolor/denoiser/training.hpp"
#include "timecolor/rope.hpp"
#include "timecolor/tokengrid.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace tc_test {

using namespace timecolor;

/// Random sequence with R references, f frames and random per-token identities.
template <typename Scalar>
tokens::TokenSequence<Scalar> random_sequence(std::mt19937_64& rng, int R, int f, int rows, int cols, int patch_dim,
                                              int n_text = 0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto grid = [&] {
    tokens::PatchGrid<Scalar> g;
    g.rows = rows;
    g.cols = cols;
    g.patch = 1;
    g.channels = patch_dim;
    g.features.resize(rows * cols, patch_dim);
    for (Eigen::Index i = 0; i < g.features.size(); ++i) g.features.data()[i] = static_cast<Scalar>(normal(rng));
    return g;
  };
  std::vector<tokens::PatchGrid<Scalar>> tgt, sk, refs;
  for (int l = 0; l < f; ++l) {
    tgt.push_back(grid());
    sk.push_back(grid());
  }
  std::vector<int> ids;
  for (int r = 0; r < R; ++r) {
    refs.push_back(grid());
    ids.push_back(r + 1);
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<int> text;
  for (int k = 0; k < n_text; ++k) text.push_back(static_cast<int>(rng() % 8));
  auto seq = tokens::assemble_sequence(tgt, sk, refs, ids, text, R > 0);
  std::uniform_int_distribution<int> pick(1, std::max(R, 1));
  for (auto& t : seq.tokens)
    if (t.modality == tokens::Modality::target || t.modality == tokens::Modality::sketch) t.rho = pick(rng);
  return seq;
}

/// Scene whose subjects appear at random frames (some after frame 0).
inline synth::SceneSpec late_scene(std::uint64_t seed, int num_frames, int subjects) {
  std::mt19937_64 rng(seed);
  synth::SceneParams p;
  p.num_frames = num_frames;
  p.num_subjects = subjects;
  p.min_size = 4.0;
  p.max_size = 6.0;
  for (int k = 0; k < subjects; ++k)
    p.appear_frames.push_back(k == 0 ? 0 : static_cast<int>(rng() % std::uint64_t(num_frames - 1)));
  return synth::random_scene(seed, p);
}

/// Compares a TrackSet with the ground-truth union: each gt label is found at
/// the first keyframe where it is visible and matches gt_masks from there on.
inline bool matches_ground_truth_union(const synth::Clip& clip, const curation::TrackSet& tracks, int stride,
                                       std::string* why) {
  int max_label = 0;
  for (const auto& m : clip.gt_masks) max_label = std::max(max_label, static_cast<int>(m.maxCoeff()));
  int expected_instances = 0;
  for (int label = 1; label <= max_label; ++label) {
    int discovery = -1;
    for (int t = 0; t < clip.num_frames() && discovery < 0; t += stride)
      if ((clip.gt_masks[std::size_t(t)] == label).any()) discovery = t;
    if (discovery < 0) continue;
    ++expected_instances;
    int found = 0;
    for (const auto& inst : tracks.instances) {
      if (inst.descriptor.label_hint != label) continue;
      ++found;
      if (inst.first_frame != discovery) {
        *why = "label " + std::to_string(label) + " discovered at " + std::to_string(inst.first_frame) +
               ", expected " + std::to_string(discovery);
        return false;
      }
      for (int t = 0; t < clip.num_frames(); ++t) {
        const BinaryMask expected = t >= discovery ? BinaryMask(clip.gt_masks[std::size_t(t)] == label)
                                                   : BinaryMask::Constant(clip.height(), clip.width(), false);
        if ((inst.masks[std::size_t(t)] != expected).any()) {
          *why = "label " + std::to_string(label) + " differs at frame " + std::to_string(t);
          return false;
        }
      }
    }
    if (found != 1) {
      *why = "label " + std::to_string(label) + " has " + std::to_string(found) + " instances";
      return false;
    }
  }
  if (static_cast<int>(tracks.instances.size()) != expected_instances) {
    *why = "instance count " + std::to_string(tracks.instances.size()) + " != " + std::to_string(expected_instances);
    return false;
  }
  return true;
}

/// Rotation angle of pair k recomputed from the axis layout.
inline double oracle_angle(const rope::RopeConfig& c, const rope::RopeIndex& p, int k) {
  const int t_pairs = c.temporal_dim / 2, h_pairs = c.height_dim / 2;
  if (k < t_pairs) return p.l / std::pow(c.theta, 2.0 * k / c.temporal_dim);
  if (k < t_pairs + h_pairs) return p.i / std::pow(c.theta, 2.0 * (k - t_pairs) / c.height_dim);
  return p.j / std::pow(c.theta, 2.0 * (k - t_pairs - h_pairs) / c.width_dim);
}

inline Eigen::VectorXd oracle_rotate(const Eigen::VectorXd& v, const rope::RopeConfig& c, const rope::RopeIndex& p) {
  Eigen::VectorXd out(v.size());
  for (int k = 0; k < c.head_dim / 2; ++k) {
    const double a = oracle_angle(c, p, k);
    out(2 * k) = std::cos(a) * v(2 * k) - std::sin(a) * v(2 * k + 1);
    out(2 * k + 1) = std::sin(a) * v(2 * k) + std::cos(a) * v(2 * k + 1);
  }
  return out;
}

struct RopeErrors {
  double norm = 0.0;      // max | |R v| - |v| |
  double relative = 0.0;  // max |<R(p)q, R(p')k> - <q, R(p'-p)k>|
  double oracle = 0.0;    // max |apply_rope - oracle_rotate|
};

inline RopeErrors rope_property_errors(const rope::RopeConfig& c, int tuples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pos(-40, 40);
  RopeErrors e;
  for (int n = 0; n < tuples; ++n) {
    Eigen::VectorXd q(c.head_dim), k(c.head_dim);
    for (int d = 0; d < c.head_dim; ++d) q(d) = normal(rng), k(d) = normal(rng);
    const rope::RopeIndex p{pos(rng), pos(rng), pos(rng)}, pp{pos(rng), pos(rng), pos(rng)};
    const Eigen::VectorXd rq = rope::apply_rope<double>(q, p, c), rk = rope::apply_rope<double>(k, pp, c);
    e.norm = std::max(e.norm, std::abs(rq.norm() - q.norm()));
    const rope::RopeIndex delta{pp.l - p.l, pp.i - p.i, pp.j - p.j};
    e.relative = std::max(e.relative, std::abs(rq.dot(rk) - q.dot(rope::apply_rope<double>(k, delta, c))));
    e.oracle = std::max(e.oracle, (rq - oracle_rotate(q, c, p)).cwiseAbs().maxCoeff());
  }
  return e;
}

/// Per-cell label histogram, argmax with the lowest label on ties.
inline LabelImage histogram_majority(const LabelImage& ids, int cell) {
  LabelImage out(ids.rows() / cell, ids.cols() / cell);
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      std::map<int, int> hist;
      for (int y = 0; y < cell; ++y)
        for (int x = 0; x < cell; ++x) ++hist[ids(r * cell + y, c * cell + x)];
      int best = 0, count = -1;
      for (const auto& [label, n] : hist)
        if (n > count) best = label, count = n;
      out(r, c) = best;
    }
  return out;
}

/// Random ids in 1..R; every other cell is split evenly between two labels.
inline LabelImage random_ids_with_ties(std::mt19937_64& rng, int rows, int cols, int cell, int R) {
  LabelImage ids(rows * cell, cols * cell);
  std::uniform_int_distribution<int> pick(1, R);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const bool tie = R > 1 && (r + c) % 2 == 0;
      const int a = pick(rng);
      int b = pick(rng);
      while (tie && b == a) b = pick(rng);
      std::vector<int> cells(std::size_t(cell * cell));
      for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = tie ? (k < cells.size() / 2 ? a : b) : pick(rng);
      std::shuffle(cells.begin(), cells.end(), rng);
      for (int y = 0; y < cell; ++y)
        for (int x = 0; x < cell; ++x) ids(r * cell + y, c * cell + x) = cells[std::size_t(y * cell + x)];
    }
  return ids;
}

/// Gate entry written directly from the mode definitions.
inline bool oracle_gate(correspond::GateMode mode, const tokens::Token& q, const tokens::Token& k) {
  using tokens::Modality;
  switch (mode) {
    case correspond::GateMode::full: return true;
    case correspond::GateMode::inter_ref:
      return !(q.modality == Modality::ref && k.modality == Modality::ref && q.rho != k.rho);
    case correspond::GateMode::correspondence:
      return q.modality == Modality::text || k.modality != Modality::ref || k.rho == q.rho;
  }
  return true;
}

struct GradCheck {
  std::size_t checked = 0;
  std::size_t within_tight = 0;  // relative error < 1e-4
  double worst = 0.0;
};

inline constexpr double kGradFloor = 1e-7;

/// Analytic gradients of the noise loss against central differences of every
/// parameter of a double-precision model.
inline GradCheck gradient_check(const denoiser::ModelConfig& config, std::uint64_t seed, double step = 1e-5) {
  std::mt19937_64 rng(seed);
  auto model = denoiser::DenoiserModel<double>(config, seed);
  // Perturb the near-zero initializations so every path carries gradient.
  std::normal_distribution<double> normal(0.0, 1.0);
  model.params().visit([&](const std::string&, denoiser::Matrix<double>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 0.1 * normal(rng);
  });
  denoiser::TrainingExample<double> ex;
  ex.seq = random_sequence<double>(rng, 2, 2, 2, 2, config.patch_dim, 2);
  ex.clean = ex.seq.target_features();
  ex.gate = correspond::build_gate(ex.seq, correspond::GateMode::correspondence);
  const auto schedule = denoiser::NoiseSchedule::linear(100);
  const int n = 37;
  denoiser::Matrix<double> eps(ex.clean.rows(), ex.clean.cols());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(rng);

  auto grads = denoiser::ModelParams<double>::zeros(config);
  denoiser::noise_loss(model, ex, schedule, n, eps, &grads);
  std::vector<const denoiser::Matrix<double>*> g;
  grads.visit([&](const std::string&, const denoiser::Matrix<double>& m) { g.push_back(&m); });

  GradCheck out;
  std::size_t k = 0;
  model.params().visit([&](const std::string&, denoiser::Matrix<double>& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double keep = p.data()[i];
      p.data()[i] = keep + step;
      const double up = denoiser::noise_loss<double>(model, ex, schedule, n, eps, nullptr);
      p.data()[i] = keep - step;
      const double down = denoiser::noise_loss<double>(model, ex, schedule, n, eps, nullptr);
      p.data()[i] = keep;
      const double numeric = (up - down) / (2 * step);
      const double analytic = g[k]->data()[i];
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
      ++out.checked;
      if (rel < 1e-4) ++out.within_tight;
      out.worst = std::max(out.worst, rel);
    }
    ++k;
  });
  return out;
}

/// Attention computed per query row on a copy holding only permitted keys.
template <typename Scalar>
denoiser::Matrix<double> deletion_oracle(const denoiser::Matrix<Scalar>& q, const denoiser::Matrix<Scalar>& k,
                                         const denoiser::Matrix<Scalar>& v, const correspond::AttentionGate& gate) {
  const double scale = 1.0 / std::sqrt(double(q.cols()));
  denoiser::Matrix<double> out = denoiser::Matrix<double>::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < k.rows(); ++j)
      if (gate.allowed(i, j)) keep.push_back(j);
    denoiser::Matrix<double> kk(Eigen::Index(keep.size()), k.cols()), vv(Eigen::Index(keep.size()), v.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) {
      kk.row(Eigen::Index(r)) = k.row(keep[r]).template cast<double>();
      vv.row(Eigen::Index(r)) = v.row(keep[r]).template cast<double>();
    }
    Eigen::VectorXd logits = kk * q.row(i).template cast<double>().transpose() * scale;
    Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
    w /= w.sum();
    out.row(i) = w.transpose() * vv;
  }
  return out;
}

struct AttentionCheck {
  int sequences = 0;
  std::size_t disallowed = 0;          // gate-disallowed (query, key) pairs seen
  std::size_t nonzero_disallowed = 0;  // of those, weights that are not exactly 0.0
  double max_abs_vs_oracle = 0.0;
};

/// Random correspondence-gated sequences (R in {2,3,4}, random identities)
/// through masked_attention, against the key-deletion oracle.
template <typename Scalar>
AttentionCheck attention_check(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  AttentionCheck out;
  for (int t = 0; t < trials; ++t) {
    const int R = 2 + int(rng() % 3), f = 1 + int(rng() % 3), rows = 2 + int(rng() % 2), cols = 2 + int(rng() % 2);
    const auto seq = random_sequence<Scalar>(rng, R, f, rows, cols, 4, int(rng() % 3));
    const auto gate = correspond::build_gate(seq, correspond::GateMode::correspondence);
    const int n = seq.size(), dh = 8;
    auto rand = [&](int r, int c) {
      denoiser::Matrix<Scalar> m(r, c);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(2.0 * normal(rng));
      return m;
    };
    const auto q = rand(n, dh), k = rand(n, dh), v = rand(n, dh);
    denoiser::Matrix<Scalar> w;
    const auto o = denoiser::masked_attention<Scalar>(q, k, v, gate, &w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!gate.allowed(i, j)) {
          ++out.disallowed;
          if (w(i, j) != Scalar(0)) ++out.nonzero_disallowed;
        }
    const double err = (o.template cast<double>() - deletion_oracle<Scalar>(q, k, v, gate)).cwiseAbs().maxCoeff();
    out.max_abs_vs_oracle = std::max(out.max_abs_vs_oracle, err);
    ++out.sequences;
  }
  return out;
}

struct InvarianceCheck {
  std::vector<std::int64_t> parameter_counts;  // one per (R, f) forward pass
  std::vector<int> lengths;
  double affine_residual = 0.0;  // max |len(R) - (a_f + b_f R)| over R, f
  bool shapes_ok = true;
};

/// One model, forward passes for R in {1,2,4,8} and f in {1,4,8}.
inline InvarianceCheck parameter_invariance(const denoiser::ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  denoiser::DenoiserModel<float> model(config, seed);
  InvarianceCheck out;
  for (int f : {1, 4, 8}) {
    std::map<int, int> len;
    for (int R : {1, 2, 4, 8}) {
      const auto seq = random_sequence<float>(rng, R, f, 2, 2, config.patch_dim);
      const auto gate = correspond::build_gate(seq, correspond::GateMode::correspondence);
      const auto eps = model.forward(seq, gate, 10);
      out.shapes_ok = out.shapes_ok && eps.rows() == f * 4 && eps.cols() == config.patch_dim && eps.allFinite();
      out.parameter_counts.push_back(model.parameter_count());
      out.lengths.push_back(seq.size());
      len[R] = seq.size();
    }
    const double slope = len[2] - len[1], icpt = len[1] - slope;
    for (auto [R, n] : len) out.affine_residual = std::max(out.affine_residual, std::abs(n - (icpt + slope * R)));
  }
  return out;
}

inline RgbImage random_image(std::mt19937_64& rng, int h, int w) {
  RgbImage img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<std::uint8_t>(rng() % 256);
  return img;
}

/// Pixel-loop PSNR over a whole video.
inline double oracle_psnr(const Video& a, const Video& b) {
  double se = 0.0, n = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (int y = 0; y < a[t].height(); ++y)
      for (int x = 0; x < a[t].width(); ++x)
        for (int c = 0; c < 3; ++c) {
          const double d = double(a[t].at(y, x, c)) - double(b[t].at(y, x, c));
          se += d * d;
          n += 1.0;
        }
  if (se == 0.0) return metrics::kPsnrCap;
  return 20.0 * std::log10(255.0 / std::sqrt(se / n));
}

/// Two-pass per-window SSIM (means first, then centered moments).
inline double oracle_ssim(const RgbImage& a, const RgbImage& b, int window = 8) {
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < 3; ++c)
    for (int y0 = 0; y0 + window <= a.height(); y0 += window)
      for (int x0 = 0; x0 + window <= a.width(); x0 += window) {
        std::vector<double> va, vb;
        for (int y = y0; y < y0 + window; ++y)
          for (int x = x0; x < x0 + window; ++x) {
            va.push_back(a.at(y, x, c));
            vb.push_back(b.at(y, x, c));
          }
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < va.size(); ++i) ma += va[i], mb += vb[i];
        ma /= double(va.size());
        mb /= double(vb.size());
        double sa = 0, sb = 0, sab = 0;
        for (std::size_t i = 0; i < va.size(); ++i) {
          sa += (va[i] - ma) * (va[i] - ma);
          sb += (vb[i] - mb) * (vb[i] - mb);
          sab += (va[i] - ma) * (vb[i] - mb);
        }
        sa /= double(va.size());
        sb /= double(va.size());
        sab /= double(va.size());
        total += (2 * ma * mb + c1) * (2 * sab + c2) / ((ma * ma + mb * mb + c1) * (sa + sb + c2));
        ++count;
      }
  return total / count;
}

/// Per-label IoU by counting, averaged over labels present in either frame.
/// Returns -1 when neither frame has a label.
inline double oracle_iou(const LabelImage& a, const LabelImage& b) {
  const int top = std::max(a.maxCoeff(), b.maxCoeff());
  double sum = 0.0;
  int labels = 0;
  for (int l = 1; l <= top; ++l) {
    int inter = 0, uni = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const bool x = a.data()[i] == l, y = b.data()[i] == l;
      inter += x && y;
      uni += x || y;
    }
    if (uni == 0) continue;
    sum += double(inter) / uni;
    ++labels;
  }
  return labels ? sum / labels : -1.0;
}

struct MetricCheck {
  int trials = 0;
  double psnr = 0.0;  // max |metric - oracle|
  double ssim = 0.0;
  double iou = 0.0;
};

/// Random videos and label maps against the naive oracles.
inline MetricCheck metric_check(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MetricCheck out;
  for (int t = 0; t < trials; ++t) {
    const int h = 8 + int(rng() % 17), w = 8 + int(rng() % 17), frames = 1 + int(rng() % 3);
    Video a, b;
    LabelVideo la, lb;
    for (int k = 0; k < frames; ++k) {
      a.push_back(random_image(rng, h, w));
      b.push_back(t % 5 == 0 ? a.back() : random_image(rng, h, w));
      if (t % 3 == 0) {
        // Small perturbations keep the PSNR in a realistic range.
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) b.back().at(y, x, 0) = static_cast<std::uint8_t>(std::min(255, a.back().at(y, x, 0) + int(rng() % 4)));
      }
      const int labels = 1 + int(rng() % 4);
      LabelImage x(h, w), y(h, w);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = int(rng() % (labels + 1));
        y.data()[i] = rng() % 4 == 0 ? int(rng() % (labels + 1)) : x.data()[i];
      }
      la.push_back(x);
      lb.push_back(y);
    }
    out.psnr = std::max(out.psnr, std::abs(metrics::psnr(a, b) - oracle_psnr(a, b)));
    double ss = 0.0, is = 0.0;
    int frames_with_labels = 0;
    for (int k = 0; k < frames; ++k) {
      ss += oracle_ssim(a[std::size_t(k)], b[std::size_t(k)]);
      const double v = oracle_iou(la[std::size_t(k)], lb[std::size_t(k)]);
      if (v >= 0) is += v, ++frames_with_labels;
    }
    out.ssim = std::max(out.ssim, std::abs(metrics::ssim(a, b) - ss / frames));
    const double iou = frames_with_labels ? is / frames_with_labels : 1.0;
    out.iou = std::max(out.iou, std::abs(metrics::mask_iou(la, lb) - iou));
    ++out.trials;
  }
  return out;
}


/// Relative paths whose bytes differ between two trees (or exist in one only).
inline std::vector<std::string> tree_differences(const std::filesystem::path& a, const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  auto files = [](const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      out[fs::relative(e.path(), root).generic_string()] =
          std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return out;
  };
  const auto fa = files(a), fb = files(b);
  std::vector<std::string> diff;
  for (const auto& [k, v] : fa)
    if (!fb.count(k) || fb.at(k) != v) diff.push_back(k);
  for (const auto& [k, v] : fb)
    if (!fa.count(k)) diff.push_back(k);
  return diff;
}

/// A run small enough for unit tests: 32x32 canvas, 12 frames, one-block model.
inline RunConfig tiny_run_config(std::uint64_t seed) {
  RunConfig c;
  c.seed = seed;
  c.synth.num_frames = 12;
  c.curate.f = 4;
  c.curate.g = 4;
  c.model.dim = 16;
  c.model.blocks = 1;
  c.model.heads = 2;
  c.schedule.steps = 10;
  c.schedule.sample_steps = 3;
  c.train.stage_steps = {2, 2, 2};
  c.train.log_every = 0;
  c.ablate.train_clips = 3;
  c.ablate.heldout_clips = 2;
  return c;
}

/// Multi-reference rejection decided from ground-truth masks alone: a clip is
/// rejected when no subject is visible on every supervision frame with a
/// source-window peak area above the threshold.
inline bool oracle_rejects(const synth::Clip& clip, int f, int g, double area_threshold) {
  const int L = int(clip.frames.size());
  const int src_last = L - g - f;  // 1-based, inclusive
  const double min_area = area_threshold * double(clip.gt_masks[0].size());
  const int top = [&] {
    int m = 0;
    for (const auto& gm : clip.gt_masks) m = std::max(m, int(gm.maxCoeff()));
    return m;
  }();
  for (int label = 1; label <= top; ++label) {
    auto area = [&](int t) { return double((clip.gt_masks[std::size_t(t)] == label).count()); };
    bool visible = true;
    for (int t = L - f; t < L; ++t) visible = visible && area(t) > 0;
    double peak = 0.0;
    for (int t = 0; t < src_last; ++t) peak = std::max(peak, area(t));
    if (visible && peak > min_area) return false;
  }
  return true;
}

inline denoiser::ModelConfig tiny_model_config() {
  denoiser::ModelConfig c;
  c.dim = 16;
  c.blocks = 2;
  c.heads = 2;
  c.patch_dim = 6;
  c.text_vocab = 8;
  c.max_text_tokens = 4;
  return c;
}

}  // namespace tc_test
