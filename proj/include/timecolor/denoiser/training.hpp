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
#include "timecolor/denoiser/conditioning.hpp"
#include "timecolor/denoiser/model.hpp"
#include "timecolor/denoiser/schedule.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace timecolor::denoiser {

struct TrainingDiverged : Error {
  using Error::Error;
};

/// One encoded clip sample: conditioning sequence with clean target rows, the
/// clean target latents and the gate for the chosen attention mode.
template <typename Scalar>
struct TrainingExample {
  tokens::TokenSequence<Scalar> seq;
  Matrix<Scalar> clean;  // n_target x patch_dim
  correspond::AttentionGate gate;
};

template <typename Scalar>
TrainingExample<Scalar> make_example(const ConditioningBundle& bundle, const std::vector<RgbImage>& targets,
                                     const tokens::LatentCodec& codec, const EncodeOptions& options) {
  TrainingExample<Scalar> ex;
  ex.seq = encode_bundle<Scalar>(bundle, codec, options, &targets);
  ex.clean = ex.seq.target_features();
  ex.gate = correspond::build_gate(ex.seq, gate_mode(options.mode));
  return ex;
}

/// Noises the target rows only: z_n = sqrt(abar_n) z_0 + sqrt(1 - abar_n) eps.
/// Sketch, reference and mask rows stay untouched.
template <typename Scalar>
tokens::TokenSequence<Scalar> noised_sequence(const TrainingExample<Scalar>& ex, const NoiseSchedule& schedule, int n,
                                              const Matrix<Scalar>& eps) {
  const auto ab = schedule.alpha_bar.at(std::size_t(n));
  tokens::TokenSequence<Scalar> seq = ex.seq;
  seq.set_target_features(ex.clean * static_cast<Scalar>(std::sqrt(ab)) + eps * static_cast<Scalar>(std::sqrt(1.0 - ab)));
  return seq;
}

/// Mean squared noise-prediction error over TARGET patches for a fixed (n, eps),
/// accumulating parameter gradients when `grads` is given.
template <typename Scalar>
Scalar noise_loss(const DenoiserModel<Scalar>& model, const TrainingExample<Scalar>& ex, const NoiseSchedule& schedule,
                  int n, const Matrix<Scalar>& eps, ModelParams<Scalar>* grads, Scalar weight = Scalar(1)) {
  if (eps.rows() != ex.clean.rows() || eps.cols() != ex.clean.cols()) throw ShapeError("noise_loss: eps shape mismatch");
  const auto seq = noised_sequence(ex, schedule, n, eps);
  ForwardCache<Scalar> cache;
  const Matrix<Scalar> pred = model.forward(seq, ex.gate, n, grads ? &cache : nullptr);
  const Matrix<Scalar> diff = pred - eps;
  const auto count = static_cast<Scalar>(diff.size());
  const Scalar loss = diff.squaredNorm() / count;
  if (grads) model.backward(cache, diff * (Scalar(2) * weight / count), *grads);
  return loss;
}

template <typename Scalar>
double parameter_norm(const ModelParams<Scalar>& p) {
  double s = 0.0;
  p.visit([&](const std::string&, const Matrix<Scalar>& m) { s += static_cast<double>(m.squaredNorm()); });
  return std::sqrt(s);
}

struct StepResult {
  double loss = 0.0;
  int n = 0;
};

/// Draws n ~ U{1..N} and eps ~ N(0, I) over target latents, then returns the
/// loss with gradients accumulated (scaled by `weight`). Throws
/// TrainingDiverged on a non-finite loss.
template <typename Scalar>
StepResult training_step(const DenoiserModel<Scalar>& model, const TrainingExample<Scalar>& ex,
                         const NoiseSchedule& schedule, std::mt19937_64& rng, ModelParams<Scalar>& grads,
                         Scalar weight = Scalar(1), int iteration = 0) {
  const int n = std::uniform_int_distribution<int>(1, schedule.steps)(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> eps(ex.clean.rows(), ex.clean.cols());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = static_cast<Scalar>(normal(rng));
  const Scalar loss = noise_loss(model, ex, schedule, n, eps, &grads, weight);
  if (!std::isfinite(static_cast<double>(loss))) {
    std::ostringstream msg;
    msg << "non-finite loss at iteration " << iteration << " (n=" << n
        << ", parameter norm=" << parameter_norm(model.params()) << ", gradient norm=" << parameter_norm(grads) << ")";
    throw TrainingDiverged(msg.str());
  }
  return {static_cast<double>(loss), n};
}

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 1.0;  // global-norm clip; <= 0 disables
};

template <typename Scalar>
class Adam {
 public:
  Adam(const ModelConfig& config, AdamConfig opts)
      : opts_(opts), m_(ModelParams<Scalar>::zeros(config)), v_(ModelParams<Scalar>::zeros(config)) {}

  void step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads) {
    ++t_;
    double scale = 1.0;
    if (opts_.grad_clip > 0.0) {
      const double norm = parameter_norm(grads);
      if (norm > opts_.grad_clip) scale = opts_.grad_clip / norm;
    }
    const double bc1 = 1.0 - std::pow(opts_.beta1, t_), bc2 = 1.0 - std::pow(opts_.beta2, t_);
    std::vector<const Matrix<Scalar>*> g;
    grads.visit([&](const std::string&, const Matrix<Scalar>& m) { g.push_back(&m); });
    std::vector<Matrix<Scalar>*> m, v;
    m_.visit([&](const std::string&, Matrix<Scalar>& x) { m.push_back(&x); });
    v_.visit([&](const std::string&, Matrix<Scalar>& x) { v.push_back(&x); });
    std::size_t k = 0;
    const auto b1 = static_cast<Scalar>(opts_.beta1), b2 = static_cast<Scalar>(opts_.beta2);
    const auto lr = static_cast<Scalar>(opts_.lr / bc1);
    const auto inv_bc2 = static_cast<Scalar>(1.0 / bc2), eps = static_cast<Scalar>(opts_.eps);
    const auto s = static_cast<Scalar>(scale);
    params.visit([&](const std::string&, Matrix<Scalar>& p) {
      auto& mk = *m[k];
      auto& vk = *v[k];
      const auto gk = (*g[k]).array() * s;
      mk.array() = b1 * mk.array() + (Scalar(1) - b1) * gk;
      vk.array() = b2 * vk.array() + (Scalar(1) - b2) * gk.square();
      p.array() -= lr * mk.array() / ((vk.array() * inv_bc2).sqrt() + eps);
      ++k;
    });
  }

  int iterations() const { return t_; }

 private:
  AdamConfig opts_;
  ModelParams<Scalar> m_, v_;
  int t_ = 0;
};

}  // namespace timecolor::denoiser
