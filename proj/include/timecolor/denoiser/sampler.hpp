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

#include "timecolor/denoiser/conditioning.hpp"
#include "timecolor/denoiser/model.hpp"
#include "timecolor/denoiser/schedule.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace timecolor::denoiser {

enum class SamplerKind { ancestral, deterministic };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler(const std::string& s);

struct SamplerOptions {
  SamplerKind kind = SamplerKind::deterministic;
  int steps = 0;  // evaluated timesteps; 0 = every step of the schedule
  std::uint64_t seed = 0;
  /// Clamp each x0 estimate to the latent range [-1, 1] (the noise estimate
  /// is then recomputed from the clamped x0).
  bool clip_x0 = true;
};

/// Evenly spaced timesteps N = tau_0 > tau_1 > ... >= 1.
std::vector<int> sampling_timesteps(int schedule_steps, int requested);

/// Denoises the TARGET rows of `seq` from pure noise; conditioning rows are fed
/// clean at every step. Returns the final clean target latents.
template <typename Scalar>
Matrix<Scalar> sample_latents(const DenoiserModel<Scalar>& model, tokens::TokenSequence<Scalar> seq,
                              const correspond::AttentionGate& gate, const NoiseSchedule& schedule,
                              const SamplerOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noise = [&] {
    Matrix<Scalar> z(seq.n_target, seq.features.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = static_cast<Scalar>(normal(rng));
    return z;
  };
  Matrix<Scalar> z = noise();
  const auto taus = sampling_timesteps(schedule.steps, options.steps);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const int n = taus[k];
    const int prev = k + 1 < taus.size() ? taus[k + 1] : 0;
    seq.set_target_features(z);
    const Matrix<Scalar> eps = model.forward(seq, gate, n);
    const double ab = schedule.alpha_bar[std::size_t(n)], ab_prev = schedule.alpha_bar[std::size_t(prev)];
    Matrix<Scalar> x0 = (z - eps * static_cast<Scalar>(std::sqrt(1.0 - ab))) / static_cast<Scalar>(std::sqrt(ab));
    Matrix<Scalar> e = eps;
    if (options.clip_x0) {
      x0 = x0.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
      if (ab < 1.0) e = (z - x0 * static_cast<Scalar>(std::sqrt(ab))) / static_cast<Scalar>(std::sqrt(1.0 - ab));
    }
    if (options.kind == SamplerKind::deterministic) {
      z = x0 * static_cast<Scalar>(std::sqrt(ab_prev)) + e * static_cast<Scalar>(std::sqrt(1.0 - ab_prev));
    } else {
      // Posterior q(z_prev | z_n, x0) over the (possibly strided) step.
      const double a_step = ab / ab_prev, b_step = 1.0 - a_step;
      const double c0 = std::sqrt(ab_prev) * b_step / (1.0 - ab);
      const double cz = std::sqrt(a_step) * (1.0 - ab_prev) / (1.0 - ab);
      z = x0 * static_cast<Scalar>(c0) + z * static_cast<Scalar>(cz);
      if (prev > 0) z += noise() * static_cast<Scalar>(std::sqrt((1.0 - ab_prev) / (1.0 - ab) * b_step));
    }
  }
  return z;
}

template <typename Scalar>
Video decode_targets(const Matrix<Scalar>& latents, const tokens::TokenSequence<Scalar>& seq, int patch,
                     const tokens::LatentCodec& codec) {
  Video out;
  const int g = seq.grid_size();
  const int channels = static_cast<int>(latents.cols()) / (patch * patch);
  for (int l = 0; l < seq.num_frames; ++l) {
    const Matrix<Scalar> rows = latents.middleRows(l * g, g);
    out.push_back(codec.decode(tokens::unpatchify<Scalar>(rows, seq.grid_rows, seq.grid_cols, patch, channels)
                                   .template cast<double>()));
  }
  return out;
}

/// Colorizes a bundle end to end: encode, sample, decode.
template <typename Scalar>
Video sample_video(const DenoiserModel<Scalar>& model, const ConditioningBundle& bundle, const tokens::LatentCodec& codec,
                   const EncodeOptions& encode, const NoiseSchedule& schedule, const SamplerOptions& options) {
  auto seq = encode_bundle<Scalar>(bundle, codec, encode);
  const auto gate = correspond::build_gate(seq, gate_mode(encode.mode));
  const auto z = sample_latents(model, seq, gate, schedule, options);
  return decode_targets(z, seq, encode.patch, codec);
}

}  // namespace timecolor::denoiser
