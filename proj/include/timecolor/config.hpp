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

#include "timecolor/denoiser/model.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace timecolor {

struct SynthConfig {
  int num_clips = 16;
  int num_frames = 20;
  int height = 32;
  int width = 32;
  int num_subjects = 2;
  double min_size = 6.0;
  double max_size = 9.0;
  double max_shift = 3.0;
};

struct CurateConfig {
  std::string mode = "multi";
  int f = 8;
  int g = 8;
  int h = 5;
  double area_threshold = 0.01;
  double novelty_iou = 0.5;
  bool background_reference = true;
  double flip_prob = 0.5;
  double center_crop_prob = 0.0;
  double resize_prob = 0.0;
};

struct CodecConfig {
  int stride = 4;
  int patch = 2;
};

struct ScheduleConfig {
  int steps = 100;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  double beta_scale = 1.0;  // <= 0: 1000 / steps
  std::string sampler = "deterministic";
  int sample_steps = 0;  // 0 = all schedule steps
  bool clip_x0 = true;
};

struct TrainConfig {
  std::string mode = "correspondence";
  std::array<int, 3> stage_steps{2000, 2000, 2000};  // starting, arbitrary, multi
  int batch_size = 1;
  double lr = 3e-4;
  double grad_clip = 1.0;
  int log_every = 200;
};

struct AblateConfig {
  std::vector<std::string> modes{"full", "inter_ref", "correspondence", "soft_mask"};
  int train_clips = 200;
  int heldout_clips = 20;
  int morph_lo = 1;
  int morph_hi = 1;
};

/// Single structured configuration document. Every field has a default, so
/// `{"seed": N}` is a complete config.
struct RunConfig {
  std::uint64_t seed = 0;
  SynthConfig synth;
  CurateConfig curate;
  CodecConfig codec;
  denoiser::ModelConfig model;
  ScheduleConfig schedule;
  TrainConfig train;
  AblateConfig ablate;

  /// Clip length 48, supervision window 17, gap 17, keyframe stride 5.
  void apply_paper_scale();
  /// Throws Error on inconsistent settings (e.g. L < f + g + 1).
  void validate() const;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthConfig, num_clips, num_frames, height, width, num_subjects,
                                                min_size, max_size, max_shift)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CurateConfig, mode, f, g, h, area_threshold, novelty_iou,
                                                background_reference, flip_prob, center_crop_prob, resize_prob)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CodecConfig, stride, patch)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScheduleConfig, steps, beta_start, beta_end, beta_scale, sampler, sample_steps, clip_x0)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, mode, stage_steps, batch_size, lr, grad_clip, log_every)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AblateConfig, modes, train_clips, heldout_clips, morph_lo, morph_hi)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, seed, synth, curate, codec, model, schedule, train, ablate)

RunConfig load_config(const std::filesystem::path& path);

/// Applies "a.b.c=value" overrides; the value is parsed as JSON when
/// possible, otherwise taken as a string. Unknown keys throw.
void apply_override(RunConfig& config, const std::string& assignment);

}  // namespace timecolor
