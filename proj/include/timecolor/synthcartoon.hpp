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

#include "timecolor/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Procedural cartoon clips: flat-filled moving shapes with exact instance masks
// and label-boundary sketches.
namespace timecolor::synth {

enum class Shape { circle, rectangle, triangle };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Linear: center(t) = origin + velocity * t.
/// Sinusoidal: center(t) = origin + amplitude * sin(2 pi t / period + phase).
struct Trajectory {
  enum class Kind { linear, sinusoidal };
  Kind kind = Kind::linear;
  Point origin;
  Point velocity;
  Point amplitude;
  double period = 8.0;
  double phase = 0.0;

  Point center(int frame) const;
};

struct SubjectSpec {
  std::string name;
  Shape shape = Shape::circle;
  Rgb fill{255, 0, 0};
  Trajectory path;
  double size = 6.0;       // radius / half-extent at frame 0, pixels
  double size_rate = 0.0;  // pixels per frame
  double aspect = 1.0;     // rectangle half-height / half-width
  int appear_frame = 0;
  std::optional<int> disappear_frame;

  double size_at(int frame) const { return size + size_rate * frame; }
  bool visible_at(int frame) const {
    return frame >= appear_frame && (!disappear_frame || frame < *disappear_frame);
  }
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int num_frames = 8;
  int height = 32;
  int width = 32;
  std::vector<SubjectSpec> subjects;
  Rgb background{230, 230, 230};
};

struct Clip {
  Video frames;
  LabelVideo gt_masks;              // 0 = background, k = subject k (1-based)
  std::vector<GrayImage> sketches;  // {0, 255}

  int num_frames() const { return static_cast<int>(frames.size()); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
  int width() const { return frames.empty() ? 0 : frames.front().width(); }
};

/// Throws Error when the scene breaks an invariant (frame count, subject count,
/// palette separation, appear/disappear ordering).
void validate(const SceneSpec& spec);

/// True when two fills differ by at least 64 in some channel.
bool palettes_separated(const Rgb& a, const Rgb& b);

bool covers(const SubjectSpec& subject, int frame, double px, double py);

Clip generate_clip(const SceneSpec& spec);

/// Edge map of a label image: a pixel is an edge when one of its 4-neighbors
/// carries a strictly smaller label, so every label boundary is traced by
/// exactly one line of pixels on the side of the higher label.
GrayImage render_sketch(const RgbImage& frame, const LabelImage& gt_mask);

struct SceneParams {
  int num_subjects = 2;
  int num_frames = 12;
  int height = 32;
  int width = 32;
  double min_size = 6.0;
  double max_size = 9.0;
  double max_shift = 3.0;  // total drift per clip, pixels
  std::vector<int> appear_frames;  // optional per-subject appear frame
};

/// Deterministic random scene: one vertical lane per subject, separated fills.
SceneSpec random_scene(std::uint64_t seed, const SceneParams& params);

void to_json(nlohmann::json& j, const SceneSpec& spec);
void from_json(const nlohmann::json& j, SceneSpec& spec);

/// Directory layout: frames/%04d.png, masks/%04d.png, sketches/%04d.png, clip.json.
void write_clip(const std::filesystem::path& dir, const SceneSpec& spec, const Clip& clip);
Clip read_clip(const std::filesystem::path& dir, SceneSpec* spec = nullptr);

std::string frame_name(int index);

}  // namespace timecolor::synth
