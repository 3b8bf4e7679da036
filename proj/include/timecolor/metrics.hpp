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

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace timecolor::metrics {

/// Reported for MSE = 0.
inline constexpr double kPsnrCap = 100.0;

double psnr(const RgbImage& a, const RgbImage& b);
/// Pooled over the whole video: 20 log10(255 / sqrt(MSE)).
double psnr(const Video& a, const Video& b);

struct SsimOptions {
  int window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over non-overlapping windows of each channel (population
/// statistics, partial edge windows dropped).
double ssim(const RgbImage& a, const RgbImage& b, const SsimOptions& options = {});
double ssim(const Video& a, const Video& b, const SsimOptions& options = {});

/// Per-label IoU over labels > 0 present in either input, averaged per frame,
/// then over frames that have any label.
double mask_iou(const LabelImage& a, const LabelImage& b);
double mask_iou(const LabelVideo& a, const LabelVideo& b);

using Color = std::array<double, 3>;

/// Mean RGB of the masked pixels (all pixels when the mask is empty).
Color mean_color(const RgbImage& image, const BinaryMask& mask);

struct SubjectLeakage {
  int label = 0;          // gt label of the subject
  int assigned_ref = 0;   // 0-based index into the dominant colors
  double score = 0.0;     // fraction of frames nearer another reference
  int frames = 0;         // frames where the subject was visible
};

struct LeakageResult {
  std::vector<SubjectLeakage> subjects;
  double mean = 0.0;
};

/// For each subject (label -> assigned reference), counts frames where the
/// mean generated color inside its mask is strictly nearer another
/// reference's dominant color. Frames with an empty mask are skipped.
LeakageResult leakage(const Video& generated, const LabelVideo& gt_masks, const std::vector<Color>& dominant_colors,
                      const std::vector<std::pair<int, int>>& subject_to_ref);

struct ClipReport {
  std::string clip;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> mask_iou;
  std::vector<SubjectLeakage> leakage;
  double mean_leakage = 0.0;
};

struct EvalReport {
  std::string mode;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  std::array<int, 2> resolution{0, 0};
  std::vector<ClipReport> clips;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> mask_iou;
  double leakage = 0.0;

  /// Fills the aggregate fields from the per-clip rows.
  void aggregate();
};

nlohmann::json to_json(const EvalReport& report, bool include_runtime = true);

}  // namespace timecolor::metrics
