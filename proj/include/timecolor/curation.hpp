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
#include "timecolor/synthcartoon.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

// Multi-reference dataset curation: subject discovery over keyframes, mask
// propagation, reference sampling with a temporal gap, filtering and
// augmentation. Detection and tracking sit behind small interfaces; the
// ground-truth implementations read the synthetic masks.
namespace timecolor::curation {

struct SubjectDescriptor {
  std::string name;
  std::int32_t label_hint = 0;  // ground-truth label for synthetic oracles
};

struct Detection {
  SubjectDescriptor descriptor;
  BinaryMask mask;
};

struct OracleError : Error {
  using Error::Error;
};

class DetectorOracle {
 public:
  virtual ~DetectorOracle() = default;
  virtual std::vector<SubjectDescriptor> enumerate_subjects(const synth::Clip& clip) = 0;
  /// Seed detections on one keyframe; masks are mutually exclusive.
  virtual std::vector<Detection> detect(const synth::Clip& clip, int keyframe,
                                        const std::vector<SubjectDescriptor>& subjects) = 0;
};

class TrackerOracle {
 public:
  virtual ~TrackerOracle() = default;
  /// Returns, per seed, masks for frames [start, end]. Element 0 equals the seed.
  virtual std::vector<std::vector<BinaryMask>> propagate(const std::vector<BinaryMask>& seeds,
                                                         const synth::Clip& clip, int start, int end) = 0;
};

/// Reads gt_masks. Subjects absent at a keyframe are not detected.
class GroundTruthDetector : public DetectorOracle {
 public:
  struct Options {
    int morph_radius = 0;            // >0: dilate (even labels) / erode (odd labels) detections
    std::set<int> failing_keyframes;  // detect() throws OracleError on these
  };

  GroundTruthDetector() = default;
  explicit GroundTruthDetector(Options options) : options_(std::move(options)) {}

  std::vector<SubjectDescriptor> enumerate_subjects(const synth::Clip& clip) override;
  std::vector<Detection> detect(const synth::Clip& clip, int keyframe,
                                const std::vector<SubjectDescriptor>& subjects) override;

 private:
  Options options_;
};

/// Follows the ground-truth label with the largest overlap with each seed.
class GroundTruthTracker : public TrackerOracle {
 public:
  std::vector<std::vector<BinaryMask>> propagate(const std::vector<BinaryMask>& seeds, const synth::Clip& clip,
                                                 int start, int end) override;
};

struct Instance {
  int id = 0;  // 1-based, in discovery order
  SubjectDescriptor descriptor;
  int first_pass = 0;   // 1-based pass index
  int first_frame = 0;  // keyframe of discovery; masks are defined from here on
  std::vector<BinaryMask> masks;  // one per clip frame; empty (all false) before first_frame

  bool covers(int frame) const { return frame >= first_frame; }
};

struct TrackSet {
  int num_frames = 0;
  int height = 0;
  int width = 0;
  std::vector<Instance> instances;
  std::vector<std::size_t> instances_after_pass;  // |M^i| per pass
  std::vector<std::string> warnings;

  /// Instance-ID label image (0 = none) for one frame; lowest ID wins overlaps.
  LabelImage labels(int frame) const;
};

struct RefineOptions {
  int keyframe_stride = 5;
  double novelty_iou = 0.5;  // detections with IoU >= this against a known instance are "seen"
};

TrackSet iterative_refine(const synth::Clip& clip, DetectorOracle& detector, TrackerOracle& tracker,
                          const RefineOptions& options = {});

TrackSet enforce_exclusivity(TrackSet tracks);

// ---------------------------------------------------------------------------
// Reference sampling

enum class ReferenceMode { starting_frame, arbitrary_frame, multi_reference };

std::string to_string(ReferenceMode mode);
ReferenceMode parse_reference_mode(const std::string& s);

struct AugmentOptions {
  double flip_prob = 0.0;
  double center_crop_prob = 0.0;
  double resize_prob = 0.0;
  double min_crop_fraction = 0.75;
  double min_scale = 0.5;
};

struct AugmentResult {
  RgbImage image;
  BinaryMask mask;
  std::vector<std::string> log;
};

/// Geometric-only augmentation (flip, center-crop, down/up resize); colors are
/// only ever copied, never mixed.
AugmentResult augment_reference(const RgbImage& image, const BinaryMask& mask, const AugmentOptions& options,
                                std::uint64_t seed);
RgbImage augment_reference(const RgbImage& image, const AugmentOptions& options, std::uint64_t seed);

struct Reference {
  int index = 0;                    // 1..R
  RgbImage image;                   // frame-sized
  BinaryMask subject_mask;          // pixels that carry the referenced content
  std::optional<int> instance_id;   // nullopt for the background reference
  int source_frame = 0;             // 0-based clip frame
  std::vector<std::string> augmentations;

  bool is_background() const { return !instance_id.has_value(); }
};

/// 1-based inclusive frame ranges, matching the curation manifest.
struct FrameRange {
  int first = 1;
  int last = 0;
  int size() const { return last - first + 1; }
};

FrameRange source_window(int num_frames, int f, int g);
FrameRange supervision_window(int num_frames, int f);

struct DroppedInstance {
  int instance_id = 0;
  std::string reason;
};

struct CuratedSample {
  ReferenceMode mode = ReferenceMode::multi_reference;
  int f = 0;
  int g = 0;
  FrameRange source;
  FrameRange supervision;
  std::vector<Reference> references;
  std::vector<LabelImage> correspondence;  // per supervision frame, values in 1..R
  bool background_reference = true;
  std::vector<DroppedInstance> dropped;

  int num_references() const { return static_cast<int>(references.size()); }
};

struct Rejection {
  std::string reason;
  std::vector<DroppedInstance> dropped;
};

using SampleOutcome = std::variant<CuratedSample, Rejection>;

struct SampleOptions {
  int f = 8;
  int g = 8;
  ReferenceMode mode = ReferenceMode::multi_reference;
  double area_threshold = 0.01;  // fraction of canvas area
  bool background_reference = true;
  Rgb reference_fill{255, 255, 255};  // object crops outside the instance mask
  AugmentOptions augment;
};

/// Throws Error when L < f + g + 1. A multi-reference sample with no surviving
/// instance comes back as a Rejection.
SampleOutcome sample_references(const synth::Clip& clip, const TrackSet& tracks, const SampleOptions& options,
                                std::uint64_t seed, Rgb background_fill);

/// Same subject rendered on its own under a different trajectory seed.
Reference cross_clip_reference(const synth::SceneSpec& spec, int subject_index, std::uint64_t seed,
                               Rgb fill = {255, 255, 255});

// ---------------------------------------------------------------------------
// Mask perturbation

BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask erode(const BinaryMask& mask, int radius);

struct MorphResult {
  LabelVideo masks;
  double mean_iou = 1.0;
};

/// Each subject mask of each frame is dilated or eroded (coin flip) by a
/// radius drawn uniformly from [lo, hi]; overlaps go to the lowest label.
MorphResult morph_masks(const LabelVideo& masks, int lo, int hi, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dataset layout

struct CurationOptions {
  RefineOptions refine;
  SampleOptions sample;
};

/// dataset/<clip_id>/ = synth layout + refs/ref_%02d.png (+ _mask), refs/background.png,
/// corr/%04d.png and sample.json.
void write_sample(const std::filesystem::path& dir, const synth::SceneSpec& spec, const synth::Clip& clip,
                  const SampleOutcome& outcome, const TrackSet& tracks);

struct LoadedSample {
  synth::SceneSpec spec;
  synth::Clip clip;
  CuratedSample sample;
};

/// Throws Error for rejected samples.
LoadedSample read_sample(const std::filesystem::path& dir);
bool is_rejected(const std::filesystem::path& dir);

SampleOutcome curate_clip(const synth::Clip& clip, const CurationOptions& options, std::uint64_t seed,
                          Rgb background_fill, TrackSet* tracks_out = nullptr);

}  // namespace timecolor::curation
