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

#include "timecolor/curation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace timecolor::curation {

namespace {

BinaryMask empty_mask(int h, int w) { return BinaryMask::Constant(h, w, false); }

std::string fmt_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ground-truth oracles

std::vector<SubjectDescriptor> GroundTruthDetector::enumerate_subjects(const synth::Clip& clip) {
  std::int32_t max_label = 0;
  for (const auto& m : clip.gt_masks) max_label = std::max(max_label, m.maxCoeff());
  std::vector<SubjectDescriptor> out;
  for (std::int32_t k = 1; k <= max_label; ++k) out.push_back({"subject" + std::to_string(k), k});
  return out;
}

std::vector<Detection> GroundTruthDetector::detect(const synth::Clip& clip, int keyframe,
                                                   const std::vector<SubjectDescriptor>& subjects) {
  if (options_.failing_keyframes.contains(keyframe))
    throw OracleError("detector failed on keyframe " + std::to_string(keyframe));
  const auto& labels = clip.gt_masks.at(std::size_t(keyframe));
  std::vector<Detection> out;
  for (const auto& s : subjects) {
    BinaryMask m = label_mask(labels, s.label_hint);
    if (!m.any()) continue;
    if (options_.morph_radius > 0)
      m = s.label_hint % 2 == 0 ? dilate(m, options_.morph_radius) : erode(m, options_.morph_radius);
    if (m.any()) out.push_back({s, std::move(m)});
  }
  // Dilation may create overlaps; keep detections mutually exclusive.
  BinaryMask claimed = empty_mask(static_cast<int>(labels.rows()), static_cast<int>(labels.cols()));
  for (auto& d : out) {
    d.mask = d.mask && !claimed;
    claimed = claimed || d.mask;
  }
  return out;
}

std::vector<std::vector<BinaryMask>> GroundTruthTracker::propagate(const std::vector<BinaryMask>& seeds,
                                                                   const synth::Clip& clip, int start, int end) {
  if (start < 0 || end >= clip.num_frames() || start > end) throw OracleError("tracker: bad frame range");
  std::vector<std::vector<BinaryMask>> out;
  const auto& seed_labels = clip.gt_masks[std::size_t(start)];
  for (const auto& seed : seeds) {
    // Label with the largest overlap with the seed.
    std::map<std::int32_t, std::int64_t> votes;
    for (Eigen::Index y = 0; y < seed.rows(); ++y)
      for (Eigen::Index x = 0; x < seed.cols(); ++x)
        if (seed(y, x) && seed_labels(y, x) > 0) ++votes[seed_labels(y, x)];
    std::int32_t label = 0;
    std::int64_t best = 0;
    for (const auto& [l, c] : votes)
      if (c > best) best = c, label = l;
    std::vector<BinaryMask> track;
    track.push_back(seed);
    for (int t = start + 1; t <= end; ++t)
      track.push_back(label > 0 ? label_mask(clip.gt_masks[std::size_t(t)], label)
                                : empty_mask(clip.height(), clip.width()));
    out.push_back(std::move(track));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Iterative refinement

LabelImage TrackSet::labels(int frame) const {
  LabelImage out = LabelImage::Zero(height, width);
  for (auto it = instances.rbegin(); it != instances.rend(); ++it)
    if (it->covers(frame)) out = it->masks[std::size_t(frame)].select(it->id, out);
  return out;
}

TrackSet iterative_refine(const synth::Clip& clip, DetectorOracle& detector, TrackerOracle& tracker,
                          const RefineOptions& options) {
  if (options.keyframe_stride < 1) throw Error("keyframe stride must be >= 1");
  if (clip.num_frames() == 0) throw Error("iterative_refine: empty clip");

  TrackSet tracks;
  tracks.num_frames = clip.num_frames();
  tracks.height = clip.height();
  tracks.width = clip.width();
  const auto subjects = detector.enumerate_subjects(clip);

  int pass = 0;
  for (int t = 0; t < clip.num_frames(); t += options.keyframe_stride) {
    ++pass;
    std::vector<Detection> detections;
    try {
      detections = detector.detect(clip, t, subjects);
    } catch (const std::exception& e) {
      tracks.warnings.push_back("pass " + std::to_string(pass) + " (keyframe " + std::to_string(t) +
                                ") skipped: " + e.what());
      tracks.instances_after_pass.push_back(tracks.instances.size());
      continue;
    }

    // Delta = D \ M at the keyframe, membership by IoU.
    std::vector<Detection> unseen;
    for (auto& d : detections) {
      bool seen = false;
      for (const auto& inst : tracks.instances)
        if (inst.covers(t) && mask_iou(inst.masks[std::size_t(t)], d.mask) >= options.novelty_iou) seen = true;
      for (const auto& u : unseen)
        if (mask_iou(u.mask, d.mask) >= options.novelty_iou) seen = true;
      if (!seen && d.mask.any()) unseen.push_back(std::move(d));
    }

    if (!unseen.empty()) {
      std::vector<BinaryMask> seeds;
      for (const auto& u : unseen) seeds.push_back(u.mask);
      std::vector<std::vector<BinaryMask>> propagated;
      try {
        propagated = tracker.propagate(seeds, clip, t, clip.num_frames() - 1);
        if (propagated.size() != seeds.size()) throw OracleError("tracker returned wrong track count");
        for (const auto& p : propagated)
          if (static_cast<int>(p.size()) != clip.num_frames() - t) throw OracleError("tracker returned wrong length");
      } catch (const std::exception& e) {
        tracks.warnings.push_back("pass " + std::to_string(pass) + " (keyframe " + std::to_string(t) +
                                  ") propagation skipped: " + e.what());
        tracks.instances_after_pass.push_back(tracks.instances.size());
        continue;
      }
      for (std::size_t k = 0; k < unseen.size(); ++k) {
        Instance inst;
        inst.id = static_cast<int>(tracks.instances.size()) + 1;
        inst.descriptor = unseen[k].descriptor;
        inst.first_pass = pass;
        inst.first_frame = t;
        inst.masks.assign(std::size_t(clip.num_frames()), empty_mask(clip.height(), clip.width()));
        for (int s = t; s < clip.num_frames(); ++s) inst.masks[std::size_t(s)] = propagated[k][std::size_t(s - t)];
        tracks.instances.push_back(std::move(inst));
      }
    }
    tracks.instances_after_pass.push_back(tracks.instances.size());
  }
  return tracks;
}

TrackSet enforce_exclusivity(TrackSet tracks) {
  std::sort(tracks.instances.begin(), tracks.instances.end(),
            [](const Instance& a, const Instance& b) { return a.id < b.id; });
  for (int t = 0; t < tracks.num_frames; ++t) {
    BinaryMask claimed = empty_mask(tracks.height, tracks.width);
    for (auto& inst : tracks.instances) {
      auto& m = inst.masks[std::size_t(t)];
      m = m && !claimed;
      claimed = claimed || m;
    }
  }
  return tracks;
}

// ---------------------------------------------------------------------------
// Augmentation

AugmentResult augment_reference(const RgbImage& image, const BinaryMask& mask, const AugmentOptions& options,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Fixed draw order keeps the log reproducible whichever branches fire.
  const double u_flip = unit(rng), u_crop = unit(rng), u_resize = unit(rng);
  const double crop_frac = options.min_crop_fraction + (1.0 - options.min_crop_fraction) * unit(rng);
  const double scale = options.min_scale + (1.0 - options.min_scale) * unit(rng);

  AugmentResult out{image, mask, {}};
  const int h = image.height(), w = image.width();
  if (u_flip < options.flip_prob) {
    out.image = flip_horizontal(out.image);
    out.mask = flip_horizontal(out.mask);
    out.log.push_back("hflip");
  }
  if (u_crop < options.center_crop_prob) {
    const int ch = std::max(1, static_cast<int>(std::lround(h * crop_frac)));
    const int cw = std::max(1, static_cast<int>(std::lround(w * crop_frac)));
    const int y0 = (h - ch) / 2, x0 = (w - cw) / 2;
    out.image = resample_nearest(out.image, y0, x0, ch, cw, h, w);
    out.mask = resample_nearest(out.mask, y0, x0, ch, cw, h, w);
    out.log.push_back("center_crop(" + fmt_fixed(crop_frac) + ")");
  }
  if (u_resize < options.resize_prob) {
    const int sh = std::max(1, static_cast<int>(std::lround(h * scale)));
    const int sw = std::max(1, static_cast<int>(std::lround(w * scale)));
    const auto small = resample_nearest(out.image, 0, 0, h, w, sh, sw);
    const auto small_mask = resample_nearest(out.mask, 0, 0, h, w, sh, sw);
    out.image = resample_nearest(small, 0, 0, sh, sw, h, w);
    out.mask = resample_nearest(small_mask, 0, 0, sh, sw, h, w);
    out.log.push_back("resize(" + fmt_fixed(scale) + ")");
  }
  return out;
}

RgbImage augment_reference(const RgbImage& image, const AugmentOptions& options, std::uint64_t seed) {
  return augment_reference(image, BinaryMask::Constant(image.height(), image.width(), true), options, seed).image;
}

// ---------------------------------------------------------------------------
// Reference sampling

std::string to_string(ReferenceMode mode) {
  switch (mode) {
    case ReferenceMode::starting_frame: return "starting";
    case ReferenceMode::arbitrary_frame: return "arbitrary";
    case ReferenceMode::multi_reference: return "multi";
  }
  return "multi";
}

ReferenceMode parse_reference_mode(const std::string& s) {
  if (s == "starting" || s == "starting_frame") return ReferenceMode::starting_frame;
  if (s == "arbitrary" || s == "arbitrary_frame") return ReferenceMode::arbitrary_frame;
  if (s == "multi" || s == "multi_reference") return ReferenceMode::multi_reference;
  throw Error("unknown reference mode '" + s + "'");
}

FrameRange source_window(int num_frames, int f, int g) { return {1, num_frames - g - f}; }
FrameRange supervision_window(int num_frames, int f) { return {num_frames - f + 1, num_frames}; }

namespace {

struct Box {
  int y0, x0, y1, x1;  // inclusive
};

Box bounding_box(const BinaryMask& m) {
  Box b{int(m.rows()), int(m.cols()), -1, -1};
  for (int y = 0; y < m.rows(); ++y)
    for (int x = 0; x < m.cols(); ++x)
      if (m(y, x)) b = {std::min(b.y0, y), std::min(b.x0, x), std::max(b.y1, y), std::max(b.x1, x)};
  return b;
}

// Bounding-box crop of the instance region, resized to the canvas; pixels
// outside the instance mask are set to `fill`.
Reference crop_reference(const RgbImage& frame, const BinaryMask& mask, Rgb fill) {
  const Box b = bounding_box(mask);
  const int h = b.y1 - b.y0 + 1, w = b.x1 - b.x0 + 1;
  Reference ref;
  ref.image = resample_nearest(frame, b.y0, b.x0, h, w, frame.height(), frame.width());
  ref.subject_mask = resample_nearest(mask, b.y0, b.x0, h, w, frame.height(), frame.width());
  for (int y = 0; y < ref.image.height(); ++y)
    for (int x = 0; x < ref.image.width(); ++x)
      if (!ref.subject_mask(y, x)) ref.image.set(y, x, fill);
  return ref;
}

// Multi-source BFS over 4-neighbors: unlabeled pixels take the label of the
// nearest labeled pixel; equal distances resolve to the lower label.
LabelImage fill_nearest(LabelImage labels) {
  const int h = int(labels.rows()), w = int(labels.cols());
  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (labels(y, x) > 0) frontier.emplace_back(y, x);
  if (frontier.empty()) return labels;
  while (!frontier.empty()) {
    std::deque<std::pair<int, int>> next;
    LabelImage proposal = LabelImage::Zero(h, w);
    for (auto [y, x] : frontier) {
      const int dy[] = {-1, 1, 0, 0}, dx[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w || labels(ny, nx) > 0) continue;
        if (proposal(ny, nx) == 0) next.emplace_back(ny, nx);
        if (proposal(ny, nx) == 0 || labels(y, x) < proposal(ny, nx)) proposal(ny, nx) = labels(y, x);
      }
    }
    for (auto [y, x] : next) labels(y, x) = proposal(y, x);
    frontier = std::move(next);
  }
  return labels;
}

}  // namespace

SampleOutcome sample_references(const synth::Clip& clip, const TrackSet& tracks, const SampleOptions& options,
                                std::uint64_t seed, Rgb background_fill) {
  const int L = clip.num_frames();
  if (options.f < 1 || options.g < 0) throw Error("f must be >= 1 and g >= 0");
  if (L < options.f + options.g + 1)
    throw Error("empty source window: L=" + std::to_string(L) + " < f+g+1=" +
                std::to_string(options.f + options.g + 1));

  std::mt19937_64 rng(seed);
  CuratedSample s;
  s.mode = options.mode;
  s.f = options.f;
  s.g = options.g;
  s.source = source_window(L, options.f, options.g);
  s.supervision = supervision_window(L, options.f);
  s.background_reference = options.background_reference;
  const int H = clip.height(), W = clip.width();
  auto src_frame = [&] {
    return std::uniform_int_distribution<int>(s.source.first - 1, s.source.last - 1)(rng);
  };
  auto aug_seed = [&] { return std::uniform_int_distribution<std::uint64_t>()(rng); };

  if (options.mode != ReferenceMode::multi_reference) {
    const int t = options.mode == ReferenceMode::starting_frame ? s.supervision.first - 1 : src_frame();
    auto aug = augment_reference(clip.frames[std::size_t(t)], BinaryMask::Constant(H, W, true), options.augment,
                                 aug_seed());
    Reference ref;
    ref.index = 1;
    ref.image = std::move(aug.image);
    ref.subject_mask = std::move(aug.mask);
    ref.instance_id = 0;
    ref.source_frame = t;
    ref.augmentations = std::move(aug.log);
    s.references.push_back(std::move(ref));
    s.correspondence.assign(std::size_t(options.f), LabelImage::Constant(H, W, 1));
    return s;
  }

  const double min_area = options.area_threshold * H * W;
  struct Kept {
    const Instance* inst;
    int ref_frame;
  };
  std::vector<Kept> kept;
  for (const auto& inst : tracks.instances) {
    auto area = [&](int t) { return inst.covers(t) ? mask_area(inst.masks[std::size_t(t)]) : 0; };
    bool visible = true;
    for (int t = s.supervision.first - 1; t < s.supervision.last; ++t) visible = visible && area(t) > 0;
    if (!visible) {
      s.dropped.push_back({inst.id, "not visible throughout the supervision window"});
      continue;
    }
    int best_t = -1;
    std::int64_t best_area = 0;
    for (int t = s.source.first - 1; t < s.source.last; ++t)
      if (area(t) > best_area) best_area = area(t), best_t = t;
    if (best_t < 0) {
      s.dropped.push_back({inst.id, "absent from the source window"});
      continue;
    }
    if (static_cast<double>(best_area) <= min_area) {
      s.dropped.push_back({inst.id, "area below threshold"});
      continue;
    }
    kept.push_back({&inst, best_t});
  }
  if (kept.empty()) return Rejection{"no instance survived filtering", s.dropped};

  for (const auto& k : kept) {
    Reference ref = crop_reference(clip.frames[std::size_t(k.ref_frame)], k.inst->masks[std::size_t(k.ref_frame)],
                                   options.reference_fill);
    auto aug = augment_reference(ref.image, ref.subject_mask, options.augment, aug_seed());
    ref.image = std::move(aug.image);
    ref.subject_mask = std::move(aug.mask);
    ref.augmentations = std::move(aug.log);
    ref.index = s.num_references() + 1;
    ref.instance_id = k.inst->id;
    ref.source_frame = k.ref_frame;
    s.references.push_back(std::move(ref));
  }

  if (options.background_reference) {
    // Prefer source frames where every selected instance is tracked.
    std::vector<int> candidates;
    for (int t = s.source.first - 1; t < s.source.last; ++t)
      if (std::all_of(kept.begin(), kept.end(), [&](const Kept& k) { return k.inst->covers(t); }))
        candidates.push_back(t);
    int t = 0;
    if (candidates.empty()) {
      t = src_frame();
    } else {
      t = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    }
    Reference bg;
    bg.image = clip.frames[std::size_t(t)];
    BinaryMask removed = empty_mask(H, W);
    for (const auto& k : kept)
      if (k.inst->covers(t)) removed = removed || k.inst->masks[std::size_t(t)];
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (removed(y, x)) bg.image.set(y, x, background_fill);
    bg.subject_mask = !removed;
    bg.index = s.num_references() + 1;
    bg.source_frame = t;
    s.references.push_back(std::move(bg));
  }

  const std::int32_t bg_index = options.background_reference ? s.num_references() : 0;
  for (int t = s.supervision.first - 1; t < s.supervision.last; ++t) {
    LabelImage ids = LabelImage::Constant(H, W, bg_index);
    BinaryMask claimed = empty_mask(H, W);
    for (std::size_t r = 0; r < kept.size(); ++r) {
      const auto& m = kept[r].inst->masks[std::size_t(t)];
      const BinaryMask own = m && !claimed;
      ids = own.select(static_cast<std::int32_t>(r + 1), ids);
      claimed = claimed || own;
    }
    if (!options.background_reference) ids = fill_nearest(std::move(ids));
    s.correspondence.push_back(std::move(ids));
  }
  return s;
}

Reference cross_clip_reference(const synth::SceneSpec& spec, int subject_index, std::uint64_t seed, Rgb fill) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  synth::SceneSpec alone;
  alone.seed = seed;
  alone.num_frames = 2;
  alone.height = spec.height;
  alone.width = spec.width;
  alone.background = spec.background;
  auto subject = spec.subjects.at(std::size_t(subject_index));
  subject.appear_frame = 0;
  subject.disappear_frame.reset();
  subject.path.kind = synth::Trajectory::Kind::linear;
  subject.path.velocity = {0.0, 0.0};
  const double margin = std::min(subject.size, 0.45 * std::min(spec.height, spec.width));
  subject.path.origin = {margin + (spec.width - 2 * margin) * unit(rng), margin + (spec.height - 2 * margin) * unit(rng)};
  alone.subjects = {subject};
  const auto clip = synth::generate_clip(alone);
  Reference ref = crop_reference(clip.frames[0], label_mask(clip.gt_masks[0], 1), fill);
  ref.instance_id = subject_index + 1;
  ref.augmentations.push_back("cross_clip(" + std::to_string(seed) + ")");
  return ref;
}

// ---------------------------------------------------------------------------
// Morphology

namespace {

std::vector<std::pair<int, int>> disk(int radius) {
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) offsets.emplace_back(dy, dx);
  return offsets;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const int h = int(mask.rows()), w = int(mask.cols());
  BinaryMask out = empty_mask(h, w);
  const auto offsets = disk(radius);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      for (auto [dy, dx] : offsets) {
        const int ny = y + dy, nx = x + dx;
        if (ny >= 0 && ny < h && nx >= 0 && nx < w) out(ny, nx) = true;
      }
    }
  return out;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const int h = int(mask.rows()), w = int(mask.cols());
  BinaryMask out = empty_mask(h, w);
  const auto offsets = disk(radius);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      bool keep = true;
      for (auto [dy, dx] : offsets) {
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= h || nx < 0 || nx >= w || !mask(ny, nx)) {
          keep = false;
          break;
        }
      }
      out(y, x) = keep;
    }
  return out;
}

MorphResult morph_masks(const LabelVideo& masks, int lo, int hi, std::uint64_t seed) {
  if (lo > hi) throw Error("morph_masks: lo > hi");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> radius(lo, hi);
  std::bernoulli_distribution grow(0.5);
  MorphResult out;
  double iou_sum = 0.0;
  int iou_count = 0;
  for (const auto& labels : masks) {
    const int h = int(labels.rows()), w = int(labels.cols());
    const std::int32_t max_label = labels.size() ? labels.maxCoeff() : 0;
    std::vector<BinaryMask> morphed;
    for (std::int32_t k = 1; k <= max_label; ++k) {
      const BinaryMask m = label_mask(labels, k);
      const int r = radius(rng);
      const bool dil = grow(rng);
      morphed.push_back(dil ? dilate(m, r) : erode(m, r));
    }
    LabelImage result = LabelImage::Zero(h, w);
    BinaryMask claimed = empty_mask(h, w);
    for (std::int32_t k = 1; k <= max_label; ++k) {
      const BinaryMask own = morphed[std::size_t(k - 1)] && !claimed;
      result = own.select(k, result);
      claimed = claimed || own;
    }
    for (std::int32_t k = 1; k <= max_label; ++k) {
      const BinaryMask orig = label_mask(labels, k);
      if (!orig.any()) continue;
      iou_sum += mask_iou(orig, label_mask(result, k));
      ++iou_count;
    }
    out.masks.push_back(std::move(result));
  }
  out.mean_iou = iou_count ? iou_sum / iou_count : 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Dataset layout

namespace {

std::string ref_name(int index, const char* suffix = "") {
  char buf[48];
  std::snprintf(buf, sizeof buf, "ref_%02d%s.png", index, suffix);
  return buf;
}

GrayImage mask_to_gray(const BinaryMask& m) { return m.select(GrayImage::Constant(m.rows(), m.cols(), 255), GrayImage::Zero(m.rows(), m.cols())); }
BinaryMask gray_to_mask(const GrayImage& g) { return g > 127; }

nlohmann::json dropped_json(const std::vector<DroppedInstance>& dropped) {
  auto arr = nlohmann::json::array();
  for (const auto& d : dropped) arr.push_back({{"instance", d.instance_id}, {"reason", d.reason}});
  return arr;
}

}  // namespace

void write_sample(const std::filesystem::path& dir, const synth::SceneSpec& spec, const synth::Clip& clip,
                  const SampleOutcome& outcome, const TrackSet& tracks) {
  namespace fs = std::filesystem;
  synth::write_clip(dir, spec, clip);
  nlohmann::json j;
  j["warnings"] = tracks.warnings;
  j["instances"] = nlohmann::json::array();
  for (const auto& inst : tracks.instances)
    j["instances"].push_back({{"id", inst.id},
                              {"descriptor", inst.descriptor.name},
                              {"first_pass", inst.first_pass},
                              {"first_frame", inst.first_frame}});
  if (const auto* rej = std::get_if<Rejection>(&outcome)) {
    j["rejected"] = true;
    j["rejection_reason"] = rej->reason;
    j["dropped"] = dropped_json(rej->dropped);
    std::ofstream(dir / "sample.json") << j.dump(2) << '\n';
    return;
  }
  const auto& s = std::get<CuratedSample>(outcome);
  fs::create_directories(dir / "refs");
  fs::create_directories(dir / "corr");
  j["rejected"] = false;
  j["mode"] = to_string(s.mode);
  j["f"] = s.f;
  j["g"] = s.g;
  j["source_window"] = {s.source.first, s.source.last};
  j["supervision_window"] = {s.supervision.first, s.supervision.last};
  j["background_reference"] = s.background_reference;
  if (!s.background_reference && s.mode == ReferenceMode::multi_reference)
    j["background_policy"] = "WARNING: background pixels inherit the nearest subject reference";
  j["dropped"] = dropped_json(s.dropped);
  auto refs = nlohmann::json::array();
  for (const auto& r : s.references) {
    const bool bg = r.is_background() && s.mode == ReferenceMode::multi_reference;
    const std::string file = bg ? "background.png" : ref_name(r.index);
    const std::string mask_file = bg ? "background_mask.png" : ref_name(r.index, "_mask");
    io::write_png(dir / "refs" / file, r.image);
    io::write_png(dir / "refs" / mask_file, mask_to_gray(r.subject_mask));
    nlohmann::json jr;
    jr["index"] = r.index;
    jr["file"] = "refs/" + file;
    jr["mask_file"] = "refs/" + mask_file;
    jr["instance"] = bg ? nlohmann::json("BACKGROUND") : nlohmann::json(*r.instance_id);
    jr["source_frame"] = r.source_frame;
    jr["augmentations"] = r.augmentations;
    refs.push_back(jr);
  }
  j["references"] = refs;
  for (std::size_t k = 0; k < s.correspondence.size(); ++k)
    io::write_png(dir / "corr" / synth::frame_name(s.supervision.first - 1 + int(k)),
                  io::labels_to_gray(s.correspondence[k]));
  std::ofstream(dir / "sample.json") << j.dump(2) << '\n';
}

bool is_rejected(const std::filesystem::path& dir) {
  std::ifstream in(dir / "sample.json");
  if (!in) throw Error("missing sample.json in " + dir.string());
  return nlohmann::json::parse(in).value("rejected", false);
}

LoadedSample read_sample(const std::filesystem::path& dir) {
  std::ifstream in(dir / "sample.json");
  if (!in) throw Error("missing sample.json in " + dir.string());
  const auto j = nlohmann::json::parse(in);
  if (j.value("rejected", false)) throw Error("sample was rejected: " + j.value("rejection_reason", std::string()));
  LoadedSample out;
  out.clip = synth::read_clip(dir, &out.spec);
  auto& s = out.sample;
  s.mode = parse_reference_mode(j.at("mode").get<std::string>());
  s.f = j.at("f").get<int>();
  s.g = j.at("g").get<int>();
  s.source = {j.at("source_window").at(0).get<int>(), j.at("source_window").at(1).get<int>()};
  s.supervision = {j.at("supervision_window").at(0).get<int>(), j.at("supervision_window").at(1).get<int>()};
  s.background_reference = j.value("background_reference", true);
  for (const auto& d : j.at("dropped")) s.dropped.push_back({d.at("instance").get<int>(), d.at("reason").get<std::string>()});
  for (const auto& jr : j.at("references")) {
    Reference r;
    r.index = jr.at("index").get<int>();
    r.image = io::read_png_rgb(dir / jr.at("file").get<std::string>());
    r.subject_mask = gray_to_mask(io::read_png_gray(dir / jr.at("mask_file").get<std::string>()));
    if (!jr.at("instance").is_string()) r.instance_id = jr.at("instance").get<int>();
    r.source_frame = jr.at("source_frame").get<int>();
    r.augmentations = jr.at("augmentations").get<std::vector<std::string>>();
    s.references.push_back(std::move(r));
  }
  for (int t = s.supervision.first - 1; t < s.supervision.last; ++t)
    s.correspondence.push_back(io::gray_to_labels(io::read_png_gray(dir / "corr" / synth::frame_name(t))));
  return out;
}

SampleOutcome curate_clip(const synth::Clip& clip, const CurationOptions& options, std::uint64_t seed,
                          Rgb background_fill, TrackSet* tracks_out) {
  GroundTruthDetector detector;
  GroundTruthTracker tracker;
  auto tracks = enforce_exclusivity(iterative_refine(clip, detector, tracker, options.refine));
  auto outcome = sample_references(clip, tracks, options.sample, seed, background_fill);
  if (tracks_out) *tracks_out = std::move(tracks);
  return outcome;
}

}  // namespace timecolor::curation
