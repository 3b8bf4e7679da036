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

#include "timecolor/config.hpp"
#include "timecolor/curation.hpp"
#include "timecolor/denoiser/conditioning.hpp"
#include "timecolor/denoiser/model.hpp"
#include "timecolor/denoiser/sampler.hpp"
#include "timecolor/denoiser/schedule.hpp"
#include "timecolor/denoiser/training.hpp"
#include "timecolor/metrics.hpp"
#include "timecolor/tokengrid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

// End-to-end wiring used by the CLI and the acceptance suite.
namespace timecolor::pipeline {

namespace fs = std::filesystem;

/// Stable per-item seed derived from a run seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

std::string clip_id(int index);

synth::SceneParams scene_params(const RunConfig& config);
curation::CurationOptions curation_options(const RunConfig& config);
curation::CurationOptions curation_options(const RunConfig& config, curation::ReferenceMode mode);
denoiser::NoiseSchedule make_schedule(const RunConfig& config);
denoiser::SamplerOptions sampler_options(const RunConfig& config, std::uint64_t seed);

/// Writes `count` raw clips (synth layout) under dir/clip_%04d.
void generate_clips(const RunConfig& config, const fs::path& dir, int count, std::uint64_t seed);

struct CurateSummary {
  int clips = 0;
  int accepted = 0;
  int rejected = 0;
  std::vector<std::string> rejected_ids;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const CurateSummary& summary);

/// Curates every clip directory in `raw_dir` into dataset_dir/<clip_id>/ and
/// writes dataset_dir/summary.json.
CurateSummary curate_directory(const RunConfig& config, const fs::path& raw_dir, const fs::path& dataset_dir);

/// generate_clips + curate_directory into out/raw and out/dataset.
CurateSummary run_synth(const RunConfig& config, const fs::path& out, int count, std::uint64_t seed);

/// Accepted sample directories of a dataset, sorted by name.
std::vector<fs::path> list_samples(const fs::path& dataset_dir);

/// Sketches, references and correspondence of a curated sample.
denoiser::ConditioningBundle bundle_from_sample(const curation::LoadedSample& s);
/// RGB frames of the supervision window.
Video targets_from_sample(const curation::LoadedSample& s);

/// Re-curates a stored sample's clip under another reference mode (curriculum
/// stages 1 and 2). Returns nullopt on rejection.
std::optional<curation::LoadedSample> recurate(const RunConfig& config, const curation::LoadedSample& s,
                                               curation::ReferenceMode mode, std::uint64_t seed);

struct TrainOptions {
  denoiser::AttentionMode mode = denoiser::AttentionMode::correspondence;
  std::optional<fs::path> checkpoint;  // final checkpoint; stages go to <path>.stage<k>
  int first_stage = 0;                 // resume point (0-based)
  const denoiser::DenoiserModel<float>* init = nullptr;
  std::ostream* log = nullptr;
};

struct TrainResult {
  denoiser::DenoiserModel<float> model;
  std::vector<double> stage_final_loss;
  double seconds = 0.0;
};

/// Three-stage curriculum (starting-frame, arbitrary-frame, multi-reference)
/// over the accepted samples of `dataset_dir`. Throws TrainingDiverged.
TrainResult run_train(const RunConfig& config, const fs::path& dataset_dir, const TrainOptions& options);

Video colorize(const denoiser::DenoiserModel<float>& model, const denoiser::ConditioningBundle& bundle,
               const RunConfig& config, denoiser::AttentionMode mode, std::uint64_t seed);

/// Dominant colors of the bundle's references (mean over their subject masks).
std::vector<metrics::Color> dominant_colors(const curation::CuratedSample& sample);

/// Evaluates a generated supervision window against a curated sample.
metrics::ClipReport evaluate_clip(const std::string& name, const Video& generated, const curation::LoadedSample& gt);

/// Swaps two references (images and masks); correspondence is left alone.
curation::CuratedSample swap_references(const curation::CuratedSample& sample, int a, int b);

struct SwapOutcome {
  metrics::LeakageResult new_binding;
  metrics::LeakageResult old_binding;
  bool flipped = false;  // every subject: new leakage 0 and old leakage 1
};

/// Leakage of a video generated with references `a` and `b` swapped, scored
/// against the swapped bank (new binding) and against the original (old).
SwapOutcome swap_leakage(const Video& generated, const curation::LoadedSample& gt, int a, int b);

struct ModeResult {
  std::string mode;
  bool failed = false;
  std::string error;
  std::int64_t parameter_count = 0;
  double train_seconds = 0.0;
  metrics::EvalReport normal;
  metrics::EvalReport swapped;
  double swap_responsiveness = 0.0;
  metrics::EvalReport morphed;
  double morph_iou = 1.0;
};

struct AblationReport {
  std::vector<ModeResult> modes;
  std::string table() const;
  const ModeResult* find(const std::string& mode) const;
};

nlohmann::json to_json(const AblationReport& report, bool include_runtime = true);

/// Trains one model per mode on identical data and seeds and evaluates each
/// on the same held-out clips (normal, swapped and morphed-mask banks).
AblationReport run_ablate(const RunConfig& config, const fs::path& out, std::ostream* log = nullptr);

/// Evaluates a model on every accepted held-out sample.
ModeResult evaluate_model(const RunConfig& config, const denoiser::DenoiserModel<float>& model,
                          denoiser::AttentionMode mode, const fs::path& heldout_dir);

}  // namespace timecolor::pipeline
