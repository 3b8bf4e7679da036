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

#include "timecolor/pipeline.hpp"

#include "timecolor/correspond.hpp"
#include "timecolor/denoiser/checkpoint.hpp"
#include "timecolor/denoiser/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace timecolor::pipeline {

using denoiser::AttentionMode;
using denoiser::DenoiserModel;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1) + 0xD1B54A32D192ED03ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string clip_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%04d", index);
  return buf;
}

synth::SceneParams scene_params(const RunConfig& config) {
  synth::SceneParams p;
  p.num_subjects = config.synth.num_subjects;
  p.num_frames = config.synth.num_frames;
  p.height = config.synth.height;
  p.width = config.synth.width;
  p.min_size = config.synth.min_size;
  p.max_size = config.synth.max_size;
  p.max_shift = config.synth.max_shift;
  return p;
}

curation::CurationOptions curation_options(const RunConfig& config, curation::ReferenceMode mode) {
  curation::CurationOptions o;
  o.refine.keyframe_stride = config.curate.h;
  o.refine.novelty_iou = config.curate.novelty_iou;
  o.sample.f = config.curate.f;
  o.sample.g = config.curate.g;
  o.sample.mode = mode;
  o.sample.area_threshold = config.curate.area_threshold;
  o.sample.background_reference = config.curate.background_reference;
  o.sample.augment.flip_prob = config.curate.flip_prob;
  o.sample.augment.center_crop_prob = config.curate.center_crop_prob;
  o.sample.augment.resize_prob = config.curate.resize_prob;
  return o;
}

curation::CurationOptions curation_options(const RunConfig& config) {
  return curation_options(config, curation::parse_reference_mode(config.curate.mode));
}

denoiser::NoiseSchedule make_schedule(const RunConfig& config) {
  return denoiser::NoiseSchedule::linear(config.schedule.steps, config.schedule.beta_start, config.schedule.beta_end,
                                         config.schedule.beta_scale);
}

denoiser::SamplerOptions sampler_options(const RunConfig& config, std::uint64_t seed) {
  denoiser::SamplerOptions o;
  o.kind = denoiser::parse_sampler(config.schedule.sampler);
  o.steps = config.schedule.sample_steps;
  o.clip_x0 = config.schedule.clip_x0;
  o.seed = seed;
  return o;
}

void generate_clips(const RunConfig& config, const fs::path& dir, int count, std::uint64_t seed) {
  const auto params = scene_params(config);
  for (int k = 0; k < count; ++k) {
    const auto spec = synth::random_scene(derive_seed(seed, std::uint64_t(k)), params);
    synth::write_clip(dir / clip_id(k), spec, synth::generate_clip(spec));
  }
}

nlohmann::json to_json(const CurateSummary& s) {
  return {{"clips", s.clips},
          {"accepted", s.accepted},
          {"rejected", s.rejected},
          {"rejected_ids", s.rejected_ids},
          {"warnings", s.warnings}};
}

CurateSummary curate_directory(const RunConfig& config, const fs::path& raw_dir, const fs::path& dataset_dir) {
  std::vector<fs::path> clips;
  for (const auto& e : fs::directory_iterator(raw_dir))
    if (e.is_directory() && fs::exists(e.path() / "clip.json")) clips.push_back(e.path());
  std::sort(clips.begin(), clips.end());
  const auto options = curation_options(config);
  CurateSummary summary;
  fs::create_directories(dataset_dir);
  for (const auto& dir : clips) {
    synth::SceneSpec spec;
    const auto clip = synth::read_clip(dir, &spec);
    curation::TrackSet tracks;
    const auto outcome = curation::curate_clip(clip, options, derive_seed(spec.seed, 0, 1), spec.background, &tracks);
    const auto name = dir.filename().string();
    curation::write_sample(dataset_dir / name, spec, clip, outcome, tracks);
    ++summary.clips;
    if (std::holds_alternative<curation::Rejection>(outcome)) {
      ++summary.rejected;
      summary.rejected_ids.push_back(name);
    } else {
      ++summary.accepted;
    }
    for (const auto& w : tracks.warnings) summary.warnings.push_back(name + ": " + w);
  }
  std::ofstream(dataset_dir / "summary.json") << to_json(summary).dump(2) << '\n';
  return summary;
}

CurateSummary run_synth(const RunConfig& config, const fs::path& out, int count, std::uint64_t seed) {
  config.validate();
  generate_clips(config, out / "raw", count, seed);
  return curate_directory(config, out / "raw", out / "dataset");
}

std::vector<fs::path> list_samples(const fs::path& dataset_dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dataset_dir)) throw Error("not a dataset directory: " + dataset_dir.string());
  for (const auto& e : fs::directory_iterator(dataset_dir))
    if (e.is_directory() && fs::exists(e.path() / "sample.json") && !curation::is_rejected(e.path()))
      out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

denoiser::ConditioningBundle bundle_from_sample(const curation::LoadedSample& s) {
  denoiser::ConditioningBundle b;
  for (int t = s.sample.supervision.first - 1; t < s.sample.supervision.last; ++t)
    b.sketches.push_back(s.clip.sketches[std::size_t(t)]);
  for (const auto& r : s.sample.references) b.references.push_back(r.image);
  b.correspondence = s.sample.correspondence;
  return b;
}

Video targets_from_sample(const curation::LoadedSample& s) {
  Video v;
  for (int t = s.sample.supervision.first - 1; t < s.sample.supervision.last; ++t) v.push_back(s.clip.frames[std::size_t(t)]);
  return v;
}

std::optional<curation::LoadedSample> recurate(const RunConfig& config, const curation::LoadedSample& s,
                                               curation::ReferenceMode mode, std::uint64_t seed) {
  auto options = curation_options(config, mode);
  options.sample.f = s.sample.f;
  options.sample.g = s.sample.g;
  auto outcome = curation::curate_clip(s.clip, options, seed, s.spec.background);
  if (std::holds_alternative<curation::Rejection>(outcome)) return std::nullopt;
  curation::LoadedSample out{s.spec, s.clip, std::get<curation::CuratedSample>(std::move(outcome))};
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<curation::LoadedSample> load_samples(const fs::path& dataset_dir) {
  std::vector<curation::LoadedSample> out;
  for (const auto& p : list_samples(dataset_dir)) out.push_back(curation::read_sample(p));
  if (out.empty()) throw Error("dataset " + dataset_dir.string() + " has no accepted samples");
  return out;
}

constexpr curation::ReferenceMode kStageModes[3] = {curation::ReferenceMode::starting_frame,
                                                    curation::ReferenceMode::arbitrary_frame,
                                                    curation::ReferenceMode::multi_reference};

}  // namespace

TrainResult run_train(const RunConfig& config, const fs::path& dataset_dir, const TrainOptions& options) {
  config.validate();
  const auto start = Clock::now();
  const auto samples = load_samples(dataset_dir);
  const tokens::AveragePoolCodec codec(config.codec.stride);
  const denoiser::EncodeOptions encode{config.codec.patch, options.mode};
  const auto schedule = make_schedule(config);

  TrainResult result{options.init ? *options.init : DenoiserModel<float>(config.model, derive_seed(config.seed, 0, 21)),
                     {}, 0.0};
  auto& model = result.model;
  denoiser::Adam<float> adam(config.model, {config.train.lr, 0.9, 0.999, 1e-8, config.train.grad_clip});
  auto grads = denoiser::ModelParams<float>::zeros(config.model);
  std::mt19937_64 rng(derive_seed(config.seed, 0, 23));
  nlohmann::json run_json = config;
  run_json["train"]["mode"] = denoiser::to_string(options.mode);

  for (int stage = options.first_stage; stage < 3; ++stage) {
    const int steps = config.train.stage_steps[std::size_t(stage)];
    if (steps <= 0) continue;
    std::vector<denoiser::TrainingExample<float>> examples;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto& s = samples[k];
      std::optional<curation::LoadedSample> staged;
      if (stage == 2 && s.sample.mode == curation::ReferenceMode::multi_reference) {
        staged = s;
      } else {
        staged = recurate(config, s, kStageModes[stage], derive_seed(s.spec.seed, std::uint64_t(stage), 2));
      }
      if (!staged) continue;
      examples.push_back(denoiser::make_example<float>(bundle_from_sample(*staged), targets_from_sample(*staged), codec, encode));
    }
    if (examples.empty()) throw Error("stage " + std::to_string(stage + 1) + ": no usable samples");

    double window = 0.0;
    int window_n = 0;
    const float weight = 1.0f / static_cast<float>(config.train.batch_size);
    std::uniform_int_distribution<std::size_t> pick(0, examples.size() - 1);
    for (int it = 0; it < steps; ++it) {
      grads.set_zero();
      double loss = 0.0;
      for (int b = 0; b < config.train.batch_size; ++b)
        loss += denoiser::training_step(model, examples[pick(rng)], schedule, rng, grads, weight, it).loss;
      adam.step(model.params(), grads);
      window += loss / config.train.batch_size;
      ++window_n;
      const bool last = it + 1 == steps;
      if ((config.train.log_every > 0 && (it + 1) % config.train.log_every == 0) || last) {
        if (options.log)
          *options.log << "[" << denoiser::to_string(options.mode) << "] stage " << stage + 1 << " step " << it + 1
                       << "/" << steps << " loss " << std::fixed << std::setprecision(5) << window / window_n
                       << std::defaultfloat << "\n";
        if (last) result.stage_final_loss.push_back(window / window_n);
        window = 0.0;
        window_n = 0;
      }
    }
    if (options.checkpoint) {
      auto stage_path = *options.checkpoint;
      stage_path += ".stage" + std::to_string(stage + 1);
      denoiser::save_checkpoint(stage_path, model, run_json);
    }
  }
  if (options.checkpoint) denoiser::save_checkpoint(*options.checkpoint, model, run_json);
  result.seconds = seconds_since(start);
  return result;
}

Video colorize(const DenoiserModel<float>& model, const denoiser::ConditioningBundle& bundle, const RunConfig& config,
               AttentionMode mode, std::uint64_t seed) {
  const tokens::AveragePoolCodec codec(config.codec.stride);
  return denoiser::sample_video(model, bundle, codec, {config.codec.patch, mode}, make_schedule(config),
                                sampler_options(config, seed));
}

std::vector<metrics::Color> dominant_colors(const curation::CuratedSample& sample) {
  std::vector<metrics::Color> out;
  for (const auto& r : sample.references) out.push_back(metrics::mean_color(r.image, r.subject_mask));
  return out;
}

namespace {

std::vector<std::pair<int, int>> subject_bindings(const curation::CuratedSample& sample) {
  std::vector<std::pair<int, int>> out;
  for (const auto& r : sample.references)
    if (!(r.is_background() && sample.mode == curation::ReferenceMode::multi_reference)) out.emplace_back(r.index, r.index - 1);
  return out;
}

}  // namespace

metrics::ClipReport evaluate_clip(const std::string& name, const Video& generated, const curation::LoadedSample& gt) {
  metrics::ClipReport rep;
  rep.clip = name;
  const auto targets = targets_from_sample(gt);
  rep.psnr = metrics::psnr(generated, targets);
  rep.ssim = metrics::ssim(generated, targets);
  const auto lk = metrics::leakage(generated, gt.sample.correspondence, dominant_colors(gt.sample), subject_bindings(gt.sample));
  rep.leakage = lk.subjects;
  rep.mean_leakage = lk.mean;
  return rep;
}

curation::CuratedSample swap_references(const curation::CuratedSample& sample, int a, int b) {
  if (a < 1 || b < 1 || a > sample.num_references() || b > sample.num_references())
    throw Error("swap_references: index out of range");
  auto out = sample;
  auto& ra = out.references[std::size_t(a - 1)];
  auto& rb = out.references[std::size_t(b - 1)];
  std::swap(ra.image, rb.image);
  std::swap(ra.subject_mask, rb.subject_mask);
  std::swap(ra.source_frame, rb.source_frame);
  std::swap(ra.augmentations, rb.augmentations);
  return out;
}

SwapOutcome swap_leakage(const Video& generated, const curation::LoadedSample& gt, int a, int b) {
  const auto swapped = swap_references(gt.sample, a, b);
  const auto colors = dominant_colors(swapped);
  auto bindings = subject_bindings(gt.sample);
  SwapOutcome out;
  out.new_binding = metrics::leakage(generated, gt.sample.correspondence, colors, bindings);
  for (auto& [label, ref] : bindings) {
    if (label == a) ref = b - 1;
    else if (label == b) ref = a - 1;
  }
  out.old_binding = metrics::leakage(generated, gt.sample.correspondence, colors, bindings);
  out.flipped = true;
  for (std::size_t k = 0; k < out.new_binding.subjects.size(); ++k) {
    const int label = out.new_binding.subjects[k].label;
    if (label != a && label != b) continue;
    if (out.new_binding.subjects[k].frames == 0 || out.new_binding.subjects[k].score != 0.0 ||
        out.old_binding.subjects[k].score != 1.0)
      out.flipped = false;
  }
  return out;
}

ModeResult evaluate_model(const RunConfig& config, const DenoiserModel<float>& model, AttentionMode mode,
                          const fs::path& heldout_dir) {
  const auto start = Clock::now();
  ModeResult res;
  res.mode = denoiser::to_string(mode);
  res.parameter_count = model.parameter_count();
  for (auto* r : {&res.normal, &res.swapped, &res.morphed}) {
    r->mode = res.mode;
    r->seed = config.seed;
    r->resolution = {config.synth.height, config.synth.width};
  }
  int swaps = 0, flips = 0;
  double iou_sum = 0.0;
  int iou_n = 0;
  const auto paths = list_samples(heldout_dir);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const auto gt = curation::read_sample(paths[k]);
    const auto name = paths[k].filename().string();
    const auto seed = derive_seed(config.seed, k, 31);
    const auto bundle = bundle_from_sample(gt);

    res.normal.clips.push_back(evaluate_clip(name, colorize(model, bundle, config, mode, seed), gt));

    const int objects = static_cast<int>(subject_bindings(gt.sample).size());
    if (gt.sample.mode == curation::ReferenceMode::multi_reference && objects >= 2) {
      auto swapped_bundle = bundle;
      std::swap(swapped_bundle.references[0], swapped_bundle.references[1]);
      const auto video = colorize(model, swapped_bundle, config, mode, seed);
      const auto outcome = swap_leakage(video, gt, 1, 2);
      auto rep = evaluate_clip(name, video, gt);
      rep.leakage = outcome.new_binding.subjects;
      rep.mean_leakage = outcome.new_binding.mean;
      res.swapped.clips.push_back(rep);
      ++swaps;
      flips += outcome.flipped ? 1 : 0;
    }

    // Morph subject masks only: the background identity maps to 0 while morphing.
    const int bg = gt.sample.background_reference && gt.sample.mode == curation::ReferenceMode::multi_reference
                       ? gt.sample.num_references()
                       : 0;
    LabelVideo subjects;
    for (const auto& c : gt.sample.correspondence) subjects.push_back(bg ? (c == bg).select(0, c) : c);
    const auto morph = curation::morph_masks(subjects, config.ablate.morph_lo, config.ablate.morph_hi, derive_seed(config.seed, k, 37));
    auto morphed_bundle = bundle;
    morphed_bundle.correspondence.clear();
    for (const auto& m : morph.masks) morphed_bundle.correspondence.push_back(bg ? (m == 0).select(bg, m) : m);
    auto rep = evaluate_clip(name, colorize(model, morphed_bundle, config, mode, seed), gt);
    rep.mask_iou = morph.mean_iou;
    res.morphed.clips.push_back(rep);
    iou_sum += morph.mean_iou;
    ++iou_n;
  }
  for (auto* r : {&res.normal, &res.swapped, &res.morphed}) r->aggregate();
  res.swap_responsiveness = swaps ? double(flips) / swaps : 0.0;
  res.morph_iou = iou_n ? iou_sum / iou_n : 1.0;
  const double elapsed = seconds_since(start);
  for (auto* r : {&res.normal, &res.swapped, &res.morphed}) r->runtime_seconds = elapsed;
  return res;
}

const ModeResult* AblationReport::find(const std::string& mode) const {
  for (const auto& m : modes)
    if (m.mode == mode) return &m;
  return nullptr;
}

std::string AblationReport::table() const {
  std::vector<const ModeResult*> order;
  for (const auto& m : modes) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(), [](const ModeResult* a, const ModeResult* b) {
    if (a->failed != b->failed) return !a->failed;
    return a->swapped.leakage < b->swapped.leakage;
  });
  std::ostringstream out;
  out << std::left << std::setw(16) << "mode" << std::right << std::setw(10) << "params" << std::setw(9) << "PSNR"
      << std::setw(8) << "SSIM" << std::setw(9) << "leak" << std::setw(11) << "swap-leak" << std::setw(11)
      << "swap-resp" << std::setw(10) << "morphIoU" << std::setw(11) << "dPSNR" << std::setw(9) << "dleak" << "\n";
  out << std::fixed;
  for (const auto* m : order) {
    out << std::left << std::setw(16) << m->mode << std::right;
    if (m->failed) {
      out << "  FAILED: " << m->error << "\n";
      continue;
    }
    out << std::setw(10) << m->parameter_count << std::setprecision(2) << std::setw(9) << m->normal.psnr
        << std::setprecision(3) << std::setw(8) << m->normal.ssim << std::setw(9) << m->normal.leakage << std::setw(11)
        << m->swapped.leakage << std::setw(11) << m->swap_responsiveness << std::setw(10) << m->morph_iou
        << std::setprecision(2) << std::setw(11) << m->morphed.psnr - m->normal.psnr << std::setprecision(3)
        << std::setw(9) << m->morphed.leakage - m->normal.leakage << "\n";
  }
  return out.str();
}

nlohmann::json to_json(const AblationReport& report, bool include_runtime) {
  auto arr = nlohmann::json::array();
  for (const auto& m : report.modes) {
    nlohmann::json j;
    j["mode"] = m.mode;
    j["failed"] = m.failed;
    if (m.failed) j["error"] = m.error;
    j["parameter_count"] = m.parameter_count;
    if (include_runtime) j["train_seconds"] = m.train_seconds;
    j["swap_responsiveness"] = m.swap_responsiveness;
    j["morph_iou"] = m.morph_iou;
    j["normal"] = metrics::to_json(m.normal, include_runtime);
    j["swapped"] = metrics::to_json(m.swapped, include_runtime);
    j["morphed"] = metrics::to_json(m.morphed, include_runtime);
    arr.push_back(j);
  }
  return {{"schema", "timecolor.ablation/1"}, {"modes", arr}};
}

AblationReport run_ablate(const RunConfig& config, const fs::path& out, std::ostream* log) {
  config.validate();
  const auto train_summary = run_synth(config, out / "train", config.ablate.train_clips, derive_seed(config.seed, 0, 11));
  const auto heldout_summary = run_synth(config, out / "heldout", config.ablate.heldout_clips, derive_seed(config.seed, 0, 13));
  if (log)
    *log << "train clips: " << train_summary.accepted << " accepted / " << train_summary.rejected << " rejected; held-out: "
         << heldout_summary.accepted << " / " << heldout_summary.rejected << "\n";
  AblationReport report;
  for (const auto& name : config.ablate.modes) {
    const auto mode = denoiser::parse_attention_mode(name);
    ModeResult row;
    try {
      TrainOptions opts;
      opts.mode = mode;
      opts.checkpoint = out / ("ckpt_" + name + ".bin");
      opts.log = log;
      auto trained = run_train(config, out / "train" / "dataset", opts);
      row = evaluate_model(config, trained.model, mode, out / "heldout" / "dataset");
      row.train_seconds = trained.seconds;
    } catch (const denoiser::TrainingDiverged& e) {
      row.mode = name;
      row.failed = true;
      row.error = e.what();
    }
    if (log) *log << "[" << name << "] " << (row.failed ? "failed: " + row.error : "done") << "\n";
    report.modes.push_back(std::move(row));
  }
  std::ofstream(out / "ablation.json") << to_json(report).dump(2) << '\n';
  std::ofstream(out / "ablation.txt") << report.table();
  return report;
}

}  // namespace timecolor::pipeline
