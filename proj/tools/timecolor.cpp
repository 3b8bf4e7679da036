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

#include "timecolor/config.hpp"
#include "timecolor/correspond.hpp"
#include "timecolor/curation.hpp"
#include "timecolor/denoiser/checkpoint.hpp"
#include "timecolor/metrics.hpp"
#include "timecolor/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace timecolor;

namespace {

struct Globals {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  std::vector<std::string> overrides;
  std::optional<fs::path> dump_gate;
};

RunConfig build_config(const Globals& g, const nlohmann::json* base = nullptr) {
  RunConfig config;
  if (g.config) config = load_config(*g.config);
  else if (base) config = base->get<RunConfig>();
  if (g.paper_scale) config.apply_paper_scale();
  for (const auto& o : g.overrides) apply_override(config, o);
  if (g.seed) config.seed = *g.seed;
  return config;
}

int fail(const std::string& kind, const std::string& message, int code = 1) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
  return code;
}

void dump_gate(const RunConfig& config, const denoiser::ConditioningBundle& bundle, denoiser::AttentionMode mode,
               const fs::path& path) {
  const tokens::AveragePoolCodec codec(config.codec.stride);
  const auto seq = denoiser::encode_bundle<float>(bundle, codec, {config.codec.patch, mode});
  correspond::write_gate_pgm(path, correspond::build_gate(seq, denoiser::gate_mode(mode)));
}

void write_video(const fs::path& dir, const Video& video, int first_index) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < video.size(); ++t)
    io::write_png(dir / synth::frame_name(first_index + static_cast<int>(t)), video[t]);
}

Video read_video(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Video out;
  for (const auto& f : files) out.push_back(io::read_png_rgb(f));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TimeColor: reference-conditioned sketch colorization at desk scale"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "run seed (overrides config)");
  app.add_flag("--paper-scale", g.paper_scale, "L=48, f=17, g=17, h=5 preset");
  app.add_option("--set", g.overrides, "config override key.path=value (repeatable)");
  app.add_option("--dump-gate", g.dump_gate, "write the attention gate of the first sample as a PGM");

  auto* synth_cmd = app.add_subcommand("synth", "generate and curate synthetic clips");
  fs::path synth_out;
  std::optional<int> synth_count;
  synth_cmd->add_option("--out", synth_out, "output directory (raw/ and dataset/)")->required();
  synth_cmd->add_option("--count", synth_count, "number of clips (default synth.num_clips)");

  auto* curate_cmd = app.add_subcommand("curate", "curate raw clips into a dataset");
  curate_cmd->set_help_flag("--help", "print this help message and exit");
  fs::path curate_in, curate_out;
  std::optional<std::string> curate_mode;
  std::optional<int> curate_f, curate_g, curate_h;
  std::optional<double> curate_area;
  curate_cmd->add_option("--in", curate_in, "directory of raw clips")->required()->check(CLI::ExistingDirectory);
  curate_cmd->add_option("--out", curate_out, "dataset directory")->required();
  curate_cmd->add_option("--mode", curate_mode)->check(CLI::IsMember({"starting", "arbitrary", "multi"}));
  curate_cmd->add_option("--f", curate_f, "supervision window");
  curate_cmd->add_option("--g", curate_g, "minimum frame gap");
  curate_cmd->add_option("--h", curate_h, "keyframe stride");
  curate_cmd->add_option("--area-threshold", curate_area, "minimum subject area fraction");

  auto* train_cmd = app.add_subcommand("train", "train a denoiser with the three-stage curriculum");
  fs::path train_data, train_out;
  std::optional<std::string> train_mode;
  std::optional<fs::path> train_init;
  int train_first_stage = 1;
  train_cmd->add_option("--data", train_data, "curated dataset directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train_out, "checkpoint path")->required();
  train_cmd->add_option("--mode", train_mode)->check(CLI::IsMember({"full", "inter_ref", "correspondence", "soft_mask"}));
  train_cmd->add_option("--init", train_init, "resume from a checkpoint")->check(CLI::ExistingFile);
  train_cmd->add_option("--first-stage", train_first_stage, "first curriculum stage (1-3)")->check(CLI::Range(1, 3));

  auto* sample_cmd = app.add_subcommand("sample", "colorize a curated clip");
  fs::path sample_ckpt, sample_clip, sample_out;
  std::optional<std::string> sample_mode;
  sample_cmd->add_option("--ckpt", sample_ckpt)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--clip", sample_clip, "curated sample directory")->required()->check(CLI::ExistingDirectory);
  sample_cmd->add_option("--mode", sample_mode)->check(CLI::IsMember({"full", "inter_ref", "correspondence", "soft_mask"}));
  sample_cmd->add_option("--out", sample_out, "output frame directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "score generated frames against curated ground truth");
  fs::path eval_pred, eval_gt, eval_out;
  std::string eval_mode = "unknown";
  eval_cmd->add_option("--pred", eval_pred, "generated frames (one clip, or one subdirectory per clip)")
      ->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--gt", eval_gt, "curated sample or dataset directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--out", eval_out, "report JSON")->required();
  eval_cmd->add_option("--mode", eval_mode, "mode label recorded in the report");

  auto* ablate_cmd = app.add_subcommand("ablate", "train and compare attention modes");
  fs::path ablate_out;
  std::vector<std::string> ablate_modes;
  ablate_cmd->add_option("--out", ablate_out)->required();
  ablate_cmd->add_option("--modes", ablate_modes)->check(CLI::IsMember({"full", "inter_ref", "correspondence", "soft_mask"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*synth_cmd) {
      const auto config = build_config(g);
      const auto summary = pipeline::run_synth(config, synth_out, synth_count.value_or(config.synth.num_clips), config.seed);
      std::cout << pipeline::to_json(summary).dump(2) << std::endl;
    } else if (*curate_cmd) {
      auto config = build_config(g);
      if (curate_mode) config.curate.mode = *curate_mode;
      if (curate_f) config.curate.f = *curate_f;
      if (curate_g) config.curate.g = *curate_g;
      if (curate_h) config.curate.h = *curate_h;
      if (curate_area) config.curate.area_threshold = *curate_area;
      config.validate();
      const auto summary = pipeline::curate_directory(config, curate_in, curate_out);
      std::cout << pipeline::to_json(summary).dump(2) << std::endl;
    } else if (*train_cmd) {
      std::optional<denoiser::Checkpoint> init;
      if (train_init) init = denoiser::load_checkpoint(*train_init);
      auto config = build_config(g, init ? &init->config : nullptr);
      if (train_mode) config.train.mode = *train_mode;
      if (init) config.model = init->model.config();
      pipeline::TrainOptions opts;
      opts.mode = denoiser::parse_attention_mode(config.train.mode);
      opts.checkpoint = train_out;
      opts.first_stage = train_first_stage - 1;
      opts.init = init ? &init->model : nullptr;
      opts.log = &std::cerr;
      if (g.dump_gate) {
        const auto samples = pipeline::list_samples(train_data);
        if (samples.empty()) throw Error("dataset has no accepted samples");
        dump_gate(config, pipeline::bundle_from_sample(curation::read_sample(samples.front())), opts.mode, *g.dump_gate);
      }
      const auto result = pipeline::run_train(config, train_data, opts);
      std::cout << nlohmann::json{{"checkpoint", train_out.string()},
                                  {"parameter_count", result.model.parameter_count()},
                                  {"stage_final_loss", result.stage_final_loss},
                                  {"seconds", result.seconds}}
                       .dump(2)
                << std::endl;
    } else if (*sample_cmd) {
      const auto ckpt = denoiser::load_checkpoint(sample_ckpt);
      auto config = build_config(g, &ckpt.config);
      const auto mode = denoiser::parse_attention_mode(
          sample_mode ? *sample_mode : ckpt.config.value("train", nlohmann::json::object()).value("mode", config.train.mode));
      const auto gt = curation::read_sample(sample_clip);
      const auto bundle = pipeline::bundle_from_sample(gt);
      if (g.dump_gate) dump_gate(config, bundle, mode, *g.dump_gate);
      const auto video = pipeline::colorize(ckpt.model, bundle, config, mode, config.seed);
      write_video(sample_out, video, gt.sample.supervision.first - 1);
    } else if (*eval_cmd) {
      const auto start = std::chrono::steady_clock::now();
      const auto config = build_config(g);
      metrics::EvalReport report;
      report.mode = eval_mode;
      report.seed = config.seed;
      if (fs::exists(eval_gt / "sample.json")) {
        const auto gt = curation::read_sample(eval_gt);
        report.clips.push_back(pipeline::evaluate_clip(eval_gt.filename().string(), read_video(eval_pred), gt));
        report.resolution = {gt.clip.frames.front().height(), gt.clip.frames.front().width()};
      } else {
        for (const auto& dir : pipeline::list_samples(eval_gt)) {
          const auto pred = eval_pred / dir.filename();
          if (!fs::is_directory(pred)) throw Error("missing predictions for " + dir.filename().string());
          const auto gt = curation::read_sample(dir);
          report.clips.push_back(pipeline::evaluate_clip(dir.filename().string(), read_video(pred), gt));
          report.resolution = {gt.clip.frames.front().height(), gt.clip.frames.front().width()};
        }
      }
      report.aggregate();
      report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::ofstream(eval_out) << metrics::to_json(report).dump(2) << '\n';
      std::cout << metrics::to_json(report).dump(2) << std::endl;
    } else if (*ablate_cmd) {
      auto config = build_config(g);
      if (!ablate_modes.empty()) config.ablate.modes = ablate_modes;
      fs::create_directories(ablate_out);
      const auto report = pipeline::run_ablate(config, ablate_out, &std::cerr);
      std::cout << report.table();
    }
  } catch (const denoiser::TrainingDiverged& e) {
    return fail("training_diverged", e.what());
  } catch (const ShapeError& e) {
    return fail("shape", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
