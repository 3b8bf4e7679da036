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


#include "support.hpp"

#include "timecolor/denoiser/checkpoint.hpp"
#include "timecolor/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace timecolor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("timecolor_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("derived seeds are stable and distinct") {
  using pipeline::derive_seed;
  CHECK(derive_seed(7, 3, 1) == derive_seed(7, 3, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base : {0, 1, 7})
    for (std::uint64_t i = 0; i < 20; ++i)
      for (std::uint64_t s = 0; s < 4; ++s) seen.insert(derive_seed(base, i, s));
  CHECK(seen.size() == 3 * 20 * 4);
  CHECK(pipeline::clip_id(7) == "clip_0007");
}

TEST_CASE("config maps onto module options") {
  auto c = tc_test::tiny_run_config(1);
  c.curate.mode = "arbitrary";
  c.curate.h = 3;
  const auto o = pipeline::curation_options(c);
  CHECK(o.sample.mode == curation::ReferenceMode::arbitrary_frame);
  CHECK(o.sample.f == 4);
  CHECK(o.refine.keyframe_stride == 3);
  CHECK(pipeline::curation_options(c, curation::ReferenceMode::multi_reference).sample.mode ==
        curation::ReferenceMode::multi_reference);
  const auto p = pipeline::scene_params(c);
  CHECK(p.num_frames == 12);
  CHECK(pipeline::make_schedule(c).steps == 10);
  CHECK(pipeline::sampler_options(c, 5).steps == 3);
}

TEST_CASE("rejections match a ground-truth oracle") {
  auto c = tc_test::tiny_run_config(3);
  c.curate.area_threshold = 0.16;
  const auto dir = scratch("reject");
  const auto summary = pipeline::run_synth(c, dir, 24, 3);
  CHECK(summary.clips == 24);
  CHECK(summary.accepted + summary.rejected == 24);
  CHECK(summary.accepted > 0);
  CHECK(summary.rejected > 0);

  std::vector<std::string> expected;
  for (int k = 0; k < 24; ++k) {
    const auto clip = synth::read_clip(dir / "raw" / pipeline::clip_id(k));
    if (tc_test::oracle_rejects(clip, c.curate.f, c.curate.g, c.curate.area_threshold))
      expected.push_back(pipeline::clip_id(k));
  }
  CHECK(summary.rejected_ids == expected);
  CHECK(int(pipeline::list_samples(dir / "dataset").size()) == summary.accepted);
  for (const auto& id : summary.rejected_ids) CHECK(curation::is_rejected(dir / "dataset" / id));
  std::ifstream in(dir / "dataset" / "summary.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("rejected").get<int>() == summary.rejected);
  fs::remove_all(dir);
}

TEST_CASE("bundles cover the supervision window") {
  const auto c = tc_test::tiny_run_config(4);
  const auto dir = scratch("bundle");
  pipeline::run_synth(c, dir, 3, 4);
  const auto samples = pipeline::list_samples(dir / "dataset");
  REQUIRE_FALSE(samples.empty());
  const auto s = curation::read_sample(samples.front());
  const auto b = pipeline::bundle_from_sample(s);
  CHECK(b.num_frames() == 4);
  CHECK(pipeline::targets_from_sample(s).size() == 4);
  CHECK(b.num_references() == s.sample.num_references());
  CHECK((b.sketches.front() == s.clip.sketches[8]).all());
  CHECK(pipeline::dominant_colors(s.sample).size() == std::size_t(b.num_references()));

  const auto again = pipeline::recurate(c, s, curation::ReferenceMode::starting_frame, 9);
  REQUIRE(again.has_value());
  CHECK(again->sample.num_references() == 1);
  CHECK(again->sample.f == 4);

  const auto swapped = pipeline::swap_references(s.sample, 1, 2);
  CHECK(swapped.references[0].image == s.sample.references[1].image);
  REQUIRE(swapped.correspondence.size() == s.sample.correspondence.size());
  for (std::size_t t = 0; t < swapped.correspondence.size(); ++t)
    CHECK((swapped.correspondence[t] == s.sample.correspondence[t]).all());
  fs::remove_all(dir);
}

TEST_CASE("swap outcome on ground truth") {
  const auto c = tc_test::tiny_run_config(5);
  const auto dir = scratch("swap");
  pipeline::run_synth(c, dir, 4, 5);
  bool checked = false;
  for (const auto& path : pipeline::list_samples(dir / "dataset")) {
    const auto s = curation::read_sample(path);
    if (s.sample.num_references() < 3) continue;
    // Ground-truth frames keep the original colors: no flip, old binding clean.
    const auto truth = pipeline::targets_from_sample(s);
    const auto o = pipeline::swap_leakage(truth, s, 1, 2);
    CHECK_FALSE(o.flipped);
    CHECK(o.old_binding.mean == 0.0);
    CHECK(pipeline::evaluate_clip("gt", truth, s).mean_leakage == 0.0);
    checked = true;
  }
  CHECK(checked);
  fs::remove_all(dir);
}

TEST_CASE("full pipeline is deterministic for a fixed seed") {
  const auto c = tc_test::tiny_run_config(6);
  const auto a = scratch("det_a"), b = scratch("det_b");
  nlohmann::json reports[2];
  int k = 0;
  for (const auto& dir : {a, b}) {
    pipeline::run_synth(c, dir, 4, 6);
    pipeline::TrainOptions opts;
    opts.checkpoint = dir / "model.bin";
    const auto trained = pipeline::run_train(c, dir / "dataset", opts);
    const auto r = pipeline::evaluate_model(c, trained.model, denoiser::AttentionMode::correspondence, dir / "dataset");
    reports[k++] = pipeline::to_json(pipeline::AblationReport{{r}}, false);
  }
  CHECK(tc_test::tree_differences(a, b).empty());
  CHECK(reports[0] == reports[1]);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("training writes per-stage checkpoints and skips empty stages") {
  auto c = tc_test::tiny_run_config(7);
  c.train.stage_steps = {0, 2, 1};
  const auto dir = scratch("stages");
  pipeline::run_synth(c, dir, 3, 7);
  pipeline::TrainOptions opts;
  opts.checkpoint = dir / "m.bin";
  const auto r = pipeline::run_train(c, dir / "dataset", opts);
  CHECK(r.stage_final_loss.size() == 2);
  CHECK(fs::exists(dir / "m.bin"));
  CHECK_FALSE(fs::exists(dir / "m.bin.stage1"));
  CHECK(fs::exists(dir / "m.bin.stage2"));
  CHECK(fs::exists(dir / "m.bin.stage3"));
  const auto ck = denoiser::load_checkpoint(dir / "m.bin");
  CHECK(ck.model.parameter_count() == r.model.parameter_count());
  fs::remove_all(dir);
}

TEST_CASE("ablation report shape") {
  auto c = tc_test::tiny_run_config(8);
  c.ablate.modes = {"full", "correspondence"};
  const auto dir = scratch("ablate");
  const auto report = pipeline::run_ablate(c, dir);
  REQUIRE(report.modes.size() == 2);
  REQUIRE(report.find("full") != nullptr);
  REQUIRE(report.find("correspondence") != nullptr);
  CHECK(report.find("soft_mask") == nullptr);
  for (const auto& m : report.modes) {
    CHECK_FALSE(m.failed);
    CHECK(m.normal.leakage >= 0.0);
    CHECK(m.normal.leakage <= 1.0);
    CHECK(m.normal.psnr > 0.0);
    CHECK(m.swap_responsiveness >= 0.0);
    CHECK(m.swap_responsiveness <= 1.0);
  }
  const auto table = report.table();
  CHECK(table.find("leak") != std::string::npos);
  CHECK(table.find("PSNR") != std::string::npos);
  std::ifstream in(dir / "ablation.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("schema") == "timecolor.ablation/1");
  CHECK(j.at("modes").size() == 2);
  CHECK(fs::exists(dir / "ablation.txt"));
  fs::remove_all(dir);
}

}  // TEST_SUITE
