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


// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   timecolor_acceptance [--work DIR] [--only 1,2,...] [--keep] [--report FILE]

#include "support.hpp"

#include "timecolor/pipeline.hpp"

#include <CLI11.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace timecolor;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr int kAttentionSequences = 100;
constexpr double kAttentionOracleTol = 1e-6;
constexpr double kAttentionSeconds = 60.0;
constexpr double kGradTightRel = 1e-4;
constexpr double kGradTightFraction = 0.99;
constexpr double kGradWorstRel = 1e-3;
constexpr double kGradSeconds = 300.0;
constexpr int kRopeTuples = 1000;
constexpr double kRopeNormTol = 1e-6;
constexpr double kRopeRelativeTol = 1e-5;
constexpr int kMajorityGrids = 1000;
constexpr int kCurationScenarios = 50;
constexpr double kOrderingSlack = 0.05;
constexpr double kCorrespondenceLeakMax = 0.2;
constexpr double kSwapResponsivenessMin = 0.8;
constexpr double kMorphIouLo = 0.7, kMorphIouHi = 0.9;
constexpr double kMorphPsnrTol = 1.5;
constexpr double kMorphLeakTol = 0.1;
constexpr double kSoftMaskMargin = 0.10;
constexpr int kMetricTrials = 100;
constexpr double kMetricOracleTol = 1e-9;
constexpr double kClosedFormTol = 1e-4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Desk-scale ablation: 200 training clips of two subjects, 20 held-out.
RunConfig ablation_config() {
  RunConfig c;
  c.seed = 7;
  c.synth.num_frames = 12;
  c.synth.num_subjects = 2;
  c.curate.f = 4;
  c.curate.g = 4;
  c.codec.stride = 2;
  c.codec.patch = 2;
  c.model.dim = 64;
  c.model.blocks = 3;
  c.model.heads = 4;
  c.model.patch_dim = 12;
  c.schedule.beta_scale = 0.0;
  c.schedule.sampler = "deterministic";
  c.schedule.sample_steps = 25;
  c.train.stage_steps = {0, 0, 5000};
  c.train.log_every = 500;
  c.ablate.modes = {"full", "inter_ref", "correspondence", "soft_mask"};
  c.ablate.train_clips = 200;
  c.ablate.heldout_clips = 20;
  return c;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = tc_test::attention_check<float>(kAttentionSequences, 1);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << c.sequences << " sequences, " << c.nonzero_disallowed << "/" << c.disallowed
    << " disallowed weights nonzero, max |attn - deletion oracle| = " << fmt("%.2e", c.max_abs_vs_oracle) << ", "
    << fmt("%.1f", secs) << " s";
  return {c.sequences == kAttentionSequences && c.disallowed > 0 && c.nonzero_disallowed == 0 &&
              c.max_abs_vs_oracle < kAttentionOracleTol && secs < kAttentionSeconds,
          d.str()};
}

Outcome criterion2() {
  const auto c = tc_test::parameter_invariance(denoiser::ModelConfig{}, 2);
  const std::set<std::int64_t> counts(c.parameter_counts.begin(), c.parameter_counts.end());
  std::ostringstream d;
  d << c.parameter_counts.size() << " forward passes (R in {1,2,4,8}, f in {1,4,8}), distinct parameter counts "
    << counts.size() << " (" << *counts.begin() << "), affine residual " << c.affine_residual;
  return {c.shapes_ok && c.parameter_counts.size() == 12 && counts.size() == 1 && c.affine_residual == 0.0, d.str()};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = tc_test::gradient_check(tc_test::tiny_model_config(), 3);
  const double secs = seconds_since(t0);
  const double frac = double(g.within_tight) / double(g.checked);
  std::ostringstream d;
  d << g.checked << " parameters, " << fmt("%.4f", frac) << " within " << kGradTightRel << ", worst "
    << fmt("%.2e", g.worst) << ", " << fmt("%.1f", secs) << " s";
  return {g.checked > 0 && frac >= kGradTightFraction && g.worst < kGradWorstRel && secs < kGradSeconds, d.str()};
}

Outcome criterion4() {
  const denoiser::ModelConfig mc;
  const auto rc = mc.rope();
  const auto e = tc_test::rope_property_errors(rc, kRopeTuples, 4);
  // Effective (l, i, j) ranges per modality over the largest grid the config admits.
  using tokens::Modality;
  std::map<int, std::set<std::tuple<int, int, int>>> seen;
  std::map<int, std::array<int, 4>> box;  // min i, max i, min j, max j
  for (const auto m : {Modality::target, Modality::sketch, Modality::ref, Modality::mask_cond})
    for (int l = -8; l <= 8; ++l)
      for (int i = 0; i < rc.offset_h; ++i)
        for (int j = 0; j < rc.offset_w; ++j) {
          tokens::Token t;
          t.modality = m;
          t.l = l;
          t.i = i;
          t.j = j;
          const auto p = rope::rope_index(t, rc);
          const int slot = rope::modality_slot(m);
          seen[slot].insert({p.l, p.i, p.j});
          auto& bx = box.try_emplace(slot, std::array<int, 4>{p.i, p.i, p.j, p.j}).first->second;
          bx = {std::min(bx[0], p.i), std::max(bx[1], p.i), std::min(bx[2], p.j), std::max(bx[3], p.j)};
        }
  bool disjoint = seen.size() == 4;
  int pairs = 0;
  for (auto a = box.begin(); a != box.end(); ++a)
    for (auto b = std::next(a); b != box.end(); ++b) {
      ++pairs;
      const auto &x = a->second, &y = b->second;
      const bool rows_apart = x[1] < y[0] || y[1] < x[0];
      const bool cols_apart = x[3] < y[2] || y[3] < x[2];
      bool shared = false;
      for (const auto& p : seen[a->first]) shared = shared || seen[b->first].count(p);
      disjoint = disjoint && rows_apart && cols_apart && !shared;
    }
  std::ostringstream d;
  d << kRopeTuples << " tuples: norm err " << fmt("%.2e", e.norm) << ", relative-position err "
    << fmt("%.2e", e.relative) << "; " << pairs << " modality pairs disjoint: " << (disjoint ? "yes" : "no");
  return {e.norm < kRopeNormTol && e.relative < kRopeRelativeTol && disjoint, d.str()};
}

Outcome criterion5() {
  std::mt19937_64 rng(5);
  int mismatches = 0, with_ties = 0;
  for (int k = 0; k < kMajorityGrids; ++k) {
    const int stride = 1 + int(rng() % 3), patch = 1 + int(rng() % 2), R = 1 + int(rng() % 5);
    const auto ids = tc_test::random_ids_with_ties(rng, 3, 4, stride * patch, R);
    const auto got = correspond::downsample_ids(ids, stride, patch);
    if (!(got == tc_test::histogram_majority(ids, stride * patch)).all()) ++mismatches;
    with_ties += stride * patch > 1;
  }
  std::ostringstream d;
  d << kMajorityGrids << " grids (" << with_ties << " with forced ties), " << mismatches << " mismatches";
  return {mismatches == 0, d.str()};
}

Outcome criterion6() {
  int mismatched = 0, duplicates = 0, late = 0;
  std::string first_why;
  for (int k = 0; k < kCurationScenarios; ++k) {
    const auto spec = tc_test::late_scene(std::uint64_t(1000 + k), 14, 3);
    for (const auto& s : spec.subjects) late += s.appear_frame > 0;
    const auto clip = synth::generate_clip(spec);
    const int h = 1 + k % 5;
    curation::GroundTruthDetector det;
    curation::GroundTruthTracker tr;
    const auto tracks = curation::iterative_refine(clip, det, tr, curation::RefineOptions{h, 0.5});
    std::set<int> labels;
    for (const auto& inst : tracks.instances)
      if (!labels.insert(inst.descriptor.label_hint).second) ++duplicates;
    std::string why;
    if (!tc_test::matches_ground_truth_union(clip, tracks, h, &why)) {
      ++mismatched;
      if (first_why.empty()) first_why = why;
    }
  }
  std::mt19937_64 rng(6);
  int window_errors = 0;
  for (int k = 0; k < 1000; ++k) {
    const int f = 1 + int(rng() % 20), g = int(rng() % 20), L = f + g + 1 + int(rng() % 40);
    const auto w = curation::source_window(L, f, g);
    const auto s = curation::supervision_window(L, f);
    window_errors += !(w.first == 1 && w.last == L - g - f && s.size() == f && s.last == L && s.first - w.last >= g + 1);
  }
  std::ostringstream d;
  d << kCurationScenarios << " scenarios (" << late << " late subjects): " << mismatched
    << " differ from the ground-truth union, " << duplicates << " duplicates; 1000 windows, " << window_errors
    << " errors";
  if (!first_why.empty()) d << " [" << first_why << "]";
  return {mismatched == 0 && duplicates == 0 && window_errors == 0 && late > 0, d.str()};
}

struct AblationOutcomes {
  Outcome c7, c8, c9, c10;
};

AblationOutcomes ablation(const fs::path& work, std::string& table) {
  const auto config = ablation_config();
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = pipeline::run_ablate(config, work / "ablate", &std::cerr);
  const double secs = seconds_since(t0);
  table = report.table();
  std::cerr << table;
  AblationOutcomes out;
  const auto* full = report.find("full");
  const auto* inter = report.find("inter_ref");
  const auto* corr = report.find("correspondence");
  const auto* soft = report.find("soft_mask");
  auto usable = [](const pipeline::ModeResult* m) { return m && !m->failed; };
  if (!usable(full) || !usable(inter) || !usable(corr) || !usable(soft)) {
    const std::string why = "a mode failed to train or evaluate (see ablation table)";
    return {{false, why}, {false, why}, {false, why}, {false, why}};
  }
  const double lc = corr->swapped.leakage, li = inter->swapped.leakage, lf = full->swapped.leakage;
  {
    std::ostringstream d;
    d << "swapped-bank leakage: correspondence " << fmt("%.3f", lc) << ", inter_ref " << fmt("%.3f", li) << ", full "
      << fmt("%.3f", lf) << " (slack " << kOrderingSlack << ", bound " << kCorrespondenceLeakMax << "); "
      << corr->swapped.clips.size() << " held-out clips, " << fmt("%.0f", secs) << " s total";
    out.c7 = {lc <= li + kOrderingSlack && li <= lf + kOrderingSlack && lc < kCorrespondenceLeakMax &&
                  corr->swapped.clips.size() == std::size_t(config.ablate.heldout_clips),
              d.str()};
  }
  {
    std::ostringstream d;
    d << "correspondence swap responsiveness " << fmt("%.2f", corr->swap_responsiveness) << " (need >= "
      << kSwapResponsivenessMin << ")";
    out.c8 = {corr->swap_responsiveness >= kSwapResponsivenessMin, d.str()};
  }
  {
    const double dp = corr->morphed.psnr - corr->normal.psnr, dl = corr->morphed.leakage - corr->normal.leakage;
    std::ostringstream d;
    d << "morphed mask IoU " << fmt("%.3f", corr->morph_iou) << ", dPSNR " << fmt("%+.2f", dp) << " dB, dleak "
      << fmt("%+.3f", dl);
    out.c9 = {corr->morph_iou >= kMorphIouLo && corr->morph_iou <= kMorphIouHi && std::abs(dp) < kMorphPsnrTol &&
                  std::abs(dl) < kMorphLeakTol,
              d.str()};
  }
  {
    std::ostringstream d;
    d << "swap responsiveness soft_mask " << fmt("%.2f", soft->swap_responsiveness) << " vs correspondence "
      << fmt("%.2f", corr->swap_responsiveness) << " (margin " << kSoftMaskMargin << ")";
    out.c10 = {soft->swap_responsiveness <= corr->swap_responsiveness - kSoftMaskMargin, d.str()};
  }
  return out;
}

Outcome criterion11() {
  const auto c = tc_test::metric_check(kMetricTrials, 11);
  RgbImage a(16, 16, {100, 100, 100}), b(16, 16, {101, 99, 101});
  std::mt19937_64 rng(11);
  const auto img = tc_test::random_image(rng, 24, 24);
  const double p = metrics::psnr(a, b), s = metrics::ssim(img, img);
  std::ostringstream d;
  d << kMetricTrials << " random inputs: max |err| psnr " << fmt("%.1e", c.psnr) << ", ssim " << fmt("%.1e", c.ssim)
    << ", iou " << fmt("%.1e", c.iou) << "; MSE=1 -> " << fmt("%.4f", p) << " dB; SSIM(a,a) = " << fmt("%.6f", s);
  return {c.trials == kMetricTrials && c.psnr < kMetricOracleTol && c.ssim < kMetricOracleTol &&
              c.iou < kMetricOracleTol && std::abs(p - 48.1308) < kClosedFormTol && std::abs(s - 1.0) < kClosedFormTol,
          d.str()};
}

Outcome criterion12(const fs::path& work) {
  auto c = tc_test::tiny_run_config(12);
  nlohmann::json reports[2];
  const fs::path dirs[2] = {work / "determinism_a", work / "determinism_b"};
  for (int k = 0; k < 2; ++k) {
    fs::remove_all(dirs[k]);
    pipeline::run_synth(c, dirs[k], 6, 12);
    pipeline::TrainOptions opts;
    opts.checkpoint = dirs[k] / "model.bin";
    const auto trained = pipeline::run_train(c, dirs[k] / "dataset", opts);
    const auto r = pipeline::evaluate_model(c, trained.model, denoiser::AttentionMode::correspondence, dirs[k] / "dataset");
    reports[k] = pipeline::to_json(pipeline::AblationReport{{r}}, false);
  }
  const auto diff = tc_test::tree_differences(dirs[0], dirs[1]);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) files += e.is_regular_file();
  std::ostringstream d;
  d << files << " files compared, " << diff.size() << " differ; EvalReports "
    << (reports[0] == reports[1] ? "identical" : "differ");
  if (!diff.empty()) d << " (first: " << diff.front() << ")";
  return {diff.empty() && files > 0 && reports[0] == reports[1], d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TimeColor acceptance suite"};
  std::string work = (fs::temp_directory_path() / "timecolor_acceptance").string();
  std::vector<int> only;
  bool keep = false;
  std::string report_path;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_flag("--keep", keep, "Keep the scratch directory");
  app.add_option("--report", report_path, "Also write the result lines (and ablation table) to this file");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(work);
  auto wanted = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
  int failed = 0;
  std::ostringstream lines;
  std::string table;
  auto report = [&](int k, const std::string& name, const Outcome& o) {
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << "  C" << k << " " << name << ": " << o.detail;
    std::cout << line.str() << std::endl;
    lines << line.str() << "\n";
    failed += !o.pass;
  };
  auto run = [&](int k, const std::string& name, const std::function<Outcome()>& f) {
    if (!wanted(k)) return;
    try {
      report(k, name, f());
    } catch (const std::exception& e) {
      report(k, name, {false, std::string("exception: ") + e.what()});
    }
  };

  run(1, "zero-leakage attention", criterion1);
  run(2, "parameter invariance", criterion2);
  run(3, "gradient correctness", criterion3);
  run(4, "rope properties", criterion4);
  run(5, "majority-vote oracle", criterion5);
  run(6, "curation correctness", criterion6);
  if (wanted(7) || wanted(8) || wanted(9) || wanted(10)) {
    AblationOutcomes a;
    try {
      a = ablation(work, table);
    } catch (const std::exception& e) {
      const Outcome bad{false, std::string("exception: ") + e.what()};
      a = {bad, bad, bad, bad};
    }
    if (wanted(7)) report(7, "desk ablation leakage ordering", a.c7);
    if (wanted(8)) report(8, "reference-swap responsiveness", a.c8);
    if (wanted(9)) report(9, "imperfect-mask robustness", a.c9);
    if (wanted(10)) report(10, "soft-mask shortcut probe", a.c10);
  }
  run(11, "metric unit suite", criterion11);
  run(12, "end-to-end determinism", [&] { return criterion12(work); });

  const std::string verdict = failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED";
  std::cout << verdict << std::endl;
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << lines.str() << verdict << "\n";
    if (!table.empty()) out << "\n" << table;
  }
  if (!keep) fs::remove_all(work);
  return failed;
}
