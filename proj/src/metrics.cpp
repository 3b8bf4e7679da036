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

#include "timecolor/metrics.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace timecolor::metrics {

namespace {

void check_same(const RgbImage& a, const RgbImage& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) throw ShapeError(std::string(what) + ": shape mismatch");
}

void check_same(const Video& a, const Video& b, const char* what) {
  if (a.size() != b.size()) throw ShapeError(std::string(what) + ": frame counts differ");
  for (std::size_t t = 0; t < a.size(); ++t) check_same(a[t], b[t], what);
}

double squared_error(const RgbImage& a, const RgbImage& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = double(a.data()[i]) - double(b.data()[i]);
    s += d * d;
  }
  return s;
}

double psnr_from_mse(double mse) { return mse == 0.0 ? kPsnrCap : 20.0 * std::log10(255.0 / std::sqrt(mse)); }

}  // namespace

double psnr(const RgbImage& a, const RgbImage& b) {
  check_same(a, b, "psnr");
  return psnr_from_mse(squared_error(a, b) / double(a.data().size()));
}

double psnr(const Video& a, const Video& b) {
  check_same(a, b, "psnr");
  double s = 0.0, n = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    s += squared_error(a[t], b[t]);
    n += double(a[t].data().size());
  }
  if (n == 0.0) throw ShapeError("psnr: empty video");
  return psnr_from_mse(s / n);
}

double ssim(const RgbImage& a, const RgbImage& b, const SsimOptions& o) {
  check_same(a, b, "ssim");
  if (o.window < 1 || a.height() < o.window || a.width() < o.window)
    throw ShapeError("ssim: image smaller than the " + std::to_string(o.window) + "px window");
  const double c1 = std::pow(o.k1 * 255.0, 2.0), c2 = std::pow(o.k2 * 255.0, 2.0);
  const int wy = a.height() / o.window, wx = a.width() / o.window;
  const double count = double(o.window) * o.window;
  double total = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int by = 0; by < wy; ++by)
      for (int bx = 0; bx < wx; ++bx) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int y = by * o.window; y < (by + 1) * o.window; ++y)
          for (int x = bx * o.window; x < (bx + 1) * o.window; ++x) {
            const double va = a.at(y, x, c), vb = b.at(y, x, c);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
          }
        const double ma = sa / count, mb = sb / count;
        const double va = saa / count - ma * ma, vb = sbb / count - mb * mb, cov = sab / count - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
  return total / (3.0 * wy * wx);
}

double ssim(const Video& a, const Video& b, const SsimOptions& o) {
  check_same(a, b, "ssim");
  if (a.empty()) throw ShapeError("ssim: empty video");
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += ssim(a[t], b[t], o);
  return s / double(a.size());
}

double mask_iou(const LabelImage& a, const LabelImage& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("mask_iou: shape mismatch");
  std::set<std::int32_t> labels;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a.data()[i] > 0) labels.insert(a.data()[i]);
    if (b.data()[i] > 0) labels.insert(b.data()[i]);
  }
  if (labels.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (auto l : labels) s += timecolor::mask_iou(label_mask(a, l), label_mask(b, l));
  return s / double(labels.size());
}

double mask_iou(const LabelVideo& a, const LabelVideo& b) {
  if (a.size() != b.size()) throw ShapeError("mask_iou: frame counts differ");
  double s = 0.0;
  int n = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double v = mask_iou(a[t], b[t]);
    if (std::isnan(v)) continue;
    s += v;
    ++n;
  }
  return n ? s / n : 1.0;
}

Color mean_color(const RgbImage& image, const BinaryMask& mask) {
  Color sum{0, 0, 0};
  double n = 0;
  const bool all = !mask.any();
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      if (!all && !mask(y, x)) continue;
      for (int c = 0; c < 3; ++c) sum[std::size_t(c)] += image.at(y, x, c);
      n += 1;
    }
  for (auto& v : sum) v /= n;
  return sum;
}

namespace {

double dist2(const Color& a, const Color& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < 3; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

}  // namespace

LeakageResult leakage(const Video& generated, const LabelVideo& gt_masks, const std::vector<Color>& dominant,
                      const std::vector<std::pair<int, int>>& subject_to_ref) {
  if (generated.size() != gt_masks.size()) throw ShapeError("leakage: frame counts differ");
  LeakageResult out;
  for (const auto& [label, ref] : subject_to_ref) {
    if (ref < 0 || ref >= static_cast<int>(dominant.size())) throw Error("leakage: reference index out of range");
    SubjectLeakage s{label, ref, 0.0, 0};
    int leaked = 0;
    for (std::size_t t = 0; t < generated.size(); ++t) {
      const auto& img = generated[t];
      if (img.height() != gt_masks[t].rows() || img.width() != gt_masks[t].cols())
        throw ShapeError("leakage: mask and frame sizes differ");
      const BinaryMask m = label_mask(gt_masks[t], label);
      if (!m.any()) continue;
      const Color c = mean_color(img, m);
      const double own = dist2(c, dominant[std::size_t(ref)]);
      bool nearer_other = false;
      for (std::size_t r = 0; r < dominant.size(); ++r)
        if (static_cast<int>(r) != ref && dist2(c, dominant[r]) < own) nearer_other = true;
      leaked += nearer_other ? 1 : 0;
      ++s.frames;
    }
    s.score = s.frames ? double(leaked) / s.frames : 0.0;
    out.subjects.push_back(s);
  }
  double sum = 0.0;
  int n = 0;
  for (const auto& s : out.subjects)
    if (s.frames) sum += s.score, ++n;
  out.mean = n ? sum / n : 0.0;
  return out;
}

void EvalReport::aggregate() {
  psnr = ssim = leakage = 0.0;
  double iou = 0.0;
  int iou_n = 0;
  for (const auto& c : clips) {
    psnr += c.psnr;
    ssim += c.ssim;
    leakage += c.mean_leakage;
    if (c.mask_iou) iou += *c.mask_iou, ++iou_n;
  }
  if (!clips.empty()) {
    const double n = double(clips.size());
    psnr /= n;
    ssim /= n;
    leakage /= n;
  }
  mask_iou = iou_n ? std::optional<double>(iou / iou_n) : std::nullopt;
}

nlohmann::json to_json(const EvalReport& r, bool include_runtime) {
  nlohmann::json j;
  j["schema"] = "timecolor.eval/1";
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  j["resolution"] = r.resolution;
  j["aggregate"] = {{"psnr_db", r.psnr}, {"ssim", r.ssim}, {"leakage", r.leakage},
                    {"mask_iou", r.mask_iou ? nlohmann::json(*r.mask_iou) : nlohmann::json()}};
  auto clips = nlohmann::json::array();
  for (const auto& c : r.clips) {
    nlohmann::json jc;
    jc["clip"] = c.clip;
    jc["psnr_db"] = c.psnr;
    jc["ssim"] = c.ssim;
    jc["mask_iou"] = c.mask_iou ? nlohmann::json(*c.mask_iou) : nlohmann::json();
    jc["leakage"] = c.mean_leakage;
    auto subjects = nlohmann::json::array();
    for (const auto& s : c.leakage)
      subjects.push_back({{"label", s.label}, {"assigned_ref", s.assigned_ref + 1}, {"score", s.score}, {"frames", s.frames}});
    jc["subjects"] = subjects;
    clips.push_back(jc);
  }
  j["clips"] = clips;
  return j;
}

}  // namespace timecolor::metrics
