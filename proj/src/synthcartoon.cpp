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

#include "timecolor/synthcartoon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace timecolor::synth {

Point Trajectory::center(int frame) const {
  const double t = frame;
  if (kind == Kind::linear) return {origin.x + velocity.x * t, origin.y + velocity.y * t};
  const double s = std::sin(2.0 * std::numbers::pi * t / period + phase);
  return {origin.x + amplitude.x * s, origin.y + amplitude.y * s};
}

bool palettes_separated(const Rgb& a, const Rgb& b) {
  for (std::size_t c = 0; c < 3; ++c)
    if (std::abs(int(a[c]) - int(b[c])) >= 64) return true;
  return false;
}

void validate(const SceneSpec& spec) {
  if (spec.num_frames < 2) throw Error("scene needs at least 2 frames");
  if (spec.height <= 0 || spec.width <= 0) throw Error("scene canvas must be non-empty");
  const auto n = spec.subjects.size();
  if (n < 1 || n > 6) throw Error("scene needs between 1 and 6 subjects, got " + std::to_string(n));
  for (std::size_t a = 0; a < n; ++a) {
    const auto& s = spec.subjects[a];
    if (s.disappear_frame && s.appear_frame >= *s.disappear_frame)
      throw Error("subject '" + s.name + "': appear_frame must precede disappear_frame");
    for (std::size_t b = a + 1; b < n; ++b)
      if (!palettes_separated(s.fill, spec.subjects[b].fill))
        throw Error("subjects '" + s.name + "' and '" + spec.subjects[b].name +
                    "' have fills closer than 64 in every channel");
  }
}

bool covers(const SubjectSpec& subject, int frame, double px, double py) {
  const Point c = subject.path.center(frame);
  const double r = subject.size_at(frame);
  if (r <= 0.0) return false;
  const double dx = px - c.x;
  const double dy = py - c.y;
  switch (subject.shape) {
    case Shape::circle:
      return dx * dx + dy * dy <= r * r;
    case Shape::rectangle:
      return std::abs(dx) <= r && std::abs(dy) <= r * subject.aspect;
    case Shape::triangle: {
      // Isosceles, apex up, base 2r wide at y = c.y + r, apex at y = c.y - r.
      if (dy < -r || dy > r) return false;
      const double half_width = r * (dy + r) / (2.0 * r);
      return std::abs(dx) <= half_width;
    }
  }
  return false;
}

GrayImage render_sketch(const RgbImage& frame, const LabelImage& gt_mask) {
  if (frame.height() != gt_mask.rows() || frame.width() != gt_mask.cols())
    throw ShapeError("render_sketch: frame and mask dimensions differ");
  const auto h = static_cast<int>(gt_mask.rows());
  const auto w = static_cast<int>(gt_mask.cols());
  GrayImage out = GrayImage::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = gt_mask(y, x);
      const bool edge = (y > 0 && gt_mask(y - 1, x) < v) || (y + 1 < h && gt_mask(y + 1, x) < v) ||
                        (x > 0 && gt_mask(y, x - 1) < v) || (x + 1 < w && gt_mask(y, x + 1) < v);
      if (edge) out(y, x) = 255;
    }
  return out;
}

Clip generate_clip(const SceneSpec& spec) {
  validate(spec);
  Clip clip;
  std::vector<std::int64_t> drawn(spec.subjects.size(), 0);
  for (int t = 0; t < spec.num_frames; ++t) {
    RgbImage frame(spec.height, spec.width, spec.background);
    LabelImage labels = LabelImage::Zero(spec.height, spec.width);
    for (std::size_t k = 0; k < spec.subjects.size(); ++k) {
      const auto& s = spec.subjects[k];
      if (!s.visible_at(t)) continue;
      for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
          if (covers(s, t, x + 0.5, y + 0.5)) {
            frame.set(y, x, s.fill);
            labels(y, x) = static_cast<std::int32_t>(k + 1);
            ++drawn[k];
          }
    }
    clip.sketches.push_back(render_sketch(frame, labels));
    clip.frames.push_back(std::move(frame));
    clip.gt_masks.push_back(std::move(labels));
  }
  for (std::size_t k = 0; k < spec.subjects.size(); ++k)
    if (drawn[k] == 0)
      throw Error("subject '" + spec.subjects[k].name + "' never lands on the " + std::to_string(spec.height) +
                  "x" + std::to_string(spec.width) + " canvas");
  return clip;
}

SceneSpec random_scene(std::uint64_t seed, const SceneParams& params) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> channel(0, 255);

  SceneSpec spec;
  spec.seed = seed;
  spec.num_frames = params.num_frames;
  spec.height = params.height;
  spec.width = params.width;

  auto far_enough = [](const Rgb& a, const Rgb& b) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) d2 += std::pow(double(a[c]) - double(b[c]), 2.0);
    return palettes_separated(a, b) && d2 >= 120.0 * 120.0;
  };
  auto random_rgb = [&] { return Rgb{std::uint8_t(channel(rng)), std::uint8_t(channel(rng)), std::uint8_t(channel(rng))}; };

  std::vector<Rgb> taken;
  auto pick_color = [&] {
    for (;;) {
      const Rgb c = random_rgb();
      if (std::all_of(taken.begin(), taken.end(), [&](const Rgb& o) { return far_enough(c, o); })) {
        taken.push_back(c);
        return c;
      }
    }
  };
  spec.background = pick_color();

  const int n = params.num_subjects;
  const double lane = double(params.width) / n;
  for (int k = 0; k < n; ++k) {
    SubjectSpec s;
    s.name = "subject" + std::to_string(k + 1);
    s.shape = static_cast<Shape>(std::uniform_int_distribution<int>(0, 2)(rng));
    s.fill = pick_color();
    s.size = params.min_size + (params.max_size - params.min_size) * unit(rng);
    s.size_rate = (unit(rng) - 0.5) * 0.2;
    s.aspect = s.shape == Shape::rectangle ? 0.7 + 0.5 * unit(rng) : 1.0;
    const double cx = lane * (k + 0.5) + (unit(rng) - 0.5) * 0.2 * lane;
    const double cy = params.height * (0.35 + 0.3 * unit(rng));
    s.path.origin = {cx, cy};
    if (unit(rng) < 0.5) {
      s.path.kind = Trajectory::Kind::linear;
      const double span = std::max(1, params.num_frames - 1);
      s.path.velocity = {(unit(rng) - 0.5) * 2.0 * params.max_shift / span,
                         (unit(rng) - 0.5) * 2.0 * params.max_shift / span};
    } else {
      s.path.kind = Trajectory::Kind::sinusoidal;
      s.path.amplitude = {(unit(rng) - 0.5) * params.max_shift, (unit(rng) - 0.5) * params.max_shift};
      s.path.period = 6.0 + 10.0 * unit(rng);
      s.path.phase = 2.0 * std::numbers::pi * unit(rng);
    }
    if (static_cast<std::size_t>(k) < params.appear_frames.size()) s.appear_frame = params.appear_frames[std::size_t(k)];
    spec.subjects.push_back(std::move(s));
  }
  return spec;
}

namespace {

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::circle: return "circle";
    case Shape::rectangle: return "rectangle";
    case Shape::triangle: return "triangle";
  }
  return "circle";
}

Shape parse_shape(const std::string& s) {
  if (s == "circle") return Shape::circle;
  if (s == "rectangle") return Shape::rectangle;
  if (s == "triangle") return Shape::triangle;
  throw Error("unknown shape '" + s + "'");
}

nlohmann::json point_json(const Point& p) { return nlohmann::json::array({p.x, p.y}); }
Point point_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void to_json(nlohmann::json& j, const SceneSpec& spec) {
  j = nlohmann::json::object();
  j["seed"] = spec.seed;
  j["num_frames"] = spec.num_frames;
  j["canvas"] = {spec.height, spec.width};
  j["background"] = spec.background;
  auto subjects = nlohmann::json::array();
  for (const auto& s : spec.subjects) {
    nlohmann::json js;
    js["name"] = s.name;
    js["shape"] = shape_name(s.shape);
    js["fill"] = s.fill;
    js["size"] = s.size;
    js["size_rate"] = s.size_rate;
    js["aspect"] = s.aspect;
    js["appear_frame"] = s.appear_frame;
    js["disappear_frame"] = s.disappear_frame ? nlohmann::json(*s.disappear_frame) : nlohmann::json();
    nlohmann::json path;
    path["kind"] = s.path.kind == Trajectory::Kind::linear ? "linear" : "sinusoidal";
    path["origin"] = point_json(s.path.origin);
    path["velocity"] = point_json(s.path.velocity);
    path["amplitude"] = point_json(s.path.amplitude);
    path["period"] = s.path.period;
    path["phase"] = s.path.phase;
    js["trajectory"] = path;
    subjects.push_back(js);
  }
  j["subjects"] = subjects;
}

void from_json(const nlohmann::json& j, SceneSpec& spec) {
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.num_frames = j.at("num_frames").get<int>();
  spec.height = j.at("canvas").at(0).get<int>();
  spec.width = j.at("canvas").at(1).get<int>();
  spec.background = j.at("background").get<Rgb>();
  spec.subjects.clear();
  for (const auto& js : j.at("subjects")) {
    SubjectSpec s;
    s.name = js.at("name").get<std::string>();
    s.shape = parse_shape(js.at("shape").get<std::string>());
    s.fill = js.at("fill").get<Rgb>();
    s.size = js.at("size").get<double>();
    s.size_rate = js.value("size_rate", 0.0);
    s.aspect = js.value("aspect", 1.0);
    s.appear_frame = js.value("appear_frame", 0);
    if (js.contains("disappear_frame") && !js["disappear_frame"].is_null())
      s.disappear_frame = js["disappear_frame"].get<int>();
    const auto& path = js.at("trajectory");
    s.path.kind = path.at("kind").get<std::string>() == "linear" ? Trajectory::Kind::linear
                                                                 : Trajectory::Kind::sinusoidal;
    s.path.origin = point_from(path.at("origin"));
    s.path.velocity = point_from(path.at("velocity"));
    s.path.amplitude = point_from(path.at("amplitude"));
    s.path.period = path.at("period").get<double>();
    s.path.phase = path.at("phase").get<double>();
    spec.subjects.push_back(std::move(s));
  }
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d.png", index);
  return buf;
}

void write_clip(const std::filesystem::path& dir, const SceneSpec& spec, const Clip& clip) {
  namespace fs = std::filesystem;
  for (const char* sub : {"frames", "masks", "sketches"}) fs::create_directories(dir / sub);
  for (int t = 0; t < clip.num_frames(); ++t) {
    const auto name = frame_name(t);
    io::write_png(dir / "frames" / name, clip.frames[std::size_t(t)]);
    io::write_png(dir / "masks" / name, io::labels_to_gray(clip.gt_masks[std::size_t(t)]));
    io::write_png(dir / "sketches" / name, clip.sketches[std::size_t(t)]);
  }
  nlohmann::json j = spec;
  std::ofstream(dir / "clip.json") << j.dump(2) << '\n';
}

Clip read_clip(const std::filesystem::path& dir, SceneSpec* spec) {
  std::ifstream in(dir / "clip.json");
  if (!in) throw Error("missing clip.json in " + dir.string());
  const auto j = nlohmann::json::parse(in);
  const auto parsed = j.get<SceneSpec>();
  if (spec) *spec = parsed;
  Clip clip;
  for (int t = 0; t < parsed.num_frames; ++t) {
    const auto name = frame_name(t);
    clip.frames.push_back(io::read_png_rgb(dir / "frames" / name));
    clip.gt_masks.push_back(io::gray_to_labels(io::read_png_gray(dir / "masks" / name)));
    clip.sketches.push_back(io::read_png_gray(dir / "sketches" / name));
  }
  return clip;
}

}  // namespace timecolor::synth
