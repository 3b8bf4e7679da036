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

#include "timecolor/denoiser/conditioning.hpp"

namespace timecolor::denoiser {

std::string to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::full: return "full";
    case AttentionMode::inter_ref: return "inter_ref";
    case AttentionMode::correspondence: return "correspondence";
    case AttentionMode::soft_mask: return "soft_mask";
  }
  return "full";
}

AttentionMode parse_attention_mode(const std::string& s) {
  if (s == "full") return AttentionMode::full;
  if (s == "inter_ref") return AttentionMode::inter_ref;
  if (s == "correspondence") return AttentionMode::correspondence;
  if (s == "soft_mask") return AttentionMode::soft_mask;
  throw Error("unknown attention mode '" + s + "'");
}

correspond::GateMode gate_mode(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::inter_ref: return correspond::GateMode::inter_ref;
    case AttentionMode::correspondence: return correspond::GateMode::correspondence;
    case AttentionMode::full:
    case AttentionMode::soft_mask: break;
  }
  return correspond::GateMode::full;
}

void ConditioningBundle::validate() const {
  if (sketches.empty()) throw ShapeError("bundle: no sketch frames");
  if (references.empty()) throw Error("bundle: at least one reference is required");
  if (correspondence.size() != sketches.size()) throw ShapeError("bundle: one correspondence map per sketch frame");
  const auto h = sketches.front().rows(), w = sketches.front().cols();
  for (const auto& s : sketches)
    if (s.rows() != h || s.cols() != w) throw ShapeError("bundle: sketch sizes differ");
  for (const auto& r : references)
    if (r.height() != h || r.width() != w) throw ShapeError("bundle: references must match the frame size");
  for (const auto& c : correspondence) {
    if (c.rows() != h || c.cols() != w) throw ShapeError("bundle: correspondence size differs from frames");
    if (c.minCoeff() < 1 || c.maxCoeff() > num_references())
      throw Error("bundle: correspondence identities must lie in 1.." + std::to_string(num_references()));
  }
}

std::vector<Rgb> default_mask_palette() {
  return {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 0}, {255, 0, 255}, {0, 255, 255}, {255, 255, 255}, {0, 0, 0}};
}

std::vector<RgbImage> soft_mask_condition(const ConditioningBundle& bundle, const std::vector<Rgb>& palette) {
  if (bundle.num_references() > static_cast<int>(palette.size()))
    throw Error("soft_mask_condition: " + std::to_string(bundle.num_references()) + " identities exceed a palette of " +
                std::to_string(palette.size()));
  std::vector<RgbImage> out;
  for (const auto& ids : bundle.correspondence) {
    RgbImage img(static_cast<int>(ids.rows()), static_cast<int>(ids.cols()));
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) img.set(y, x, palette.at(std::size_t(ids(y, x) - 1)));
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace timecolor::denoiser
