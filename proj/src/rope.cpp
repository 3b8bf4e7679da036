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

#include "timecolor/rope.hpp"

namespace timecolor::rope {

RopeConfig RopeConfig::for_head_dim(int head_dim, int offset_h, int offset_w, double theta) {
  RopeConfig c;
  c.head_dim = head_dim;
  c.height_dim = (head_dim / 4) / 2 * 2;
  c.width_dim = c.height_dim;
  c.temporal_dim = head_dim - c.height_dim - c.width_dim;
  c.theta = theta;
  c.offset_h = offset_h;
  c.offset_w = offset_w;
  c.validate();
  return c;
}

void RopeConfig::validate() const {
  if (head_dim <= 0 || head_dim % 2 != 0) throw Error("rope: head_dim must be positive and even");
  if (temporal_dim % 2 || height_dim % 2 || width_dim % 2 || temporal_dim < 0 || height_dim < 0 || width_dim < 0)
    throw Error("rope: axis sub-dimensions must be non-negative and even");
  if (temporal_dim + height_dim + width_dim != head_dim) throw Error("rope: axis sub-dimensions must sum to head_dim");
  if (offset_h <= 0 || offset_w <= 0) throw Error("rope: offsets must be positive");
  if (theta <= 1.0) throw Error("rope: base frequency must exceed 1");
}

void RopeConfig::check_grid(int grid_rows, int grid_cols) const {
  if (offset_h < grid_rows || offset_w < grid_cols)
    throw Error("rope: offsets (" + std::to_string(offset_h) + ", " + std::to_string(offset_w) +
                ") do not cover a " + std::to_string(grid_rows) + "x" + std::to_string(grid_cols) + " patch grid");
}

int modality_slot(tokens::Modality m) {
  switch (m) {
    case tokens::Modality::target: return 0;
    case tokens::Modality::sketch: return 1;
    case tokens::Modality::ref: return 2;
    case tokens::Modality::mask_cond: return 3;
    case tokens::Modality::text: break;
  }
  throw Error("rope: TEXT tokens carry no rotary position");
}

RopeIndex rope_index(const tokens::Token& token, const RopeConfig& config) {
  const int m = modality_slot(token.modality);
  return {token.l, token.i + m * config.offset_h, token.j + m * config.offset_w};
}

double pair_angle(const RopeConfig& config, const RopeIndex& index, int k) {
  int sub = config.temporal_dim, pos = index.l, local = k;
  if (2 * k >= config.temporal_dim) {
    local = k - config.temporal_dim / 2;
    if (2 * local < config.height_dim) {
      sub = config.height_dim;
      pos = index.i;
    } else {
      local -= config.height_dim / 2;
      sub = config.width_dim;
      pos = index.j;
    }
  }
  return pos * std::pow(config.theta, -2.0 * local / sub);
}

}  // namespace timecolor::rope
