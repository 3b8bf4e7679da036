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

#include "timecolor/tokengrid.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

namespace timecolor::rope {

/// Rotary layout of one attention head: [temporal | height | width] sub-blocks,
/// each rotated pairwise with frequencies theta^(-2k / sub_dim).
struct RopeConfig {
  int head_dim = 32;
  int temporal_dim = 16;
  int height_dim = 8;
  int width_dim = 8;
  double theta = 10000.0;
  int offset_h = 16;  // H in i + mH
  int offset_w = 16;  // W in j + mW

  /// Temporal gets half, height and width a quarter each (rounded to even).
  static RopeConfig for_head_dim(int head_dim, int offset_h = 16, int offset_w = 16, double theta = 10000.0);

  /// Throws on odd sub-dims, mismatched sum or non-positive offsets.
  void validate() const;
  /// Throws unless the offsets cover a grid of the given size.
  void check_grid(int grid_rows, int grid_cols) const;
};

struct RopeIndex {
  int l = 0;
  int i = 0;
  int j = 0;
  friend bool operator==(const RopeIndex&, const RopeIndex&) = default;
};

/// 0 for TARGET, 1 for SKETCH, 2 for REF, 3 for the mask-condition frames.
int modality_slot(tokens::Modality m);

/// (l, i + mH, j + mW). TEXT tokens have no rotary position and throw.
RopeIndex rope_index(const tokens::Token& token, const RopeConfig& config);

/// Rotation angle of pair `k` (0 .. head_dim/2 - 1) at the given index.
double pair_angle(const RopeConfig& config, const RopeIndex& index, int k);

/// Rotates one head vector in place. Negative positions rotate the other way.
template <typename Derived>
void apply_rope_inplace(Eigen::MatrixBase<Derived>& v, const RopeIndex& index, const RopeConfig& config) {
  using Scalar = typename Derived::Scalar;
  for (int k = 0; k < config.head_dim / 2; ++k) {
    const double a = pair_angle(config, index, k);
    const Scalar c = static_cast<Scalar>(std::cos(a));
    const Scalar s = static_cast<Scalar>(std::sin(a));
    const Scalar x = v(2 * k), y = v(2 * k + 1);
    v(2 * k) = x * c - y * s;
    v(2 * k + 1) = x * s + y * c;
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> apply_rope(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v,
                                                    const RopeIndex& index, const RopeConfig& config) {
  if (v.size() != config.head_dim) throw ShapeError("apply_rope: vector size differs from head_dim");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = v;
  apply_rope_inplace(out, index, config);
  return out;
}

/// Per-token cos/sin of every rotary pair, shared by all heads. TEXT rows are
/// the identity rotation.
template <typename Scalar>
struct RopeTable {
  tokens::Matrix<Scalar> cos;  // tokens x head_dim/2
  tokens::Matrix<Scalar> sin;

  static RopeTable build(const std::vector<tokens::Token>& seq, const RopeConfig& config) {
    RopeTable t;
    const int n = static_cast<int>(seq.size()), half = config.head_dim / 2;
    t.cos = tokens::Matrix<Scalar>::Ones(n, half);
    t.sin = tokens::Matrix<Scalar>::Zero(n, half);
    for (int r = 0; r < n; ++r) {
      if (seq[std::size_t(r)].modality == tokens::Modality::text) continue;
      const auto idx = rope_index(seq[std::size_t(r)], config);
      for (int k = 0; k < half; ++k) {
        const double a = pair_angle(config, idx, k);
        t.cos(r, k) = static_cast<Scalar>(std::cos(a));
        t.sin(r, k) = static_cast<Scalar>(std::sin(a));
      }
    }
    return t;
  }

  /// Rotates columns [col0, col0 + head_dim) of every row; `inverse` applies
  /// the transpose (used for backprop).
  template <typename Derived>
  void rotate(Eigen::MatrixBase<Derived>& x, int col0, bool inverse = false) const {
    const auto half = cos.cols();
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index k = 0; k < half; ++k) {
        const Scalar c = cos(r, k);
        const Scalar s = inverse ? -sin(r, k) : sin(r, k);
        const Scalar a = x(r, col0 + 2 * k), b = x(r, col0 + 2 * k + 1);
        x(r, col0 + 2 * k) = a * c - b * s;
        x(r, col0 + 2 * k + 1) = a * s + b * c;
      }
  }
};

}  // namespace timecolor::rope
