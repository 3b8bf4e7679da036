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

#include "timecolor/image.hpp"
#include "timecolor/tokengrid.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace timecolor::correspond {

/// Latent identity of each (stride * patch)^2 receptive field: the most
/// frequent pixel label, ties going to the lowest label.
LabelImage downsample_ids(const LabelImage& pixel_ids, int spatial_stride, int patch);
std::vector<LabelImage> downsample_ids(const std::vector<LabelImage>& pixel_ids, int spatial_stride, int patch,
                                       int temporal_stride = 1);

enum class GateMode { full, inter_ref, correspondence };

std::string to_string(GateMode mode);
GateMode parse_gate_mode(const std::string& s);

/// Whether query token q may attend to key token k.
bool gate_allows(GateMode mode, const tokens::Token& q, const tokens::Token& k);

using GateMatrix = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AttentionGate {
  GateMode mode = GateMode::full;
  GateMatrix allowed;  // queries x keys, 1 = attend

  Eigen::Index size() const { return allowed.rows(); }
  bool operator()(Eigen::Index q, Eigen::Index k) const { return allowed(q, k) != 0; }
};

/// Throws if a non-TEXT token has no identity.
AttentionGate build_gate(const std::vector<tokens::Token>& seq, GateMode mode);

template <typename Scalar>
AttentionGate build_gate(const tokens::TokenSequence<Scalar>& seq, GateMode mode) {
  return build_gate(seq.tokens, mode);
}

/// Compact equivalent of the dense gate: tokens grouped into (modality,
/// identity) classes with a class-by-class permission table.
struct BlockGate {
  GateMode mode = GateMode::full;
  std::vector<int> token_class;
  GateMatrix class_allowed;

  GateMatrix to_dense() const;
};

BlockGate build_block_gate(const std::vector<tokens::Token>& seq, GateMode mode);

/// Writes the gate as a binary PGM (255 = allowed).
void write_gate_pgm(const std::filesystem::path& path, const AttentionGate& gate);

}  // namespace timecolor::correspond
