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

#include "timecolor/correspond.hpp"
#include "timecolor/image.hpp"
#include "timecolor/tokengrid.hpp"

#include <string>
#include <vector>

namespace timecolor::denoiser {

/// Attention variants compared in the ablation. soft_mask is full attention
/// plus color-coded correspondence frames appended as extra conditioning.
enum class AttentionMode { full, inter_ref, correspondence, soft_mask };

std::string to_string(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& s);
correspond::GateMode gate_mode(AttentionMode mode);

/// Sketches, references, per-frame pixel correspondence (values 1..R) and an
/// optional caption.
struct ConditioningBundle {
  std::vector<GrayImage> sketches;
  std::vector<RgbImage> references;
  std::vector<LabelImage> correspondence;
  std::vector<int> text_ids;

  int num_frames() const { return static_cast<int>(sketches.size()); }
  int num_references() const { return static_cast<int>(references.size()); }
  void validate() const;
};

/// Eight saturated RGB codes, one per reference index.
std::vector<Rgb> default_mask_palette();

/// Renders pixel identities as RGB-coded frames. Throws when R exceeds the palette.
std::vector<RgbImage> soft_mask_condition(const ConditioningBundle& bundle, const std::vector<Rgb>& palette);

struct EncodeOptions {
  int patch = 2;
  AttentionMode mode = AttentionMode::correspondence;
};

/// Builds the token sequence for a bundle: sketches, references and identity
/// labels are encoded; target rows hold `targets` if given, zeros otherwise.
template <typename Scalar>
tokens::TokenSequence<Scalar> encode_bundle(const ConditioningBundle& bundle, const tokens::LatentCodec& codec,
                                            const EncodeOptions& options,
                                            const std::vector<RgbImage>* targets = nullptr) {
  bundle.validate();
  if (targets && static_cast<int>(targets->size()) != bundle.num_frames())
    throw ShapeError("encode_bundle: one target frame per sketch required");
  auto encode = [&](const RgbImage& img) { return tokens::patchify(codec.encode(img).template cast<Scalar>(), options.patch); };
  std::vector<tokens::PatchGrid<Scalar>> tgt, sk, refs;
  for (int t = 0; t < bundle.num_frames(); ++t) {
    sk.push_back(encode(gray_to_rgb(bundle.sketches[std::size_t(t)])));
    if (targets) {
      tgt.push_back(encode((*targets)[std::size_t(t)]));
    } else {
      auto g = sk.back();
      g.features.setZero();
      tgt.push_back(std::move(g));
    }
  }
  std::vector<int> ids;
  for (int r = 0; r < bundle.num_references(); ++r) {
    refs.push_back(encode(bundle.references[std::size_t(r)]));
    ids.push_back(r + 1);
  }
  auto seq = tokens::assemble_sequence(tgt, sk, refs, ids, bundle.text_ids, true);
  tokens::assign_rho(seq, correspond::downsample_ids(bundle.correspondence, codec.spatial_stride(), options.patch));
  if (options.mode == AttentionMode::soft_mask) {
    std::vector<tokens::PatchGrid<Scalar>> frames;
    for (const auto& img : soft_mask_condition(bundle, default_mask_palette())) frames.push_back(encode(img));
    tokens::append_condition_frames(seq, frames);
  }
  return seq;
}

}  // namespace timecolor::denoiser
