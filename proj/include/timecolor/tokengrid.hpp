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

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace timecolor::tokens {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H' x W' x C latent stored cell-major: row (y * width + x), column = channel.
template <typename Scalar>
struct LatentGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  Matrix<Scalar> cells;

  LatentGrid() = default;
  LatentGrid(int h, int w, int c) : height(h), width(w), channels(c), cells(Matrix<Scalar>::Zero(h * w, c)) {}

  Scalar& operator()(int y, int x, int c) { return cells(y * width + x, c); }
  Scalar operator()(int y, int x, int c) const { return cells(y * width + x, c); }

  template <typename Other>
  LatentGrid<Other> cast() const {
    LatentGrid<Other> out;
    out.height = height;
    out.width = width;
    out.channels = channels;
    out.cells = cells.template cast<Other>();
    return out;
  }
};

class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  virtual LatentGrid<double> encode(const RgbImage& image) const = 0;
  virtual RgbImage decode(const LatentGrid<double>& latent) const = 0;
  virtual int spatial_stride() const = 0;
  virtual int channels() const = 0;
};

/// Average pooling over stride x stride cells of RGB mapped to [-1, 1];
/// decode is nearest-neighbor upsampling with 8-bit rounding.
class AveragePoolCodec final : public LatentCodec {
 public:
  explicit AveragePoolCodec(int stride = 4) : stride_(stride) {}

  LatentGrid<double> encode(const RgbImage& image) const override;
  RgbImage decode(const LatentGrid<double>& latent) const override;
  int spatial_stride() const override { return stride_; }
  int channels() const override { return 3; }

 private:
  int stride_;
};

enum class Modality : std::uint8_t { text, target, sketch, ref, mask_cond };

const char* to_string(Modality m);

/// Reference identity carried by TEXT tokens (and not-yet-assigned tokens).
inline constexpr int kNoIdentity = 0;

struct Token {
  Modality modality = Modality::text;
  int l = 0;  // frame index; references use -r
  int i = 0;  // patch row (text: position in caption)
  int j = 0;  // patch column
  int rho = kNoIdentity;
  int text_id = -1;
};

/// Spatial patch tokens of one latent frame, features flattened (di, dj, c).
template <typename Scalar>
struct PatchGrid {
  int rows = 0;
  int cols = 0;
  int patch = 1;
  int channels = 0;
  Matrix<Scalar> features;  // (rows * cols) x (patch * patch * channels)
};

template <typename Scalar>
PatchGrid<Scalar> patchify(const LatentGrid<Scalar>& grid, int patch) {
  if (patch < 1 || grid.height % patch != 0 || grid.width % patch != 0)
    throw ShapeError("patchify: latent " + std::to_string(grid.height) + "x" + std::to_string(grid.width) +
                     " is not divisible by patch size " + std::to_string(patch));
  PatchGrid<Scalar> out;
  out.rows = grid.height / patch;
  out.cols = grid.width / patch;
  out.patch = patch;
  out.channels = grid.channels;
  out.features.resize(out.rows * out.cols, patch * patch * grid.channels);
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j)
      for (int di = 0; di < patch; ++di)
        for (int dj = 0; dj < patch; ++dj)
          for (int c = 0; c < grid.channels; ++c)
            out.features(i * out.cols + j, (di * patch + dj) * grid.channels + c) =
                grid(i * patch + di, j * patch + dj, c);
  return out;
}

template <typename Scalar>
LatentGrid<Scalar> unpatchify(const Matrix<Scalar>& features, int rows, int cols, int patch, int channels) {
  if (features.rows() != rows * cols || features.cols() != patch * patch * channels)
    throw ShapeError("unpatchify: feature matrix does not match the patch grid");
  LatentGrid<Scalar> out(rows * patch, cols * patch, channels);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      for (int di = 0; di < patch; ++di)
        for (int dj = 0; dj < patch; ++dj)
          for (int c = 0; c < channels; ++c)
            out(i * patch + di, j * patch + dj, c) = features(i * cols + j, (di * patch + dj) * channels + c);
  return out;
}

/// Concatenated text | target | sketch | reference | mask-condition stream.
/// Visual rows of `features` hold raw patch vectors (pre-embedding); text rows
/// are zero and carry `text_id` instead.
template <typename Scalar>
struct TokenSequence {
  std::vector<Token> tokens;
  Matrix<Scalar> features;
  int n_text = 0;
  int n_target = 0;
  int n_sketch = 0;
  int n_ref = 0;
  int n_mask = 0;
  int num_frames = 0;
  int num_refs = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  int temporal_stride = 1;

  int size() const { return static_cast<int>(tokens.size()); }
  int grid_size() const { return grid_rows * grid_cols; }
  int target_offset() const { return n_text; }
  int sketch_offset() const { return n_text + n_target; }
  int ref_offset() const { return n_text + n_target + n_sketch; }
  int mask_offset() const { return n_text + n_target + n_sketch + n_ref; }

  /// Flat position of (modality, l, i, j). REF blocks are addressed by l = -r.
  int position(Modality m, int l, int i, int j) const {
    const int cell = i * grid_cols + j;
    switch (m) {
      case Modality::text: return i;
      case Modality::target: return target_offset() + l * grid_size() + cell;
      case Modality::sketch: return sketch_offset() + l * grid_size() + cell;
      case Modality::ref: return ref_offset() + (-l - 1) * grid_size() + cell;
      case Modality::mask_cond: return mask_offset() + l * grid_size() + cell;
    }
    return -1;
  }

  Matrix<Scalar> target_features() const { return features.middleRows(target_offset(), n_target); }
  void set_target_features(const Matrix<Scalar>& z) {
    if (z.rows() != n_target || z.cols() != features.cols()) throw ShapeError("target feature shape mismatch");
    features.middleRows(target_offset(), n_target) = z;
  }
};

/// Ordering [text | target 0..f-1 | sketch 0..f-1 | refs]; reference block k
/// carries identity ref_identities[k] and l = -identity. Parameter-free.
template <typename Scalar>
TokenSequence<Scalar> assemble_sequence(const std::vector<PatchGrid<Scalar>>& targets,
                                        const std::vector<PatchGrid<Scalar>>& sketches,
                                        const std::vector<PatchGrid<Scalar>>& refs,
                                        const std::vector<int>& ref_identities,
                                        const std::vector<int>& text_ids = {}, bool require_refs = true) {
  if (targets.empty()) throw ShapeError("assemble_sequence: no target frames");
  if (targets.size() != sketches.size()) throw ShapeError("assemble_sequence: target/sketch frame counts differ");
  if (require_refs && refs.empty()) throw Error("assemble_sequence: this mode requires at least one reference");
  if (refs.size() != ref_identities.size()) throw Error("assemble_sequence: one identity per reference required");
  const int R = static_cast<int>(refs.size());
  std::vector<bool> seen(std::size_t(R) + 1, false);
  for (int id : ref_identities) {
    if (id < 1 || id > R || seen[std::size_t(id)]) throw Error("assemble_sequence: identities must permute 1..R");
    seen[std::size_t(id)] = true;
  }
  const auto& first = targets.front();
  const auto dim = first.features.cols();
  auto check = [&](const std::vector<PatchGrid<Scalar>>& frames, const char* what) {
    for (const auto& g : frames)
      if (g.rows != first.rows || g.cols != first.cols || g.features.cols() != dim)
        throw ShapeError(std::string("assemble_sequence: ") + what + " grid shape differs from target");
  };
  check(sketches, "sketch");
  check(refs, "reference");

  TokenSequence<Scalar> seq;
  seq.grid_rows = first.rows;
  seq.grid_cols = first.cols;
  seq.num_frames = static_cast<int>(targets.size());
  seq.num_refs = R;
  seq.n_text = static_cast<int>(text_ids.size());
  const int G = seq.grid_size();
  seq.n_target = seq.num_frames * G;
  seq.n_sketch = seq.num_frames * G;
  seq.n_ref = R * G;
  const int n = seq.n_text + seq.n_target + seq.n_sketch + seq.n_ref;
  seq.tokens.resize(std::size_t(n));
  seq.features = Matrix<Scalar>::Zero(n, dim);

  for (int k = 0; k < seq.n_text; ++k) {
    auto& t = seq.tokens[std::size_t(k)];
    t.modality = Modality::text;
    t.i = k;
    t.text_id = text_ids[std::size_t(k)];
  }
  auto place = [&](Modality m, int l, int rho, const PatchGrid<Scalar>& g) {
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) {
        const int pos = seq.position(m, l, i, j);
        seq.tokens[std::size_t(pos)] = Token{m, l, i, j, rho, -1};
        seq.features.row(pos) = g.features.row(i * g.cols + j);
      }
  };
  for (int l = 0; l < seq.num_frames; ++l) {
    place(Modality::target, l, kNoIdentity, targets[std::size_t(l)]);
    place(Modality::sketch, l, kNoIdentity, sketches[std::size_t(l)]);
  }
  // Block placement follows identity so position(ref, -r, i, j) addresses identity r.
  for (int k = 0; k < R; ++k) {
    const int r = ref_identities[std::size_t(k)];
    place(Modality::ref, -r, r, refs[std::size_t(k)]);
  }
  return seq;
}

/// Appends per-frame conditioning grids (mask-as-condition ablation). Each
/// token takes the l/i/j of the matching target patch and its identity.
template <typename Scalar>
void append_condition_frames(TokenSequence<Scalar>& seq, const std::vector<PatchGrid<Scalar>>& frames) {
  if (static_cast<int>(frames.size()) != seq.num_frames) throw ShapeError("condition frames: one per target frame");
  for (const auto& g : frames)
    if (g.rows != seq.grid_rows || g.cols != seq.grid_cols || g.features.cols() != seq.features.cols())
      throw ShapeError("condition frames: grid shape differs from target");
  const int add = seq.num_frames * seq.grid_size();
  const int old = seq.size();
  seq.tokens.resize(std::size_t(old + add));
  seq.features.conservativeResize(old + add, Eigen::NoChange);
  seq.n_mask = add;
  for (int l = 0; l < seq.num_frames; ++l)
    for (int i = 0; i < seq.grid_rows; ++i)
      for (int j = 0; j < seq.grid_cols; ++j) {
        const int pos = seq.position(Modality::mask_cond, l, i, j);
        const int rho = seq.tokens[std::size_t(seq.position(Modality::target, l, i, j))].rho;
        seq.tokens[std::size_t(pos)] = Token{Modality::mask_cond, l, i, j, rho, -1};
        seq.features.row(pos) = frames[std::size_t(l)].features.row(i * seq.grid_cols + j);
      }
}

/// Sets rho of TARGET, SKETCH (and mask-condition) tokens from per-frame
/// latent identity grids; REF tokens keep their own identity.
template <typename Scalar>
void assign_rho(TokenSequence<Scalar>& seq, const std::vector<LabelImage>& latent_ids) {
  if (static_cast<int>(latent_ids.size()) != seq.num_frames) throw ShapeError("assign_rho: one id grid per frame");
  for (const auto& ids : latent_ids) {
    if (ids.rows() != seq.grid_rows || ids.cols() != seq.grid_cols)
      throw ShapeError("assign_rho: id grid does not match the patch grid");
    if (ids.size() && (ids.minCoeff() < 1 || ids.maxCoeff() > seq.num_refs))
      throw Error("assign_rho: identity outside 1.." + std::to_string(seq.num_refs));
  }
  for (auto& t : seq.tokens) {
    if (t.modality == Modality::target || t.modality == Modality::sketch || t.modality == Modality::mask_cond)
      t.rho = latent_ids[std::size_t(t.l)](t.i, t.j);
  }
}

}  // namespace timecolor::tokens
