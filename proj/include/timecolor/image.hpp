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

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace timecolor {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
  using Error::Error;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Per-pixel integer labels (row-major, height x width).
using LabelImage = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Single-channel 8-bit image; sketches use only {0, 255}.
using GrayImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Boolean pixel set.
using BinaryMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved 8-bit RGB image.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int height, int width, Rgb fill = {0, 0, 0});

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  std::uint8_t at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  Rgb pixel(int y, int x) const { return {at(y, x, 0), at(y, x, 1), at(y, x, 2)}; }
  void set(int y, int x, Rgb v) {
    for (int c = 0; c < 3; ++c) at(y, x, c) = v[static_cast<std::size_t>(c)];
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

using Video = std::vector<RgbImage>;
using LabelVideo = std::vector<LabelImage>;

BinaryMask label_mask(const LabelImage& labels, std::int32_t label);
std::int64_t mask_area(const BinaryMask& mask);
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Horizontal mirror; used by reference augmentation.
RgbImage flip_horizontal(const RgbImage& image);
BinaryMask flip_horizontal(const BinaryMask& mask);

/// Nearest-neighbor resample of a sub-rectangle [y0, y0+h) x [x0, x0+w) to the
/// requested output size.
RgbImage resample_nearest(const RgbImage& image, int y0, int x0, int h, int w, int out_h, int out_w);
BinaryMask resample_nearest(const BinaryMask& mask, int y0, int x0, int h, int w, int out_h, int out_w);

RgbImage gray_to_rgb(const GrayImage& gray);

namespace io {

void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);
RgbImage read_png_rgb(const std::filesystem::path& path);
GrayImage read_png_gray(const std::filesystem::path& path);

LabelImage gray_to_labels(const GrayImage& gray);
GrayImage labels_to_gray(const LabelImage& labels);

}  // namespace io

}  // namespace timecolor
