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

#include "timecolor/image.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace timecolor {

RgbImage::RgbImage(int height, int width, Rgb fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ShapeError("negative image size");
  data_.resize(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

BinaryMask label_mask(const LabelImage& labels, std::int32_t label) { return labels == label; }

std::int64_t mask_area(const BinaryMask& mask) { return mask.cast<std::int64_t>().sum(); }

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("mask_iou: shape mismatch");
  const auto inter = (a && b).cast<std::int64_t>().sum();
  const auto uni = (a || b).cast<std::int64_t>().sum();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

RgbImage flip_horizontal(const RgbImage& image) {
  RgbImage out(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) out.set(y, x, image.pixel(y, image.width() - 1 - x));
  return out;
}

BinaryMask flip_horizontal(const BinaryMask& mask) { return mask.rowwise().reverse(); }

namespace {

void check_rect(int rows, int cols, int y0, int x0, int h, int w, int out_h, int out_w) {
  if (h <= 0 || w <= 0 || out_h <= 0 || out_w <= 0 || y0 < 0 || x0 < 0 || y0 + h > rows ||
      x0 + w > cols)
    throw ShapeError("resample_nearest: rectangle outside image");
}

// Source coordinate for output index `o` when mapping `n_in` samples onto `n_out`.
int nearest_src(int o, int n_in, int n_out) {
  return static_cast<int>((static_cast<std::int64_t>(2 * o + 1) * n_in) / (2 * static_cast<std::int64_t>(n_out)));
}

}  // namespace

RgbImage resample_nearest(const RgbImage& image, int y0, int x0, int h, int w, int out_h, int out_w) {
  check_rect(image.height(), image.width(), y0, x0, h, w, out_h, out_w);
  RgbImage out(out_h, out_w);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      out.set(y, x, image.pixel(y0 + nearest_src(y, h, out_h), x0 + nearest_src(x, w, out_w)));
  return out;
}

BinaryMask resample_nearest(const BinaryMask& mask, int y0, int x0, int h, int w, int out_h, int out_w) {
  check_rect(static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), y0, x0, h, w, out_h, out_w);
  BinaryMask out(out_h, out_w);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      out(y, x) = mask(y0 + nearest_src(y, h, out_h), x0 + nearest_src(x, w, out_w));
  return out;
}

RgbImage gray_to_rgb(const GrayImage& gray) {
  RgbImage out(static_cast<int>(gray.rows()), static_cast<int>(gray.cols()));
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.set(y, x, {gray(y, x), gray(y, x), gray(y, x)});
  return out;
}

namespace io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error("cannot open " + path.string());
  return f;
}

void write_png_rows(const std::filesystem::path& path, int height, int width, int color_type,
                    const std::uint8_t* data, int channels) {
  auto f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng write failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads any 8-bit PNG, expanded to the requested channel count (1 or 3).
std::vector<std::uint8_t> read_png_rows(const std::filesystem::path& path, int channels, int& height,
                                        int& width) {
  auto f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng read failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  const bool is_gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
  if (channels == 3 && is_gray) png_set_gray_to_rgb(png);
  if (channels == 1 && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                                 static_cast<std::size_t>(channels));
  const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y) png_read_row(png, data.data() + static_cast<std::size_t>(y) * stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return data;
}

}  // namespace

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_png_rows(path, image.height(), image.width(), PNG_COLOR_TYPE_RGB, image.data().data(), 3);
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_png_rows(path, static_cast<int>(image.rows()), static_cast<int>(image.cols()), PNG_COLOR_TYPE_GRAY,
                 image.data(), 1);
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  int h = 0, w = 0;
  auto data = read_png_rows(path, 3, h, w);
  RgbImage out(h, w);
  out.data() = std::move(data);
  return out;
}

GrayImage read_png_gray(const std::filesystem::path& path) {
  int h = 0, w = 0;
  auto data = read_png_rows(path, 1, h, w);
  GrayImage out(h, w);
  std::copy(data.begin(), data.end(), out.data());
  return out;
}

LabelImage gray_to_labels(const GrayImage& gray) { return gray.cast<std::int32_t>(); }

GrayImage labels_to_gray(const LabelImage& labels) {
  if ((labels < 0).any() || (labels > 255).any()) throw Error("label out of 8-bit range");
  return labels.cast<std::uint8_t>();
}

}  // namespace io
}  // namespace timecolor
