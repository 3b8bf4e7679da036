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

#include "timecolor/tokengrid.hpp"

#include <algorithm>
#include <cmath>

namespace timecolor::tokens {

LatentGrid<double> AveragePoolCodec::encode(const RgbImage& image) const {
  if (image.height() % stride_ != 0 || image.width() % stride_ != 0)
    throw ShapeError("codec: image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                     " not divisible by stride " + std::to_string(stride_));
  LatentGrid<double> out(image.height() / stride_, image.width() / stride_, 3);
  const double norm = 1.0 / (stride_ * stride_);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) {
        int sum = 0;
        for (int dy = 0; dy < stride_; ++dy)
          for (int dx = 0; dx < stride_; ++dx) sum += image.at(y * stride_ + dy, x * stride_ + dx, c);
        out(y, x, c) = sum * norm / 127.5 - 1.0;
      }
  return out;
}

RgbImage AveragePoolCodec::decode(const LatentGrid<double>& latent) const {
  if (latent.channels != 3) throw ShapeError("codec: expected 3 latent channels");
  RgbImage out(latent.height * stride_, latent.width * stride_);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::lround((latent(y / stride_, x / stride_, c) + 1.0) * 127.5);
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return out;
}

const char* to_string(Modality m) {
  switch (m) {
    case Modality::text: return "TEXT";
    case Modality::target: return "TARGET";
    case Modality::sketch: return "SKETCH";
    case Modality::ref: return "REF";
    case Modality::mask_cond: return "MASK";
  }
  return "?";
}

}  // namespace timecolor::tokens
