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

#include <cmath>
#include <string>
#include <vector>

namespace timecolor::denoiser {

/// Variance schedule indexed n = 1..N; entry 0 is the clean state (alpha_bar = 1).
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  /// Linear beta ramp from beta_start to beta_end, both multiplied by
  /// beta_scale. A non-positive beta_scale means 1000 / N (the endpoints then
  /// describe a 1000-step ramp compressed into N steps).
  static NoiseSchedule linear(int steps, double beta_start = 1e-4, double beta_end = 0.02, double beta_scale = 1.0) {
    if (steps < 1) throw Error("schedule needs at least one step");
    NoiseSchedule s;
    s.steps = steps;
    s.beta.assign(std::size_t(steps) + 1, 0.0);
    s.alpha.assign(std::size_t(steps) + 1, 1.0);
    s.alpha_bar.assign(std::size_t(steps) + 1, 1.0);
    const double scale = beta_scale > 0.0 ? beta_scale : 1000.0 / steps;
    const double lo = std::min(beta_start * scale, 0.999), hi = std::min(beta_end * scale, 0.999);
    for (int n = 1; n <= steps; ++n) {
      const double b = steps == 1 ? lo : lo + (hi - lo) * (n - 1) / (steps - 1);
      s.beta[std::size_t(n)] = b;
      s.alpha[std::size_t(n)] = 1.0 - b;
      s.alpha_bar[std::size_t(n)] = s.alpha_bar[std::size_t(n) - 1] * (1.0 - b);
    }
    return s;
  }
};

}  // namespace timecolor::denoiser
