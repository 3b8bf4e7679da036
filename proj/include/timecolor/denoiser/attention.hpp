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
#include "timecolor/tokengrid.hpp"

#include <cmath>
#include <limits>

namespace timecolor::denoiser {

using tokens::Matrix;

/// Row-wise softmax of `logits` with gate-disallowed entries pinned to the
/// most negative finite value first, so their weight underflows to exactly 0.
template <typename Scalar>
Matrix<Scalar> masked_softmax(const Matrix<Scalar>& logits, const correspond::AttentionGate& gate) {
  const auto n = logits.rows(), m = logits.cols();
  if (gate.allowed.rows() != n || gate.allowed.cols() != m) throw ShapeError("masked_softmax: gate shape mismatch");
  constexpr Scalar kMasked = std::numeric_limits<Scalar>::lowest();
  Matrix<Scalar> p(n, m);
  const bool dense = gate.mode == correspond::GateMode::full;
  for (Eigen::Index q = 0; q < n; ++q) {
    Scalar top = kMasked;
    bool any = false;
    for (Eigen::Index k = 0; k < m; ++k) {
      const bool ok = dense || gate.allowed(q, k);
      const Scalar v = ok ? logits(q, k) : kMasked;
      p(q, k) = v;
      if (ok) {
        any = true;
        top = std::max(top, v);
      }
    }
    if (!any) throw Error("masked_softmax: query row " + std::to_string(q) + " has no permitted key");
    Scalar sum = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const Scalar e = std::exp(p(q, k) - top);
      p(q, k) = e;
      sum += e;
    }
    p.row(q) /= sum;
  }
  return p;
}

/// Single-head scaled dot-product attention under a binary gate. Logits,
/// softmax and the weighted sum are accumulated in double.
template <typename Scalar>
Matrix<Scalar> masked_attention(const Matrix<Scalar>& q, const Matrix<Scalar>& k, const Matrix<Scalar>& v,
                                const correspond::AttentionGate& gate, Matrix<Scalar>* weights = nullptr) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) throw ShapeError("masked_attention: Q/K/V shape mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const Matrix<double> logits = (q.template cast<double>() * k.template cast<double>().transpose()) * scale;
  const Matrix<double> p = masked_softmax(logits, gate);
  Matrix<Scalar> out = (p * v.template cast<double>()).template cast<Scalar>();
  if (weights) *weights = p.template cast<Scalar>();
  return out;
}

}  // namespace timecolor::denoiser
