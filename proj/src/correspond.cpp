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

#include "timecolor/correspond.hpp"

#include <fstream>
#include <map>
#include <utility>

namespace timecolor::correspond {

using tokens::Modality;
using tokens::Token;

LabelImage downsample_ids(const LabelImage& pixel_ids, int spatial_stride, int patch) {
  const int cell = spatial_stride * patch;
  if (cell < 1 || pixel_ids.rows() % cell != 0 || pixel_ids.cols() % cell != 0)
    throw ShapeError("downsample_ids: " + std::to_string(pixel_ids.rows()) + "x" + std::to_string(pixel_ids.cols()) +
                     " not divisible by stride*patch=" + std::to_string(cell));
  const auto rows = pixel_ids.rows() / cell, cols = pixel_ids.cols() / cell;
  LabelImage out(rows, cols);
  std::map<std::int32_t, int> counts;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      counts.clear();
      for (int dy = 0; dy < cell; ++dy)
        for (int dx = 0; dx < cell; ++dx) ++counts[pixel_ids(i * cell + dy, j * cell + dx)];
      // std::map iterates labels in ascending order, so strict > keeps the lowest on ties.
      std::int32_t best = 0;
      int best_count = -1;
      for (const auto& [label, c] : counts)
        if (c > best_count) best = label, best_count = c;
      out(i, j) = best;
    }
  return out;
}

std::vector<LabelImage> downsample_ids(const std::vector<LabelImage>& pixel_ids, int spatial_stride, int patch,
                                       int temporal_stride) {
  if (temporal_stride != 1) throw Error("downsample_ids: temporal pooling is not implemented (stride must be 1)");
  std::vector<LabelImage> out;
  out.reserve(pixel_ids.size());
  for (const auto& f : pixel_ids) out.push_back(downsample_ids(f, spatial_stride, patch));
  return out;
}

std::string to_string(GateMode mode) {
  switch (mode) {
    case GateMode::full: return "full";
    case GateMode::inter_ref: return "inter_ref";
    case GateMode::correspondence: return "correspondence";
  }
  return "full";
}

GateMode parse_gate_mode(const std::string& s) {
  if (s == "full") return GateMode::full;
  if (s == "inter_ref") return GateMode::inter_ref;
  if (s == "correspondence") return GateMode::correspondence;
  throw Error("unknown gate mode '" + s + "'");
}

bool gate_allows(GateMode mode, const Token& q, const Token& k) {
  switch (mode) {
    case GateMode::full:
      return true;
    case GateMode::inter_ref:
      return !(q.modality == Modality::ref && k.modality == Modality::ref && q.rho != k.rho);
    case GateMode::correspondence:
      return q.modality == Modality::text || k.modality != Modality::ref || k.rho == q.rho;
  }
  return true;
}

namespace {

void check_identities(const std::vector<Token>& seq) {
  for (std::size_t n = 0; n < seq.size(); ++n)
    if (seq[n].modality != Modality::text && seq[n].rho < 1)
      throw Error("build_gate: token " + std::to_string(n) + " (" + tokens::to_string(seq[n].modality) +
                  ") has no reference identity");
}

}  // namespace

AttentionGate build_gate(const std::vector<Token>& seq, GateMode mode) {
  check_identities(seq);
  const auto n = static_cast<Eigen::Index>(seq.size());
  AttentionGate gate;
  gate.mode = mode;
  gate.allowed.resize(n, n);
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index k = 0; k < n; ++k)
      gate.allowed(q, k) = gate_allows(mode, seq[std::size_t(q)], seq[std::size_t(k)]) ? 1 : 0;
  return gate;
}

BlockGate build_block_gate(const std::vector<Token>& seq, GateMode mode) {
  check_identities(seq);
  BlockGate out;
  out.mode = mode;
  std::map<std::pair<int, int>, int> classes;
  std::vector<Token> representative;
  for (const auto& t : seq) {
    const auto key = std::make_pair(static_cast<int>(t.modality), t.rho);
    auto [it, inserted] = classes.emplace(key, static_cast<int>(representative.size()));
    if (inserted) representative.push_back(t);
    out.token_class.push_back(it->second);
  }
  const auto c = static_cast<Eigen::Index>(representative.size());
  out.class_allowed.resize(c, c);
  for (Eigen::Index a = 0; a < c; ++a)
    for (Eigen::Index b = 0; b < c; ++b)
      out.class_allowed(a, b) = gate_allows(mode, representative[std::size_t(a)], representative[std::size_t(b)]);
  return out;
}

GateMatrix BlockGate::to_dense() const {
  const auto n = static_cast<Eigen::Index>(token_class.size());
  GateMatrix m(n, n);
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index k = 0; k < n; ++k) m(q, k) = class_allowed(token_class[std::size_t(q)], token_class[std::size_t(k)]);
  return m;
}

void write_gate_pgm(const std::filesystem::path& path, const AttentionGate& gate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << gate.allowed.cols() << ' ' << gate.allowed.rows() << "\n255\n";
  for (Eigen::Index q = 0; q < gate.allowed.rows(); ++q)
    for (Eigen::Index k = 0; k < gate.allowed.cols(); ++k) out.put(gate.allowed(q, k) ? char(255) : char(0));
}

}  // namespace timecolor::correspond
