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

#include "timecolor/denoiser/checkpoint.hpp"
#include "timecolor/denoiser/sampler.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace timecolor::denoiser {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::string to_string(SamplerKind kind) { return kind == SamplerKind::ancestral ? "ancestral" : "deterministic"; }

SamplerKind parse_sampler(const std::string& s) {
  if (s == "ancestral") return SamplerKind::ancestral;
  if (s == "deterministic" || s == "ddim") return SamplerKind::deterministic;
  throw Error("unknown sampler '" + s + "'");
}

std::vector<int> sampling_timesteps(int schedule_steps, int requested) {
  const int k = requested <= 0 ? schedule_steps : std::min(requested, schedule_steps);
  std::vector<int> out;
  for (int s = 0; s < k; ++s) {
    const int n = schedule_steps - static_cast<int>(static_cast<long long>(s) * schedule_steps / k);
    if (out.empty() || n < out.back()) out.push_back(n);
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'T', 'C', 'C', 'K', 'P', 'T', '0', '1'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw Error("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const DenoiserModel<float>& model,
                     const nlohmann::json& run_config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  nlohmann::json cfg = run_config;
  cfg["model"] = model.config();
  const auto text = cfg.dump();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::uint32_t count = 0;
  model.params().visit([&](const std::string&, const Matrix<float>&) { ++count; });
  put_u32(out, count);
  model.params().visit([&](const std::string& name, const Matrix<float>& m) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  });
  if (!out) throw Error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error("not a checkpoint: " + path.string());
  const auto version = get_u32(in);
  if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));
  std::string text(get_u32(in), '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(text.size()))) throw Error("checkpoint truncated");
  Checkpoint ck;
  ck.config = nlohmann::json::parse(text);
  ck.model = DenoiserModel<float>(ck.config.at("model").get<ModelConfig>());
  std::map<std::string, Matrix<float>> tensors;
  const auto count = get_u32(in);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name(get_u32(in), '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name.size()))) throw Error("checkpoint truncated");
    const auto rows = get_u32(in), cols = get_u32(in);
    Matrix<float> m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float))))
      throw Error("checkpoint truncated");
    tensors.emplace(std::move(name), std::move(m));
  }
  ck.model.params().visit([&](const std::string& name, Matrix<float>& m) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw Error("checkpoint missing tensor " + name);
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols())
      throw Error("checkpoint tensor " + name + " has the wrong shape");
    m = it->second;
  });
  return ck;
}

}  // namespace timecolor::denoiser
