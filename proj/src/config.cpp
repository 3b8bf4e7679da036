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

#include "timecolor/config.hpp"

#include <fstream>

namespace timecolor {

void RunConfig::apply_paper_scale() {
  synth.num_frames = 48;
  curate.f = 17;
  curate.g = 17;
  curate.h = 5;
}

void RunConfig::validate() const {
  if (synth.num_frames < curate.f + curate.g + 1)
    throw Error("config: synth.num_frames (" + std::to_string(synth.num_frames) + ") must be >= f + g + 1 (" +
                std::to_string(curate.f + curate.g + 1) + ")");
  if (synth.num_subjects < 1 || synth.num_subjects > 6) throw Error("config: synth.num_subjects must be in 1..6");
  const int cell = codec.stride * codec.patch;
  if (synth.height % cell != 0 || synth.width % cell != 0)
    throw Error("config: canvas must be divisible by codec.stride * codec.patch = " + std::to_string(cell));
  if (model.patch_dim != codec.patch * codec.patch * 3)
    throw Error("config: model.patch_dim must equal codec.patch^2 * 3 = " +
                std::to_string(codec.patch * codec.patch * 3));
  if (model.rope_offset_h < synth.height / cell || model.rope_offset_w < synth.width / cell)
    throw Error("config: rope offsets must cover the patch grid");
  if (train.batch_size < 1) throw Error("config: train.batch_size must be >= 1");
  model.validate();
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  // Round-trip through the defaults so unknown keys are caught.
  const nlohmann::json defaults = RunConfig{};
  auto check = [&](auto&& self, const nlohmann::json& have, const nlohmann::json& ref, const std::string& prefix) -> void {
    if (!have.is_object()) return;
    for (auto it = have.begin(); it != have.end(); ++it) {
      if (!ref.contains(it.key())) throw Error("config: unknown key '" + prefix + it.key() + "'");
      if (ref[it.key()].is_object()) self(self, it.value(), ref[it.key()], prefix + it.key() + ".");
    }
  };
  check(check, j, defaults, "");
  return j.get<RunConfig>();
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("override '" + assignment + "' must look like key.path=value");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  nlohmann::json j = config;
  nlohmann::json::json_pointer ptr("/" + [&] {
    std::string p = key;
    for (auto& ch : p)
      if (ch == '.') ch = '/';
    return p;
  }());
  if (!j.contains(ptr)) throw Error("config: unknown key '" + key + "'");
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  j[ptr] = value;
  try {
    config = j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("config: bad value for '" + key + "': " + e.what());
  }
}

}  // namespace timecolor
