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

#include "timecolor/denoiser/model.hpp"

#include <json.hpp>

#include <filesystem>

namespace timecolor::denoiser {

/// Binary container: magic "TCCKPT01", u32 version, u32 config length +
/// config JSON, u32 tensor count, then per tensor u32 name length + name,
/// u32 rows, u32 cols, rows*cols float32 little-endian (row-major).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json config;  // full run configuration; "model" holds ModelConfig
  DenoiserModel<float> model;
};

void save_checkpoint(const std::filesystem::path& path, const DenoiserModel<float>& model,
                     const nlohmann::json& run_config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace timecolor::denoiser
