// SPDX-FileCopyrightText: Copyright (c) 2026 The flashtok Authors
// SPDX-License-Identifier: Apache-2.0
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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flashtok/adapter.hpp"
#include "flashtok/encoder.hpp"
#include "flashtok/tiling.hpp"

namespace flashtok {

/// Modeled language-model decode cost: a token generated with `ctx` tokens
/// of context costs base_s + per_ctx_s * ctx seconds.
struct DecodeCostModel {
  double base_s = 0.015;
  double per_ctx_s = 2e-6;

  void validate() const;

  friend bool operator==(const DecodeCostModel&, const DecodeCostModel&) = default;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

struct PipelineConfig {
  std::string preset;
  Strategy strategy = Strategy::Static;
  TilingConfig tiling;
  VitConfig vit;
  AdapterConfig adapter;
  DecodeCostModel cost_model;
  int prompt_tokens = 64;
  std::uint64_t seed = kDefaultSeed;

  /// Sets vit.seed = seed and adapter.seed = seed + 1.
  void apply_seed(std::uint64_t s);

  /// Cross-field checks: encoder patch geometry matches tiling, adapter input
  /// width matches the encoder, adapter shuffle factor matches the strategy.
  /// Throws ConfigError.
  void validate() const;
};

std::vector<std::string> preset_names();

/// "static-siglip2like", "dynamic-aimv2like" or "iss-aimv2like".
std::optional<PipelineConfig> preset(std::string_view name);

nlohmann::json to_json(const PipelineConfig& cfg);

/// Overlays the keys present in `doc` (same layout as to_json) onto cfg.
/// Unknown keys are rejected with ConfigError.
void merge_json(PipelineConfig& cfg, const nlohmann::json& doc);

}  // namespace flashtok
