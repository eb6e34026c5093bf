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

#include "flashtok/pipeline.hpp"

#include <cmath>
#include <set>

#include "flashtok/errors.hpp"

namespace flashtok {

void DecodeCostModel::validate() const {
  if (!(base_s >= 0.0 && std::isfinite(base_s)) ||
      !(per_ctx_s >= 0.0 && std::isfinite(per_ctx_s))) {
    throw ConfigError("cost model: base_s and per_ctx_s must be finite and >= 0");
  }
}

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  vit.seed = s;
  adapter.seed = s + 1;
}

void PipelineConfig::validate() const {
  tiling.validate();
  vit.validate();
  adapter.validate();
  cost_model.validate();
  if (prompt_tokens < 0) throw ConfigError("prompt_tokens must be >= 0");
  if (vit.patch_size != tiling.patch_size) {
    throw ConfigError("vit.patch_size must equal tiling.patch_size");
  }
  if (vit.grid_side != tiling.tile_grid_side) {
    throw ConfigError("vit.grid_side must equal tiling.tile_grid_side");
  }
  if (adapter.in_dim != vit.dim) {
    throw ConfigError("adapter.in_dim must equal vit.dim");
  }
  const int r = effective_shuffle_factor(strategy, tiling);
  if (adapter.shuffle_factor != r) {
    throw ConfigError("adapter.shuffle_factor must be " + std::to_string(r) +
                      " for strategy " + std::string(strategy_name(strategy)));
  }
}

namespace {

PipelineConfig base_preset(std::string name, Strategy s, int patch, int max_tiles) {
  PipelineConfig cfg;
  cfg.preset = std::move(name);
  cfg.strategy = s;
  cfg.tiling.patch_size = patch;
  cfg.tiling.tile_grid_side = 32;
  cfg.tiling.overlap_rate = 0.125;
  cfg.tiling.max_tiles = max_tiles;
  cfg.tiling.shuffle_factor = 2;
  cfg.tiling.compress_after_iss = true;
  cfg.vit.patch_size = patch;
  cfg.vit.grid_side = 32;
  cfg.vit.dim = 32;
  cfg.vit.depth = 2;
  cfg.vit.heads = 4;
  cfg.vit.mlp_ratio = 2.0;
  cfg.vit.use_pos_emb = true;
  cfg.adapter.in_dim = cfg.vit.dim;
  cfg.adapter.shuffle_factor = 2;
  cfg.adapter.out_dim = 64;
  cfg.adapter.hidden_dim = 0;
  cfg.apply_seed(kDefaultSeed);
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"static-siglip2like", "dynamic-aimv2like", "iss-aimv2like"};
}

std::optional<PipelineConfig> preset(std::string_view name) {
  if (name == "static-siglip2like") {
    return base_preset(std::string(name), Strategy::Static, 16, 1);
  }
  if (name == "dynamic-aimv2like") {
    return base_preset(std::string(name), Strategy::DynamicCrop, 14, 4);
  }
  if (name == "iss-aimv2like") {
    return base_preset(std::string(name), Strategy::ISS, 14, 4);
  }
  return std::nullopt;
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {
      {"preset", c.preset},
      {"strategy", std::string(strategy_name(c.strategy))},
      {"seed", c.seed},
      {"prompt_tokens", c.prompt_tokens},
      {"tiling",
       {{"patch_size", c.tiling.patch_size},
        {"tile_grid_side", c.tiling.tile_grid_side},
        {"overlap_rate", c.tiling.overlap_rate},
        {"max_tiles", c.tiling.max_tiles},
        {"shuffle_factor", c.tiling.shuffle_factor},
        {"compress_after_iss", c.tiling.compress_after_iss}}},
      {"vit",
       {{"patch_size", c.vit.patch_size},
        {"grid_side", c.vit.grid_side},
        {"dim", c.vit.dim},
        {"depth", c.vit.depth},
        {"heads", c.vit.heads},
        {"mlp_ratio", c.vit.mlp_ratio},
        {"use_pos_emb", c.vit.use_pos_emb},
        {"input_scale", c.vit.input_scale},
        {"input_shift", c.vit.input_shift},
        {"seed", c.vit.seed}}},
      {"adapter",
       {{"in_dim", c.adapter.in_dim},
        {"shuffle_factor", c.adapter.shuffle_factor},
        {"hidden_dim", c.adapter.hidden()},
        {"out_dim", c.adapter.out_dim},
        {"gelu", c.adapter.gelu == GeluKind::Tanh ? "tanh" : "exact"},
        {"seed", c.adapter.seed}}},
      {"cost_model",
       {{"base_s", c.cost_model.base_s}, {"per_ctx_s", c.cost_model.per_ctx_s}}},
  };
}

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key " + where + "." + key);
  }
}

template <typename T>
void take(const nlohmann::json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace

void merge_json(PipelineConfig& cfg, const nlohmann::json& doc) {
  try {
    reject_unknown(doc,
                   {"preset", "strategy", "seed", "prompt_tokens", "tiling", "vit",
                    "adapter", "cost_model"},
                   "config");
    if (doc.contains("preset")) {
      const auto name = doc.at("preset").get<std::string>();
      const auto p = preset(name);
      if (!p) throw ConfigError("unknown preset " + name);
      cfg = *p;
    }
    if (doc.contains("strategy")) {
      const auto s = parse_strategy(doc.at("strategy").get<std::string>());
      if (!s) throw ConfigError("unknown strategy in config");
      cfg.strategy = *s;
    }
    if (doc.contains("seed")) cfg.apply_seed(doc.at("seed").get<std::uint64_t>());
    take(doc, "prompt_tokens", cfg.prompt_tokens);
    if (doc.contains("tiling")) {
      const auto& t = doc.at("tiling");
      reject_unknown(t, {"patch_size", "tile_grid_side", "overlap_rate", "max_tiles",
                         "shuffle_factor", "compress_after_iss"}, "tiling");
      take(t, "patch_size", cfg.tiling.patch_size);
      take(t, "tile_grid_side", cfg.tiling.tile_grid_side);
      take(t, "overlap_rate", cfg.tiling.overlap_rate);
      take(t, "max_tiles", cfg.tiling.max_tiles);
      take(t, "shuffle_factor", cfg.tiling.shuffle_factor);
      take(t, "compress_after_iss", cfg.tiling.compress_after_iss);
    }
    if (doc.contains("vit")) {
      const auto& v = doc.at("vit");
      reject_unknown(v, {"patch_size", "grid_side", "dim", "depth", "heads", "mlp_ratio",
                         "use_pos_emb", "input_scale", "input_shift", "seed"}, "vit");
      take(v, "patch_size", cfg.vit.patch_size);
      take(v, "grid_side", cfg.vit.grid_side);
      take(v, "dim", cfg.vit.dim);
      take(v, "depth", cfg.vit.depth);
      take(v, "heads", cfg.vit.heads);
      take(v, "mlp_ratio", cfg.vit.mlp_ratio);
      take(v, "use_pos_emb", cfg.vit.use_pos_emb);
      take(v, "input_scale", cfg.vit.input_scale);
      take(v, "input_shift", cfg.vit.input_shift);
      take(v, "seed", cfg.vit.seed);
    }
    if (doc.contains("adapter")) {
      const auto& a = doc.at("adapter");
      reject_unknown(a, {"in_dim", "shuffle_factor", "hidden_dim", "out_dim", "gelu", "seed"},
                     "adapter");
      take(a, "in_dim", cfg.adapter.in_dim);
      take(a, "shuffle_factor", cfg.adapter.shuffle_factor);
      take(a, "hidden_dim", cfg.adapter.hidden_dim);
      take(a, "out_dim", cfg.adapter.out_dim);
      take(a, "seed", cfg.adapter.seed);
      if (a.contains("gelu")) {
        const auto g = a.at("gelu").get<std::string>();
        if (g != "exact" && g != "tanh") throw ConfigError("adapter.gelu must be exact|tanh");
        cfg.adapter.gelu = g == "tanh" ? GeluKind::Tanh : GeluKind::Exact;
      }
    }
    if (doc.contains("cost_model")) {
      const auto& m = doc.at("cost_model");
      reject_unknown(m, {"base_s", "per_ctx_s"}, "cost_model");
      take(m, "base_s", cfg.cost_model.base_s);
      take(m, "per_ctx_s", cfg.cost_model.per_ctx_s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
}

}  // namespace flashtok
