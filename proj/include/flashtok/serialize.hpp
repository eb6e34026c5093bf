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
#include <filesystem>
#include <iosfwd>
#include <json.hpp>

#include "flashtok/adapter.hpp"
#include "flashtok/tiling.hpp"
#include "flashtok/token_grid.hpp"

namespace flashtok {

// Binary containers share a little-endian header: magic "FVTK", u32 version.
//   version 1, feature dump: u32 rows, u32 cols, u32 dim, rows*cols*dim f32.
//   version 2, tensor records: u32 count, then per record u32 name length,
//     name bytes, u32 rank, rank x u32 dims, prod(dims) f32.
inline constexpr std::uint32_t kFeatureDumpVersion = 1;
inline constexpr std::uint32_t kTensorContainerVersion = 2;

void write_feature_dump(const TokenGrid& grid, std::ostream& out);
void write_feature_dump(const TokenGrid& grid, const std::filesystem::path& path);
TokenGrid read_feature_dump(std::istream& in);
TokenGrid read_feature_dump(const std::filesystem::path& path);

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

void write_tensor_container(const std::vector<NamedTensor>& tensors, std::ostream& out);
std::vector<NamedTensor> read_tensor_container(std::istream& in);

void write_adapter_params(const AdapterParams& params, const std::filesystem::path& path);

/// Loads parameters written by write_adapter_params. Names and shapes must
/// match cfg exactly. Values round-trip through f32.
AdapterParams read_adapter_params(const AdapterConfig& cfg,
                                  const std::filesystem::path& path);

/// Layout document; field names follow docs/tile_layout.schema.json.
nlohmann::json layout_to_json(const TileLayout& layout);
TileLayout layout_from_json(const nlohmann::json& doc);

}  // namespace flashtok
