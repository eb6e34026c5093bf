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

#include "flashtok/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "flashtok/errors.hpp"

namespace flashtok {

namespace {

constexpr std::array<char, 4> kMagic{'F', 'V', 'T', 'K'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF),
                     static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

void put_f32(std::ostream& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DecodeError("FVTK: unexpected end of data");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

void put_header(std::ostream& out, std::uint32_t version) {
  out.write(kMagic.data(), 4);
  put_u32(out, version);
}

void expect_header(std::istream& in, std::uint32_t version) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) {
    throw DecodeError("FVTK: bad magic");
  }
  const std::uint32_t v = get_u32(in);
  if (v != version) {
    throw DecodeError("FVTK: expected version " + std::to_string(version) +
                      ", found " + std::to_string(v));
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_feature_dump(const TokenGrid& grid, std::ostream& out) {
  put_header(out, kFeatureDumpVersion);
  put_u32(out, static_cast<std::uint32_t>(grid.rows()));
  put_u32(out, static_cast<std::uint32_t>(grid.cols()));
  put_u32(out, static_cast<std::uint32_t>(grid.dim()));
  for (double v : grid.data()) put_f32(out, v);
  if (!out) throw IoError("failed writing feature dump");
}

void write_feature_dump(const TokenGrid& grid, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_feature_dump(grid, out);
}

TokenGrid read_feature_dump(std::istream& in) {
  expect_header(in, kFeatureDumpVersion);
  const auto rows = get_u32(in);
  const auto cols = get_u32(in);
  const auto dim = get_u32(in);
  constexpr std::uint64_t kLimit = 1ULL << 31;
  if (static_cast<std::uint64_t>(rows) * cols * dim >= kLimit) {
    throw DecodeError("FVTK: feature grid too large");
  }
  TokenGrid grid(static_cast<int>(rows), static_cast<int>(cols), static_cast<int>(dim));
  for (double& v : grid.data()) v = get_f32(in);
  return grid;
}

TokenGrid read_feature_dump(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_feature_dump(in);
}

void write_tensor_container(const std::vector<NamedTensor>& tensors, std::ostream& out) {
  put_header(out, kTensorContainerVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw IoError("failed writing tensor container");
}

std::vector<NamedTensor> read_tensor_container(std::istream& in) {
  expect_header(in, kTensorContainerVersion);
  const auto count = get_u32(in);
  std::vector<NamedTensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = get_u32(in);
    if (name_len > 4096) throw DecodeError("FVTK: tensor name too long");
    t.name.resize(name_len);
    if (!in.read(t.name.data(), name_len)) throw DecodeError("FVTK: truncated name");
    const auto rank = get_u32(in);
    if (rank > 8) throw DecodeError("FVTK: tensor rank too large");
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.dims.push_back(get_u32(in));
      n *= t.dims.back();
      if (n >= (1ULL << 31)) throw DecodeError("FVTK: tensor too large");
    }
    t.values.resize(n);
    for (float& v : t.values) v = get_f32(in);
    tensors.push_back(std::move(t));
  }
  return tensors;
}

void write_adapter_params(const AdapterParams& params, const std::filesystem::path& path) {
  AdapterParams copy = params;
  std::vector<NamedTensor> tensors;
  for (const auto& ref : adapter_tensors(copy)) {
    tensors.push_back({ref.name, ref.dims,
                       std::vector<float>(ref.values->begin(), ref.values->end())});
  }
  auto out = open_out(path);
  write_tensor_container(tensors, out);
}

AdapterParams read_adapter_params(const AdapterConfig& cfg,
                                  const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto tensors = read_tensor_container(in);
  AdapterParams params = AdapterParams::zeros(cfg);
  auto refs = adapter_tensors(params);
  if (tensors.size() != refs.size()) {
    throw DecodeError("adapter params: expected " + std::to_string(refs.size()) +
                      " tensors, found " + std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (tensors[i].name != refs[i].name || tensors[i].dims != refs[i].dims) {
      throw DecodeError("adapter params: tensor '" + tensors[i].name +
                        "' does not match expected '" + refs[i].name + "'");
    }
    refs[i].values->assign(tensors[i].values.begin(), tensors[i].values.end());
  }
  return params;
}

nlohmann::json layout_to_json(const TileLayout& layout) {
  using nlohmann::json;
  json tiles = json::array();
  for (const auto& t : layout.tiles) {
    tiles.push_back({{"x", t.x},
                     {"y", t.y},
                     {"w", t.w},
                     {"h", t.h},
                     {"retain",
                      {{"l", t.discard.left},
                       {"r", t.discard.right},
                       {"t", t.discard.top},
                       {"b", t.discard.bottom}}},
                     {"retained_tokens",
                      t.retained_rows(layout.grid_side) * t.retained_cols(layout.grid_side)}});
  }
  return {{"strategy", std::string(strategy_name(layout.strategy))},
          {"patch_size", layout.patch_size},
          {"grid_side", layout.grid_side},
          {"grid", {{"rows", layout.grid_rows}, {"cols", layout.grid_cols}}},
          {"content", {{"w", layout.content_w}, {"h", layout.content_h}}},
          {"frame_margin", layout.frame_margin},
          {"padded", {{"w", layout.padded_w()}, {"h", layout.padded_h()}}},
          {"tiles", tiles}};
}

TileLayout layout_from_json(const nlohmann::json& doc) {
  try {
    TileLayout layout;
    const auto strategy = parse_strategy(doc.at("strategy").get<std::string>());
    if (!strategy) throw DecodeError("layout: unknown strategy");
    layout.strategy = *strategy;
    layout.patch_size = doc.at("patch_size").get<int>();
    layout.grid_side = doc.at("grid_side").get<int>();
    layout.grid_rows = doc.at("grid").at("rows").get<int>();
    layout.grid_cols = doc.at("grid").at("cols").get<int>();
    layout.content_w = doc.at("content").at("w").get<int>();
    layout.content_h = doc.at("content").at("h").get<int>();
    layout.frame_margin = doc.at("frame_margin").get<int>();
    for (const auto& t : doc.at("tiles")) {
      const auto& r = t.at("retain");
      layout.tiles.push_back(TileRect{t.at("x").get<int>(), t.at("y").get<int>(),
                                      t.at("w").get<int>(), t.at("h").get<int>(),
                                      {r.at("l").get<int>(), r.at("r").get<int>(),
                                       r.at("t").get<int>(), r.at("b").get<int>()}});
    }
    layout.validate();
    return layout;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("layout JSON: ") + e.what());
  }
}

}  // namespace flashtok
