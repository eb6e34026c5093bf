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

#include <array>
#include <cstdint>
#include <vector>

#include "flashtok/image.hpp"
#include "flashtok/nn_math.hpp"
#include "flashtok/tiling.hpp"
#include "flashtok/token_grid.hpp"

namespace flashtok {

/// Desk-scale vision transformer shape. Presets mirror the patch geometry of
/// the encoders they stand in for, not their width.
struct VitConfig {
  int patch_size = 14;
  int grid_side = 32;
  int dim = 32;
  int depth = 2;
  int heads = 4;
  double mlp_ratio = 2.0;
  bool use_pos_emb = true;
  std::array<double, 3> input_scale{1.0, 1.0, 1.0};
  std::array<double, 3> input_shift{0.0, 0.0, 0.0};
  std::uint64_t seed = 42;

  int token_width() const { return 3 * patch_size * patch_size; }
  int mlp_hidden() const;

  void validate() const;

  friend bool operator==(const VitConfig&, const VitConfig&) = default;
};

struct VitBlock {
  LayerNorm norm1;
  Linear qkv;   // dim -> 3 * dim, laid out [q | k | v]
  Linear proj;  // dim -> dim
  LayerNorm norm2;
  Linear fc1;   // dim -> hidden
  Linear fc2;   // hidden -> dim
};

struct VitParams {
  VitConfig config;
  Linear patch_embed;               // 3p^2 -> dim
  std::vector<double> pos_embed;    // g^2 * dim, empty when disabled
  std::vector<VitBlock> blocks;
  LayerNorm final_norm;

  std::size_t parameter_count() const;
};

/// Weights come from std::mt19937_64(seed): each value is
/// a * (2u - 1) with u = (draw >> 11) * 2^-53 and a = 1 / sqrt(fan_in)
/// (1 / sqrt(dim) for the positional table). Draw order: patch weight, patch
/// bias, positional table, then per block qkv, proj, fc1, fc2 (weight then
/// bias). Norm gains start at 1 and biases at 0.
VitParams init_vit(const VitConfig& cfg);

/// FNV-1a over the bit patterns of every parameter, in draw order.
std::uint64_t params_checksum(const VitParams& params);

/// Splits a tile into p x p patches; each token is the row-major (y, x, c)
/// flattening of its patch. Throws GeometryError if p does not divide the
/// tile.
TokenGrid patchify(const ImageBuffer& tile, int patch_size);

/// Pre-norm transformer over all g^2 tokens. Softmax and accumulation run in
/// double precision.
TokenGrid vit_forward(const TokenGrid& tokens, const VitParams& params);

/// Interior sub-grid left after discarding the rectangle's borders.
TokenGrid drop_overlap_tokens(const TokenGrid& features, const TileRect& rect);

/// resize -> pad -> crop tiles -> encode -> drop overlap -> stitch row-major
/// by grid position. Tiles run on up to `workers` threads; the result does
/// not depend on the worker count.
TokenGrid encode_layout(const ImageBuffer& img, const TileLayout& layout,
                        const VitParams& params, const TilingConfig& cfg,
                        int workers);

TokenGrid encode_layout(const ImageBuffer& img, const TileLayout& layout,
                        const VitParams& params, const TilingConfig& cfg);

/// Resized and framed pixels the layout's tiles are cut from.
ImageBuffer prepare_canvas(const ImageBuffer& img, const TileLayout& layout);

}  // namespace flashtok
