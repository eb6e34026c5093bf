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
#include <utility>
#include <vector>

namespace flashtok {

enum class Strategy { Static, DynamicCrop, OverlapCrop, ISS };

std::string_view strategy_name(Strategy s);

/// Accepts "static", "dynamic", "overlap", "iss" (and the long enum names).
std::optional<Strategy> parse_strategy(std::string_view name);

/// Tiling geometry. A tile is tile_grid_side x tile_grid_side patches of
/// patch_size pixels. overlap_rate is the fraction of the tile's patch grid
/// discarded per edge in ISS mode.
struct TilingConfig {
  int patch_size = 14;
  int tile_grid_side = 32;
  double overlap_rate = 0.125;
  int max_tiles = 4;
  int shuffle_factor = 2;
  bool compress_after_iss = true;

  /// Discarded border per edge, in patches: round(overlap_rate * g).
  int overlap_patches() const;

  /// Patches per tile edge that survive overlap removal: g - 2o.
  int retained_side() const;

  int tile_pixels() const { return patch_size * tile_grid_side; }

  /// Throws ConfigError when any invariant fails.
  void validate() const;

  friend bool operator==(const TilingConfig&, const TilingConfig&) = default;
};

struct RetainBorders {
  int left = 0;
  int right = 0;
  int top = 0;
  int bottom = 0;

  friend bool operator==(const RetainBorders&, const RetainBorders&) = default;
};

/// Tile rectangle in padded-image pixels plus the number of feature-space
/// patches discarded on each side after encoding.
struct TileRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  RetainBorders discard;

  int retained_cols(int grid_side) const {
    return grid_side - discard.left - discard.right;
  }
  int retained_rows(int grid_side) const {
    return grid_side - discard.top - discard.bottom;
  }

  friend bool operator==(const TileRect&, const TileRect&) = default;
};

struct TileLayout {
  Strategy strategy = Strategy::Static;
  int patch_size = 0;
  int grid_side = 0;
  int grid_rows = 1;
  int grid_cols = 1;
  int content_w = 0;
  int content_h = 0;
  int frame_margin = 0;
  std::vector<TileRect> tiles;  // row-major by grid position

  int padded_w() const { return content_w + 2 * frame_margin; }
  int padded_h() const { return content_h + 2 * frame_margin; }

  /// Checks the structural invariants (tile count, sizes, bounds, borders).
  /// Throws GeometryError.
  void validate() const;

  friend bool operator==(const TileLayout&, const TileLayout&) = default;
};

struct GridShape {
  int rows = 1;
  int cols = 1;

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Grid with rows * cols <= max_tiles whose aspect ratio cols / rows is
/// closest to the image's in log space. Ties go to more tiles, then to more
/// columns.
GridShape select_grid(int img_w, int img_h, const TilingConfig& cfg);

TileLayout plan_static(int img_w, int img_h, const TilingConfig& cfg);
TileLayout plan_dynamic_crop(int img_w, int img_h, const TilingConfig& cfg);
TileLayout plan_overlap_crop(int img_w, int img_h, const TilingConfig& cfg);
TileLayout plan_iss(int img_w, int img_h, const TilingConfig& cfg);

TileLayout plan_layout(Strategy strategy, int img_w, int img_h,
                       const TilingConfig& cfg);

/// Tokens entering the encoder: tiles * g^2.
std::int64_t count_vit_tokens(const TileLayout& layout);

/// Tokens reaching the language model after overlap removal and pixel shuffle.
std::int64_t count_llm_tokens(const TileLayout& layout, const TilingConfig& cfg);

/// Pixel-shuffle factor the adapter applies for this layout: 1 for ISS with
/// compress_after_iss off, otherwise cfg.shuffle_factor.
int effective_shuffle_factor(Strategy strategy, const TilingConfig& cfg);

/// Multi-line text diagram of the tiles; '#' marks retained patches, '+'
/// discarded ones, '.' the black frame.
std::string render_ascii(const TileLayout& layout);

}  // namespace flashtok
