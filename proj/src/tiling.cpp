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

#include "flashtok/tiling.hpp"

#include <cmath>
#include <sstream>

#include "flashtok/errors.hpp"

namespace flashtok {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Static: return "static";
    case Strategy::DynamicCrop: return "dynamic";
    case Strategy::OverlapCrop: return "overlap";
    case Strategy::ISS: return "iss";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "static" || name == "Static") return Strategy::Static;
  if (name == "dynamic" || name == "DynamicCrop" || name == "dynamic-crop") {
    return Strategy::DynamicCrop;
  }
  if (name == "overlap" || name == "OverlapCrop" || name == "overlap-crop") {
    return Strategy::OverlapCrop;
  }
  if (name == "iss" || name == "ISS") return Strategy::ISS;
  return std::nullopt;
}

int TilingConfig::overlap_patches() const {
  return static_cast<int>(std::lround(overlap_rate * tile_grid_side));
}

int TilingConfig::retained_side() const {
  return tile_grid_side - 2 * overlap_patches();
}

void TilingConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("tiling: " + m); };
  if (patch_size < 1) fail("patch_size must be >= 1");
  if (tile_grid_side < 2) fail("tile_grid_side must be >= 2");
  if (max_tiles < 1) fail("max_tiles must be >= 1");
  if (!(overlap_rate >= 0.0 && overlap_rate < 0.5)) {
    fail("overlap_rate must lie in [0, 0.5)");
  }
  if (shuffle_factor < 1) fail("shuffle_factor must be >= 1");
  const int side = retained_side();
  if (side < 1) fail("tile_grid_side - 2*overlap must be >= 1");
  if (tile_grid_side % shuffle_factor != 0) {
    fail("shuffle_factor must divide tile_grid_side");
  }
  if (side % shuffle_factor != 0) {
    fail("shuffle_factor " + std::to_string(shuffle_factor) +
         " must divide the retained side " + std::to_string(side));
  }
}

void TileLayout::validate() const {
  auto fail = [](const std::string& m) { throw GeometryError("layout: " + m); };
  if (patch_size < 1 || grid_side < 1) fail("non-positive patch geometry");
  if (grid_rows < 1 || grid_cols < 1) fail("non-positive grid");
  if (tiles.size() != static_cast<std::size_t>(grid_rows) * grid_cols) {
    fail("tile count does not match grid");
  }
  if (content_w < 1 || content_h < 1 || frame_margin < 0) fail("bad content");
  const int edge = patch_size * grid_side;
  for (const auto& t : tiles) {
    if (t.w != edge || t.h != edge) fail("tile is not g*p square");
    if (t.x < 0 || t.y < 0 || t.x + t.w > padded_w() || t.y + t.h > padded_h()) {
      fail("tile outside padded image");
    }
    const auto& d = t.discard;
    if (d.left < 0 || d.right < 0 || d.top < 0 || d.bottom < 0 ||
        2 * d.left >= grid_side || 2 * d.right >= grid_side ||
        2 * d.top >= grid_side || 2 * d.bottom >= grid_side) {
      fail("discarded border must be in [0, g/2)");
    }
  }
  if (strategy == Strategy::Static &&
      (tiles.size() != 1 || frame_margin != 0 || content_w != edge ||
       content_h != edge)) {
    fail("static layout must be a single whole-image tile");
  }
}

GridShape select_grid(int img_w, int img_h, const TilingConfig& cfg) {
  if (img_w < 1 || img_h < 1) throw GeometryError("image dims must be positive");
  if (cfg.max_tiles < 1) throw ConfigError("max_tiles must be >= 1");
  constexpr double kTie = 1e-12;
  const double target = std::log(static_cast<double>(img_w) / img_h);
  GridShape best{1, 1};
  double best_err = std::abs(target);
  for (int rows = 1; rows <= cfg.max_tiles; ++rows) {
    for (int cols = 1; rows * cols <= cfg.max_tiles; ++cols) {
      const double err =
          std::abs(target - std::log(static_cast<double>(cols) / rows));
      const int n = rows * cols;
      const int best_n = best.rows * best.cols;
      bool better = false;
      if (err < best_err - kTie) {
        better = true;
      } else if (err <= best_err + kTie) {
        better = n > best_n || (n == best_n && cols > best.cols);
      }
      if (better) {
        best = {rows, cols};
        best_err = err;
      }
    }
  }
  return best;
}

namespace {

void check_image(int img_w, int img_h) {
  if (img_w < 1 || img_h < 1) throw GeometryError("image dims must be positive");
}

// Tiles of g*p pixels on a rows x cols lattice with the given stride, each
// discarding `discard` patches on all four sides.
TileLayout lattice(Strategy s, GridShape grid, const TilingConfig& cfg,
                   int content_w, int content_h, int margin, int stride,
                   int discard) {
  TileLayout layout;
  layout.strategy = s;
  layout.patch_size = cfg.patch_size;
  layout.grid_side = cfg.tile_grid_side;
  layout.grid_rows = grid.rows;
  layout.grid_cols = grid.cols;
  layout.content_w = content_w;
  layout.content_h = content_h;
  layout.frame_margin = margin;
  const int edge = cfg.tile_pixels();
  layout.tiles.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      layout.tiles.push_back(TileRect{c * stride, r * stride, edge, edge,
                                      {discard, discard, discard, discard}});
    }
  }
  return layout;
}

}  // namespace

TileLayout plan_static(int img_w, int img_h, const TilingConfig& cfg) {
  check_image(img_w, img_h);
  cfg.validate();
  const int edge = cfg.tile_pixels();
  return lattice(Strategy::Static, {1, 1}, cfg, edge, edge, 0, edge, 0);
}

TileLayout plan_dynamic_crop(int img_w, int img_h, const TilingConfig& cfg) {
  check_image(img_w, img_h);
  cfg.validate();
  const GridShape grid = select_grid(img_w, img_h, cfg);
  const int edge = cfg.tile_pixels();
  return lattice(Strategy::DynamicCrop, grid, cfg, grid.cols * edge,
                 grid.rows * edge, 0, edge, 0);
}

TileLayout plan_overlap_crop(int img_w, int img_h, const TilingConfig& cfg) {
  check_image(img_w, img_h);
  cfg.validate();
  const GridShape grid = select_grid(img_w, img_h, cfg);
  const int edge = cfg.tile_pixels();
  const int stride = cfg.retained_side() * cfg.patch_size;
  // First tile at 0, last tile flush with the content edge.
  return lattice(Strategy::OverlapCrop, grid, cfg,
                 (grid.cols - 1) * stride + edge,
                 (grid.rows - 1) * stride + edge, 0, stride, 0);
}

TileLayout plan_iss(int img_w, int img_h, const TilingConfig& cfg) {
  check_image(img_w, img_h);
  cfg.validate();
  const GridShape grid = select_grid(img_w, img_h, cfg);
  const int o = cfg.overlap_patches();
  const int stride = cfg.retained_side() * cfg.patch_size;
  return lattice(Strategy::ISS, grid, cfg, grid.cols * stride,
                 grid.rows * stride, o * cfg.patch_size, stride, o);
}

TileLayout plan_layout(Strategy strategy, int img_w, int img_h,
                       const TilingConfig& cfg) {
  switch (strategy) {
    case Strategy::Static: return plan_static(img_w, img_h, cfg);
    case Strategy::DynamicCrop: return plan_dynamic_crop(img_w, img_h, cfg);
    case Strategy::OverlapCrop: return plan_overlap_crop(img_w, img_h, cfg);
    case Strategy::ISS: return plan_iss(img_w, img_h, cfg);
  }
  throw ConfigError("unknown strategy");
}

std::int64_t count_vit_tokens(const TileLayout& layout) {
  const std::int64_t per_tile =
      static_cast<std::int64_t>(layout.grid_side) * layout.grid_side;
  return per_tile * static_cast<std::int64_t>(layout.tiles.size());
}

int effective_shuffle_factor(Strategy strategy, const TilingConfig& cfg) {
  if (strategy == Strategy::ISS && !cfg.compress_after_iss) return 1;
  return cfg.shuffle_factor;
}

std::int64_t count_llm_tokens(const TileLayout& layout, const TilingConfig& cfg) {
  const int r = effective_shuffle_factor(layout.strategy, cfg);
  std::int64_t total = 0;
  for (const auto& t : layout.tiles) {
    const std::int64_t rows = t.retained_rows(layout.grid_side) / r;
    const std::int64_t cols = t.retained_cols(layout.grid_side) / r;
    total += rows * cols;
  }
  return total;
}

std::string render_ascii(const TileLayout& layout) {
  // One character per patch of the padded image.
  const int p = layout.patch_size;
  const int cols = (layout.padded_w() + p - 1) / p;
  const int rows = (layout.padded_h() + p - 1) / p;
  std::vector<std::string> canvas(rows, std::string(cols, ' '));
  const int m = layout.frame_margin;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const int px = x * p;
      const int py = y * p;
      const bool frame = px < m || py < m || px >= m + layout.content_w ||
                         py >= m + layout.content_h;
      canvas[y][x] = frame ? '.' : ' ';
    }
  }
  for (const auto& t : layout.tiles) {
    const int tx = t.x / p;
    const int ty = t.y / p;
    const int g = layout.grid_side;
    for (int y = 0; y < g; ++y) {
      for (int x = 0; x < g; ++x) {
        const bool keep = x >= t.discard.left && x < g - t.discard.right &&
                          y >= t.discard.top && y < g - t.discard.bottom;
        char& cell = canvas[ty + y][tx + x];
        if (keep) {
          cell = '#';
        } else if (cell != '#') {
          cell = '+';
        }
      }
    }
  }
  std::ostringstream os;
  os << strategy_name(layout.strategy) << " grid " << layout.grid_rows << "x"
     << layout.grid_cols << ", content " << layout.content_w << "x"
     << layout.content_h << ", frame " << layout.frame_margin << "px, "
     << layout.tiles.size() << " tile(s) of " << layout.grid_side << "x"
     << layout.grid_side << " patches\n";
  for (const auto& line : canvas) os << line << '\n';
  return os.str();
}

}  // namespace flashtok
