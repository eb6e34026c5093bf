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

#include "flashtok/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "flashtok/errors.hpp"
#include "flashtok/kernels.hpp"
#include "flashtok/parallel.hpp"

namespace flashtok {

int VitConfig::mlp_hidden() const {
  return std::max(1, static_cast<int>(std::lround(mlp_ratio * dim)));
}

void VitConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("vit: " + m); };
  if (patch_size < 1) fail("patch_size must be >= 1");
  if (grid_side < 1) fail("grid_side must be >= 1");
  if (dim < 1) fail("dim must be >= 1");
  if (heads < 1) fail("heads must be >= 1");
  if (dim % heads != 0) fail("dim must be divisible by heads");
  if (depth < 0) fail("depth must be >= 0");
  if (!(mlp_ratio > 0.0)) fail("mlp_ratio must be positive");
}

namespace {

void hash_values(std::uint64_t& h, const std::vector<double>& v) {
  for (double x : v) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
}

}  // namespace

std::size_t VitParams::parameter_count() const {
  std::size_t n = patch_embed.parameter_count() + pos_embed.size() +
                  final_norm.parameter_count();
  for (const auto& b : blocks) {
    n += b.norm1.parameter_count() + b.qkv.parameter_count() +
         b.proj.parameter_count() + b.norm2.parameter_count() +
         b.fc1.parameter_count() + b.fc2.parameter_count();
  }
  return n;
}

VitParams init_vit(const VitConfig& cfg) {
  cfg.validate();
  SeededUniform draw(cfg.seed);
  VitParams p;
  p.config = cfg;
  p.patch_embed = Linear(cfg.token_width(), cfg.dim);
  draw.fill(p.patch_embed);
  if (cfg.use_pos_emb) {
    p.pos_embed.assign(
        static_cast<std::size_t>(cfg.grid_side) * cfg.grid_side * cfg.dim, 0.0);
    draw.fill(p.pos_embed, 1.0 / std::sqrt(static_cast<double>(cfg.dim)));
  }
  const int hidden = cfg.mlp_hidden();
  p.blocks.reserve(cfg.depth);
  for (int l = 0; l < cfg.depth; ++l) {
    VitBlock b{LayerNorm(cfg.dim), Linear(cfg.dim, 3 * cfg.dim),
               Linear(cfg.dim, cfg.dim), LayerNorm(cfg.dim),
               Linear(cfg.dim, hidden), Linear(hidden, cfg.dim)};
    draw.fill(b.qkv);
    draw.fill(b.proj);
    draw.fill(b.fc1);
    draw.fill(b.fc2);
    p.blocks.push_back(std::move(b));
  }
  p.final_norm = LayerNorm(cfg.dim);
  return p;
}

std::uint64_t params_checksum(const VitParams& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  hash_values(h, p.patch_embed.weight);
  hash_values(h, p.patch_embed.bias);
  hash_values(h, p.pos_embed);
  for (const auto& b : p.blocks) {
    for (const LayerNorm* n : {&b.norm1, &b.norm2}) {
      hash_values(h, n->gain);
      hash_values(h, n->bias);
    }
    for (const Linear* l : {&b.qkv, &b.proj, &b.fc1, &b.fc2}) {
      hash_values(h, l->weight);
      hash_values(h, l->bias);
    }
  }
  hash_values(h, p.final_norm.gain);
  hash_values(h, p.final_norm.bias);
  return h;
}

TokenGrid patchify(const ImageBuffer& tile, int p) {
  if (p < 1 || tile.width() % p != 0 || tile.height() % p != 0) {
    throw GeometryError("patchify: patch size " + std::to_string(p) +
                        " does not divide " + std::to_string(tile.width()) +
                        "x" + std::to_string(tile.height()));
  }
  const int rows = tile.height() / p;
  const int cols = tile.width() / p;
  TokenGrid out(rows, cols, 3 * p * p);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      auto tok = out.token(r, c);
      std::size_t k = 0;
      for (int y = 0; y < p; ++y) {
        const float* src = tile.pixel(c * p, r * p + y);
        for (int i = 0; i < 3 * p; ++i) tok[k++] = src[i];
      }
    }
  }
  return out;
}

namespace {

void attention(const TokenGrid& normed, const VitBlock& block, int heads,
               TokenGrid& residual) {
  const auto& k = simd::active();
  const std::size_t n = normed.tokens();
  const int dim = normed.dim();
  const int head_dim = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  std::vector<double> qkv(n * 3 * dim);
  for (std::size_t i = 0; i < n; ++i) {
    block.qkv.apply(normed.token(i), {qkv.data() + i * 3 * dim,
                                      static_cast<std::size_t>(3 * dim)});
  }
  auto q = [&](std::size_t i, int h) { return qkv.data() + i * 3 * dim + h * head_dim; };
  auto key = [&](std::size_t i, int h) { return q(i, h) + dim; };
  auto val = [&](std::size_t i, int h) { return q(i, h) + 2 * dim; };

  std::vector<double> scores(n);
  std::vector<double> mixed(dim);
  std::vector<double> projected(dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(mixed.begin(), mixed.end(), 0.0);
    for (int h = 0; h < heads; ++h) {
      double peak = -INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        scores[j] = k.dot(q(i, h), key(j, h), head_dim) * scale;
        peak = std::max(peak, scores[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        scores[j] = std::exp(scores[j] - peak);
        total += scores[j];
      }
      double* out = mixed.data() + h * head_dim;
      for (std::size_t j = 0; j < n; ++j) {
        k.axpy(scores[j] / total, val(j, h), out, head_dim);
      }
    }
    block.proj.apply(mixed, projected);
    auto res = residual.token(i);
    for (int c = 0; c < dim; ++c) res[c] += projected[c];
  }
}

void mlp(const TokenGrid& normed, const VitBlock& block, TokenGrid& residual) {
  std::vector<double> hidden(block.fc1.out);
  std::vector<double> out(block.fc2.out);
  for (std::size_t i = 0; i < normed.tokens(); ++i) {
    block.fc1.apply(normed.token(i), hidden);
    for (double& v : hidden) v = gelu(v);
    block.fc2.apply(hidden, out);
    auto res = residual.token(i);
    for (std::size_t c = 0; c < out.size(); ++c) res[c] += out[c];
  }
}

void normalize_all(const TokenGrid& x, const LayerNorm& norm, TokenGrid& out) {
  for (std::size_t i = 0; i < x.tokens(); ++i) norm.apply(x.token(i), out.token(i));
}

}  // namespace

TokenGrid vit_forward(const TokenGrid& tokens, const VitParams& params) {
  const VitConfig& cfg = params.config;
  if (tokens.rows() != cfg.grid_side || tokens.cols() != cfg.grid_side ||
      tokens.dim() != cfg.token_width()) {
    throw GeometryError(
        "vit_forward: expected " + std::to_string(cfg.grid_side) + "x" +
        std::to_string(cfg.grid_side) + "x" + std::to_string(cfg.token_width()) +
        " tokens, got " + std::to_string(tokens.rows()) + "x" +
        std::to_string(tokens.cols()) + "x" + std::to_string(tokens.dim()));
  }
  const int dim = cfg.dim;
  TokenGrid x(tokens.rows(), tokens.cols(), dim);
  std::vector<double> pixels(tokens.dim());
  for (std::size_t i = 0; i < tokens.tokens(); ++i) {
    const auto src = tokens.token(i);
    for (std::size_t c = 0; c < pixels.size(); ++c) {
      pixels[c] = src[c] * cfg.input_scale[c % 3] + cfg.input_shift[c % 3];
    }
    params.patch_embed.apply(pixels, x.token(i));
    if (!params.pos_embed.empty()) {
      auto t = x.token(i);
      const double* pe = params.pos_embed.data() + i * dim;
      for (int c = 0; c < dim; ++c) t[c] += pe[c];
    }
  }

  TokenGrid normed(x.rows(), x.cols(), dim);
  for (const auto& block : params.blocks) {
    normalize_all(x, block.norm1, normed);
    attention(normed, block, cfg.heads, x);
    normalize_all(x, block.norm2, normed);
    mlp(normed, block, x);
  }
  normalize_all(x, params.final_norm, normed);
  return normed;
}

TokenGrid drop_overlap_tokens(const TokenGrid& features, const TileRect& rect) {
  const auto& d = rect.discard;
  if (d.left < 0 || d.right < 0 || d.top < 0 || d.bottom < 0 ||
      d.left + d.right + 1 > features.cols() ||
      d.top + d.bottom + 1 > features.rows()) {
    throw GeometryError("drop_overlap_tokens: borders exceed the feature grid");
  }
  const int rows = features.rows() - d.top - d.bottom;
  const int cols = features.cols() - d.left - d.right;
  TokenGrid out(rows, cols, features.dim());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto src = features.token(r + d.top, c + d.left);
      std::copy(src.begin(), src.end(), out.token(r, c).begin());
    }
  }
  return out;
}

ImageBuffer prepare_canvas(const ImageBuffer& img, const TileLayout& layout) {
  return pad_black_frame(
      resize_bilinear(img, layout.content_w, layout.content_h),
      layout.frame_margin);
}

TokenGrid encode_layout(const ImageBuffer& img, const TileLayout& layout,
                        const VitParams& params, const TilingConfig& cfg,
                        int workers) {
  layout.validate();
  const VitConfig& vc = params.config;
  if (layout.patch_size != vc.patch_size || layout.grid_side != vc.grid_side ||
      cfg.patch_size != vc.patch_size || cfg.tile_grid_side != vc.grid_side) {
    throw GeometryError("encode_layout: layout/encoder patch geometry mismatch");
  }
  const ImageBuffer canvas = prepare_canvas(img, layout);

  std::vector<TokenGrid> retained(layout.tiles.size());
  parallel_for(layout.tiles.size(), workers, [&](std::size_t i) {
    const TileRect& t = layout.tiles[i];
    const TokenGrid features =
        vit_forward(patchify(crop(canvas, t.x, t.y, t.w, t.h), vc.patch_size), params);
    retained[i] = drop_overlap_tokens(features, t);
  });

  const int tile_rows = retained.front().rows();
  const int tile_cols = retained.front().cols();
  for (const auto& g : retained) {
    if (g.rows() != tile_rows || g.cols() != tile_cols) {
      throw GeometryError("encode_layout: tiles retain different grid sizes");
    }
  }
  TokenGrid out(layout.grid_rows * tile_rows, layout.grid_cols * tile_cols, vc.dim);
  for (std::size_t i = 0; i < retained.size(); ++i) {
    const int gr = static_cast<int>(i) / layout.grid_cols;
    const int gc = static_cast<int>(i) % layout.grid_cols;
    for (int r = 0; r < tile_rows; ++r) {
      for (int c = 0; c < tile_cols; ++c) {
        const auto src = retained[i].token(r, c);
        std::copy(src.begin(), src.end(),
                  out.token(gr * tile_rows + r, gc * tile_cols + c).begin());
      }
    }
  }
  return out;
}

TokenGrid encode_layout(const ImageBuffer& img, const TileLayout& layout,
                        const VitParams& params, const TilingConfig& cfg) {
  return encode_layout(img, layout, params, cfg, default_worker_count());
}

}  // namespace flashtok
