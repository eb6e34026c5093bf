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

#include "flashtok/adapter.hpp"

#include <algorithm>
#include <string>

#include "flashtok/errors.hpp"
#include "flashtok/kernels.hpp"

namespace flashtok {

TokenGrid pixel_shuffle(const TokenGrid& tokens, int r) {
  if (r < 1 || tokens.rows() % r != 0 || tokens.cols() % r != 0) {
    throw GeometryError("pixel_shuffle: factor " + std::to_string(r) +
                        " does not divide " + std::to_string(tokens.rows()) +
                        "x" + std::to_string(tokens.cols()));
  }
  const int d = tokens.dim();
  TokenGrid out(tokens.rows() / r, tokens.cols() / r, r * r * d);
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      auto dst = out.token(i, j);
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) {
          const auto src = tokens.token(i * r + a, j * r + b);
          std::copy(src.begin(), src.end(), dst.begin() + (a * r + b) * d);
        }
      }
    }
  }
  return out;
}

TokenGrid pixel_unshuffle(const TokenGrid& tokens, int r) {
  if (r < 1 || tokens.dim() % (r * r) != 0) {
    throw GeometryError("pixel_unshuffle: dim " + std::to_string(tokens.dim()) +
                        " not divisible by r^2 = " + std::to_string(r * r));
  }
  const int d = tokens.dim() / (r * r);
  TokenGrid out(tokens.rows() * r, tokens.cols() * r, d);
  for (int i = 0; i < tokens.rows(); ++i) {
    for (int j = 0; j < tokens.cols(); ++j) {
      const auto src = tokens.token(i, j);
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) {
          const auto block = src.subspan((a * r + b) * d, d);
          std::copy(block.begin(), block.end(),
                    out.token(i * r + a, j * r + b).begin());
        }
      }
    }
  }
  return out;
}

void AdapterConfig::validate() const {
  if (in_dim < 1 || shuffle_factor < 1 || out_dim < 1 || hidden_dim < 0) {
    throw ConfigError("adapter: dims and shuffle factor must be >= 1");
  }
}

AdapterParams AdapterParams::zeros(const AdapterConfig& cfg) {
  cfg.validate();
  const int d = cfg.shuffled_dim();
  const int h = cfg.hidden();
  AdapterParams p{LayerNorm(d), Linear(d, h), Linear(h, h), Linear(h, cfg.out_dim)};
  std::fill(p.norm.gain.begin(), p.norm.gain.end(), 0.0);
  return p;
}

std::size_t AdapterParams::parameter_count() const {
  return norm.parameter_count() + fc1.parameter_count() +
         fc2.parameter_count() + fc3.parameter_count();
}

AdapterParams init_adapter(const AdapterConfig& cfg) {
  cfg.validate();
  const int d = cfg.shuffled_dim();
  const int h = cfg.hidden();
  AdapterParams p{LayerNorm(d), Linear(d, h), Linear(h, h), Linear(h, cfg.out_dim)};
  SeededUniform draw(cfg.seed);
  draw.fill(p.fc1);
  draw.fill(p.fc2);
  draw.fill(p.fc3);
  return p;
}

std::int64_t param_count(const AdapterConfig& cfg) {
  cfg.validate();
  const std::int64_t d = cfg.shuffled_dim();
  const std::int64_t h = cfg.hidden();
  const std::int64_t o = cfg.out_dim;
  return 2 * d + (d * h + h) + (h * h + h) + (h * o + o);
}

namespace {

void check_shapes(const TokenGrid& tokens, const AdapterParams& params,
                  const AdapterConfig& cfg) {
  if (tokens.dim() != cfg.in_dim) {
    throw GeometryError("adapter: token dim " + std::to_string(tokens.dim()) +
                        " != in_dim " + std::to_string(cfg.in_dim));
  }
  const int d = cfg.shuffled_dim();
  const int h = cfg.hidden();
  if (params.norm.gain.size() != static_cast<std::size_t>(d) ||
      params.fc1.in != d || params.fc1.out != h || params.fc2.in != h ||
      params.fc2.out != h || params.fc3.in != h || params.fc3.out != cfg.out_dim) {
    throw GeometryError("adapter: parameter shapes do not match config");
  }
}

// Per-token activations kept for the backward pass.
struct TokenTrace {
  std::vector<double> xhat;
  double inv_std = 0.0;
  std::vector<double> z;   // LayerNorm output
  std::vector<double> a1;  // pre-activations
  std::vector<double> h1;
  std::vector<double> a2;
  std::vector<double> h2;
};

void forward_token(std::span<const double> x, const AdapterParams& p,
                   GeluKind kind, TokenTrace& t, std::span<double> y) {
  t.xhat.resize(x.size());
  t.z.resize(x.size());
  t.a1.resize(p.fc1.out);
  t.h1.resize(p.fc1.out);
  t.a2.resize(p.fc2.out);
  t.h2.resize(p.fc2.out);
  t.inv_std = p.norm.apply(x, t.z, t.xhat);
  p.fc1.apply(t.z, t.a1);
  std::transform(t.a1.begin(), t.a1.end(), t.h1.begin(),
                 [kind](double v) { return gelu(v, kind); });
  p.fc2.apply(t.h1, t.a2);
  std::transform(t.a2.begin(), t.a2.end(), t.h2.begin(),
                 [kind](double v) { return gelu(v, kind); });
  p.fc3.apply(t.h2, y);
}

// Accumulates d(weight) += input (x) delta, d(bias) += delta, and returns
// d(input)[k] = W[k, :] . delta.
void linear_backward(const Linear& layer, std::span<const double> input,
                     std::span<const double> delta, Linear& grad,
                     std::span<double> d_input) {
  const auto& k = simd::active();
  const std::size_t out = static_cast<std::size_t>(layer.out);
  for (std::size_t j = 0; j < out; ++j) grad.bias[j] += delta[j];
  for (int i = 0; i < layer.in; ++i) {
    k.axpy(input[i], delta.data(), grad.weight.data() + i * out, out);
    d_input[i] = k.dot(layer.weight.data() + i * out, delta.data(), out);
  }
}

}  // namespace

TokenGrid adapter_forward(const TokenGrid& tokens, const AdapterParams& params,
                          const AdapterConfig& cfg) {
  check_shapes(tokens, params, cfg);
  const TokenGrid shuffled = pixel_shuffle(tokens, cfg.shuffle_factor);
  TokenGrid out(shuffled.rows(), shuffled.cols(), cfg.out_dim);
  TokenTrace trace;
  for (std::size_t i = 0; i < shuffled.tokens(); ++i) {
    forward_token(shuffled.token(i), params, cfg.gelu, trace, out.token(i));
  }
  return out;
}

AdapterGrads adapter_grad(const TokenGrid& tokens, const AdapterParams& params,
                          const AdapterConfig& cfg, const TokenGrid& upstream) {
  check_shapes(tokens, params, cfg);
  const TokenGrid shuffled = pixel_shuffle(tokens, cfg.shuffle_factor);
  if (upstream.rows() != shuffled.rows() || upstream.cols() != shuffled.cols() ||
      upstream.dim() != cfg.out_dim) {
    throw GeometryError("adapter_grad: upstream shape does not match output");
  }
  const int d = cfg.shuffled_dim();
  const int h = cfg.hidden();
  AdapterGrads grads{TokenGrid(), AdapterParams::zeros(cfg)};
  TokenGrid d_shuffled(shuffled.rows(), shuffled.cols(), d);

  TokenTrace t;
  std::vector<double> y(cfg.out_dim);
  std::vector<double> dh2(h), da2(h), dh1(h), da1(h), dz(d), dxhat(d);
  for (std::size_t i = 0; i < shuffled.tokens(); ++i) {
    forward_token(shuffled.token(i), params, cfg.gelu, t, y);
    const auto dy = upstream.token(i);

    linear_backward(params.fc3, t.h2, dy, grads.params.fc3, dh2);
    for (int k = 0; k < h; ++k) da2[k] = dh2[k] * gelu_derivative(t.a2[k], cfg.gelu);
    linear_backward(params.fc2, t.h1, da2, grads.params.fc2, dh1);
    for (int k = 0; k < h; ++k) da1[k] = dh1[k] * gelu_derivative(t.a1[k], cfg.gelu);
    linear_backward(params.fc1, t.z, da1, grads.params.fc1, dz);

    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (int k = 0; k < d; ++k) {
      grads.params.norm.gain[k] += dz[k] * t.xhat[k];
      grads.params.norm.bias[k] += dz[k];
      dxhat[k] = dz[k] * params.norm.gain[k];
      mean_dxhat += dxhat[k];
      mean_dxhat_xhat += dxhat[k] * t.xhat[k];
    }
    mean_dxhat /= d;
    mean_dxhat_xhat /= d;
    auto dx = d_shuffled.token(i);
    for (int k = 0; k < d; ++k) {
      dx[k] = t.inv_std * (dxhat[k] - mean_dxhat - t.xhat[k] * mean_dxhat_xhat);
    }
  }
  grads.input = pixel_unshuffle(d_shuffled, cfg.shuffle_factor);
  return grads;
}

std::vector<TensorRef> adapter_tensors(AdapterParams& p) {
  auto dims2 = [](const Linear& l) {
    return std::vector<std::uint32_t>{static_cast<std::uint32_t>(l.in),
                                      static_cast<std::uint32_t>(l.out)};
  };
  auto dims1 = [](const std::vector<double>& v) {
    return std::vector<std::uint32_t>{static_cast<std::uint32_t>(v.size())};
  };
  return {
      {"norm.gain", dims1(p.norm.gain), &p.norm.gain},
      {"norm.bias", dims1(p.norm.bias), &p.norm.bias},
      {"fc1.weight", dims2(p.fc1), &p.fc1.weight},
      {"fc1.bias", dims1(p.fc1.bias), &p.fc1.bias},
      {"fc2.weight", dims2(p.fc2), &p.fc2.weight},
      {"fc2.bias", dims1(p.fc2.bias), &p.fc2.bias},
      {"fc3.weight", dims2(p.fc3), &p.fc3.weight},
      {"fc3.bias", dims1(p.fc3.bias), &p.fc3.bias},
  };
}

}  // namespace flashtok
