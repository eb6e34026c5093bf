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

#include "flashtok/nn_math.hpp"

#include <cmath>
#include <numbers>

#include "flashtok/errors.hpp"
#include "flashtok/kernels.hpp"

namespace flashtok {

namespace {
constexpr double kSqrt2OverPi = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kTanhCoeff = 0.044715;
constexpr double kInvSqrt2 = 0.7071067811865476;  // 1 / sqrt(2)
}  // namespace

double gelu(double x, GeluKind kind) {
  if (kind == GeluKind::Tanh) {
    const double u = kSqrt2OverPi * (x + kTanhCoeff * x * x * x);
    return 0.5 * x * (1.0 + std::tanh(u));
  }
  return 0.5 * x * std::erfc(-x * kInvSqrt2);
}

double gelu_derivative(double x, GeluKind kind) {
  if (kind == GeluKind::Tanh) {
    const double u = kSqrt2OverPi * (x + kTanhCoeff * x * x * x);
    const double t = std::tanh(u);
    const double du = kSqrt2OverPi * (1.0 + 3.0 * kTanhCoeff * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
  }
  const double cdf = 0.5 * std::erfc(-x * kInvSqrt2);
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi *
                     kInvSqrt2;
  return cdf + x * pdf;
}

Linear::Linear(int in_features, int out_features)
    : in(in_features),
      out(out_features),
      weight(static_cast<std::size_t>(in_features) * out_features, 0.0),
      bias(static_cast<std::size_t>(out_features), 0.0) {}

void Linear::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(in) ||
      y.size() != static_cast<std::size_t>(out)) {
    throw GeometryError("linear: width mismatch");
  }
  const auto& k = simd::active();
  std::copy(bias.begin(), bias.end(), y.begin());
  const double* w = weight.data();
  for (int i = 0; i < in; ++i) {
    if (x[i] != 0.0) k.axpy(x[i], w + static_cast<std::size_t>(i) * out, y.data(), out);
  }
}

LayerNorm::LayerNorm(int dim)
    : gain(static_cast<std::size_t>(dim), 1.0),
      bias(static_cast<std::size_t>(dim), 0.0) {}

double LayerNorm::apply(std::span<const double> x, std::span<double> y,
                        std::span<double> normalized) const {
  const std::size_t n = x.size();
  if (n != gain.size() || y.size() != n) {
    throw GeometryError("layer norm: width mismatch");
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
  for (std::size_t i = 0; i < n; ++i) {
    const double xhat = (x[i] - mean) * inv_std;
    if (!normalized.empty()) normalized[i] = xhat;
    y[i] = xhat * gain[i] + bias[i];
  }
  return inv_std;
}

void SeededUniform::fill(Linear& layer) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
  fill(layer.weight, bound);
  fill(layer.bias, bound);
}

}  // namespace flashtok
