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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace flashtok {

enum class GeluKind { Exact, Tanh };

/// x * Phi(x) with the error function, or the tanh approximation.
double gelu(double x, GeluKind kind = GeluKind::Exact);
double gelu_derivative(double x, GeluKind kind = GeluKind::Exact);

inline constexpr double kLayerNormEps = 1e-6;

/// Row-major weight matrix W (in x out) with bias (out); y = x W + b.
struct Linear {
  int in = 0;
  int out = 0;
  std::vector<double> weight;  // in * out
  std::vector<double> bias;    // out

  Linear() = default;
  Linear(int in_features, int out_features);

  /// y must hold out values; x holds in values.
  void apply(std::span<const double> x, std::span<double> y) const;

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

struct LayerNorm {
  std::vector<double> gain;
  std::vector<double> bias;

  LayerNorm() = default;
  explicit LayerNorm(int dim);

  /// Normalizes over the channel axis. If `normalized` is non-empty it
  /// receives the pre-affine values; returns 1 / sqrt(var + eps).
  double apply(std::span<const double> x, std::span<double> y,
               std::span<double> normalized = {}) const;

  std::size_t parameter_count() const { return gain.size() + bias.size(); }
};

/// Parameter initializer: each value is bound * (2u - 1) where
/// u = (draw >> 11) * 2^-53 and draw comes from std::mt19937_64(seed).
/// Linear layers use bound = 1 / sqrt(fan_in) for weight, then bias.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : rng_(seed) {}

  double next(double bound) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return bound * (2.0 * u - 1.0);
  }

  void fill(std::vector<double>& v, double bound) {
    for (double& x : v) x = next(bound);
  }

  void fill(Linear& layer);

 private:
  std::mt19937_64 rng_;
};

}  // namespace flashtok
