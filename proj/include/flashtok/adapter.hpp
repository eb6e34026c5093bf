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
#include <string>
#include <vector>

#include "flashtok/nn_math.hpp"
#include "flashtok/token_grid.hpp"

namespace flashtok {

/// Space-to-depth: output token (i, j) holds input tokens (i*r + a, j*r + b)
/// as channel blocks ordered row-major in (a, b), original channel fastest.
TokenGrid pixel_shuffle(const TokenGrid& tokens, int r);

/// Exact inverse of pixel_shuffle.
TokenGrid pixel_unshuffle(const TokenGrid& tokens, int r);

struct AdapterConfig {
  int in_dim = 32;
  int shuffle_factor = 2;
  int hidden_dim = 0;  // 0 selects 4 * out_dim
  int out_dim = 64;
  GeluKind gelu = GeluKind::Exact;
  std::uint64_t seed = 42;

  int shuffled_dim() const { return shuffle_factor * shuffle_factor * in_dim; }
  int hidden() const { return hidden_dim > 0 ? hidden_dim : 4 * out_dim; }

  void validate() const;

  friend bool operator==(const AdapterConfig&, const AdapterConfig&) = default;
};

/// LayerNorm over r^2*d channels, then three linear layers:
/// r^2*d -> hidden -> hidden -> out.
struct AdapterParams {
  LayerNorm norm;
  Linear fc1;
  Linear fc2;
  Linear fc3;

  /// Zero-valued parameters shaped for cfg (gradient accumulators).
  static AdapterParams zeros(const AdapterConfig& cfg);

  std::size_t parameter_count() const;
};

/// Draws linear weights and biases with SeededUniform(cfg.seed) in the
/// order fc1, fc2, fc3; norm gain 1, bias 0.
AdapterParams init_adapter(const AdapterConfig& cfg);

/// 2*D + (D*h + h) + (h*h + h) + (h*out + out) with D = r^2 * in_dim.
std::int64_t param_count(const AdapterConfig& cfg);

/// pixel_shuffle -> LayerNorm (eps 1e-6) -> GELU(fc1) -> GELU(fc2) -> fc3.
TokenGrid adapter_forward(const TokenGrid& tokens, const AdapterParams& params,
                          const AdapterConfig& cfg);

struct AdapterGrads {
  TokenGrid input;       // same shape as the adapter input tokens
  AdapterParams params;  // one gradient per parameter
};

/// Gradients of <upstream, adapter_forward(tokens)> w.r.t. the input tokens
/// and every parameter.
AdapterGrads adapter_grad(const TokenGrid& tokens, const AdapterParams& params,
                          const AdapterConfig& cfg, const TokenGrid& upstream);

/// Named views used by the tensor container: norm.gain, norm.bias,
/// fcN.weight (rank 2, in x out), fcN.bias.
struct TensorRef {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<double>* values;
};

std::vector<TensorRef> adapter_tensors(AdapterParams& params);

}  // namespace flashtok
