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

#include <algorithm>

#include "flashtok/kernels.hpp"

namespace flashtok::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline float lerp_one(float a, float b, float w) {
  const float r = a + w * (b - a);
  return std::clamp(r, std::min(a, b), std::max(a, b));
}

void lerp_scalar(const float* a, const float* b, float w, float* out,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = lerp_one(a[i], b[i], w);
}

void lerp_lanes_scalar(const float* a, const float* b, const float* w,
                       float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = lerp_one(a[i], b[i], w[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar,
                                 lerp_scalar, lerp_lanes_scalar};
  return table;
}

}  // namespace flashtok::simd
