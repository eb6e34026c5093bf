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
#include <string_view>

namespace flashtok::simd {

// Inner loops shared by resize, the encoder, and the adapter. Every backend
// implements the same table; the scalar one is the reference.
struct KernelTable {
  const char* name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // out[i] = clamp(a[i] + w * (b[i] - a[i]), min(a[i], b[i]), max(a[i], b[i]))
  void (*lerp)(const float* a, const float* b, float w, float* out,
               std::size_t n);

  // out[i] = a[i] + w[i] * (b[i] - a[i]), clamped like lerp; per-lane weights.
  void (*lerp_lanes)(const float* a, const float* b, const float* w,
                     float* out, std::size_t n);
};

enum class Backend { Scalar, Avx2 };

const KernelTable& scalar_kernels();

// Null when the build or the host CPU has no AVX2+FMA.
const KernelTable* avx2_kernels();

// The table selected for this process. Chosen once from CPU features and
// FLASHTOK_SIMD (scalar|avx2|auto); set_backend overrides it.
const KernelTable& active();

// Returns false if the backend is unavailable on this host.
bool set_backend(Backend backend);

Backend active_backend();

std::string_view backend_name(Backend backend);

}  // namespace flashtok::simd
