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

// Compiled with -mavx2 -mfma; only reached after a CPU feature check.
#include <immintrin.h>

#include <algorithm>

#include "flashtok/kernels.hpp"

namespace flashtok::simd {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  double total = _mm_cvtsd_f64(s);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Same operation order as the scalar kernel (no fusion), so results match
// bit for bit.
inline __m256 lerp8(__m256 a, __m256 b, __m256 w) {
  const __m256 r = _mm256_add_ps(a, _mm256_mul_ps(w, _mm256_sub_ps(b, a)));
  const __m256 lo = _mm256_min_ps(a, b);
  const __m256 hi = _mm256_max_ps(a, b);
  return _mm256_min_ps(_mm256_max_ps(r, lo), hi);
}

inline float lerp_one(float a, float b, float w) {
  const float r = a + w * (b - a);
  return std::clamp(r, std::min(a, b), std::max(a, b));
}

void lerp_avx2(const float* a, const float* b, float w, float* out,
               std::size_t n) {
  const __m256 vw = _mm256_set1_ps(w);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i,
                     lerp8(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), vw));
  }
  for (; i < n; ++i) out[i] = lerp_one(a[i], b[i], w);
}

void lerp_lanes_avx2(const float* a, const float* b, const float* w,
                     float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, lerp8(_mm256_loadu_ps(a + i),
                                    _mm256_loadu_ps(b + i),
                                    _mm256_loadu_ps(w + i)));
  }
  for (; i < n; ++i) out[i] = lerp_one(a[i], b[i], w[i]);
}

}  // namespace

const KernelTable& avx2_kernels_table() {
  static const KernelTable table{"avx2", dot_avx2, axpy_avx2, lerp_avx2,
                                 lerp_lanes_avx2};
  return table;
}

}  // namespace flashtok::simd
