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

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "flashtok/kernels.hpp"

namespace flashtok::simd {

#if defined(FLASHTOK_HAVE_AVX2)
const KernelTable& avx2_kernels_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(FLASHTOK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  const bool avx2 = cpu_has_avx2();
  if (const char* env = std::getenv("FLASHTOK_SIMD")) {
    const std::string_view v{env};
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && avx2) return Backend::Avx2;
  }
  return avx2 ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(FLASHTOK_HAVE_AVX2)
  if (cpu_has_avx2()) return &avx2_kernels_table();
#endif
  return nullptr;
}

const KernelTable& active() {
  if (current().load(std::memory_order_relaxed) == Backend::Avx2) {
    if (const KernelTable* t = avx2_kernels()) return *t;
  }
  return scalar_kernels();
}

bool set_backend(Backend backend) {
  if (backend == Backend::Avx2 && avx2_kernels() == nullptr) return false;
  current().store(backend);
  return true;
}

Backend active_backend() { return current().load(); }

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace flashtok::simd
