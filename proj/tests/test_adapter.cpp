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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "flashtok/adapter.hpp"
#include "flashtok/errors.hpp"
#include "flashtok/serialize.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace flashtok;

namespace {

TokenGrid random_tokens(std::mt19937_64& rng, int rows, int cols, int dim, double lo = -1.0,
                        double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  TokenGrid t(rows, cols, dim);
  for (double& v : t.data()) v = u(rng);
  return t;
}

double gelu_ref(double x) { return 0.5 * x * std::erfc(-x / std::sqrt(2.0)); }

double inner(const TokenGrid& a, const TokenGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

}  // namespace

TEST_SUITE("adapter") {

TEST_CASE("pixel_shuffle examples") {
  std::mt19937_64 rng(1);
  const TokenGrid big = random_tokens(rng, 32, 32, 3);
  const TokenGrid s = pixel_shuffle(big, 2);
  CHECK(s.rows() == 16);
  CHECK(s.cols() == 16);
  CHECK(s.dim() == 12);
  CHECK(s.tokens() == 256);

  const TokenGrid tiny(2, 2, 1, {1.0, 2.0, 3.0, 4.0});
  CHECK(pixel_shuffle(tiny, 2) == TokenGrid(1, 1, 4, {1.0, 2.0, 3.0, 4.0}));
  CHECK(pixel_unshuffle(TokenGrid(1, 1, 4, {1.0, 2.0, 3.0, 4.0}), 2) == tiny);
  CHECK(pixel_unshuffle(big, 1) == big);
  CHECK(pixel_shuffle(big, 1) == big);

  CHECK_THROWS_AS(pixel_shuffle(TokenGrid(3, 4, 1), 2), GeometryError);
  CHECK_THROWS_AS(pixel_unshuffle(TokenGrid(1, 1, 6), 2), GeometryError);
  CHECK_THROWS_AS(pixel_shuffle(tiny, 0), GeometryError);
}

TEST_CASE("property: shuffle round trip and value multiset") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> factor(1, 4);
  std::uniform_int_distribution<int> cells(1, 5);
  std::uniform_int_distribution<int> dims(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = factor(rng);
    const TokenGrid x = random_tokens(rng, r * cells(rng), r * cells(rng), dims(rng));
    const TokenGrid s = pixel_shuffle(x, r);
    CHECK(pixel_unshuffle(s, r) == x);
    std::vector<double> a = x.data(), b = s.data();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("property: composed shuffles follow the channel-block index map") {
  std::mt19937_64 rng(5);
  for (auto [r1, r2] : {std::pair{2, 2}, {2, 3}, {3, 2}, {1, 4}}) {
    const int d = 2;
    const int r = r1 * r2;
    const TokenGrid x = random_tokens(rng, 2 * r, 3 * r, d);
    const TokenGrid twice = pixel_shuffle(pixel_shuffle(x, r1), r2);
    const TokenGrid once = pixel_shuffle(x, r);
    REQUIRE(twice.rows() == once.rows());
    REQUIRE(twice.dim() == once.dim());
    for (int i = 0; i < twice.rows(); ++i)
      for (int j = 0; j < twice.cols(); ++j)
        for (int a2 = 0; a2 < r2; ++a2)
          for (int b2 = 0; b2 < r2; ++b2)
            for (int a1 = 0; a1 < r1; ++a1)
              for (int b1 = 0; b1 < r1; ++b1)
                for (int k = 0; k < d; ++k) {
                  const int ch = ((a2 * r2 + b2) * r1 * r1 + (a1 * r1 + b1)) * d + k;
                  const int y = i * r + a2 * r1 + a1;
                  const int xx = j * r + b2 * r1 + b1;
                  REQUIRE(twice.at(i, j, ch) == x.at(y, xx, k));
                  const int ch_once = ((a2 * r1 + a1) * r + (b2 * r1 + b1)) * d + k;
                  REQUIRE(once.at(i, j, ch_once) == x.at(y, xx, k));
                }
  }
}

TEST_CASE("adapter_forward on a zero token with identity-like weights is zero") {
  AdapterConfig cfg;
  cfg.in_dim = 2;
  cfg.shuffle_factor = 1;
  cfg.hidden_dim = 2;
  cfg.out_dim = 2;
  AdapterParams p = AdapterParams::zeros(cfg);
  std::fill(p.norm.gain.begin(), p.norm.gain.end(), 1.0);
  for (Linear* l : {&p.fc1, &p.fc2, &p.fc3}) {
    for (int i = 0; i < std::min(l->in, l->out); ++i) l->weight[i * l->out + i] = 1.0;
  }
  const TokenGrid out = adapter_forward(TokenGrid(1, 1, 2), p, cfg);
  CHECK(out == TokenGrid(1, 1, 2));
}

TEST_CASE("adapter_forward matches a hand computation") {
  AdapterConfig cfg;
  cfg.in_dim = 3;
  cfg.shuffle_factor = 1;
  cfg.hidden_dim = 2;
  cfg.out_dim = 2;
  AdapterParams p = AdapterParams::zeros(cfg);
  p.norm.gain = {1.5, 0.5, -1.0};
  p.norm.bias = {0.1, 0.0, -0.2};
  p.fc1.weight = {0.3, -0.6, 0.9, 0.2, -0.4, 0.7};
  p.fc1.bias = {0.05, -0.1};
  p.fc2.weight = {1.1, -0.3, 0.4, 0.8};
  p.fc2.bias = {0.0, 0.2};
  p.fc3.weight = {-0.5, 0.25, 0.75, 1.25};
  p.fc3.bias = {0.3, -0.3};
  const double x[3] = {0.4, -1.2, 2.0};

  const double mean = (x[0] + x[1] + x[2]) / 3;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= 3;
  const double s = 1.0 / std::sqrt(var + 1e-6);
  double n[3];
  for (int i = 0; i < 3; ++i) n[i] = (x[i] - mean) * s * p.norm.gain[i] + p.norm.bias[i];
  const double h1a = gelu_ref(n[0] * 0.3 + n[1] * 0.9 + n[2] * -0.4 + 0.05);
  const double h1b = gelu_ref(n[0] * -0.6 + n[1] * 0.2 + n[2] * 0.7 - 0.1);
  const double h2a = gelu_ref(h1a * 1.1 + h1b * 0.4 + 0.0);
  const double h2b = gelu_ref(h1a * -0.3 + h1b * 0.8 + 0.2);
  const double oa = h2a * -0.5 + h2b * 0.75 + 0.3;
  const double ob = h2a * 0.25 + h2b * 1.25 - 0.3;

  const TokenGrid out = adapter_forward(TokenGrid(1, 1, 3, {x[0], x[1], x[2]}), p, cfg);
  CHECK(std::fabs(out.at(0, 0, 0) - oa) < 1e-12);
  CHECK(std::fabs(out.at(0, 0, 1) - ob) < 1e-12);
}

TEST_CASE("adapter_forward output shape") {
  std::mt19937_64 rng(7);
  AdapterConfig cfg;
  cfg.in_dim = 6;
  cfg.shuffle_factor = 2;
  cfg.hidden_dim = 8;
  cfg.out_dim = 5;
  const AdapterParams p = init_adapter(cfg);
  const TokenGrid out = adapter_forward(random_tokens(rng, 32, 32, 6), p, cfg);
  CHECK(out.rows() == 16);
  CHECK(out.cols() == 16);
  CHECK(out.dim() == 5);
  CHECK(out.finite());
  CHECK_THROWS_AS(adapter_forward(TokenGrid(4, 4, 5), p, cfg), GeometryError);
  CHECK_THROWS_AS(adapter_forward(TokenGrid(3, 4, 6), p, cfg), GeometryError);
}

TEST_CASE("full-width shape: 32x32x1152, r=2, out 1536") {
  // Weights stay zero; only shapes are exercised at this width.
  AdapterConfig cfg;
  cfg.in_dim = 1152;
  cfg.shuffle_factor = 2;
  cfg.hidden_dim = 16;
  cfg.out_dim = 1536;
  const AdapterParams p = AdapterParams::zeros(cfg);
  const TokenGrid out = adapter_forward(TokenGrid(32, 32, 1152), p, cfg);
  CHECK(out.rows() == 16);
  CHECK(out.cols() == 16);
  CHECK(out.dim() == 1536);
}

TEST_CASE("property: adapter is tokenwise after the shuffle") {
  std::mt19937_64 rng(11);
  AdapterConfig cfg;
  cfg.in_dim = 3;
  cfg.shuffle_factor = 1;
  cfg.hidden_dim = 6;
  cfg.out_dim = 4;
  const AdapterParams p = init_adapter(cfg);
  const TokenGrid x = random_tokens(rng, 3, 4, 3);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  TokenGrid px(3, 4, 3);
  for (std::size_t i = 0; i < 12; ++i) std::copy_n(x.token(perm[i]).begin(), 3, px.token(i).begin());
  const TokenGrid a = adapter_forward(x, p, cfg);
  const TokenGrid b = adapter_forward(px, p, cfg);
  for (std::size_t i = 0; i < 12; ++i) {
    for (int k = 0; k < 4; ++k) CHECK(b.token(i)[k] == a.token(perm[i])[k]);
  }
}

TEST_CASE("adapter_grad with zero upstream is zero") {
  std::mt19937_64 rng(13);
  AdapterConfig cfg;
  cfg.in_dim = 4;
  cfg.hidden_dim = 8;
  cfg.out_dim = 3;
  const AdapterParams p = init_adapter(cfg);
  const TokenGrid x = random_tokens(rng, 4, 4, 4);
  AdapterGrads g = adapter_grad(x, p, cfg, TokenGrid(2, 2, 3));
  for (double v : g.input.data()) CHECK(v == 0.0);
  for (const auto& t : adapter_tensors(g.params)) {
    for (double v : *t.values) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(adapter_grad(x, p, cfg, TokenGrid(2, 2, 4)), GeometryError);
}

TEST_CASE("property: analytic gradients match central differences") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> small(1, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    AdapterConfig cfg;
    cfg.shuffle_factor = trial == 0 ? 2 : small(rng);
    cfg.in_dim = trial == 0 ? 4 : small(rng) + 1;
    cfg.hidden_dim = trial == 0 ? 8 : 2 + small(rng) * 2;
    cfg.out_dim = small(rng) + 1;
    cfg.gelu = trial % 3 == 2 ? GeluKind::Tanh : GeluKind::Exact;
    cfg.seed = 1000 + trial;
    const int r = cfg.shuffle_factor;
    const int cells = trial == 0 ? 2 : small(rng);
    AdapterParams p = init_adapter(cfg);
    // Non-trivial norm parameters so their gradients are exercised.
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (double& v : p.norm.gain) v += jitter(rng);
    for (double& v : p.norm.bias) v = jitter(rng);
    TokenGrid x = random_tokens(rng, cells * r, cells * r, cfg.in_dim);
    const TokenGrid up = random_tokens(rng, cells, cells, cfg.out_dim);

    AdapterGrads g = adapter_grad(x, p, cfg, up);
    auto loss = [&] { return inner(adapter_forward(x, p, cfg), up); };
    const double h = 1e-5;
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      const double num = oracle::central_difference(loss, x.data()[i], h);
      worst = std::max(worst, oracle::rel_error(g.input.data()[i], num));
    }
    auto live = adapter_tensors(p);
    auto grads = adapter_tensors(g.params);
    for (std::size_t t = 0; t < live.size(); ++t) {
      for (std::size_t i = 0; i < live[t].values->size(); ++i) {
        const double num = oracle::central_difference(loss, (*live[t].values)[i], h);
        worst = std::max(worst, oracle::rel_error((*grads[t].values)[i], num));
      }
    }
  }
  MESSAGE("worst relative gradient error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("property: LayerNorm input gradient is orthogonal to the ones vector") {
  std::mt19937_64 rng(19);
  AdapterConfig cfg;
  cfg.in_dim = 4;
  cfg.shuffle_factor = 2;
  cfg.hidden_dim = 8;
  cfg.out_dim = 3;
  const AdapterParams p = init_adapter(cfg);  // gain 1
  const TokenGrid x = random_tokens(rng, 4, 4, 4);
  const TokenGrid up = random_tokens(rng, 2, 2, 3);
  const AdapterGrads g = adapter_grad(x, p, cfg, up);
  // Shuffling the input gradient groups it by LayerNorm token.
  const TokenGrid by_token = pixel_shuffle(g.input, 2);
  for (std::size_t i = 0; i < by_token.tokens(); ++i) {
    const auto t = by_token.token(i);
    double s = 0.0, mag = 0.0;
    for (double v : t) {
      s += v;
      mag = std::max(mag, std::fabs(v));
    }
    CHECK(mag > 0.0);
    CHECK(std::fabs(s) < 1e-9);
  }
}

TEST_CASE("property: normalized values have zero mean and unit variance") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial;
    LayerNorm ln(dim);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> x(dim), y(dim), n(dim);
    for (double& v : x) v = u(rng);
    ln.apply(x, y, n);
    double mean = 0.0, var = 0.0;
    for (double v : n) mean += v;
    mean /= dim;
    for (double v : n) var += (v - mean) * (v - mean);
    var /= dim;
    CHECK(std::fabs(mean) < 1e-6);
    CHECK(std::fabs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("gelu variants") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(0.0, GeluKind::Tanh) == 0.0);
  double worst = 0.0;
  for (double x = -8.0; x <= 8.0; x += 1e-3) {
    CHECK(std::fabs(gelu(x) - gelu_ref(x)) < 1e-15 + 1e-15 * std::fabs(x));
    worst = std::max(worst, std::fabs(gelu(x) - gelu(x, GeluKind::Tanh)));
  }
  CHECK(worst < 1e-3);
  CHECK(worst > 1e-5);
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    for (GeluKind k : {GeluKind::Exact, GeluKind::Tanh}) {
      const double num = (gelu(x + 1e-6, k) - gelu(x - 1e-6, k)) / 2e-6;
      CHECK(gelu_derivative(x, k) == doctest::Approx(num).epsilon(1e-7));
    }
  }
}

TEST_CASE("param_count") {
  AdapterConfig unit;
  unit.in_dim = 1;
  unit.shuffle_factor = 2;
  unit.hidden_dim = 1;
  unit.out_dim = 1;
  CHECK(param_count(unit) == 17);

  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> d(1, 12);
  for (int trial = 0; trial < 30; ++trial) {
    AdapterConfig cfg;
    cfg.in_dim = d(rng);
    cfg.shuffle_factor = 1 + trial % 3;
    cfg.hidden_dim = d(rng);
    cfg.out_dim = d(rng);
    AdapterParams p = init_adapter(cfg);
    std::int64_t enumerated = 0;
    for (const auto& t : adapter_tensors(p)) {
      std::int64_t n = 1;
      for (auto v : t.dims) n *= v;
      CHECK(n == static_cast<std::int64_t>(t.values->size()));
      enumerated += n;
    }
    CHECK(param_count(cfg) == enumerated);
    CHECK(static_cast<std::int64_t>(p.parameter_count()) == enumerated);
  }

  AdapterConfig full;
  full.in_dim = 1152;
  full.shuffle_factor = 2;
  full.hidden_dim = 6912;
  full.out_dim = 1536;
  CHECK(param_count(full) == 90'267'648);
  // Within one percent of the 91.02M target used in the README note.
  CHECK(std::fabs(param_count(full) / 91.02e6 - 1.0) < 0.01);
}

TEST_CASE("config validation") {
  AdapterConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.hidden() == 256);
  for (auto mutate : std::vector<void (*)(AdapterConfig&)>{
           [](AdapterConfig& c) { c.in_dim = 0; },
           [](AdapterConfig& c) { c.shuffle_factor = 0; },
           [](AdapterConfig& c) { c.hidden_dim = -1; },
           [](AdapterConfig& c) { c.out_dim = 0; }}) {
    AdapterConfig bad = cfg;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
}

TEST_CASE("adapter parameter container round trip") {
  AdapterConfig cfg;
  cfg.in_dim = 3;
  cfg.hidden_dim = 5;
  cfg.out_dim = 4;
  AdapterParams p = init_adapter(cfg);
  const auto dir = testing_support::scratch_dir("adapter_container");
  write_adapter_params(p, dir / "a.bin");
  AdapterParams back = read_adapter_params(cfg, dir / "a.bin");
  auto a = adapter_tensors(p);
  auto b = adapter_tensors(back);
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].name == b[t].name);
    CHECK(a[t].dims == b[t].dims);
    for (std::size_t i = 0; i < a[t].values->size(); ++i) {
      CHECK((*b[t].values)[i] == static_cast<double>(static_cast<float>((*a[t].values)[i])));
    }
  }
  AdapterConfig other = cfg;
  other.out_dim = 5;
  CHECK_THROWS_AS(read_adapter_params(other, dir / "a.bin"), DecodeError);
  CHECK_THROWS_AS(read_adapter_params(cfg, dir / "missing.bin"), IoError);
}

TEST_CASE("feature dump round trip and corruption") {
  std::mt19937_64 rng(31);
  const TokenGrid g = random_tokens(rng, 3, 5, 7);
  std::stringstream ss;
  write_feature_dump(g, ss);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 20 + 3 * 5 * 7 * 4);
  CHECK(bytes.substr(0, 4) == "FVTK");
  std::stringstream in(bytes);
  const TokenGrid back = read_feature_dump(in);
  CHECK(back.rows() == 3);
  CHECK(back.dim() == 7);
  for (std::size_t i = 0; i < g.data().size(); ++i) {
    CHECK(back.data()[i] == static_cast<double>(static_cast<float>(g.data()[i])));
  }
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream b1(bad_magic);
  CHECK_THROWS_AS(read_feature_dump(b1), DecodeError);
  std::stringstream b2(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_feature_dump(b2), DecodeError);
}

}  // TEST_SUITE
