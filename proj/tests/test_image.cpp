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

#include <fstream>
#include <numeric>
#include <random>

#include "flashtok/errors.hpp"
#include "flashtok/image.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace flashtok;

namespace {

double total(const ImageBuffer& img) {
  return std::accumulate(img.data().begin(), img.data().end(), 0.0);
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("image buffer enforces its invariants") {
  CHECK_THROWS_AS(ImageBuffer(0, 3), GeometryError);
  CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<float>(11, 0.0f)), GeometryError);
  CHECK_THROWS_AS(ImageBuffer(1, 1, {0.0f, 1.5f, 0.0f}), DomainError);
  const ImageBuffer img(3, 2);
  CHECK(img.size() == 18u);
  CHECK(img.channels() == 3);
}

TEST_CASE("decode a 2x2 P6 PPM") {
  const auto dir = testing_support::scratch_dir("ppm2x2");
  std::string bytes = "P6\n2 2\n255\n";
  const unsigned char px[12] = {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255};
  bytes.append(reinterpret_cast<const char*>(px), 12);
  write_bytes(dir / "a.ppm", bytes);
  const ImageBuffer img = decode_image(dir / "a.ppm");
  REQUIRE(img.width() == 2);
  REQUIRE(img.height() == 2);
  CHECK(img.at(0, 0, 0) == 1.0f);
  CHECK(img.at(0, 0, 1) == 0.0f);
  CHECK(img.at(0, 0, 2) == 0.0f);
  CHECK(img.at(1, 0, 1) == 1.0f);
  CHECK(img.at(0, 1, 2) == 1.0f);
  CHECK(img.at(1, 1, 0) == 1.0f);
}

TEST_CASE("PPM header comments and whitespace are accepted") {
  std::string bytes = "P6 # comment\n1\t1\n# another\n255\n";
  bytes += std::string("\x80\x00\xff", 3);
  const ImageBuffer img = decode_image_bytes({bytes.begin(), bytes.end()});
  CHECK(img.at(0, 0, 0) == doctest::Approx(128.0 / 255.0));
  CHECK(img.at(0, 0, 2) == 1.0f);
}

TEST_CASE("solid black PNG decodes to zeros") {
  const auto dir = testing_support::scratch_dir("png_black");
  testing_support::write_png(ImageBuffer(512, 512), dir / "black.png");
  const ImageBuffer img = decode_image(dir / "black.png");
  CHECK(img.width() == 512);
  CHECK(img.height() == 512);
  CHECK(total(img) == 0.0);
}

TEST_CASE("PNG decode preserves 8-bit values") {
  const auto dir = testing_support::scratch_dir("png_values");
  std::mt19937_64 rng(7);
  const ImageBuffer src = oracle::random_image(rng, 37, 21);
  testing_support::write_png(src, dir / "r.png");
  CHECK(decode_image(dir / "r.png") == src);
}

TEST_CASE("JPEG decode of a flat image") {
  const auto dir = testing_support::scratch_dir("jpeg");
  testing_support::write_jpeg(ImageBuffer(64, 48), dir / "black.jpg");
  const ImageBuffer img = decode_image(dir / "black.jpg");
  CHECK(img.width() == 64);
  CHECK(img.height() == 48);
  CHECK(total(img) == 0.0);
}

TEST_CASE("decode errors") {
  const auto dir = testing_support::scratch_dir("decode_errors");
  CHECK_THROWS_AS(decode_image(dir / "missing.ppm"), IoError);
  write_bytes(dir / "junk.bin", "not an image at all");
  CHECK_THROWS_AS(decode_image(dir / "junk.bin"), DecodeError);
  write_bytes(dir / "short.ppm", "P6\n4 4\n255\n\x01\x02");
  CHECK_THROWS_AS(decode_image(dir / "short.ppm"), DecodeError);
  write_bytes(dir / "wide.ppm", "P6\n1 1\n65535\n\x01\x02\x03\x04\x05\x06");
  CHECK_THROWS_AS(decode_image(dir / "wide.ppm"), DecodeError);
  write_bytes(dir / "bad.png", "\x89PNG\r\n\x1a\n garbage");
  CHECK_THROWS_AS(decode_image(dir / "bad.png"), DecodeError);
  write_bytes(dir / "bad.jpg", "\xff\xd8\xff garbage");
  CHECK_THROWS_AS(decode_image(dir / "bad.jpg"), DecodeError);
}

TEST_CASE("encode_ppm header and quantization") {
  const auto zero = encode_ppm_bytes(ImageBuffer(1, 1));
  const std::string expect = std::string("P6\n1 1\n255\n") + std::string(3, '\0');
  CHECK(std::string(zero.begin(), zero.end()) == expect);

  const ImageBuffer half(1, 1, {0.5f, 1.0f, 0.0f});
  const auto bytes = encode_ppm_bytes(half);
  REQUIRE(bytes.size() == 11u + 3u);
  CHECK(bytes[11] == 128);  // round(127.5) half-up
  CHECK(bytes[12] == 255);
  CHECK(bytes[13] == 0);
}

TEST_CASE("encode_ppm to an unwritable path") {
  CHECK_THROWS_AS(encode_ppm(ImageBuffer(1, 1), "/nonexistent-dir/x.ppm"), IoError);
}

TEST_CASE("property: PPM round trip is byte-identical") {
  const auto dir = testing_support::scratch_dir("ppm_roundtrip");
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int trial = 0; trial < 25; ++trial) {
    const ImageBuffer src = oracle::random_image(rng, dim(rng), dim(rng));
    const auto path = dir / "r.ppm";
    encode_ppm(src, path);
    const ImageBuffer back = decode_image(path);
    CHECK(back == src);
    CHECK(encode_ppm_bytes(back) == encode_ppm_bytes(src));
  }
}

TEST_CASE("resize to the same size is the identity") {
  std::mt19937_64 rng(3);
  const ImageBuffer img = oracle::random_image(rng, 17, 9, false);
  const ImageBuffer out = resize_bilinear(img, 17, 9);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(out.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-6));
  }
}

TEST_CASE("resize of a constant image stays constant") {
  ImageBuffer img(13, 7, std::vector<float>(13 * 7 * 3, 0.3f));
  for (auto [w, h] : {std::pair{1, 1}, {5, 40}, {64, 3}, {26, 14}}) {
    const ImageBuffer out = resize_bilinear(img, w, h);
    for (float v : out.data()) CHECK(std::abs(v - 0.3f) <= 1e-6f);
  }
}

TEST_CASE("resize 2x1 -> 4x1 matches the half-pixel oracle") {
  const ImageBuffer img(2, 1, {0.f, 0.f, 0.f, 1.f, 1.f, 1.f});
  const ImageBuffer out = resize_bilinear(img, 4, 1);
  // Frozen from oracle::bilinear_at: sources -0.25->0, 0.25, 0.75, 1.25->1.
  const double expect[4] = {0.0, 0.25, 0.75, 1.0};
  for (int x = 0; x < 4; ++x) {
    CHECK(oracle::bilinear_at(img, 4, 1, x, 0, 0) == doctest::Approx(expect[x]).epsilon(1e-12));
    CHECK(out.at(x, 0, 0) == doctest::Approx(expect[x]).epsilon(1e-6));
  }
}

TEST_CASE("property: resize agrees with the per-pixel oracle and stays in range") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 40);
  for (int trial = 0; trial < 30; ++trial) {
    const ImageBuffer img = oracle::random_image(rng, dim(rng), dim(rng), false);
    const int ow = dim(rng);
    const int oh = dim(rng);
    const ImageBuffer out = resize_bilinear(img, ow, oh);
    REQUIRE(out.width() == ow);
    REQUIRE(out.height() == oh);
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        for (int c = 0; c < 3; ++c) {
          const float v = out.at(x, y, c);
          CHECK(std::abs(v - oracle::bilinear_at(img, ow, oh, x, y, c)) <= 1e-6);
          CHECK(v >= *lo);
          CHECK(v <= *hi);
        }
      }
    }
  }
}

TEST_CASE("resize rejects empty targets") {
  CHECK_THROWS_AS(resize_bilinear(ImageBuffer(2, 2), 0, 4), GeometryError);
}

TEST_CASE("pad_black_frame geometry") {
  std::mt19937_64 rng(9);
  const ImageBuffer img = oracle::random_image(rng, 12, 7);
  CHECK(pad_black_frame(img, 0) == img);
  const ImageBuffer padded = pad_black_frame(img, 3);
  CHECK(padded.width() == 18);
  CHECK(padded.height() == 13);
  CHECK(total(padded) == total(img));
  CHECK(crop(padded, 3, 3, 12, 7) == img);
  CHECK(padded.at(0, 0, 0) == 0.0f);
  CHECK(padded.at(17, 12, 2) == 0.0f);
  CHECK_THROWS_AS(pad_black_frame(img, -1), GeometryError);

  // ISS 2x2 with g=32, o=4, p=14: 672 content plus a 56 px frame.
  const ImageBuffer content(672, 672);
  const ImageBuffer framed = pad_black_frame(content, 56);
  CHECK(framed.width() == 784);
  CHECK(framed.height() == 784);
}

TEST_CASE("crop bounds and identity") {
  std::mt19937_64 rng(13);
  const ImageBuffer img = oracle::random_image(rng, 20, 10);
  CHECK(crop(img, 0, 0, 20, 10) == img);
  CHECK_THROWS_AS(crop(img, -1, 0, 5, 5), BoundsError);
  CHECK_THROWS_AS(crop(img, 16, 0, 5, 5), BoundsError);
  CHECK_THROWS_AS(crop(img, 0, 6, 5, 5), BoundsError);
  CHECK_THROWS_AS(crop(img, 0, 0, 0, 5), BoundsError);
  const ImageBuffer c = crop(img, 4, 3, 2, 5);
  CHECK(c.at(0, 0, 0) == img.at(4, 3, 0));
  CHECK(c.at(1, 4, 2) == img.at(5, 7, 2));
}

TEST_CASE("property: nested crops compose") {
  std::mt19937_64 rng(17);
  const ImageBuffer img = oracle::random_image(rng, 40, 30);
  std::uniform_int_distribution<int> u(0, 1000);
  for (int trial = 0; trial < 50; ++trial) {
    const int w1 = 1 + u(rng) % 40, h1 = 1 + u(rng) % 30;
    const int x1 = u(rng) % (40 - w1 + 1), y1 = u(rng) % (30 - h1 + 1);
    const int w2 = 1 + u(rng) % w1, h2 = 1 + u(rng) % h1;
    const int x2 = u(rng) % (w1 - w2 + 1), y2 = u(rng) % (h1 - h2 + 1);
    CHECK(crop(crop(img, x1, y1, w1, h1), x2, y2, w2, h2) ==
          crop(img, x1 + x2, y1 + y2, w2, h2));
  }
}

TEST_CASE("adjacent ISS tiles share a 112 px band (g=32, o=4, p=14)") {
  std::mt19937_64 rng(19);
  const ImageBuffer content = oracle::random_image(rng, 672, 336);
  const ImageBuffer framed = pad_black_frame(content, 56);
  const ImageBuffer left = crop(framed, 0, 0, 448, 448);
  const ImageBuffer right = crop(framed, 336, 0, 448, 448);
  CHECK(crop(left, 336, 0, 112, 448) == crop(right, 0, 0, 112, 448));
  CHECK_FALSE(crop(left, 335, 0, 112, 448) == crop(right, 0, 0, 112, 448));
}

}  // TEST_SUITE
