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
#include <filesystem>
#include <vector>

namespace flashtok {

/// Decoded RGB raster. Row-major, channel-interleaved, values in [0, 1].
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  /// Black image of the given size. Throws GeometryError for non-positive dims.
  ImageBuffer(int width, int height);

  /// Wraps existing data; validates length and value range.
  ImageBuffer(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return kChannels; }
  std::size_t size() const { return data_.size(); }

  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  const float* pixel(int x, int y) const { return data_.data() + index(x, y, 0); }
  float* pixel(int x, int y) { return data_.data() + index(x, y, 0); }

  const float* row(int y) const { return data_.data() + index(0, y, 0); }
  float* row(int y) { return data_.data() + index(0, y, 0); }

  const std::vector<float>& data() const { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_;
  int height_;
  std::vector<float> data_;
};

/// Reads PNG, JPEG or binary PPM (P6), detected from the file's magic bytes.
/// 8-bit samples map to v / 255. Throws IoError or DecodeError.
ImageBuffer decode_image(const std::filesystem::path& path);

/// Decodes an in-memory encoded image (same formats as decode_image).
ImageBuffer decode_image_bytes(const std::vector<unsigned char>& bytes);

/// Writes "P6\n<w> <h>\n255\n" followed by round(v * 255) bytes.
void encode_ppm(const ImageBuffer& img, const std::filesystem::path& path);

std::vector<unsigned char> encode_ppm_bytes(const ImageBuffer& img);

/// Bilinear resize with half-pixel centers: the source coordinate of output
/// pixel i is (i + 0.5) * in / out - 0.5, clamped to [0, in - 1].
ImageBuffer resize_bilinear(const ImageBuffer& img, int out_w, int out_h);

/// Surrounds the image with `margin` black pixels on every side.
ImageBuffer pad_black_frame(const ImageBuffer& img, int margin);

/// Exact copy of the w x h rectangle at (x, y). Throws BoundsError.
ImageBuffer crop(const ImageBuffer& img, int x, int y, int w, int h);

}  // namespace flashtok
