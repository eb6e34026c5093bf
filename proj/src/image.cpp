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

#include "flashtok/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "flashtok/errors.hpp"
#include "flashtok/kernels.hpp"

namespace flashtok {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw GeometryError("image dimensions must be positive, got " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
}

std::size_t pixel_count(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

ImageBuffer from_rgb8(int width, int height, const unsigned char* bytes,
                      int maxval = 255) {
  const std::size_t n = pixel_count(width, height) * ImageBuffer::kChannels;
  std::vector<float> data(n);
  const float scale = static_cast<float>(maxval);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = static_cast<float>(bytes[i]) / scale;
  }
  return ImageBuffer(width, height, std::move(data));
}

// ---- PPM -------------------------------------------------------------------

// Reads one header token, skipping whitespace and '#' comments.
std::string ppm_token(const std::vector<unsigned char>& b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') {
    tok.push_back(static_cast<char>(b[pos++]));
  }
  return tok;
}

int ppm_int(const std::vector<unsigned char>& b, std::size_t& pos,
            const char* what) {
  const std::string tok = ppm_token(b, pos);
  if (tok.empty() ||
      !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); }) ||
      tok.size() > 9) {
    throw DecodeError(std::string("PPM: bad ") + what);
  }
  return std::stoi(tok);
}

ImageBuffer decode_ppm(const std::vector<unsigned char>& b) {
  std::size_t pos = 2;
  const int w = ppm_int(b, pos, "width");
  const int h = ppm_int(b, pos, "height");
  const int maxval = ppm_int(b, pos, "maxval");
  if (w < 1 || h < 1) throw DecodeError("PPM: non-positive dimensions");
  if (maxval < 1 || maxval > 255) {
    throw DecodeError("PPM: only 8-bit maxval (1..255) is supported");
  }
  if (pos >= b.size() || !std::isspace(b[pos])) {
    throw DecodeError("PPM: missing whitespace after header");
  }
  ++pos;
  const std::size_t need = pixel_count(w, h) * 3;
  if (b.size() - pos < need) throw DecodeError("PPM: truncated pixel data");
  ImageBuffer img = from_rgb8(w, h, b.data() + pos, maxval);
  return img;
}

// ---- PNG -------------------------------------------------------------------

struct PngReadState {
  const std::vector<unsigned char>* bytes;
  std::size_t pos;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->bytes->size() - st->pos < len) png_error(png, "truncated PNG");
  std::memcpy(out, st->bytes->data() + st->pos, len);
  st->pos += len;
}

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf != nullptr) *buf = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

ImageBuffer decode_png(const std::vector<unsigned char>& b) {
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) throw DecodeError("PNG: cannot allocate decoder");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DecodeError("PNG: cannot allocate info");
  }
  PngReadState state{&b, 0};
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0;
  png_uint_32 h = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("PNG: " + err);
  }
  png_set_read_fn(png, &state, png_read_mem);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) {
    png_error(png, "unexpected row layout after conversion");
  }
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_rgb8(static_cast<int>(w), static_cast<int>(h), pixels.data());
}

// ---- JPEG ------------------------------------------------------------------

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* e = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, e->message);
  std::longjmp(e->jump, 1);
}

ImageBuffer decode_jpeg(const std::vector<unsigned char>& b) {
  jpeg_decompress_struct cinfo{};
  JpegError jerr{};
  cinfo.err = jpeg_std_error(&jerr.mgr);
  jerr.mgr.error_exit = jpeg_error_exit;
  jerr.mgr.output_message = [](j_common_ptr) {};
  std::vector<unsigned char> pixels;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("JPEG: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, b.data(), static_cast<unsigned long>(b.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const auto w = cinfo.output_width;
  const auto h = cinfo.output_height;
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < h) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_rgb8(static_cast<int>(w), static_cast<int>(h), pixels.data());
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count(width, height) * kChannels, 0.0f);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != pixel_count(width, height) * kChannels) {
    throw GeometryError("image data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(width) + "x" +
                        std::to_string(height) + "x3");
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw DomainError("image values must lie in [0, 1]");
    }
  }
}

ImageBuffer decode_image_bytes(const std::vector<unsigned char>& b) {
  if (b.size() >= 2 && b[0] == 'P' && b[1] == '6') return decode_ppm(b);
  if (b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0) return decode_png(b);
  if (b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF) {
    return decode_jpeg(b);
  }
  throw DecodeError("unsupported image format (expected PNG, JPEG or P6 PPM)");
}

ImageBuffer decode_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read image " + path.string());
  try {
    return decode_image_bytes(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> encode_ppm_bytes(const ImageBuffer& img) {
  const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (float v : img.data()) {
    // round-half-up of v * 255
    const double q = std::floor(static_cast<double>(v) * 255.0 + 0.5);
    out.push_back(static_cast<unsigned char>(std::clamp(q, 0.0, 255.0)));
  }
  return out;
}

void encode_ppm(const ImageBuffer& img, const std::filesystem::path& path) {
  const auto bytes = encode_ppm_bytes(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

struct AxisTap {
  int lo;
  int hi;
  float frac;
};

std::vector<AxisTap> axis_taps(int in, int out) {
  std::vector<AxisTap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, static_cast<float>(src - lo)};
  }
  return taps;
}

}  // namespace

ImageBuffer resize_bilinear(const ImageBuffer& img, int out_w, int out_h) {
  check_dims(out_w, out_h);
  if (out_w == img.width() && out_h == img.height()) return img;

  const auto& k = simd::active();
  const auto xs = axis_taps(img.width(), out_w);
  const auto ys = axis_taps(img.height(), out_h);
  constexpr int C = ImageBuffer::kChannels;
  const std::size_t row_len = static_cast<std::size_t>(out_w) * C;

  // Horizontal pass gathers the two source columns per output pixel, then one
  // lerp over the whole row.
  std::vector<float> left(row_len), right(row_len), wx(row_len);
  for (int x = 0; x < out_w; ++x) {
    for (int c = 0; c < C; ++c) wx[x * C + c] = xs[x].frac;
  }
  auto horizontal = [&](int src_y, float* dst) {
    const float* src = img.row(src_y);
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < C; ++c) {
        left[x * C + c] = src[xs[x].lo * C + c];
        right[x * C + c] = src[xs[x].hi * C + c];
      }
    }
    k.lerp_lanes(left.data(), right.data(), wx.data(), dst, row_len);
  };

  ImageBuffer out(out_w, out_h);
  std::vector<float> top(row_len), bottom(row_len);
  int top_src = -1;
  int bottom_src = -1;
  for (int y = 0; y < out_h; ++y) {
    const AxisTap t = ys[y];
    if (t.lo != top_src) {
      if (t.lo == bottom_src) {
        std::swap(top, bottom);
        std::swap(top_src, bottom_src);
      } else {
        horizontal(t.lo, top.data());
        top_src = t.lo;
      }
    }
    if (t.hi != bottom_src) {
      horizontal(t.hi, bottom.data());
      bottom_src = t.hi;
    }
    k.lerp(top.data(), bottom.data(), t.frac, out.row(y), row_len);
  }
  return out;
}

ImageBuffer pad_black_frame(const ImageBuffer& img, int margin) {
  if (margin < 0) throw GeometryError("frame margin must be non-negative");
  if (margin == 0) return img;
  ImageBuffer out(img.width() + 2 * margin, img.height() + 2 * margin);
  const std::size_t row_len = static_cast<std::size_t>(img.width()) * 3;
  for (int y = 0; y < img.height(); ++y) {
    std::copy_n(img.row(y), row_len, out.pixel(margin, y + margin));
  }
  return out;
}

ImageBuffer crop(const ImageBuffer& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 ||
      static_cast<long>(x) + w > img.width() ||
      static_cast<long>(y) + h > img.height()) {
    throw BoundsError("crop (" + std::to_string(x) + "," + std::to_string(y) +
                      "," + std::to_string(w) + "x" + std::to_string(h) +
                      ") outside " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()));
  }
  ImageBuffer out(w, h);
  const std::size_t row_len = static_cast<std::size_t>(w) * 3;
  for (int r = 0; r < h; ++r) {
    std::copy_n(img.pixel(x, y + r), row_len, out.row(r));
  }
  return out;
}

}  // namespace flashtok
