// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace splitpriv {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

inline uint8_t to_byte(float v) {
  const float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

}  // namespace

void write_png(const std::string& path, const TensorF& img) {
  int64_t c, h, w;
  if (img.rank() == 3) {
    c = img.shape[0];
    h = img.shape[1];
    w = img.shape[2];
  } else if (img.rank() == 2) {
    c = 1;
    h = img.shape[0];
    w = img.shape[1];
  } else {
    throw std::invalid_argument("write_png: expected [C,H,W] or [H,W]");
  }
  if (c != 1 && c != 3) throw std::invalid_argument("write_png: channels must be 1 or 3");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("write_png: libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng error on " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(w * c));
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x)
      for (int64_t ch = 0; ch < c; ++ch) row[static_cast<size_t>(x * c + ch)] = to_byte(img[(ch * h + y) * w + x]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

TensorF read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("read_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("read_png: libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: libpng error on " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const auto w = static_cast<int64_t>(png_get_image_width(png, info));
  const auto h = static_cast<int64_t>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const auto channels = static_cast<int64_t>(png_get_channels(png, info));
  const int64_t c = channels >= 3 ? 3 : 1;
  std::vector<uint8_t> row(static_cast<size_t>(w * channels));
  TensorF img({c, h, w});
  for (int64_t y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int64_t x = 0; x < w; ++x)
      for (int64_t ch = 0; ch < c; ++ch)
        img[(ch * h + y) * w + x] = static_cast<float>(row[static_cast<size_t>(x * channels + ch)]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

TensorF resize_bilinear(const TensorF& img, int64_t out_h, int64_t out_w) {
  if (img.rank() != 3) throw std::invalid_argument("resize_bilinear: expected [C,H,W]");
  const int64_t c = img.shape[0], h = img.shape[1], w = img.shape[2];
  if (h == out_h && w == out_w) return img;
  TensorF out({c, out_h, out_w});
  const double sy = static_cast<double>(h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(w) / static_cast<double>(out_w);
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < out_h; ++y) {
      const double fy = (y + 0.5) * sy - 0.5;
      const int64_t y0 = std::clamp<int64_t>(static_cast<int64_t>(std::floor(fy)), 0, h - 1);
      const int64_t y1 = std::min<int64_t>(y0 + 1, h - 1);
      const double wy = std::clamp(fy - static_cast<double>(y0), 0.0, 1.0);
      for (int64_t x = 0; x < out_w; ++x) {
        const double fx = (x + 0.5) * sx - 0.5;
        const int64_t x0 = std::clamp<int64_t>(static_cast<int64_t>(std::floor(fx)), 0, w - 1);
        const int64_t x1 = std::min<int64_t>(x0 + 1, w - 1);
        const double wx = std::clamp(fx - static_cast<double>(x0), 0.0, 1.0);
        const double v00 = img[(ch * h + y0) * w + x0];
        const double v01 = img[(ch * h + y0) * w + x1];
        const double v10 = img[(ch * h + y1) * w + x0];
        const double v11 = img[(ch * h + y1) * w + x1];
        out[(ch * out_h + y) * out_w + x] =
            static_cast<float>((1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11));
      }
    }
  return out;
}

TensorF make_grid(const std::vector<std::vector<TensorF>>& rows, int64_t pad, float pad_value) {
  if (rows.empty() || rows[0].empty()) throw std::invalid_argument("make_grid: empty input");
  const Shape cell = rows[0][0].shape;
  if (cell.size() != 3) throw std::invalid_argument("make_grid: cells must be [C,H,W]");
  size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  const int64_t c = cell[0], h = cell[1], w = cell[2];
  const int64_t gh = static_cast<int64_t>(rows.size()) * (h + pad) + pad;
  const int64_t gw = static_cast<int64_t>(cols) * (w + pad) + pad;
  TensorF grid({c, gh, gw});
  grid.fill(pad_value);
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t k = 0; k < rows[r].size(); ++k) {
      const TensorF& img = rows[r][k];
      check_same_shape(img.shape, cell, "make_grid");
      const int64_t oy = pad + static_cast<int64_t>(r) * (h + pad);
      const int64_t ox = pad + static_cast<int64_t>(k) * (w + pad);
      for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t y = 0; y < h; ++y)
          for (int64_t x = 0; x < w; ++x) grid[(ch * gh + oy + y) * gw + ox + x] = img[(ch * h + y) * w + x];
    }
  return grid;
}

}  // namespace splitpriv
