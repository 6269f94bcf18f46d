// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "splitpriv/image_io.hpp"
#include "splitpriv/tensor.hpp"

namespace splitpriv {

namespace {

// 3x5 block font, rows top to bottom, 3-bit masks (left bit = leftmost pixel).
const std::map<char, std::array<uint8_t, 5>>& font() {
  static const std::map<char, std::array<uint8_t, 5>> f = {
      {' ', {0, 0, 0, 0, 0}},      {'0', {7, 5, 5, 5, 7}},      {'1', {2, 6, 2, 2, 7}},
      {'2', {7, 1, 7, 4, 7}},      {'3', {7, 1, 7, 1, 7}},      {'4', {5, 5, 7, 1, 1}},
      {'5', {7, 4, 7, 1, 7}},      {'6', {7, 4, 7, 5, 7}},      {'7', {7, 1, 1, 2, 2}},
      {'8', {7, 5, 7, 5, 7}},      {'9', {7, 5, 7, 1, 7}},      {'.', {0, 0, 0, 0, 2}},
      {',', {0, 0, 0, 2, 4}},      {'-', {0, 0, 7, 0, 0}},      {'=', {0, 7, 0, 7, 0}},
      {'%', {5, 1, 2, 4, 5}},      {'/', {1, 1, 2, 4, 4}},      {'(', {1, 2, 2, 2, 1}},
      {')', {4, 2, 2, 2, 4}},      {':', {0, 2, 0, 2, 0}},      {'_', {0, 0, 0, 0, 7}},
      {'+', {0, 2, 7, 2, 0}},      {'A', {2, 5, 7, 5, 5}},      {'B', {6, 5, 6, 5, 6}},
      {'C', {7, 4, 4, 4, 7}},      {'D', {6, 5, 5, 5, 6}},      {'E', {7, 4, 7, 4, 7}},
      {'F', {7, 4, 7, 4, 4}},      {'G', {7, 4, 5, 5, 7}},      {'H', {5, 5, 7, 5, 5}},
      {'I', {7, 2, 2, 2, 7}},      {'J', {1, 1, 1, 5, 7}},      {'K', {5, 5, 6, 5, 5}},
      {'L', {4, 4, 4, 4, 7}},      {'M', {5, 7, 7, 5, 5}},      {'N', {5, 7, 7, 7, 5}},
      {'O', {7, 5, 5, 5, 7}},      {'P', {7, 5, 7, 4, 4}},      {'Q', {7, 5, 5, 7, 1}},
      {'R', {7, 5, 6, 5, 5}},      {'S', {7, 4, 7, 1, 7}},      {'T', {7, 2, 2, 2, 2}},
      {'U', {5, 5, 5, 5, 7}},      {'V', {5, 5, 5, 5, 2}},      {'W', {5, 5, 7, 7, 5}},
      {'X', {5, 5, 2, 5, 5}},      {'Y', {5, 5, 2, 2, 2}},      {'Z', {7, 1, 2, 4, 7}},
  };
  return f;
}

struct Canvas {
  TensorF img;  // [3,H,W]
  int64_t h, w;

  Canvas(int64_t hh, int64_t ww) : img({3, hh, ww}), h(hh), w(ww) { img.fill(1.0f); }

  void put(int64_t y, int64_t x, const std::array<uint8_t, 3>& rgb) {
    if (y < 0 || y >= h || x < 0 || x >= w) return;
    for (int64_t c = 0; c < 3; ++c) img[(c * h + y) * w + x] = static_cast<float>(rgb[static_cast<size_t>(c)]) / 255.f;
  }

  void line(int64_t y0, int64_t x0, int64_t y1, int64_t x1, const std::array<uint8_t, 3>& rgb) {
    const int64_t dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int64_t sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int64_t err = dx + dy;
    while (true) {
      put(y0, x0, rgb);
      if (x0 == x1 && y0 == y1) break;
      const int64_t e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void marker(int64_t y, int64_t x, const std::array<uint8_t, 3>& rgb) {
    for (int64_t dy = -2; dy <= 2; ++dy)
      for (int64_t dx = -2; dx <= 2; ++dx) put(y + dy, x + dx, rgb);
  }

  // scale-2 block text
  void text(int64_t y, int64_t x, const std::string& s, const std::array<uint8_t, 3>& rgb) {
    const auto& f = font();
    int64_t cx = x;
    for (char raw : s) {
      char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      auto it = f.find(ch);
      if (it == f.end()) it = f.find(' ');
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if (it->second[static_cast<size_t>(row)] & (4 >> col))
            for (int sy = 0; sy < 2; ++sy)
              for (int sx = 0; sx < 2; ++sx) put(y + row * 2 + sy, cx + col * 2 + sx, rgb);
      cx += 8;
    }
  }
};

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void render_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, const std::vector<Series>& series, int width, int height) {
  Canvas cv(height, width);
  const int64_t left = 64, right = width - 16, top = 34, bottom = height - 44;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ypad = 0.06 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return left + static_cast<int64_t>((x - xmin) / (xmax - xmin) * static_cast<double>(right - left)); };
  auto py = [&](double y) { return bottom - static_cast<int64_t>((y - ymin) / (ymax - ymin) * static_cast<double>(bottom - top)); };

  const std::array<uint8_t, 3> black{0, 0, 0}, grey{200, 200, 200};

  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    cv.line(top, px(xv), bottom, px(xv), grey);
    cv.line(py(yv), left, py(yv), right, grey);
    cv.text(bottom + 8, px(xv) - 12, fmt_num(xv), black);
    cv.text(py(yv) - 5, 8, fmt_num(yv), black);
  }
  cv.line(bottom, left, bottom, right, black);
  cv.line(top, left, bottom, left, black);

  cv.text(8, left, title, black);
  cv.text(height - 18, (left + right) / 2 - static_cast<int64_t>(xlabel.size()) * 4, xlabel, black);
  cv.text(20, 8, ylabel, black);

  for (const auto& s : series) {
    int64_t prev_x = 0, prev_y = 0;
    bool has_prev = false;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        has_prev = false;
        continue;
      }
      const int64_t X = px(s.x[i]), Y = py(s.y[i]);
      if (s.scatter)
        cv.marker(Y, X, s.rgb);
      else if (has_prev)
        cv.line(prev_y, prev_x, Y, X, s.rgb);
      prev_x = X;
      prev_y = Y;
      has_prev = true;
    }
  }

  int64_t ly = top + 6;
  for (const auto& s : series) {
    for (int64_t dy = 0; dy < 8; ++dy)
      for (int64_t dx = 0; dx < 14; ++dx) cv.put(ly + dy, right - 150 + dx, s.rgb);
    cv.text(ly - 1, right - 132, s.label, black);
    ly += 16;
  }

  write_png(path, cv.img);
}

}  // namespace splitpriv
