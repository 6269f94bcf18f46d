// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <array>
#include <string>
#include <vector>

namespace splitpriv {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::array<uint8_t, 3> rgb{0, 0, 0};
  bool scatter = false;  // markers only, no connecting line
};

/// Renders a line/scatter chart to an 8-bit PNG. Intentionally small: axes,
/// ticks, legend, block font.
void render_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, const std::vector<Series>& series, int width = 720, int height = 460);

}  // namespace splitpriv
