// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <string>
#include <vector>

#include "splitpriv/tensor.hpp"

namespace splitpriv {

/// Writes a [C,H,W] (C in {1,3}) or [H,W] float image in [0,1] as an 8-bit PNG.
void write_png(const std::string& path, const TensorF& img);

/// Reads an 8-bit PNG into a [C,H,W] float tensor in [0,1]; grayscale files
/// come back with C=1, color files with C=3 (alpha dropped).
TensorF read_png(const std::string& path);

/// Bilinear resize of a [C,H,W] image. Returns the input untouched when the
/// target size matches.
TensorF resize_bilinear(const TensorF& img, int64_t out_h, int64_t out_w);

/// Tiles rows of equally-sized [C,H,W] images into one image with padding.
TensorF make_grid(const std::vector<std::vector<TensorF>>& rows, int64_t pad = 2, float pad_value = 1.0f);

}  // namespace splitpriv
