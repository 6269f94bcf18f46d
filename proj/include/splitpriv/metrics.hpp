// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <string>
#include <vector>

#include "splitpriv/tensor.hpp"

namespace splitpriv {

/// Fraction of rows whose argmax logit matches the label; argmax ties break
/// toward the lower class index.
double accuracy(const TensorF& logits, const std::vector<int>& labels);

double image_mse(const TensorF& a, const TensorF& b);

/// 10*log10(max_val^2 / MSE); +inf sentinel when the images are identical.
double psnr(const TensorF& a, const TensorF& b, double max_val = 1.0);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;  // L
};

struct SsimResult {
  double value = 0;
  bool windowed = true;  // false => image smaller than window, global fallback
};

/// Mean structural similarity over the valid window positions. Multi-channel
/// images are reduced to grayscale by the per-pixel channel mean first.
/// Images smaller than the window fall back to a single global window.
SsimResult ssim_ex(const TensorF& a, const TensorF& b, const SsimOptions& opt = {});
double ssim(const TensorF& a, const TensorF& b, const SsimOptions& opt = {});

struct SimilarityReport {
  double psnr_db = 0;
  double ssim = 0;
  double mse = 0;
  int64_t n_images = 0;

  std::string to_json() const;
};

/// Batch [N,C,H,W] similarity, metric means over images. If csv_path is
/// nonempty, per-image rows (index,mse,psnr,ssim) stream to that file.
SimilarityReport evaluate_similarity(const TensorF& a, const TensorF& b, const std::string& csv_path = "");

}  // namespace splitpriv
