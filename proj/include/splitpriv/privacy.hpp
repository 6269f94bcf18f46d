// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// The clipping + Laplace release mechanism in isolation, plus a statistical
// check that the released values are epsilon-differentially private: for any
// two inputs the densities of the mechanism output may differ by at most a
// factor e^eps, which the test verifies on binned samples.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "splitpriv/errors.hpp"
#include "splitpriv/rng.hpp"
#include "splitpriv/tensor.hpp"

namespace splitpriv {

struct PrivacyConfig {
  double epsilon = 1.0;
  double threshold = 20.0;  // T

  /// Laplace diversity of the release: b = 2T / epsilon.
  double scale_b() const { return 2.0 * threshold / epsilon; }

  void validate() const {
    if (epsilon <= 0) throw std::invalid_argument("privacy: epsilon must be > 0");
    if (threshold <= 0) throw std::invalid_argument("privacy: threshold must be > 0");
  }
};

/// Whole-array L-inf rescale: x / max(1, |x|_inf / T). The array is treated
/// as one record; per-sample semantics live in the model's clip layer.
template <typename S>
Tensor<S> clip_global_max(const Tensor<S>& x, double threshold);

extern template Tensor<float> clip_global_max<float>(const Tensor<float>&, double);
extern template Tensor<double> clip_global_max<double>(const Tensor<double>&, double);

/// i.i.d. Laplace(0,b) tensor; consumes numel values of the stream in order.
TensorF laplace_noise(const Shape& shape, double b, Rng& rng);

struct DpTestReport {
  double epsilon_claimed = 0;
  double epsilon_empirical = 0;  // max over qualifying bins of |log count ratio|
  int64_t num_samples = 0;
  int num_bins = 0;
  int occupied_bins = 0;  // bins that met the per-histogram occupancy floor
  double slack = 0.15;
  bool conclusive = false;  // false when no bin met the occupancy floor
  bool pass = false;        // conclusive && epsilon_empirical <= eps*(1+slack)

  std::string to_json() const;
};

/// Samples the scalar mechanism clip(x) + Lap(0, 2T/eps) for two inputs and
/// compares binned log density ratios against the e^eps bound. Bins with
/// fewer than `min_bin_count` samples in either histogram are excluded; the
/// two outermost bins are closed catch-alls so the tails stay testable.
DpTestReport dp_ratio_test(double threshold, double epsilon, double x, double x_hat, int64_t n_samples,
                           int n_bins, uint64_t seed = 20260101, int64_t min_bin_count = 100);

}  // namespace splitpriv
