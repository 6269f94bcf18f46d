// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <cmath>
#include <vector>

#include "splitpriv/tensor.hpp"

namespace splitpriv {

// Cross-entropy probabilities below this floor are clamped before the log;
// adversarial training can transiently spike a class probability to ~0.
inline constexpr double kLogFloor = 1e-12;

template <typename S>
Tensor<S> softmax(const Tensor<S>& logits) {
  const int64_t n = logits.shape[0], k = logits.shape[1];
  Tensor<S> p(logits.shape);
  for (int64_t i = 0; i < n; ++i) {
    const S* row = logits.ptr() + i * k;
    S* out = p.ptr() + i * k;
    S mx = row[0];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    S denom = 0;
    for (int64_t j = 0; j < k; ++j) {
      out[j] = std::exp(row[j] - mx);
      denom += out[j];
    }
    for (int64_t j = 0; j < k; ++j) out[j] /= denom;
  }
  return p;
}

/// Mean cross-entropy of integer labels against a [N,K] probability tensor.
template <typename S>
double cross_entropy(const Tensor<S>& probs, const std::vector<int>& labels) {
  const int64_t n = probs.shape[0], k = probs.shape[1];
  double loss = 0;
  for (int64_t i = 0; i < n; ++i) {
    double p = static_cast<double>(probs[i * k + labels[static_cast<size_t>(i)]]);
    loss -= std::log(std::max(p, kLogFloor));
  }
  return loss / static_cast<double>(n);
}

/// d(mean CE)/d logits for fused softmax + cross-entropy: (p - onehot)/N,
/// optionally rescaled by `coeff`.
template <typename S>
Tensor<S> softmax_ce_backward(const Tensor<S>& probs, const std::vector<int>& labels, double coeff = 1.0) {
  const int64_t n = probs.shape[0], k = probs.shape[1];
  Tensor<S> g = probs;
  const S scale = static_cast<S>(coeff / static_cast<double>(n));
  for (int64_t i = 0; i < n; ++i) {
    g[i * k + labels[static_cast<size_t>(i)]] -= S(1);
    for (int64_t j = 0; j < k; ++j) g[i * k + j] *= scale;
  }
  return g;
}

template <typename S>
double mean_squared_error(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a.shape, b.shape, "mean_squared_error");
  double acc = 0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// d(mean squared error)/d a = 2 (a - b) / numel.
template <typename S>
Tensor<S> mse_backward(const Tensor<S>& a, const Tensor<S>& b) {
  Tensor<S> g(a.shape);
  const S scale = S(2) / static_cast<S>(a.size());
  for (int64_t i = 0; i < a.size(); ++i) g[i] = scale * (a[i] - b[i]);
  return g;
}

}  // namespace splitpriv
