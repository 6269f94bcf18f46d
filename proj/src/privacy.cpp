// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "splitpriv/kernels.hpp"

namespace splitpriv {

template <typename S>
Tensor<S> clip_global_max(const Tensor<S>& x, double threshold) {
  if (threshold <= 0) throw std::invalid_argument("clip_global_max: threshold must be > 0");
  for (const S v : x.data)
    if (!std::isfinite(static_cast<double>(v))) throw NumericError("clip_global_max: non-finite input");
  Tensor<S> y = x;
  S s = 0;
  kern::clip_rows_inf(y.ptr(), &s, 1, y.size(), static_cast<S>(threshold));
  return y;
}

template Tensor<float> clip_global_max<float>(const Tensor<float>&, double);
template Tensor<double> clip_global_max<double>(const Tensor<double>&, double);

TensorF laplace_noise(const Shape& shape, double b, Rng& rng) {
  if (b <= 0) throw std::invalid_argument("laplace_noise: scale must be > 0");
  TensorF t(shape);
  for (auto& v : t.data) v = static_cast<float>(rng.laplace(b));
  return t;
}

namespace {

inline double clip_scalar(double x, double t) {
  const double div = std::max(1.0, std::abs(x) / t);
  return x / div;
}

}  // namespace

DpTestReport dp_ratio_test(double threshold, double epsilon, double x, double x_hat, int64_t n_samples, int n_bins,
                           uint64_t seed, int64_t min_bin_count) {
  if (threshold <= 0 || epsilon <= 0) throw std::invalid_argument("dp_ratio_test: T and epsilon must be > 0");
  if (n_samples < 1000000) throw std::invalid_argument("dp_ratio_test: need at least 1e6 samples");
  if (n_bins < 4) throw std::invalid_argument("dp_ratio_test: need at least 4 bins");

  const double b = 2.0 * threshold / epsilon;
  const double cx = clip_scalar(x, threshold);
  const double cx_hat = clip_scalar(x_hat, threshold);

  // Interior bins cover both clipped centers plus 2.5 diversities of margin;
  // everything further out lands in the closed catch-all end bins.
  const double lo = std::min(cx, cx_hat) - 2.5 * b;
  const double hi = std::max(cx, cx_hat) + 2.5 * b;
  const int interior = n_bins - 2;
  const double width = (hi - lo) / static_cast<double>(interior);

  std::vector<int64_t> h1(static_cast<size_t>(n_bins), 0), h2(static_cast<size_t>(n_bins), 0);
  auto bin_of = [&](double v) -> size_t {
    if (v < lo) return 0;
    if (v >= hi) return static_cast<size_t>(n_bins - 1);
    auto k = static_cast<int64_t>((v - lo) / width);
    k = std::min<int64_t>(k, interior - 1);
    return static_cast<size_t>(k + 1);
  };

  Rng r1 = Rng(seed).fork(1), r2 = Rng(seed).fork(2);
  for (int64_t i = 0; i < n_samples; ++i) ++h1[bin_of(cx + r1.laplace(b))];
  for (int64_t i = 0; i < n_samples; ++i) ++h2[bin_of(cx_hat + r2.laplace(b))];

  DpTestReport rep;
  rep.epsilon_claimed = epsilon;
  rep.num_samples = n_samples;
  rep.num_bins = n_bins;

  double worst = 0;
  int used = 0;
  for (int k = 0; k < n_bins; ++k) {
    const auto c1 = h1[static_cast<size_t>(k)], c2 = h2[static_cast<size_t>(k)];
    if (c1 < min_bin_count || c2 < min_bin_count) continue;
    ++used;
    const double ratio = std::abs(std::log(static_cast<double>(c1) / static_cast<double>(c2)));
    worst = std::max(worst, ratio);
  }
  rep.occupied_bins = used;
  rep.epsilon_empirical = worst;
  rep.conclusive = used > 0;
  rep.pass = rep.conclusive && worst <= epsilon * (1.0 + rep.slack);
  return rep;
}

std::string DpTestReport::to_json() const {
  std::ostringstream os;
  os.precision(10);
  os << "{\"epsilon_claimed\":" << epsilon_claimed << ",\"epsilon_empirical\":" << epsilon_empirical
     << ",\"num_samples\":" << num_samples << ",\"num_bins\":" << num_bins << ",\"occupied_bins\":" << occupied_bins
     << ",\"slack\":" << slack << ",\"conclusive\":" << (conclusive ? "true" : "false")
     << ",\"pass\":" << (pass ? "true" : "false") << "}";
  return os.str();
}

}  // namespace splitpriv
