// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace splitpriv {

double accuracy(const TensorF& logits, const std::vector<int>& labels) {
  const int64_t n = logits.shape[0], k = logits.shape[1];
  if (n == 0) throw std::invalid_argument("accuracy: empty batch");
  if (static_cast<size_t>(n) != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  int64_t hits = 0;
  for (int64_t i = 0; i < n; ++i) {
    const float* row = logits.ptr() + i * k;
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (row[j] > row[best]) best = j;  // strict > keeps ties at the lower index
    if (best == labels[static_cast<size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double image_mse(const TensorF& a, const TensorF& b) {
  check_same_shape(a.shape, b.shape, "image_mse");
  double acc = 0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const TensorF& a, const TensorF& b, double max_val) {
  if (max_val <= 0) throw std::invalid_argument("psnr: max_val must be > 0");
  const double m = image_mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_val * max_val / m);
}

namespace {

// [C,H,W] (or [H,W]) -> grayscale [H,W] doubles via channel mean.
std::vector<double> to_gray(const TensorF& img, int64_t& h, int64_t& w) {
  int64_t c = 1;
  if (img.rank() == 3) {
    c = img.shape[0];
    h = img.shape[1];
    w = img.shape[2];
  } else if (img.rank() == 2) {
    h = img.shape[0];
    w = img.shape[1];
  } else {
    throw std::invalid_argument("ssim: expected [C,H,W] or [H,W] image");
  }
  std::vector<double> g(static_cast<size_t>(h * w), 0.0);
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t i = 0; i < h * w; ++i) g[static_cast<size_t>(i)] += static_cast<double>(img[ch * h * w + i]);
  for (auto& v : g) v /= static_cast<double>(c);
  return g;
}

std::vector<double> gaussian_kernel(int win, double sigma) {
  std::vector<double> k(static_cast<size_t>(win));
  const double c = (win - 1) / 2.0;
  double sum = 0;
  for (int i = 0; i < win; ++i) {
    k[static_cast<size_t>(i)] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable valid-mode filtering: out is (h-win+1) x (w-win+1).
std::vector<double> filter_valid(const std::vector<double>& img, int64_t h, int64_t w, const std::vector<double>& k) {
  const auto win = static_cast<int64_t>(k.size());
  const int64_t ho = h - win + 1, wo = w - win + 1;
  std::vector<double> tmp(static_cast<size_t>(h * wo), 0.0);
  for (int64_t i = 0; i < h; ++i)
    for (int64_t j = 0; j < wo; ++j) {
      double acc = 0;
      for (int64_t t = 0; t < win; ++t) acc += k[static_cast<size_t>(t)] * img[static_cast<size_t>(i * w + j + t)];
      tmp[static_cast<size_t>(i * wo + j)] = acc;
    }
  std::vector<double> out(static_cast<size_t>(ho * wo), 0.0);
  for (int64_t i = 0; i < ho; ++i)
    for (int64_t j = 0; j < wo; ++j) {
      double acc = 0;
      for (int64_t t = 0; t < win; ++t) acc += k[static_cast<size_t>(t)] * tmp[static_cast<size_t>((i + t) * wo + j)];
      out[static_cast<size_t>(i * wo + j)] = acc;
    }
  return out;
}

double ssim_term(double mu_a, double mu_b, double va, double vb, double vab, double c1, double c2) {
  return ((2 * mu_a * mu_b + c1) * (2 * vab + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
}

}  // namespace

SsimResult ssim_ex(const TensorF& a, const TensorF& b, const SsimOptions& opt) {
  check_same_shape(a.shape, b.shape, "ssim");
  int64_t h = 0, w = 0;
  const auto ga = to_gray(a, h, w);
  const auto gb = to_gray(b, h, w);
  const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
  const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);

  SsimResult res;
  if (h < opt.window || w < opt.window) {
    // Global fallback: one uniform window spanning the whole image.
    const auto n = static_cast<double>(h * w);
    double ma = 0, mb = 0;
    for (size_t i = 0; i < ga.size(); ++i) {
      ma += ga[i];
      mb += gb[i];
    }
    ma /= n;
    mb /= n;
    double va = 0, vb = 0, vab = 0;
    for (size_t i = 0; i < ga.size(); ++i) {
      va += (ga[i] - ma) * (ga[i] - ma);
      vb += (gb[i] - mb) * (gb[i] - mb);
      vab += (ga[i] - ma) * (gb[i] - mb);
    }
    va /= n;
    vb /= n;
    vab /= n;
    res.windowed = false;
    res.value = ssim_term(ma, mb, va, vb, vab, c1, c2);
    return res;
  }

  const auto k = gaussian_kernel(opt.window, opt.sigma);
  auto mul = [](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
    return out;
  };

  const auto mu_a = filter_valid(ga, h, w, k);
  const auto mu_b = filter_valid(gb, h, w, k);
  const auto e_aa = filter_valid(mul(ga, ga), h, w, k);
  const auto e_bb = filter_valid(mul(gb, gb), h, w, k);
  const auto e_ab = filter_valid(mul(ga, gb), h, w, k);

  double acc = 0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double vab = e_ab[i] - mu_a[i] * mu_b[i];
    acc += ssim_term(mu_a[i], mu_b[i], va, vb, vab, c1, c2);
  }
  res.windowed = true;
  res.value = acc / static_cast<double>(mu_a.size());
  return res;
}

double ssim(const TensorF& a, const TensorF& b, const SsimOptions& opt) { return ssim_ex(a, b, opt).value; }

std::string SimilarityReport::to_json() const {
  std::ostringstream os;
  os.precision(10);
  os << "{\"psnr_db\":";
  if (std::isinf(psnr_db))
    os << "\"inf\"";
  else
    os << psnr_db;
  os << ",\"ssim\":" << ssim << ",\"mse\":" << mse << ",\"n_images\":" << n_images << "}";
  return os.str();
}

SimilarityReport evaluate_similarity(const TensorF& a, const TensorF& b, const std::string& csv_path) {
  check_same_shape(a.shape, b.shape, "evaluate_similarity");
  if (a.rank() != 4) throw std::invalid_argument("evaluate_similarity: expected [N,C,H,W]");
  const int64_t n = a.shape[0];
  if (n == 0) throw std::invalid_argument("evaluate_similarity: empty batch");
  const Shape img_shape{a.shape[1], a.shape[2], a.shape[3]};
  const int64_t stride = numel(img_shape);

  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    csv << "index,mse,psnr_db,ssim\n";
  }

  SimilarityReport rep;
  rep.n_images = n;
  for (int64_t i = 0; i < n; ++i) {
    TensorF ia(img_shape), ib(img_shape);
    std::copy_n(a.ptr() + i * stride, stride, ia.ptr());
    std::copy_n(b.ptr() + i * stride, stride, ib.ptr());
    const double m = image_mse(ia, ib);
    const double p = psnr(ia, ib);
    const double s = ssim(ia, ib);
    rep.mse += m;
    rep.psnr_db += p;
    rep.ssim += s;
    if (csv.is_open()) csv << i << "," << m << "," << p << "," << s << "\n";
  }
  rep.mse /= static_cast<double>(n);
  rep.psnr_db /= static_cast<double>(n);
  rep.ssim /= static_cast<double>(n);
  return rep;
}

}  // namespace splitpriv
