// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include <doctest.h>

#include <cmath>
#include <limits>

#include "splitpriv/metrics.hpp"
#include "splitpriv/rng.hpp"

using namespace splitpriv;

namespace {

TensorF random_image(int64_t c, int64_t h, int64_t w, Rng& rng) {
  TensorF img({c, h, w});
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  return img;
}

// Independent SSIM oracle: direct per-window double loops, no separable
// filtering, no shared code with the implementation.
double ssim_bruteforce(const TensorF& a, const TensorF& b, int win = 11, double sigma = 1.5, double L = 1.0) {
  const int64_t c = a.shape[0], h = a.shape[1], w = a.shape[2];
  std::vector<double> ga(static_cast<size_t>(h * w), 0), gb = ga;
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t i = 0; i < h * w; ++i) {
      ga[static_cast<size_t>(i)] += a[ch * h * w + i] / static_cast<double>(c);
      gb[static_cast<size_t>(i)] += b[ch * h * w + i] / static_cast<double>(c);
    }
  std::vector<double> g(static_cast<size_t>(win * win));
  double gs = 0;
  const double cc = (win - 1) / 2.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      g[static_cast<size_t>(i * win + j)] =
          std::exp(-((i - cc) * (i - cc) + (j - cc) * (j - cc)) / (2 * sigma * sigma));
      gs += g[static_cast<size_t>(i * win + j)];
    }
  for (auto& v : g) v /= gs;
  const double c1 = 0.01 * L * 0.01 * L, c2 = 0.03 * L * 0.03 * L;
  double acc = 0;
  int64_t count = 0;
  for (int64_t y = 0; y + win <= h; ++y)
    for (int64_t x = 0; x + win <= w; ++x) {
      double ma = 0, mb = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double wgt = g[static_cast<size_t>(i * win + j)];
          ma += wgt * ga[static_cast<size_t>((y + i) * w + x + j)];
          mb += wgt * gb[static_cast<size_t>((y + i) * w + x + j)];
        }
      double va = 0, vb = 0, vab = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double wgt = g[static_cast<size_t>(i * win + j)];
          const double da = ga[static_cast<size_t>((y + i) * w + x + j)] - ma;
          const double db = gb[static_cast<size_t>((y + i) * w + x + j)] - mb;
          va += wgt * da * da;
          vb += wgt * db * db;
          vab += wgt * da * db;
        }
      acc += ((2 * ma * mb + c1) * (2 * vab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("psnr closed forms") {
  Rng rng(1);
  auto a = random_image(3, 16, 16, rng);

  CHECK(std::isinf(psnr(a, a)));  // identical -> sentinel

  auto b = a;
  for (auto& v : b.data) v += 0.1f;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-6));  // 10*log10(1/0.01)
}

TEST_CASE("psnr symmetry and monotonic decay under growing noise") {
  Rng rng(2);
  auto a = random_image(3, 16, 16, rng);
  auto b = random_image(3, 16, 16, rng);
  CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-9));

  double last = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    auto noisy = a;
    Rng nr(77);
    for (auto& v : noisy.data) v += static_cast<float>(nr.uniform(-amp, amp));
    const double p = psnr(a, noisy);
    CHECK(p < last);
    last = p;
  }
}

TEST_CASE("ssim of identical images is exactly one") {
  Rng rng(3);
  auto a = random_image(3, 16, 16, rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ssim matches the brute-force reference implementation") {
  Rng rng(4);
  for (int it = 0; it < 3; ++it) {
    auto a = random_image(3, 20, 14, rng);
    auto b = random_image(3, 20, 14, rng);
    CHECK(ssim(a, b) == doctest::Approx(ssim_bruteforce(a, b)).epsilon(1e-4));
    auto c = a;
    for (auto& v : c.data) v = 0.8f * v + 0.1f;
    CHECK(ssim(a, c) == doctest::Approx(ssim_bruteforce(a, c)).epsilon(1e-4));
  }
}

TEST_CASE("ssim symmetry and shift invariance") {
  Rng rng(5);
  auto a = random_image(1, 16, 16, rng);
  auto b = random_image(1, 16, 16, rng);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-9));

  auto a2 = a, b2 = b;
  for (auto& v : a2.data) v += 0.13f;
  for (auto& v : b2.data) v += 0.13f;
  CHECK(ssim(a2, b2) == doctest::Approx(ssim(a, b)).epsilon(1e-4));
}

TEST_CASE("ssim falls back to a global window on tiny images") {
  Rng rng(6);
  auto a = random_image(1, 8, 8, rng);
  auto res = ssim_ex(a, a);
  CHECK_FALSE(res.windowed);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("accuracy argmax with ties toward the lower index") {
  TensorF logits({4, 2});
  logits.data = {0.9f, 0.1f, 0.2f, 0.8f, 0.5f, 0.5f, 0.3f, 0.7f};
  std::vector<int> labels{0, 1, 0, 1};
  CHECK(accuracy(logits, labels) == doctest::Approx(1.0));  // tie row counts as class 0

  std::vector<int> wrong{1, 0, 1, 0};
  CHECK(accuracy(logits, wrong) == doctest::Approx(0.0));

  TensorF empty({0, 2});
  CHECK_THROWS(accuracy(empty, {}));
}

TEST_CASE("batch similarity report aggregates per-image metrics") {
  Rng rng(7);
  TensorF a({3, 3, 16, 16}), b({3, 3, 16, 16});
  for (auto& v : a.data) v = static_cast<float>(rng.uniform());
  for (auto& v : b.data) v = static_cast<float>(rng.uniform());
  auto rep = evaluate_similarity(a, b);
  CHECK(rep.n_images == 3);
  CHECK(rep.mse > 0);
  CHECK(rep.ssim < 0.5);
  CHECK(rep.psnr_db > 0);

  auto self = evaluate_similarity(a, a);
  CHECK(self.mse == 0);
  CHECK(std::isinf(self.psnr_db));
  CHECK(self.ssim == doctest::Approx(1.0).epsilon(1e-9));
}
