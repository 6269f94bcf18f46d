// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// The parallel kernels must be bit-identical to the serial references: they
// only split independent output slices across threads and keep every
// reduction order fixed.

#include <doctest.h>

#include <vector>

#include "splitpriv/kernels.hpp"
#include "splitpriv/losses.hpp"
#include "splitpriv/rng.hpp"
#include "splitpriv/tensor.hpp"

using namespace splitpriv;

namespace {

std::vector<float> random_vec(int64_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

}  // namespace

TEST_CASE("conv2d serial and parallel agree bitwise") {
  Rng rng(42);
  kern::Conv2dDims d{};
  d.n = 3; d.ci = 5; d.h = 9; d.w = 7;
  d.co = 4; d.kh = 3; d.kw = 3;
  d.stride = 2; d.pad = 1;
  d.ho = kern::conv_out_dim(d.h, d.kh, d.stride, d.pad);
  d.wo = kern::conv_out_dim(d.w, d.kw, d.stride, d.pad);

  auto x = random_vec(d.n * d.ci * d.h * d.w, rng);
  auto w = random_vec(d.co * d.ci * d.kh * d.kw, rng);
  auto b = random_vec(d.co, rng);

  std::vector<float> y1(static_cast<size_t>(d.n * d.co * d.ho * d.wo)), y2 = y1;
  kern::serial::conv2d_forward(x.data(), w.data(), b.data(), y1.data(), d);
  kern::par::conv2d_forward(x.data(), w.data(), b.data(), y2.data(), d);
  CHECK(y1 == y2);

  auto gy = random_vec(d.n * d.co * d.ho * d.wo, rng);
  std::vector<float> gx1(x.size()), gx2(x.size());
  kern::serial::conv2d_backward_input(gy.data(), w.data(), gx1.data(), d);
  kern::par::conv2d_backward_input(gy.data(), w.data(), gx2.data(), d);
  CHECK(gx1 == gx2);

  std::vector<float> gw1(w.size(), 0.f), gb1(b.size(), 0.f), gw2 = gw1, gb2 = gb1;
  kern::serial::conv2d_backward_params(x.data(), gy.data(), gw1.data(), gb1.data(), d);
  kern::par::conv2d_backward_params(x.data(), gy.data(), gw2.data(), gb2.data(), d);
  CHECK(gw1 == gw2);
  CHECK(gb1 == gb2);
}

TEST_CASE("transposed conv serial and parallel agree bitwise") {
  Rng rng(43);
  kern::ConvT2dDims d{};
  d.n = 2; d.ci = 6; d.h = 5; d.w = 5;
  d.co = 3; d.kh = 3; d.kw = 3;
  d.stride = 2; d.pad = 1; d.outpad = 1;
  d.ho = kern::convt_out_dim(d.h, d.kh, d.stride, d.pad, d.outpad);
  d.wo = kern::convt_out_dim(d.w, d.kw, d.stride, d.pad, d.outpad);
  CHECK(d.ho == 10);

  auto x = random_vec(d.n * d.ci * d.h * d.w, rng);
  auto w = random_vec(d.ci * d.co * d.kh * d.kw, rng);
  auto b = random_vec(d.co, rng);

  std::vector<float> y1(static_cast<size_t>(d.n * d.co * d.ho * d.wo)), y2 = y1;
  kern::serial::convt2d_forward(x.data(), w.data(), b.data(), y1.data(), d);
  kern::par::convt2d_forward(x.data(), w.data(), b.data(), y2.data(), d);
  CHECK(y1 == y2);

  auto gy = random_vec(d.n * d.co * d.ho * d.wo, rng);
  std::vector<float> gx1(x.size()), gx2(x.size());
  kern::serial::convt2d_backward_input(gy.data(), w.data(), gx1.data(), d);
  kern::par::convt2d_backward_input(gy.data(), w.data(), gx2.data(), d);
  CHECK(gx1 == gx2);

  std::vector<float> gw1(w.size(), 0.f), gb1(b.size(), 0.f), gw2 = gw1, gb2 = gb1;
  kern::serial::convt2d_backward_params(x.data(), gy.data(), gw1.data(), gb1.data(), d);
  kern::par::convt2d_backward_params(x.data(), gy.data(), gw2.data(), gb2.data(), d);
  CHECK(gw1 == gw2);
  CHECK(gb1 == gb2);
}

TEST_CASE("linear kernels: closed form and backend equality") {
  // y = W x + b with W = [[1,2],[3,4],[5,6]], x = [1,1], b = [0.5,0.5,0.5]
  std::vector<float> x{1.f, 1.f};
  std::vector<float> w{1.f, 2.f, 3.f, 4.f, 5.f, 6.f};
  std::vector<float> b{0.5f, 0.5f, 0.5f};
  std::vector<float> y(3);
  kern::linear_forward(x.data(), w.data(), b.data(), y.data(), 1, 2, 3);
  CHECK(y[0] == doctest::Approx(3.5));
  CHECK(y[1] == doctest::Approx(7.5));
  CHECK(y[2] == doctest::Approx(11.5));

  Rng rng(7);
  const int64_t n = 5, in = 17, out = 9;
  auto xs = random_vec(n * in, rng);
  auto ws = random_vec(out * in, rng);
  auto bs = random_vec(out, rng);
  auto gys = random_vec(n * out, rng);

  std::vector<float> y1(static_cast<size_t>(n * out)), y2 = y1;
  kern::serial::linear_forward(xs.data(), ws.data(), bs.data(), y1.data(), n, in, out);
  kern::par::linear_forward(xs.data(), ws.data(), bs.data(), y2.data(), n, in, out);
  CHECK(y1 == y2);

  std::vector<float> gx1(static_cast<size_t>(n * in)), gx2 = gx1;
  kern::serial::linear_backward_input(gys.data(), ws.data(), gx1.data(), n, in, out);
  kern::par::linear_backward_input(gys.data(), ws.data(), gx2.data(), n, in, out);
  CHECK(gx1 == gx2);

  std::vector<float> gw1(ws.size(), 0.f), gb1(bs.size(), 0.f), gw2 = gw1, gb2 = gb1;
  kern::serial::linear_backward_params(xs.data(), gys.data(), gw1.data(), gb1.data(), n, in, out);
  kern::par::linear_backward_params(xs.data(), gys.data(), gw2.data(), gb2.data(), n, in, out);
  CHECK(gw1 == gw2);
  CHECK(gb1 == gb2);
}

TEST_CASE("elementwise and pooling backends agree") {
  Rng rng(11);
  auto x = random_vec(1024, rng, -2.0, 2.0);
  std::vector<float> a(x.size()), b(x.size());
  kern::serial::relu_forward(x.data(), a.data(), static_cast<int64_t>(x.size()));
  kern::par::relu_forward(x.data(), b.data(), static_cast<int64_t>(x.size()));
  CHECK(a == b);

  kern::serial::sigmoid_forward(x.data(), a.data(), static_cast<int64_t>(x.size()));
  kern::par::sigmoid_forward(x.data(), b.data(), static_cast<int64_t>(x.size()));
  CHECK(a == b);

  const int64_t nc = 6, h = 8, w = 8, k = 2, s = 2;
  const int64_t ho = kern::conv_out_dim(h, k, s, 0), wo = kern::conv_out_dim(w, k, s, 0);
  auto xs = random_vec(nc * h * w, rng);
  std::vector<float> y1(static_cast<size_t>(nc * ho * wo)), y2 = y1;
  std::vector<int32_t> i1(y1.size()), i2(y1.size());
  kern::serial::maxpool2d_forward(xs.data(), y1.data(), i1.data(), nc, h, w, k, s, 0, ho, wo);
  kern::par::maxpool2d_forward(xs.data(), y2.data(), i2.data(), nc, h, w, k, s, 0, ho, wo);
  CHECK(y1 == y2);
  CHECK(i1 == i2);

  auto gy = random_vec(nc * ho * wo, rng);
  std::vector<float> g1(xs.size()), g2(xs.size());
  kern::serial::maxpool2d_backward(gy.data(), i1.data(), g1.data(), nc, h * w, ho * wo);
  kern::par::maxpool2d_backward(gy.data(), i2.data(), g2.data(), nc, h * w, ho * wo);
  CHECK(g1 == g2);
}

TEST_CASE("adam step backends agree and move against the gradient") {
  Rng rng(13);
  const int64_t n = 513;
  auto w0 = random_vec(n, rng);
  auto g = random_vec(n, rng);
  std::vector<float> m1(w0.size(), 0.f), v1 = m1, m2 = m1, v2 = m1;
  auto w1 = w0, w2 = w0;
  kern::serial::adam_step(w1.data(), g.data(), m1.data(), v1.data(), n, 1e-3f, 0.9f, 0.999f, 1e-8f, 1);
  kern::par::adam_step(w2.data(), g.data(), m2.data(), v2.data(), n, 1e-3f, 0.9f, 0.999f, 1e-8f, 1);
  CHECK(w1 == w2);
  CHECK(m1 == m2);
  CHECK(v1 == v2);
  for (int64_t i = 0; i < n; ++i)
    if (std::abs(g[static_cast<size_t>(i)]) > 1e-3f)
      CHECK((w1[static_cast<size_t>(i)] - w0[static_cast<size_t>(i)]) * g[static_cast<size_t>(i)] < 0.f);
}

TEST_CASE("softmax rows sum to one and cross-entropy matches hand value") {
  TensorF logits({2, 3});
  Rng rng(3);
  for (auto& v : logits.data) v = static_cast<float>(rng.uniform(-4.0, 4.0));
  auto p = softmax(logits);
  for (int64_t i = 0; i < 2; ++i) {
    double s = 0;
    for (int64_t j = 0; j < 3; ++j) s += p[i * 3 + j];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  }

  TensorF uniform({1, 2});
  uniform.fill(0.f);
  auto pu = softmax(uniform);
  CHECK(cross_entropy(pu, {0}) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}
