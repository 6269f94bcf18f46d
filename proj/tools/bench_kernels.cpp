// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Serial vs OpenMP kernel timings on training-shaped workloads.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "splitpriv/kernels.hpp"
#include "splitpriv/metrics.hpp"
#include "splitpriv/rng.hpp"

using namespace splitpriv;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<float> randu(int64_t n, Rng& rng) {
  std::vector<float> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

void row(const char* name, double serial_ms, double par_ms) {
  std::printf("%-28s %10.3f %10.3f %8.2fx\n", name, serial_ms, par_ms, serial_ms / par_ms);
}

}  // namespace

int main() {
  Rng rng(7);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial ms", "omp ms", "speedup");

  {
    kern::Conv2dDims d{};
    d.n = 64; d.ci = 16; d.h = 16; d.w = 16;
    d.co = 32; d.kh = 3; d.kw = 3; d.stride = 2; d.pad = 1;
    d.ho = kern::conv_out_dim(d.h, 3, 2, 1);
    d.wo = kern::conv_out_dim(d.w, 3, 2, 1);
    auto x = randu(d.n * d.ci * d.h * d.w, rng);
    auto w = randu(d.co * d.ci * 9, rng);
    auto b = randu(d.co, rng);
    std::vector<float> y(static_cast<size_t>(d.n * d.co * d.ho * d.wo));
    auto gy = randu(d.n * d.co * d.ho * d.wo, rng);
    std::vector<float> gx(x.size()), gw(w.size()), gb(b.size());

    row("conv2d forward",
        time_ms([&] { kern::serial::conv2d_forward(x.data(), w.data(), b.data(), y.data(), d); }, 200),
        time_ms([&] { kern::par::conv2d_forward(x.data(), w.data(), b.data(), y.data(), d); }, 200));
    row("conv2d backward input",
        time_ms([&] { kern::serial::conv2d_backward_input(gy.data(), w.data(), gx.data(), d); }, 200),
        time_ms([&] { kern::par::conv2d_backward_input(gy.data(), w.data(), gx.data(), d); }, 200));
    row("conv2d backward params",
        time_ms([&] { kern::serial::conv2d_backward_params(x.data(), gy.data(), gw.data(), gb.data(), d); }, 200),
        time_ms([&] { kern::par::conv2d_backward_params(x.data(), gy.data(), gw.data(), gb.data(), d); }, 200));
  }

  {
    const int64_t n = 64, in = 1024, out = 128;
    auto x = randu(n * in, rng);
    auto w = randu(out * in, rng);
    auto b = randu(out, rng);
    std::vector<float> y(static_cast<size_t>(n * out));
    auto gy = randu(n * out, rng);
    std::vector<float> gx(x.size()), gw(w.size()), gb(b.size());
    row("linear forward",
        time_ms([&] { kern::serial::linear_forward(x.data(), w.data(), b.data(), y.data(), n, in, out); }, 400),
        time_ms([&] { kern::par::linear_forward(x.data(), w.data(), b.data(), y.data(), n, in, out); }, 400));
    row("linear backward params",
        time_ms([&] { kern::serial::linear_backward_params(x.data(), gy.data(), gw.data(), gb.data(), n, in, out); },
                400),
        time_ms([&] { kern::par::linear_backward_params(x.data(), gy.data(), gw.data(), gb.data(), n, in, out); },
                400));
  }

  {
    const int64_t rows = 64, cols = 2048;
    auto x = randu(rows * cols, rng);
    std::vector<float> scales(static_cast<size_t>(rows));
    row("clip rows L-inf",
        time_ms([&] { kern::serial::clip_rows_inf(x.data(), scales.data(), rows, cols, 20.f); }, 2000),
        time_ms([&] { kern::par::clip_rows_inf(x.data(), scales.data(), rows, cols, 20.f); }, 2000));
  }

  {
    const int64_t n = 1 << 20;
    auto g = randu(n, rng);
    std::vector<float> w(static_cast<size_t>(n), 0.1f), m(w.size(), 0.f), v(w.size(), 0.f);
    row("adam step 1M params",
        time_ms([&] { kern::serial::adam_step(w.data(), g.data(), m.data(), v.data(), n, 1e-3f, 0.9f, 0.999f, 1e-8f, 3); },
                20),
        time_ms([&] { kern::par::adam_step(w.data(), g.data(), m.data(), v.data(), n, 1e-3f, 0.9f, 0.999f, 1e-8f, 3); },
                20));
  }

  return 0;
}
