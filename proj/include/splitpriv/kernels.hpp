// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Dense NN kernels. Every kernel has a serial reference implementation and an
// OpenMP variant that parallelizes only over independent output slices, so the
// two produce bit-identical results for any thread count. kern::* dispatches
// on the process-wide backend; kern::serial is kept callable for tests and the
// kernel benchmark.

#pragma once

#include <cmath>
#include <cstdint>

namespace splitpriv::kern {

enum class Backend { Serial, Parallel };

Backend backend();
void set_backend(Backend b);

struct Conv2dDims {
  int64_t n, ci, h, w;    // input
  int64_t co, kh, kw;     // filter
  int64_t stride, pad;
  int64_t ho, wo;         // output
};

inline int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

inline int64_t convt_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad, int64_t outpad) {
  return (in - 1) * stride - 2 * pad + k + outpad;
}

struct ConvT2dDims {
  int64_t n, ci, h, w;          // input
  int64_t co, kh, kw;           // filter, stored [ci][co][kh][kw]
  int64_t stride, pad, outpad;
  int64_t ho, wo;               // output
};

namespace detail {

// One (n,co) output plane of a convolution. y plane must be initialized.
template <typename S>
inline void conv2d_plane(const S* x, const S* w, S* y, const Conv2dDims& d, int64_t n, int64_t co) {
  const S* xn = x + n * d.ci * d.h * d.w;
  S* yp = y + (n * d.co + co) * d.ho * d.wo;
  for (int64_t ci = 0; ci < d.ci; ++ci) {
    const S* xc = xn + ci * d.h * d.w;
    const S* wc = w + ((co * d.ci + ci) * d.kh) * d.kw;
    for (int64_t kh = 0; kh < d.kh; ++kh) {
      for (int64_t kw = 0; kw < d.kw; ++kw) {
        const S wv = wc[kh * d.kw + kw];
        for (int64_t oh = 0; oh < d.ho; ++oh) {
          const int64_t ih = oh * d.stride - d.pad + kh;
          if (ih < 0 || ih >= d.h) continue;
          const S* xrow = xc + ih * d.w;
          S* yrow = yp + oh * d.wo;
          for (int64_t ow = 0; ow < d.wo; ++ow) {
            const int64_t iw = ow * d.stride - d.pad + kw;
            if (iw < 0 || iw >= d.w) continue;
            yrow[ow] += wv * xrow[iw];
          }
        }
      }
    }
  }
}

// gx[n,ci] via gather over (co,kh,kw).
template <typename S>
inline void conv2d_grad_input_plane(const S* gy, const S* w, S* gx, const Conv2dDims& d, int64_t n, int64_t ci) {
  S* gxp = gx + (n * d.ci + ci) * d.h * d.w;
  const S* gyn = gy + n * d.co * d.ho * d.wo;
  for (int64_t co = 0; co < d.co; ++co) {
    const S* gyp = gyn + co * d.ho * d.wo;
    const S* wc = w + ((co * d.ci + ci) * d.kh) * d.kw;
    for (int64_t kh = 0; kh < d.kh; ++kh) {
      for (int64_t kw = 0; kw < d.kw; ++kw) {
        const S wv = wc[kh * d.kw + kw];
        for (int64_t oh = 0; oh < d.ho; ++oh) {
          const int64_t ih = oh * d.stride - d.pad + kh;
          if (ih < 0 || ih >= d.h) continue;
          const S* gyrow = gyp + oh * d.wo;
          S* gxrow = gxp + ih * d.w;
          for (int64_t ow = 0; ow < d.wo; ++ow) {
            const int64_t iw = ow * d.stride - d.pad + kw;
            if (iw < 0 || iw >= d.w) continue;
            gxrow[iw] += wv * gyrow[ow];
          }
        }
      }
    }
  }
}

// Accumulates gw rows and gb for one output channel.
template <typename S>
inline void conv2d_grad_params_channel(const S* x, const S* gy, S* gw, S* gb, const Conv2dDims& d, int64_t co) {
  S* gwc = gw + co * d.ci * d.kh * d.kw;
  S gbv = 0;
  for (int64_t n = 0; n < d.n; ++n) {
    const S* gyp = gy + (n * d.co + co) * d.ho * d.wo;
    const S* xn = x + n * d.ci * d.h * d.w;
    for (int64_t oh = 0; oh < d.ho; ++oh)
      for (int64_t ow = 0; ow < d.wo; ++ow) gbv += gyp[oh * d.wo + ow];
    for (int64_t ci = 0; ci < d.ci; ++ci) {
      const S* xc = xn + ci * d.h * d.w;
      for (int64_t kh = 0; kh < d.kh; ++kh) {
        for (int64_t kw = 0; kw < d.kw; ++kw) {
          S acc = 0;
          for (int64_t oh = 0; oh < d.ho; ++oh) {
            const int64_t ih = oh * d.stride - d.pad + kh;
            if (ih < 0 || ih >= d.h) continue;
            const S* xrow = xc + ih * d.w;
            const S* gyrow = gyp + oh * d.wo;
            for (int64_t ow = 0; ow < d.wo; ++ow) {
              const int64_t iw = ow * d.stride - d.pad + kw;
              if (iw < 0 || iw >= d.w) continue;
              acc += xrow[iw] * gyrow[ow];
            }
          }
          gwc[(ci * d.kh + kh) * d.kw + kw] += acc;
        }
      }
    }
  }
  gb[co] += gbv;
}

// Gather form of transposed convolution: one (n,co) output plane.
template <typename S>
inline void convt2d_plane(const S* x, const S* w, S* y, const ConvT2dDims& d, int64_t n, int64_t co) {
  const S* xn = x + n * d.ci * d.h * d.w;
  S* yp = y + (n * d.co + co) * d.ho * d.wo;
  for (int64_t ci = 0; ci < d.ci; ++ci) {
    const S* xc = xn + ci * d.h * d.w;
    const S* wc = w + ((ci * d.co + co) * d.kh) * d.kw;
    for (int64_t kh = 0; kh < d.kh; ++kh) {
      for (int64_t kw = 0; kw < d.kw; ++kw) {
        const S wv = wc[kh * d.kw + kw];
        for (int64_t oh = 0; oh < d.ho; ++oh) {
          const int64_t num_h = oh + d.pad - kh;
          if (num_h < 0 || num_h % d.stride != 0) continue;
          const int64_t ih = num_h / d.stride;
          if (ih >= d.h) continue;
          const S* xrow = xc + ih * d.w;
          S* yrow = yp + oh * d.wo;
          for (int64_t ow = 0; ow < d.wo; ++ow) {
            const int64_t num_w = ow + d.pad - kw;
            if (num_w < 0 || num_w % d.stride != 0) continue;
            const int64_t iw = num_w / d.stride;
            if (iw >= d.w) continue;
            yrow[ow] += wv * xrow[iw];
          }
        }
      }
    }
  }
}

// Transposed-conv input gradient: exactly a convolution of gy with w.
template <typename S>
inline void convt2d_grad_input_plane(const S* gy, const S* w, S* gx, const ConvT2dDims& d, int64_t n, int64_t ci) {
  S* gxp = gx + (n * d.ci + ci) * d.h * d.w;
  const S* gyn = gy + n * d.co * d.ho * d.wo;
  for (int64_t co = 0; co < d.co; ++co) {
    const S* gyp = gyn + co * d.ho * d.wo;
    const S* wc = w + ((ci * d.co + co) * d.kh) * d.kw;
    for (int64_t kh = 0; kh < d.kh; ++kh) {
      for (int64_t kw = 0; kw < d.kw; ++kw) {
        const S wv = wc[kh * d.kw + kw];
        for (int64_t ih = 0; ih < d.h; ++ih) {
          const int64_t oh = ih * d.stride - d.pad + kh;
          if (oh < 0 || oh >= d.ho) continue;
          const S* gyrow = gyp + oh * d.wo;
          S* gxrow = gxp + ih * d.w;
          for (int64_t iw = 0; iw < d.w; ++iw) {
            const int64_t ow = iw * d.stride - d.pad + kw;
            if (ow < 0 || ow >= d.wo) continue;
            gxrow[iw] += wv * gyrow[ow];
          }
        }
      }
    }
  }
}

template <typename S>
inline void convt2d_grad_params_channel(const S* x, const S* gy, S* gw, S* gb, const ConvT2dDims& d, int64_t co) {
  S gbv = 0;
  for (int64_t n = 0; n < d.n; ++n) {
    const S* gyp = gy + (n * d.co + co) * d.ho * d.wo;
    for (int64_t i = 0; i < d.ho * d.wo; ++i) gbv += gyp[i];
    const S* xn = x + n * d.ci * d.h * d.w;
    for (int64_t ci = 0; ci < d.ci; ++ci) {
      const S* xc = xn + ci * d.h * d.w;
      S* gwc = gw + ((ci * d.co + co) * d.kh) * d.kw;
      for (int64_t kh = 0; kh < d.kh; ++kh) {
        for (int64_t kw = 0; kw < d.kw; ++kw) {
          S acc = 0;
          for (int64_t ih = 0; ih < d.h; ++ih) {
            const int64_t oh = ih * d.stride - d.pad + kh;
            if (oh < 0 || oh >= d.ho) continue;
            const S* xrow = xc + ih * d.w;
            const S* gyrow = gyp + oh * d.wo;
            for (int64_t iw = 0; iw < d.w; ++iw) {
              const int64_t ow = iw * d.stride - d.pad + kw;
              if (ow < 0 || ow >= d.wo) continue;
              acc += xrow[iw] * gyrow[ow];
            }
          }
          gwc[kh * d.kw + kw] += acc;
        }
      }
    }
  }
  gb[co] += gbv;
}

}  // namespace detail

namespace serial {

template <typename S>
void conv2d_forward(const S* x, const S* w, const S* b, S* y, const Conv2dDims& d) {
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t co = 0; co < d.co; ++co) {
      S* yp = y + (n * d.co + co) * d.ho * d.wo;
      const S bv = b ? b[co] : S(0);
      for (int64_t i = 0; i < d.ho * d.wo; ++i) yp[i] = bv;
      detail::conv2d_plane(x, w, y, d, n, co);
    }
}

template <typename S>
void conv2d_backward_input(const S* gy, const S* w, S* gx, const Conv2dDims& d) {
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t ci = 0; ci < d.ci; ++ci) {
      S* gxp = gx + (n * d.ci + ci) * d.h * d.w;
      for (int64_t i = 0; i < d.h * d.w; ++i) gxp[i] = 0;
      detail::conv2d_grad_input_plane(gy, w, gx, d, n, ci);
    }
}

template <typename S>
void conv2d_backward_params(const S* x, const S* gy, S* gw, S* gb, const Conv2dDims& d) {
  for (int64_t co = 0; co < d.co; ++co) detail::conv2d_grad_params_channel(x, gy, gw, gb, d, co);
}

template <typename S>
void convt2d_forward(const S* x, const S* w, const S* b, S* y, const ConvT2dDims& d) {
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t co = 0; co < d.co; ++co) {
      S* yp = y + (n * d.co + co) * d.ho * d.wo;
      const S bv = b ? b[co] : S(0);
      for (int64_t i = 0; i < d.ho * d.wo; ++i) yp[i] = bv;
      detail::convt2d_plane(x, w, y, d, n, co);
    }
}

template <typename S>
void convt2d_backward_input(const S* gy, const S* w, S* gx, const ConvT2dDims& d) {
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t ci = 0; ci < d.ci; ++ci) {
      S* gxp = gx + (n * d.ci + ci) * d.h * d.w;
      for (int64_t i = 0; i < d.h * d.w; ++i) gxp[i] = 0;
      detail::convt2d_grad_input_plane(gy, w, gx, d, n, ci);
    }
}

template <typename S>
void convt2d_backward_params(const S* x, const S* gy, S* gw, S* gb, const ConvT2dDims& d) {
  for (int64_t co = 0; co < d.co; ++co) detail::convt2d_grad_params_channel(x, gy, gw, gb, d, co);
}

template <typename S>
void linear_forward(const S* x, const S* w, const S* b, S* y, int64_t n, int64_t in, int64_t out) {
  for (int64_t i = 0; i < n; ++i)
    for (int64_t o = 0; o < out; ++o) {
      S acc = b ? b[o] : S(0);
      const S* xr = x + i * in;
      const S* wr = w + o * in;
      for (int64_t k = 0; k < in; ++k) acc += xr[k] * wr[k];
      y[i * out + o] = acc;
    }
}

template <typename S>
void linear_backward_input(const S* gy, const S* w, S* gx, int64_t n, int64_t in, int64_t out) {
  for (int64_t i = 0; i < n; ++i)
    for (int64_t k = 0; k < in; ++k) {
      S acc = 0;
      for (int64_t o = 0; o < out; ++o) acc += gy[i * out + o] * w[o * in + k];
      gx[i * in + k] = acc;
    }
}

template <typename S>
void linear_backward_params(const S* x, const S* gy, S* gw, S* gb, int64_t n, int64_t in, int64_t out) {
  for (int64_t o = 0; o < out; ++o) {
    S gbv = 0;
    S* gwr = gw + o * in;
    for (int64_t i = 0; i < n; ++i) {
      const S g = gy[i * out + o];
      gbv += g;
      const S* xr = x + i * in;
      for (int64_t k = 0; k < in; ++k) gwr[k] += g * xr[k];
    }
    gb[o] += gbv;
  }
}

template <typename S>
void relu_forward(const S* x, S* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
}

template <typename S>
void relu_backward(const S* x, const S* gy, S* gx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) gx[i] = x[i] > S(0) ? gy[i] : S(0);
}

template <typename S>
void sigmoid_forward(const S* x, S* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = S(1) / (S(1) + std::exp(-x[i]));
}

template <typename S>
void sigmoid_backward(const S* y, const S* gy, S* gx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) gx[i] = gy[i] * y[i] * (S(1) - y[i]);
}

// 2x2/stride-2 style max pooling; idx records the argmax within each window.
template <typename S>
void maxpool2d_forward(const S* x, S* y, int32_t* idx, int64_t nc, int64_t h, int64_t w, int64_t k, int64_t stride,
                       int64_t pad, int64_t ho, int64_t wo) {
  for (int64_t p = 0; p < nc; ++p) {
    const S* xp = x + p * h * w;
    S* yp = y + p * ho * wo;
    int32_t* ip = idx + p * ho * wo;
    for (int64_t oh = 0; oh < ho; ++oh)
      for (int64_t ow = 0; ow < wo; ++ow) {
        S best = S(0);
        int32_t bi = -1;
        for (int64_t kh = 0; kh < k; ++kh)
          for (int64_t kw = 0; kw < k; ++kw) {
            const int64_t ih = oh * stride - pad + kh;
            const int64_t iw = ow * stride - pad + kw;
            if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
            const S v = xp[ih * w + iw];
            if (bi < 0 || v > best) {
              best = v;
              bi = static_cast<int32_t>(ih * w + iw);
            }
          }
        yp[oh * wo + ow] = best;
        ip[oh * wo + ow] = bi;
      }
  }
}

template <typename S>
void maxpool2d_backward(const S* gy, const int32_t* idx, S* gx, int64_t nc, int64_t hw_in, int64_t hw_out) {
  for (int64_t p = 0; p < nc; ++p) {
    S* gxp = gx + p * hw_in;
    for (int64_t i = 0; i < hw_in; ++i) gxp[i] = 0;
    const S* gyp = gy + p * hw_out;
    const int32_t* ip = idx + p * hw_out;
    for (int64_t i = 0; i < hw_out; ++i)
      if (ip[i] >= 0) gxp[ip[i]] += gyp[i];
  }
}

template <typename S>
void axpy(S a, const S* x, S* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename S>
void scale(S a, S* x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) x[i] *= a;
}

/// Adam update, elementwise. t is the 1-based step count.
template <typename S>
void adam_step(S* w, const S* g, S* m, S* v, int64_t n, S lr, S beta1, S beta2, S eps, int64_t t) {
  const S b1t = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1), static_cast<double>(t)));
  const S b2t = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2), static_cast<double>(t)));
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (S(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (S(1) - beta2) * g[i] * g[i];
    const S mh = m[i] / b1t;
    const S vh = v[i] / b2t;
    w[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

/// Per-row L-inf rescale: row /= max(1, |row|_inf / t). Returns nothing;
/// scales are written so callers can reuse them in the backward pass.
template <typename S>
void clip_rows_inf(S* x, S* scales, int64_t rows, int64_t cols, S t) {
  for (int64_t r = 0; r < rows; ++r) {
    S* row = x + r * cols;
    S mx = 0;
    for (int64_t c = 0; c < cols; ++c) {
      const S a = row[c] < 0 ? -row[c] : row[c];
      if (a > mx) mx = a;
    }
    const S div = mx / t > S(1) ? mx / t : S(1);
    scales[r] = S(1) / div;
    if (div != S(1))
      for (int64_t c = 0; c < cols; ++c) row[c] /= div;
  }
}

}  // namespace serial

namespace par {

template <typename S>
void conv2d_forward(const S* x, const S* w, const S* b, S* y, const Conv2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t co = 0; co < d.co; ++co) {
      S* yp = y + (n * d.co + co) * d.ho * d.wo;
      const S bv = b ? b[co] : S(0);
      for (int64_t i = 0; i < d.ho * d.wo; ++i) yp[i] = bv;
      detail::conv2d_plane(x, w, y, d, n, co);
    }
}

template <typename S>
void conv2d_backward_input(const S* gy, const S* w, S* gx, const Conv2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t ci = 0; ci < d.ci; ++ci) {
      S* gxp = gx + (n * d.ci + ci) * d.h * d.w;
      for (int64_t i = 0; i < d.h * d.w; ++i) gxp[i] = 0;
      detail::conv2d_grad_input_plane(gy, w, gx, d, n, ci);
    }
}

template <typename S>
void conv2d_backward_params(const S* x, const S* gy, S* gw, S* gb, const Conv2dDims& d) {
#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < d.co; ++co) detail::conv2d_grad_params_channel(x, gy, gw, gb, d, co);
}

template <typename S>
void convt2d_forward(const S* x, const S* w, const S* b, S* y, const ConvT2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t co = 0; co < d.co; ++co) {
      S* yp = y + (n * d.co + co) * d.ho * d.wo;
      const S bv = b ? b[co] : S(0);
      for (int64_t i = 0; i < d.ho * d.wo; ++i) yp[i] = bv;
      detail::convt2d_plane(x, w, y, d, n, co);
    }
}

template <typename S>
void convt2d_backward_input(const S* gy, const S* w, S* gx, const ConvT2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t ci = 0; ci < d.ci; ++ci) {
      S* gxp = gx + (n * d.ci + ci) * d.h * d.w;
      for (int64_t i = 0; i < d.h * d.w; ++i) gxp[i] = 0;
      detail::convt2d_grad_input_plane(gy, w, gx, d, n, ci);
    }
}

template <typename S>
void convt2d_backward_params(const S* x, const S* gy, S* gw, S* gb, const ConvT2dDims& d) {
#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < d.co; ++co) detail::convt2d_grad_params_channel(x, gy, gw, gb, d, co);
}

template <typename S>
void linear_forward(const S* x, const S* w, const S* b, S* y, int64_t n, int64_t in, int64_t out) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i)
    for (int64_t o = 0; o < out; ++o) {
      S acc = b ? b[o] : S(0);
      const S* xr = x + i * in;
      const S* wr = w + o * in;
      for (int64_t k = 0; k < in; ++k) acc += xr[k] * wr[k];
      y[i * out + o] = acc;
    }
}

template <typename S>
void linear_backward_input(const S* gy, const S* w, S* gx, int64_t n, int64_t in, int64_t out) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i)
    for (int64_t k = 0; k < in; ++k) {
      S acc = 0;
      for (int64_t o = 0; o < out; ++o) acc += gy[i * out + o] * w[o * in + k];
      gx[i * in + k] = acc;
    }
}

template <typename S>
void linear_backward_params(const S* x, const S* gy, S* gw, S* gb, int64_t n, int64_t in, int64_t out) {
#pragma omp parallel for schedule(static)
  for (int64_t o = 0; o < out; ++o) {
    S gbv = 0;
    S* gwr = gw + o * in;
    for (int64_t i = 0; i < n; ++i) {
      const S g = gy[i * out + o];
      gbv += g;
      const S* xr = x + i * in;
      for (int64_t k = 0; k < in; ++k) gwr[k] += g * xr[k];
    }
    gb[o] += gbv;
  }
}

template <typename S>
void relu_forward(const S* x, S* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
}

template <typename S>
void relu_backward(const S* x, const S* gy, S* gx, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) gx[i] = x[i] > S(0) ? gy[i] : S(0);
}

template <typename S>
void sigmoid_forward(const S* x, S* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] = S(1) / (S(1) + std::exp(-x[i]));
}

template <typename S>
void sigmoid_backward(const S* y, const S* gy, S* gx, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) gx[i] = gy[i] * y[i] * (S(1) - y[i]);
}

template <typename S>
void maxpool2d_forward(const S* x, S* y, int32_t* idx, int64_t nc, int64_t h, int64_t w, int64_t k, int64_t stride,
                       int64_t pad, int64_t ho, int64_t wo) {
#pragma omp parallel for schedule(static)
  for (int64_t p = 0; p < nc; ++p)
    serial::maxpool2d_forward(x + p * h * w, y + p * ho * wo, idx + p * ho * wo, 1, h, w, k, stride, pad, ho, wo);
}

template <typename S>
void maxpool2d_backward(const S* gy, const int32_t* idx, S* gx, int64_t nc, int64_t hw_in, int64_t hw_out) {
#pragma omp parallel for schedule(static)
  for (int64_t p = 0; p < nc; ++p)
    serial::maxpool2d_backward(gy + p * hw_out, idx + p * hw_out, gx + p * hw_in, 1, hw_in, hw_out);
}

template <typename S>
void axpy(S a, const S* x, S* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename S>
void scale(S a, S* x, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) x[i] *= a;
}

template <typename S>
void adam_step(S* w, const S* g, S* m, S* v, int64_t n, S lr, S beta1, S beta2, S eps, int64_t t) {
  const S b1t = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1), static_cast<double>(t)));
  const S b2t = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2), static_cast<double>(t)));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (S(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (S(1) - beta2) * g[i] * g[i];
    const S mh = m[i] / b1t;
    const S vh = v[i] / b2t;
    w[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

template <typename S>
void clip_rows_inf(S* x, S* scales, int64_t rows, int64_t cols, S t) {
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < rows; ++r) serial::clip_rows_inf(x + r * cols, scales + r, 1, cols, t);
}

}  // namespace par

// Backend-dispatching entry points used by the layer code.
#define SPLITPRIV_DISPATCH(fn, ...) \
  (backend() == Backend::Serial ? serial::fn(__VA_ARGS__) : par::fn(__VA_ARGS__))

template <typename S>
void conv2d_forward(const S* x, const S* w, const S* b, S* y, const Conv2dDims& d) {
  SPLITPRIV_DISPATCH(conv2d_forward, x, w, b, y, d);
}
template <typename S>
void conv2d_backward_input(const S* gy, const S* w, S* gx, const Conv2dDims& d) {
  SPLITPRIV_DISPATCH(conv2d_backward_input, gy, w, gx, d);
}
template <typename S>
void conv2d_backward_params(const S* x, const S* gy, S* gw, S* gb, const Conv2dDims& d) {
  SPLITPRIV_DISPATCH(conv2d_backward_params, x, gy, gw, gb, d);
}
template <typename S>
void convt2d_forward(const S* x, const S* w, const S* b, S* y, const ConvT2dDims& d) {
  SPLITPRIV_DISPATCH(convt2d_forward, x, w, b, y, d);
}
template <typename S>
void convt2d_backward_input(const S* gy, const S* w, S* gx, const ConvT2dDims& d) {
  SPLITPRIV_DISPATCH(convt2d_backward_input, gy, w, gx, d);
}
template <typename S>
void convt2d_backward_params(const S* x, const S* gy, S* gw, S* gb, const ConvT2dDims& d) {
  SPLITPRIV_DISPATCH(convt2d_backward_params, x, gy, gw, gb, d);
}
template <typename S>
void linear_forward(const S* x, const S* w, const S* b, S* y, int64_t n, int64_t in, int64_t out) {
  SPLITPRIV_DISPATCH(linear_forward, x, w, b, y, n, in, out);
}
template <typename S>
void linear_backward_input(const S* gy, const S* w, S* gx, int64_t n, int64_t in, int64_t out) {
  SPLITPRIV_DISPATCH(linear_backward_input, gy, w, gx, n, in, out);
}
template <typename S>
void linear_backward_params(const S* x, const S* gy, S* gw, S* gb, int64_t n, int64_t in, int64_t out) {
  SPLITPRIV_DISPATCH(linear_backward_params, x, gy, gw, gb, n, in, out);
}
template <typename S>
void relu_forward(const S* x, S* y, int64_t n) {
  SPLITPRIV_DISPATCH(relu_forward, x, y, n);
}
template <typename S>
void relu_backward(const S* x, const S* gy, S* gx, int64_t n) {
  SPLITPRIV_DISPATCH(relu_backward, x, gy, gx, n);
}
template <typename S>
void sigmoid_forward(const S* x, S* y, int64_t n) {
  SPLITPRIV_DISPATCH(sigmoid_forward, x, y, n);
}
template <typename S>
void sigmoid_backward(const S* y, const S* gy, S* gx, int64_t n) {
  SPLITPRIV_DISPATCH(sigmoid_backward, y, gy, gx, n);
}
template <typename S>
void maxpool2d_forward(const S* x, S* y, int32_t* idx, int64_t nc, int64_t h, int64_t w, int64_t k, int64_t stride,
                       int64_t pad, int64_t ho, int64_t wo) {
  SPLITPRIV_DISPATCH(maxpool2d_forward, x, y, idx, nc, h, w, k, stride, pad, ho, wo);
}
template <typename S>
void maxpool2d_backward(const S* gy, const int32_t* idx, S* gx, int64_t nc, int64_t hw_in, int64_t hw_out) {
  SPLITPRIV_DISPATCH(maxpool2d_backward, gy, idx, gx, nc, hw_in, hw_out);
}
template <typename S>
void axpy(S a, const S* x, S* y, int64_t n) {
  SPLITPRIV_DISPATCH(axpy, a, x, y, n);
}
template <typename S>
void scale(S a, S* x, int64_t n) {
  SPLITPRIV_DISPATCH(scale, a, x, n);
}
template <typename S>
void adam_step(S* w, const S* g, S* m, S* v, int64_t n, S lr, S beta1, S beta2, S eps, int64_t t) {
  SPLITPRIV_DISPATCH(adam_step, w, g, m, v, n, lr, beta1, beta2, eps, t);
}
template <typename S>
void clip_rows_inf(S* x, S* scales, int64_t rows, int64_t cols, S t) {
  SPLITPRIV_DISPATCH(clip_rows_inf, x, scales, rows, cols, t);
}

}  // namespace splitpriv::kern
