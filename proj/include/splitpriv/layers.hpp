// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "splitpriv/kernels.hpp"
#include "splitpriv/rng.hpp"
#include "splitpriv/tensor.hpp"

namespace splitpriv {

template <typename S>
struct Param {
  std::string name;
  Tensor<S> value;
  Tensor<S> grad;

  explicit Param(std::string n, Shape sh) : name(std::move(n)), value(sh), grad(std::move(sh)) {}
  int64_t size() const { return value.size(); }
};

/// A network node with explicit forward/backward. forward caches whatever the
/// matching backward needs; backward accumulates into parameter grads and
/// returns the gradient w.r.t. its input.
template <typename S>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<S> forward(const Tensor<S>& x) = 0;
  virtual Tensor<S> backward(const Tensor<S>& gy) = 0;
  virtual std::vector<Param<S>*> params() { return {}; }
  virtual void init(Rng&) {}
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual uint64_t forward_maccs(const Shape&) const { return 0; }
  virtual std::string name() const = 0;
};

template <typename S>
void he_uniform(Tensor<S>& w, int64_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : w.data) v = static_cast<S>(rng.uniform(-limit, limit));
}

template <typename S>
class Conv2d : public Layer<S> {
 public:
  Conv2d(std::string name, int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride, int64_t pad)
      : name_(std::move(name)),
        in_ch_(in_ch),
        out_ch_(out_ch),
        k_(k),
        stride_(stride),
        pad_(pad),
        w_(name_ + ".w", {out_ch, in_ch, k, k}),
        b_(name_ + ".b", {out_ch}) {}

  void init(Rng& rng) override { he_uniform(w_.value, in_ch_ * k_ * k_, rng); b_.value.fill(S(0)); }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    auto d = dims(x.shape);
    Tensor<S> y({d.n, d.co, d.ho, d.wo});
    kern::conv2d_forward(x.ptr(), w_.value.ptr(), b_.value.ptr(), y.ptr(), d);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    auto d = dims(x_.shape);
    kern::conv2d_backward_params(x_.ptr(), gy.ptr(), w_.grad.ptr(), b_.grad.ptr(), d);
    Tensor<S> gx(x_.shape);
    kern::conv2d_backward_input(gy.ptr(), w_.value.ptr(), gx.ptr(), d);
    return gx;
  }

  std::vector<Param<S>*> params() override { return {&w_, &b_}; }

  Shape output_shape(const Shape& in) const override {
    return {in[0], out_ch_, kern::conv_out_dim(in[2], k_, stride_, pad_), kern::conv_out_dim(in[3], k_, stride_, pad_)};
  }

  uint64_t forward_maccs(const Shape& in) const override {
    auto out = output_shape(in);
    return static_cast<uint64_t>(out_ch_ * out[2] * out[3] * in_ch_ * k_ * k_);
  }

  std::string name() const override { return name_; }

 private:
  kern::Conv2dDims dims(const Shape& in) const {
    kern::Conv2dDims d{};
    d.n = in[0]; d.ci = in[1]; d.h = in[2]; d.w = in[3];
    d.co = out_ch_; d.kh = k_; d.kw = k_;
    d.stride = stride_; d.pad = pad_;
    d.ho = kern::conv_out_dim(d.h, k_, stride_, pad_);
    d.wo = kern::conv_out_dim(d.w, k_, stride_, pad_);
    return d;
  }

  std::string name_;
  int64_t in_ch_, out_ch_, k_, stride_, pad_;
  Param<S> w_, b_;
  Tensor<S> x_;
};

template <typename S>
class ConvTranspose2d : public Layer<S> {
 public:
  ConvTranspose2d(std::string name, int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride, int64_t pad,
                  int64_t outpad)
      : name_(std::move(name)),
        in_ch_(in_ch),
        out_ch_(out_ch),
        k_(k),
        stride_(stride),
        pad_(pad),
        outpad_(outpad),
        w_(name_ + ".w", {in_ch, out_ch, k, k}),
        b_(name_ + ".b", {out_ch}) {}

  void init(Rng& rng) override { he_uniform(w_.value, in_ch_ * k_ * k_, rng); b_.value.fill(S(0)); }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    auto d = dims(x.shape);
    Tensor<S> y({d.n, d.co, d.ho, d.wo});
    kern::convt2d_forward(x.ptr(), w_.value.ptr(), b_.value.ptr(), y.ptr(), d);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    auto d = dims(x_.shape);
    kern::convt2d_backward_params(x_.ptr(), gy.ptr(), w_.grad.ptr(), b_.grad.ptr(), d);
    Tensor<S> gx(x_.shape);
    kern::convt2d_backward_input(gy.ptr(), w_.value.ptr(), gx.ptr(), d);
    return gx;
  }

  std::vector<Param<S>*> params() override { return {&w_, &b_}; }

  Shape output_shape(const Shape& in) const override {
    return {in[0], out_ch_, kern::convt_out_dim(in[2], k_, stride_, pad_, outpad_),
            kern::convt_out_dim(in[3], k_, stride_, pad_, outpad_)};
  }

  uint64_t forward_maccs(const Shape& in) const override {
    return static_cast<uint64_t>(in[1] * in[2] * in[3] * out_ch_ * k_ * k_);
  }

  std::string name() const override { return name_; }

 private:
  kern::ConvT2dDims dims(const Shape& in) const {
    kern::ConvT2dDims d{};
    d.n = in[0]; d.ci = in[1]; d.h = in[2]; d.w = in[3];
    d.co = out_ch_; d.kh = k_; d.kw = k_;
    d.stride = stride_; d.pad = pad_; d.outpad = outpad_;
    d.ho = kern::convt_out_dim(d.h, k_, stride_, pad_, outpad_);
    d.wo = kern::convt_out_dim(d.w, k_, stride_, pad_, outpad_);
    return d;
  }

  std::string name_;
  int64_t in_ch_, out_ch_, k_, stride_, pad_, outpad_;
  Param<S> w_, b_;
  Tensor<S> x_;
};

template <typename S>
class Linear : public Layer<S> {
 public:
  Linear(std::string name, int64_t in, int64_t out)
      : name_(std::move(name)), in_(in), out_(out), w_(name_ + ".w", {out, in}), b_(name_ + ".b", {out}) {}

  void init(Rng& rng) override { he_uniform(w_.value, in_, rng); b_.value.fill(S(0)); }

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    Tensor<S> y({x.shape[0], out_});
    kern::linear_forward(x.ptr(), w_.value.ptr(), b_.value.ptr(), y.ptr(), x.shape[0], in_, out_);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    kern::linear_backward_params(x_.ptr(), gy.ptr(), w_.grad.ptr(), b_.grad.ptr(), x_.shape[0], in_, out_);
    Tensor<S> gx(x_.shape);
    kern::linear_backward_input(gy.ptr(), w_.value.ptr(), gx.ptr(), x_.shape[0], in_, out_);
    return gx;
  }

  std::vector<Param<S>*> params() override { return {&w_, &b_}; }
  Shape output_shape(const Shape& in) const override { return {in[0], out_}; }
  uint64_t forward_maccs(const Shape&) const override { return static_cast<uint64_t>(in_ * out_); }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  int64_t in_, out_;
  Param<S> w_, b_;
  Tensor<S> x_;
};

template <typename S>
class ReLU : public Layer<S> {
 public:
  explicit ReLU(std::string name) : name_(std::move(name)) {}
  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    Tensor<S> y(x.shape);
    kern::relu_forward(x.ptr(), y.ptr(), x.size());
    return y;
  }
  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(x_.shape);
    kern::relu_backward(x_.ptr(), gy.ptr(), gx.ptr(), x_.size());
    return gx;
  }
  Shape output_shape(const Shape& in) const override { return in; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Tensor<S> x_;
};

template <typename S>
class Sigmoid : public Layer<S> {
 public:
  explicit Sigmoid(std::string name) : name_(std::move(name)) {}
  Tensor<S> forward(const Tensor<S>& x) override {
    Tensor<S> y(x.shape);
    kern::sigmoid_forward(x.ptr(), y.ptr(), x.size());
    y_ = y;
    return y;
  }
  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(y_.shape);
    kern::sigmoid_backward(y_.ptr(), gy.ptr(), gx.ptr(), y_.size());
    return gx;
  }
  Shape output_shape(const Shape& in) const override { return in; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Tensor<S> y_;
};

template <typename S>
class Flatten : public Layer<S> {
 public:
  explicit Flatten(std::string name) : name_(std::move(name)) {}
  Tensor<S> forward(const Tensor<S>& x) override {
    in_shape_ = x.shape;
    return x.reshaped({x.shape[0], x.size() / x.shape[0]});
  }
  Tensor<S> backward(const Tensor<S>& gy) override { return gy.reshaped(in_shape_); }
  Shape output_shape(const Shape& in) const override {
    int64_t m = 1;
    for (size_t i = 1; i < in.size(); ++i) m *= in[i];
    return {in[0], m};
  }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Shape in_shape_;
};

template <typename S>
class MaxPool2d : public Layer<S> {
 public:
  MaxPool2d(std::string name, int64_t k, int64_t stride, int64_t pad)
      : name_(std::move(name)), k_(k), stride_(stride), pad_(pad) {}

  Tensor<S> forward(const Tensor<S>& x) override {
    in_shape_ = x.shape;
    auto out = output_shape(x.shape);
    Tensor<S> y(out);
    idx_.assign(static_cast<size_t>(numel(out)), -1);
    kern::maxpool2d_forward(x.ptr(), y.ptr(), idx_.data(), x.shape[0] * x.shape[1], x.shape[2], x.shape[3], k_,
                            stride_, pad_, out[2], out[3]);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(in_shape_);
    kern::maxpool2d_backward(gy.ptr(), idx_.data(), gx.ptr(), in_shape_[0] * in_shape_[1],
                             in_shape_[2] * in_shape_[3], gy.shape[2] * gy.shape[3]);
    return gx;
  }

  Shape output_shape(const Shape& in) const override {
    return {in[0], in[1], kern::conv_out_dim(in[2], k_, stride_, pad_), kern::conv_out_dim(in[3], k_, stride_, pad_)};
  }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  int64_t k_, stride_, pad_;
  Shape in_shape_;
  std::vector<int32_t> idx_;
};

template <typename S>
class GlobalAvgPool : public Layer<S> {
 public:
  explicit GlobalAvgPool(std::string name) : name_(std::move(name)) {}
  Tensor<S> forward(const Tensor<S>& x) override {
    in_shape_ = x.shape;
    const int64_t n = x.shape[0], c = x.shape[1], hw = x.shape[2] * x.shape[3];
    Tensor<S> y({n, c});
    for (int64_t p = 0; p < n * c; ++p) {
      S acc = 0;
      const S* xp = x.ptr() + p * hw;
      for (int64_t i = 0; i < hw; ++i) acc += xp[i];
      y[p] = acc / static_cast<S>(hw);
    }
    return y;
  }
  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx(in_shape_);
    const int64_t hw = in_shape_[2] * in_shape_[3];
    for (int64_t p = 0; p < in_shape_[0] * in_shape_[1]; ++p) {
      const S g = gy[p] / static_cast<S>(hw);
      S* gp = gx.ptr() + p * hw;
      for (int64_t i = 0; i < hw; ++i) gp[i] = g;
    }
    return gx;
  }
  Shape output_shape(const Shape& in) const override { return {in[0], in[1]}; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Shape in_shape_;
};

/// ResNet-style basic block: conv-relu-conv plus identity (or 1x1-projected)
/// shortcut, ReLU after the add. No batch norm in this codebase.
template <typename S>
class BasicBlock : public Layer<S> {
 public:
  BasicBlock(std::string name, int64_t in_ch, int64_t out_ch, int64_t stride)
      : name_(std::move(name)),
        conv1_(name_ + ".conv1", in_ch, out_ch, 3, stride, 1),
        conv2_(name_ + ".conv2", out_ch, out_ch, 3, 1, 1),
        relu1_(name_ + ".relu1") {
    if (stride != 1 || in_ch != out_ch)
      proj_ = std::make_unique<Conv2d<S>>(name_ + ".proj", in_ch, out_ch, 1, stride, 0);
  }

  void init(Rng& rng) override {
    conv1_.init(rng);
    conv2_.init(rng);
    if (proj_) proj_->init(rng);
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    Tensor<S> branch = conv2_.forward(relu1_.forward(conv1_.forward(x)));
    Tensor<S> skip = proj_ ? proj_->forward(x) : x;
    pre_relu_ = branch;
    kern::axpy(S(1), skip.ptr(), pre_relu_.ptr(), pre_relu_.size());
    Tensor<S> y(pre_relu_.shape);
    kern::relu_forward(pre_relu_.ptr(), y.ptr(), y.size());
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gsum(pre_relu_.shape);
    kern::relu_backward(pre_relu_.ptr(), gy.ptr(), gsum.ptr(), gsum.size());
    Tensor<S> gx = conv1_.backward(relu1_.backward(conv2_.backward(gsum)));
    if (proj_) {
      Tensor<S> gskip = proj_->backward(gsum);
      kern::axpy(S(1), gskip.ptr(), gx.ptr(), gx.size());
    } else {
      kern::axpy(S(1), gsum.ptr(), gx.ptr(), gx.size());
    }
    return gx;
  }

  std::vector<Param<S>*> params() override {
    auto p = conv1_.params();
    auto p2 = conv2_.params();
    p.insert(p.end(), p2.begin(), p2.end());
    if (proj_) {
      auto p3 = proj_->params();
      p.insert(p.end(), p3.begin(), p3.end());
    }
    return p;
  }

  Shape output_shape(const Shape& in) const override { return conv2_.output_shape(conv1_.output_shape(in)); }

  uint64_t forward_maccs(const Shape& in) const override {
    uint64_t m = conv1_.forward_maccs(in) + conv2_.forward_maccs(conv1_.output_shape(in));
    if (proj_) m += proj_->forward_maccs(in);
    return m;
  }

  std::string name() const override { return name_; }

 private:
  std::string name_;
  Conv2d<S> conv1_, conv2_;
  ReLU<S> relu1_;
  std::unique_ptr<Conv2d<S>> proj_;
  Tensor<S> pre_relu_;
};

/// Per-sample L-inf rescale x / max(1, |x|_inf / T). Elements keep their
/// direction; the backward pass differentiates through the max element.
template <typename S>
class ClipInf : public Layer<S> {
 public:
  ClipInf(std::string name, S threshold) : name_(std::move(name)), t_(threshold) {}

  Tensor<S> forward(const Tensor<S>& x) override {
    x_ = x;
    const int64_t rows = x.shape[0], cols = x.size() / x.shape[0];
    Tensor<S> y = x;
    scales_.assign(static_cast<size_t>(rows), S(1));
    kern::clip_rows_inf(y.ptr(), scales_.data(), rows, cols, t_);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override {
    const int64_t rows = x_.shape[0], cols = x_.size() / x_.shape[0];
    Tensor<S> gx(x_.shape);
    for (int64_t r = 0; r < rows; ++r) {
      const S s = scales_[static_cast<size_t>(r)];
      const S* xr = x_.ptr() + r * cols;
      const S* gr = gy.ptr() + r * cols;
      S* or_ = gx.ptr() + r * cols;
      if (s == S(1)) {
        for (int64_t c = 0; c < cols; ++c) or_[c] = gr[c];
        continue;
      }
      // y_i = s*x_i with s = T/max|x|; d s/d x_k = -s/m * sign(x_k) at the
      // (first) argmax k, so the k-th input additionally collects
      // -(s/m)*sign(x_k)*sum_i g_i x_i.
      int64_t k = 0;
      S m = 0;
      S dot = 0;
      for (int64_t c = 0; c < cols; ++c) {
        const S a = xr[c] < 0 ? -xr[c] : xr[c];
        if (a > m) {
          m = a;
          k = c;
        }
        dot += gr[c] * xr[c];
        or_[c] = s * gr[c];
      }
      const S sign_k = xr[k] < 0 ? S(-1) : S(1);
      or_[k] -= (s / m) * sign_k * dot;
    }
    return gx;
  }

  Shape output_shape(const Shape& in) const override { return in; }
  std::string name() const override { return name_; }
  S threshold() const { return t_; }

 private:
  std::string name_;
  S t_;
  Tensor<S> x_;
  std::vector<S> scales_;
};

/// Parameterless constant gain. Sits at the end of the edge trunk so the
/// released map starts inside the clip's rescaling regime instead of deep
/// below the threshold.
template <typename S>
class FixedScale : public Layer<S> {
 public:
  FixedScale(std::string name, S factor) : name_(std::move(name)), factor_(factor) {}
  Tensor<S> forward(const Tensor<S>& x) override {
    Tensor<S> y = x;
    kern::scale(factor_, y.ptr(), y.size());
    return y;
  }
  Tensor<S> backward(const Tensor<S>& gy) override {
    Tensor<S> gx = gy;
    kern::scale(factor_, gx.ptr(), gx.size());
    return gx;
  }
  Shape output_shape(const Shape& in) const override { return in; }
  std::string name() const override { return name_; }
  S factor() const { return factor_; }

 private:
  std::string name_;
  S factor_;
};

enum class NoiseMode { Off, Fresh, Frozen };

/// Additive i.i.d. Laplace(0,b) noise. Fresh mode draws from the attached
/// stream on every forward; Frozen replays one fixed draw (gradient checks).
template <typename S>
class AddLaplace : public Layer<S> {
 public:
  AddLaplace(std::string name, double b) : name_(std::move(name)), b_(b) {}

  void set_rng(Rng* rng) { rng_ = rng; }
  void set_mode(NoiseMode m) { mode_ = m; }
  NoiseMode mode() const { return mode_; }
  double scale_b() const { return b_; }

  Tensor<S> forward(const Tensor<S>& x) override {
    last_input_linf_ = 0;
    for (const S v : x.data) last_input_linf_ = std::max(last_input_linf_, v < 0 ? -v : v);
    if (mode_ == NoiseMode::Off) return x;
    Tensor<S> y = x;
    if (mode_ == NoiseMode::Fresh) {
      for (auto& v : y.data) v += static_cast<S>(rng_->laplace(b_));
      return y;
    }
    if (frozen_.shape != x.shape) {
      frozen_ = Tensor<S>(x.shape);
      for (auto& v : frozen_.data) v = static_cast<S>(rng_->laplace(b_));
    }
    kern::axpy(S(1), frozen_.ptr(), y.ptr(), y.size());
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) override { return gy; }
  Shape output_shape(const Shape& in) const override { return in; }
  std::string name() const override { return name_; }

  /// L-inf norm of the most recent pre-noise input; the trainer asserts this
  /// stays within the clip threshold on every release.
  S last_input_linf() const { return last_input_linf_; }

 private:
  std::string name_;
  double b_;
  NoiseMode mode_ = NoiseMode::Fresh;
  Rng* rng_ = nullptr;
  Tensor<S> frozen_;
  S last_input_linf_ = 0;
};

template <typename S>
class Sequential {
 public:
  Sequential() = default;

  Layer<S>* add(std::unique_ptr<Layer<S>> l) {
    layers_.push_back(std::move(l));
    return layers_.back().get();
  }

  Tensor<S> forward(const Tensor<S>& x) {
    Tensor<S> y = x;
    for (auto& l : layers_) y = l->forward(y);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& gy) {
    Tensor<S> g = gy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  void init(Rng& rng) {
    for (auto& l : layers_) l->init(rng);
  }

  std::vector<Param<S>*> params() const {
    std::vector<Param<S>*> out;
    for (auto& l : layers_) {
      auto p = l->params();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  Shape output_shape(Shape in) const {
    for (auto& l : layers_) in = l->output_shape(in);
    return in;
  }

  uint64_t forward_maccs(Shape in) const {
    uint64_t m = 0;
    for (auto& l : layers_) {
      m += l->forward_maccs(in);
      in = l->output_shape(in);
    }
    return m;
  }

  bool empty() const { return layers_.empty(); }
  size_t size() const { return layers_.size(); }
  Layer<S>* operator[](size_t i) { return layers_[i].get(); }
  const Layer<S>* operator[](size_t i) const { return layers_[i].get(); }

 private:
  std::vector<std::unique_ptr<Layer<S>>> layers_;
};

template <typename S>
int64_t param_count(const std::vector<Param<S>*>& ps) {
  int64_t n = 0;
  for (auto* p : ps) n += p->size();
  return n;
}

template <typename S>
void zero_grads(const std::vector<Param<S>*>& ps) {
  for (auto* p : ps) p->grad.fill(S(0));
}

/// FNV-1a over the raw parameter bytes; used by the freeze-contract checks.
template <typename S>
uint64_t param_checksum(const std::vector<Param<S>*>& ps) {
  uint64_t h = 1469598103934665603ULL;
  for (auto* p : ps) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.ptr());
    const size_t nb = p->value.data.size() * sizeof(S);
    for (size_t i = 0; i < nb; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace splitpriv
