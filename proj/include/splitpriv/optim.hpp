// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <vector>

#include "splitpriv/kernels.hpp"
#include "splitpriv/layers.hpp"

namespace splitpriv {

template <typename S>
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Param<S>*> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto* p : params_) {
      m_.emplace_back(p->value.shape);
      v_.emplace_back(p->value.shape);
    }
  }

  void zero_grad() { zero_grads(params_); }

  void step() {
    ++t_;
    for (size_t i = 0; i < params_.size(); ++i) {
      auto* p = params_[i];
      kern::adam_step(p->value.ptr(), p->grad.ptr(), m_[i].ptr(), v_[i].ptr(), p->size(), static_cast<S>(lr_),
                      static_cast<S>(beta1_), static_cast<S>(beta2_), static_cast<S>(eps_), t_);
    }
  }

  const std::vector<Param<S>*>& params() const { return params_; }

  /// Full optimizer + parameter snapshot; used for epoch-level retry where a
  /// transport failure forces replaying an epoch from a known state.
  struct Snapshot {
    std::vector<Tensor<S>> w, m, v;
    int64_t t = 0;
  };

  Snapshot snapshot() const {
    Snapshot s;
    s.t = t_;
    for (size_t i = 0; i < params_.size(); ++i) {
      s.w.push_back(params_[i]->value);
      s.m.push_back(m_[i]);
      s.v.push_back(v_[i]);
    }
    return s;
  }

  void restore(const Snapshot& s) {
    t_ = s.t;
    for (size_t i = 0; i < params_.size(); ++i) {
      params_[i]->value = s.w[i];
      m_[i] = s.m[i];
      v_[i] = s.v[i];
    }
  }

 private:
  std::vector<Param<S>*> params_;
  std::vector<Tensor<S>> m_, v_;
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int64_t t_ = 0;
};

}  // namespace splitpriv
