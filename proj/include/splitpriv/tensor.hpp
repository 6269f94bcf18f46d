// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace splitpriv {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    out += std::to_string(s[i]);
    if (i + 1 < s.size()) out += ",";
  }
  return out + ")";
}

/// Dense row-major tensor. Scalar type S is float in the training path and
/// double in the finite-difference checks.
template <typename S>
struct Tensor {
  Shape shape;
  std::vector<S> data;

  Tensor() = default;
  explicit Tensor(Shape sh) : shape(std::move(sh)), data(static_cast<size_t>(numel(shape)), S(0)) {}
  Tensor(Shape sh, std::vector<S> d) : shape(std::move(sh)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel(shape))
      throw std::invalid_argument("tensor data does not match shape " + shape_str(shape));
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(size_t i) const { return shape.at(i); }
  int rank() const { return static_cast<int>(shape.size()); }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  S& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const S& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // 4-d accessor for [N,C,H,W] layouts; no bounds checks in release.
  S& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data[static_cast<size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  const S& at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data[static_cast<size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }

  Tensor reshaped(Shape sh) const {
    if (numel(sh) != size())
      throw std::invalid_argument("reshape " + shape_str(shape) + " -> " + shape_str(sh));
    Tensor t;
    t.shape = std::move(sh);
    t.data = data;
    return t;
  }

  template <typename T2>
  Tensor<T2> cast() const {
    Tensor<T2> t;
    t.shape = shape;
    t.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) t.data[i] = static_cast<T2>(data[i]);
    return t;
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

inline void check_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

}  // namespace splitpriv
