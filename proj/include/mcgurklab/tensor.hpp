// Copyright 2026 The mcgurklab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "mcgurklab/common.hpp"

namespace mcgurklab::engine {

// Dense row-major array. Gradients live on graph nodes, not here; Tensor is
// the plain value type shared by parameters, activations and file I/O.
template <class Real>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), Real(0));
  }
  Tensor(std::vector<std::size_t> s, std::vector<Real> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel_of(shape)) throw DimensionError("tensor data does not match shape");
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t e : s) {
      if (e == 0) throw DimensionError("zero extent in tensor shape");
      n *= e;
    }
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<std::size_t> s, Real v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static Tensor scalar(Real v) { return Tensor({1}, {v}); }

  static Tensor row(std::initializer_list<Real> vs) {
    return Tensor({1, vs.size()}, std::vector<Real>(vs));
  }

  static Tensor matrix(std::size_t r, std::size_t c, std::vector<Real> d) {
    return Tensor({r, c}, std::move(d));
  }

  std::size_t numel() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }

  std::size_t rows() const {
    if (shape.size() != 2) throw DimensionError("rows() requires a 2-d tensor");
    return shape[0];
  }
  std::size_t cols() const {
    if (shape.size() != 2) throw DimensionError("cols() requires a 2-d tensor");
    return shape[1];
  }

  Real& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  Real at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  Real& at(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  Real at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  const Real* row_ptr(std::size_t i) const { return data.data() + i * shape[1]; }
  Real* row_ptr(std::size_t i) { return data.data() + i * shape[1]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (Real v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }
};

template <class Real>
std::string shape_str(const Tensor<Real>& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.shape[i]);
  }
  return s + "]";
}

// Glorot uniform initialization for a weight with the given fan pair.
template <class Real>
Tensor<Real> xavier_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                            Rng& rng) {
  Tensor<Real> t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data) v = static_cast<Real>(uniform(rng, -limit, limit));
  return t;
}

template <class Real>
Tensor<Real> random_normal(std::vector<std::size_t> shape, double sigma, Rng& rng) {
  Tensor<Real> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<Real>(sigma * gaussian(rng));
  return t;
}

}  // namespace mcgurklab::engine
