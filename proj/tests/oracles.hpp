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
//
// Independent reference implementations used only by tests. These stay
// deliberately naive (triple loops, exhaustive enumeration, quadrature) so
// they share no code path with the library they check.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mcgurklab/tensor.hpp"

namespace oracles {

using mcgurklab::engine::Tensor;

// Triple-loop matrix product.
inline Tensor<double> matmul(const Tensor<double>& a, const Tensor<double>& b) {
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  Tensor<double> c({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      c.at(i, j) = acc;
    }
  return c;
}

// Explicit sliding-window cross-correlation.
inline Tensor<double> conv1d(const Tensor<double>& x, const Tensor<double>& k,
                             std::size_t stride) {
  const std::size_t t_in = x.shape[0], cin = x.shape[1];
  const std::size_t w = k.shape[0], cout = k.shape[2];
  const std::size_t t_out = (t_in - w) / stride + 1;
  Tensor<double> y({t_out, cout});
  for (std::size_t t = 0; t < t_out; ++t)
    for (std::size_t co = 0; co < cout; ++co) {
      double acc = 0.0;
      for (std::size_t wi = 0; wi < w; ++wi)
        for (std::size_t ci = 0; ci < cin; ++ci) acc += x.at(t * stride + wi, ci) * k.at(wi, ci, co);
      y.at(t, co) = acc;
    }
  return y;
}

inline double cosine_cost(const double* u, const double* v, std::size_t d) {
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return 1.0 - uv / std::sqrt(uu * vv);
}

// Exhaustive minimum over all monotone alignment paths; costs are summed in
// path order from (0,0) and ties on cost prefer the shorter path, matching
// the library's normalization contract.
inline double dtw_exhaustive(const Tensor<double>& a, const Tensor<double>& b) {
  const std::size_t n = a.shape[0], m = b.shape[0], d = a.shape[1];
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_len = 0;
  struct Walker {
    const Tensor<double>& a;
    const Tensor<double>& b;
    std::size_t n, m, d;
    double* best_cost;
    std::size_t* best_len;
    void walk(std::size_t i, std::size_t j, double acc, std::size_t len) {
      acc += cosine_cost(a.row_ptr(i), b.row_ptr(j), d);
      ++len;
      if (i == n - 1 && j == m - 1) {
        if (acc < *best_cost || (acc == *best_cost && len < *best_len)) {
          *best_cost = acc;
          *best_len = len;
        }
        return;
      }
      if (i + 1 < n) walk(i + 1, j, acc, len);
      if (j + 1 < m) walk(i, j + 1, acc, len);
      if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc, len);
    }
  };
  Walker{a, b, n, m, d, &best_cost, &best_len}.walk(0, 0, 0.0, 0);
  return best_cost / static_cast<double>(best_len);
}

// Adaptive-Simpson quadrature of the upper incomplete gamma integral,
// normalized by tgamma. Independent of the library's continued-fraction /
// series evaluation.
namespace detail {
inline double simpson(double (*f)(double, double), double a, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 * (f(a, lo) + 4.0 * f(a, mid) + f(a, hi));
}
inline double gamma_integrand(double a, double t) {
  return std::exp((a - 1.0) * std::log(t) - t);
}
inline double adaptive(double (*f)(double, double), double a, double lo, double hi, double whole,
                       double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = simpson(f, a, lo, mid);
  const double right = simpson(f, a, mid, hi);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(f, a, lo, mid, left, tol * 0.5, depth - 1) +
         adaptive(f, a, mid, hi, right, tol * 0.5, depth - 1);
}
}  // namespace detail

inline double gamma_q_quadrature(double a, double x) {
  if (x <= 0.0) return 1.0;
  // Far tail is negligible below double precision.
  const double hi = x + 80.0 + 20.0 * a;
  const double whole = detail::simpson(detail::gamma_integrand, a, x, hi);
  const double integral =
      detail::adaptive(detail::gamma_integrand, a, x, hi, whole, 1e-15, 48);
  return integral / std::tgamma(a);
}

}  // namespace oracles
