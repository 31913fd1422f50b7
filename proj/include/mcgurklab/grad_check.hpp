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
#include <functional>
#include <vector>

#include "mcgurklab/graph.hpp"
#include "mcgurklab/tensor.hpp"

namespace mcgurklab::engine {

// Builds a scalar-valued graph from a set of parameter leaves. The builder
// must bind every tensor in `params` (in order) as leaves of the given graph
// and return the id of the scalar output.
using ScalarGraphBuilder =
    std::function<Graph<double>::Id(Graph<double>&, const std::vector<Graph<double>::Id>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
};

// Central-difference verification of reverse-mode gradients. For every
// parameter coordinate, (f(p+eps) - f(p-eps)) / (2 eps) is compared against
// the analytic gradient; the relative error uses
// max(|analytic|, |numeric|, 1e-8) as denominator.
inline GradCheckResult grad_check(const ScalarGraphBuilder& build,
                                  std::vector<Tensor<double>> params, double eps = 1e-5) {
  if (!(eps >= 1e-7 && eps <= 1e-4)) throw ConfigError("grad_check: eps outside [1e-7, 1e-4]");

  // Analytic gradients.
  std::vector<Tensor<double>> analytic;
  {
    Graph<double> g;
    std::vector<Graph<double>::Id> ids;
    for (const auto& t : params) ids.push_back(g.leaf(t, true));
    const auto out = build(g, ids);
    if (g.value(out).numel() != 1) throw DimensionError("grad_check: builder must return a scalar");
    g.backward(out);
    for (auto id : ids) analytic.push_back(g.grad(id));
  }

  auto scalar_eval = [&](const std::vector<Tensor<double>>& p) {
    Graph<double> g;
    std::vector<Graph<double>::Id> ids;
    ids.reserve(p.size());
    for (const auto& t : p) ids.push_back(g.leaf(t, true));
    const auto out = build(g, ids);
    return g.value(out).data[0];
  };

  GradCheckResult res;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    for (std::size_t ci = 0; ci < params[pi].data.size(); ++ci) {
      const double orig = params[pi].data[ci];
      params[pi].data[ci] = orig + eps;
      const double fp = scalar_eval(params);
      params[pi].data[ci] = orig - eps;
      const double fm = scalar_eval(params);
      params[pi].data[ci] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi].data[ci];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(a - numeric) / denom;
      res.max_rel_error = std::max(res.max_rel_error, rel);
      ++res.coords_checked;
    }
  }
  return res;
}

}  // namespace mcgurklab::engine
