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

#include <filesystem>
#include <string>

#include "mcgurklab/common.hpp"
#include "mcgurklab/tensor.hpp"

namespace testutil {

using mcgurklab::Rng;
using mcgurklab::engine::Tensor;

inline Tensor<double> random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data) v = scale * mcgurklab::gaussian(rng);
  return t;
}

// Random tensor with entries bounded away from zero (for kinked ops).
inline Tensor<double> random_tensor_away_from(std::vector<std::size_t> shape, Rng& rng,
                                              double min_abs) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data) {
    double x = mcgurklab::gaussian(rng);
    while (std::fabs(x) < min_abs) x = mcgurklab::gaussian(rng);
    v = x;
  }
  return t;
}

// Scratch directory unique to a test, removed and recreated on request.
inline std::string fresh_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "mcgurklab_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace testutil
