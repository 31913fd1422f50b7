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

#include <gtest/gtest.h>

#include "mcgurklab/attention.hpp"
#include "mcgurklab/grad_check.hpp"
#include "testutil.hpp"

using mcgurklab::DimensionError;
using mcgurklab::NumericError;
using mcgurklab::Rng;
using mcgurklab::engine::attention_block;
using mcgurklab::engine::AttentionIds;
using mcgurklab::engine::AttentionParams;
using mcgurklab::engine::grad_check;
using mcgurklab::engine::Graph;
using mcgurklab::engine::Tensor;
using GraphD = Graph<double>;
using Id = GraphD::Id;

namespace {

AttentionParams<double> random_params(std::size_t dim, std::size_t ffn_mult, std::uint64_t seed) {
  Rng rng(seed);
  auto p = AttentionParams<double>::init(dim, ffn_mult, rng);
  // Perturb the deterministic pieces too so tests do not rely on fresh-init
  // special cases.
  for (auto* t : {&p.bq, &p.bk, &p.bv, &p.bo, &p.ln1_bias, &p.ln2_bias, &p.ff1_b, &p.ff2_b})
    for (auto& v : t->data) v += 0.1 * mcgurklab::gaussian(rng);
  for (auto* t : {&p.ln1_gain, &p.ln2_gain})
    for (auto& v : t->data) v += 0.1 * mcgurklab::gaussian(rng);
  return p;
}

}  // namespace

TEST(AttentionBlock, SingleFrameWeightIsExactlyOne) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto params = random_params(8, 2, seed);
    Rng rng(seed + 100);
    GraphD g;
    const Id x = g.constant(testutil::random_tensor({1, 8}, rng));
    const auto ids = AttentionIds<double>::bind(g, params, false);
    for (bool causal : {false, true}) {
      const auto out = attention_block(g, x, ids, 2, causal);
      for (Id w : out.attn_weights) {
        ASSERT_EQ(g.value(w).shape, (std::vector<std::size_t>{1, 1}));
        EXPECT_EQ(g.value(w).data[0], 1.0);
      }
    }
  }
}

TEST(AttentionBlock, CausalOutputIgnoresFuturePositions) {
  const auto params = random_params(8, 4, 7);
  Rng rng(77);
  auto x = testutil::random_tensor({6, 8}, rng);

  auto forward = [&](const Tensor<double>& input) {
    GraphD g;
    const auto ids = AttentionIds<double>::bind(g, params, false);
    const auto out = attention_block(g, g.constant(input), ids, 4, true);
    return g.value(out.out);
  };

  const auto base = forward(x);
  auto perturbed = x;
  for (std::size_t j = 0; j < 8; ++j) perturbed.at(5, j) += mcgurklab::gaussian(rng);
  const auto moved = forward(perturbed);

  // Bitwise equality for all positions before the perturbed one.
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(base.at(t, j), moved.at(t, j));
  bool last_changed = false;
  for (std::size_t j = 0; j < 8; ++j) last_changed = last_changed || base.at(5, j) != moved.at(5, j);
  EXPECT_TRUE(last_changed);
}

TEST(AttentionBlock, SoftmaxRowsSumToOne) {
  const auto params = random_params(8, 4, 9);
  Rng rng(99);
  GraphD g;
  const Id x = g.constant(testutil::random_tensor({5, 8}, rng));
  const auto ids = AttentionIds<double>::bind(g, params, false);
  for (bool causal : {false, true}) {
    const auto out = attention_block(g, x, ids, 4, causal);
    for (Id w : out.attn_weights) {
      const auto& wv = g.value(w);
      for (std::size_t i = 0; i < wv.shape[0]; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < wv.shape[1]; ++j) s += wv.at(i, j);
        EXPECT_NEAR(s, 1.0, 1e-9);
      }
    }
  }
}

TEST(AttentionBlock, HeadCountMustDivideDim) {
  const auto params = random_params(8, 2, 5);
  Rng rng(5);
  GraphD g;
  const Id x = g.constant(testutil::random_tensor({3, 8}, rng));
  const auto ids = AttentionIds<double>::bind(g, params, false);
  EXPECT_THROW(attention_block(g, x, ids, 3, false), DimensionError);
}

TEST(AttentionBlock, NonFiniteIntermediateIsNumericError) {
  auto params = random_params(4, 2, 6);
  for (auto& v : params.wq.data) v = 1e200;
  Rng rng(6);
  GraphD g;
  auto x = testutil::random_tensor({3, 4}, rng);
  for (auto& v : x.data) v = v * 1e160;
  const Id xid = g.constant(x);
  const auto ids = AttentionIds<double>::bind(g, params, false);
  EXPECT_THROW(attention_block(g, xid, ids, 2, false), NumericError);
}

TEST(AttentionBlock, GradientsPassFiniteDifferenceCheck) {
  // 50 randomized trials across shapes, both causal settings.
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(1000 + trial);
    const std::size_t dim = 4;
    const std::size_t heads = (trial % 2) ? 2 : 1;
    const std::size_t t_len = 1 + trial % 4;
    const bool causal = (trial % 3) == 0;
    auto p = random_params(dim, 2, 2000 + trial);

    std::vector<Tensor<double>> params;
    params.push_back(testutil::random_tensor({t_len, dim}, rng));
    p.for_each("b", [&](const std::string&, Tensor<double>& t) { params.push_back(t); });

    const std::uint64_t wseed = rng();
    const auto res = grad_check(
        [&](GraphD& g, const std::vector<Id>& ids) {
          AttentionIds<double> aids;
          std::size_t i = 1;
          aids.wq = ids[i++]; aids.bq = ids[i++];
          aids.wk = ids[i++]; aids.bk = ids[i++];
          aids.wv = ids[i++]; aids.bv = ids[i++];
          aids.wo = ids[i++]; aids.bo = ids[i++];
          aids.ln1_gain = ids[i++]; aids.ln1_bias = ids[i++];
          aids.ln2_gain = ids[i++]; aids.ln2_bias = ids[i++];
          aids.ff1_w = ids[i++]; aids.ff1_b = ids[i++];
          aids.ff2_w = ids[i++]; aids.ff2_b = ids[i++];
          const auto out = attention_block(g, ids[0], aids, heads, causal);
          Rng wrng(wseed);
          auto w = testutil::random_tensor(g.value(out.out).shape, wrng);
          return g.sum(g.mul(out.out, g.constant(std::move(w))));
        },
        params);
    worst = std::max(worst, res.max_rel_error);
  }
  EXPECT_LT(worst, 1e-4);
}
