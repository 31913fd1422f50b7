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
#include <string>
#include <vector>

#include "mcgurklab/graph.hpp"
#include "mcgurklab/tensor.hpp"

namespace mcgurklab::engine {

// Parameters of one pre-norm transformer layer:
//   x -> LN -> multi-head attention -> +x -> LN -> FFN (GELU) -> +residual
template <class Real>
struct AttentionParams {
  Tensor<Real> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<Real> ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  Tensor<Real> ff1_w, ff1_b, ff2_w, ff2_b;

  static AttentionParams init(std::size_t dim, std::size_t ffn_mult, Rng& rng) {
    AttentionParams p;
    const std::size_t f = dim * ffn_mult;
    p.wq = xavier_uniform<Real>({dim, dim}, dim, dim, rng);
    p.wk = xavier_uniform<Real>({dim, dim}, dim, dim, rng);
    p.wv = xavier_uniform<Real>({dim, dim}, dim, dim, rng);
    p.wo = xavier_uniform<Real>({dim, dim}, dim, dim, rng);
    p.bq = Tensor<Real>::zeros({dim});
    p.bk = Tensor<Real>::zeros({dim});
    p.bv = Tensor<Real>::zeros({dim});
    p.bo = Tensor<Real>::zeros({dim});
    p.ln1_gain = Tensor<Real>::full({dim}, Real(1));
    p.ln1_bias = Tensor<Real>::zeros({dim});
    p.ln2_gain = Tensor<Real>::full({dim}, Real(1));
    p.ln2_bias = Tensor<Real>::zeros({dim});
    p.ff1_w = xavier_uniform<Real>({dim, f}, dim, f, rng);
    p.ff1_b = Tensor<Real>::zeros({f});
    p.ff2_w = xavier_uniform<Real>({f, dim}, f, dim, rng);
    p.ff2_b = Tensor<Real>::zeros({dim});
    return p;
  }

  template <class Fn>
  void for_each(const std::string& prefix, Fn&& fn) {
    fn(prefix + ".wq", wq);
    fn(prefix + ".bq", bq);
    fn(prefix + ".wk", wk);
    fn(prefix + ".bk", bk);
    fn(prefix + ".wv", wv);
    fn(prefix + ".bv", bv);
    fn(prefix + ".wo", wo);
    fn(prefix + ".bo", bo);
    fn(prefix + ".ln1_gain", ln1_gain);
    fn(prefix + ".ln1_bias", ln1_bias);
    fn(prefix + ".ln2_gain", ln2_gain);
    fn(prefix + ".ln2_bias", ln2_bias);
    fn(prefix + ".ff1_w", ff1_w);
    fn(prefix + ".ff1_b", ff1_b);
    fn(prefix + ".ff2_w", ff2_w);
    fn(prefix + ".ff2_b", ff2_b);
  }
};

// Graph ids of the same parameter set, bound as leaves of a particular graph.
template <class Real>
struct AttentionIds {
  using Id = typename Graph<Real>::Id;
  Id wq, bq, wk, bk, wv, bv, wo, bo;
  Id ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  Id ff1_w, ff1_b, ff2_w, ff2_b;

  static AttentionIds bind(Graph<Real>& g, const AttentionParams<Real>& p, bool requires_grad) {
    AttentionIds ids;
    ids.wq = g.leaf(p.wq, requires_grad);
    ids.bq = g.leaf(p.bq, requires_grad);
    ids.wk = g.leaf(p.wk, requires_grad);
    ids.bk = g.leaf(p.bk, requires_grad);
    ids.wv = g.leaf(p.wv, requires_grad);
    ids.bv = g.leaf(p.bv, requires_grad);
    ids.wo = g.leaf(p.wo, requires_grad);
    ids.bo = g.leaf(p.bo, requires_grad);
    ids.ln1_gain = g.leaf(p.ln1_gain, requires_grad);
    ids.ln1_bias = g.leaf(p.ln1_bias, requires_grad);
    ids.ln2_gain = g.leaf(p.ln2_gain, requires_grad);
    ids.ln2_bias = g.leaf(p.ln2_bias, requires_grad);
    ids.ff1_w = g.leaf(p.ff1_w, requires_grad);
    ids.ff1_b = g.leaf(p.ff1_b, requires_grad);
    ids.ff2_w = g.leaf(p.ff2_w, requires_grad);
    ids.ff2_b = g.leaf(p.ff2_b, requires_grad);
    return ids;
  }
};

template <class Real>
struct AttentionBlockOut {
  typename Graph<Real>::Id out;
  std::vector<typename Graph<Real>::Id> attn_weights;  // one [TxT] node per head
};

// One pre-norm transformer layer over x[T x D]. With `causal` set, position t
// attends to positions <= t only.
template <class Real>
AttentionBlockOut<Real> attention_block(Graph<Real>& g, typename Graph<Real>::Id x,
                                        const AttentionIds<Real>& p, std::size_t heads,
                                        bool causal) {
  using Id = typename Graph<Real>::Id;
  const auto& xv = g.value(x);
  if (xv.ndim() != 2) throw DimensionError("attention_block: need x[TxD]");
  const std::size_t dim = xv.shape[1];
  if (heads == 0 || dim % heads != 0)
    throw DimensionError("attention_block: embed dim must be divisible by head count");
  const std::size_t dh = dim / heads;
  const Real inv_sqrt_dh = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(dh)));

  AttentionBlockOut<Real> result;

  const Id h1 = g.layer_norm(x, p.ln1_gain, p.ln1_bias);
  const Id q = g.add_rowvec(g.matmul(h1, p.wq), p.bq);
  const Id k = g.add_rowvec(g.matmul(h1, p.wk), p.bk);
  const Id v = g.add_rowvec(g.matmul(h1, p.wv), p.bv);

  Id merged = 0;
  for (std::size_t h = 0; h < heads; ++h) {
    const Id qh = g.slice_cols(q, h * dh, dh);
    const Id kh = g.slice_cols(k, h * dh, dh);
    const Id vh = g.slice_cols(v, h * dh, dh);
    const Id scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt_dh);
    const Id weights = g.softmax_rows(scores, causal);
    result.attn_weights.push_back(weights);
    const Id oh = g.matmul(weights, vh);
    merged = h == 0 ? oh : g.concat_cols(merged, oh);
  }
  const Id proj = g.add_rowvec(g.matmul(merged, p.wo), p.bo);
  const Id res1 = g.add(x, proj);

  const Id h2 = g.layer_norm(res1, p.ln2_gain, p.ln2_bias);
  const Id f1 = g.gelu(g.add_rowvec(g.matmul(h2, p.ff1_w), p.ff1_b));
  const Id f2 = g.add_rowvec(g.matmul(f1, p.ff2_w), p.ff2_b);
  result.out = g.add(res1, f2);
  return result;
}

}  // namespace mcgurklab::engine
