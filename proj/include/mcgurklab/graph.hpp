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
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "mcgurklab/common.hpp"
#include "mcgurklab/tensor.hpp"

namespace mcgurklab::engine {

// Reverse-mode autodiff tape. Values are computed eagerly as nodes are
// appended, so the node order is already topological; backward() walks it in
// reverse exactly once and sums gradients into every consumer's inputs.
//
// Loops are written so the innermost index runs over the contiguous last
// axis; forward results are bit-identical across runs because reduction
// order is fixed and single-threaded.
template <class Real>
class Graph {
 public:
  using Id = std::uint32_t;
  using BackwardFn = std::function<void(Graph&, Id)>;

  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;  // allocated during backward for nodes that need it
    std::vector<Id> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool grad_ready = false;
  };

  Graph() { nodes_.reserve(256); }

  std::size_t size() const { return nodes_.size(); }

  const Tensor<Real>& value(Id id) const { return nodes_.at(id).value; }

  const Tensor<Real>& grad(Id id) const {
    const Node& n = nodes_.at(id);
    if (!n.grad_ready) throw Error("gradient not available; run backward() first");
    return n.grad;
  }

  bool requires_grad(Id id) const { return nodes_.at(id).requires_grad; }

  Id leaf(Tensor<Real> value, bool requires_grad = true) {
    check_finite(value, "leaf");
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  Id constant(Tensor<Real> value) { return leaf(std::move(value), false); }

  // Appends an op node. `backward` may be empty for pure data movement into
  // constants; it receives the graph and the node's own id.
  Id make_node(Tensor<Real> value, std::vector<Id> inputs, BackwardFn backward,
               const char* what = "op") {
    check_finite(value, what);
    bool rg = false;
    for (Id i : inputs) rg = rg || nodes_.at(i).requires_grad;
    Node n;
    n.value = std::move(value);
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
    n.requires_grad = rg;
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  // Gradient buffer of an input if that input participates in backward,
  // nullptr otherwise. Backward rules accumulate (+=) into it.
  Tensor<Real>* grad_if_needed(Id id) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return nullptr;
    if (!n.grad_ready) {
      n.grad = Tensor<Real>::zeros(n.value.shape);
      n.grad_ready = true;
    }
    return &n.grad;
  }

  // Seeds d(root)/d(root) with ones and propagates to every contributing
  // node in reverse topological order.
  void backward(Id root) {
    for (Node& n : nodes_) {
      n.grad_ready = false;
      n.grad = Tensor<Real>();
    }
    Node& r = nodes_.at(root);
    if (!r.requires_grad) throw Error("backward() root does not require grad");
    r.grad = Tensor<Real>::full(r.value.shape, Real(1));
    r.grad_ready = true;
    for (std::size_t i = root + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.requires_grad && n.grad_ready && n.backward) n.backward(*this, static_cast<Id>(i));
    }
  }

  // ------------------------------------------------------------------
  // Elementwise family
  // ------------------------------------------------------------------

  Id add(Id a, Id b) {
    const Tensor<Real>& av = value(a);
    const Tensor<Real>& bv = value(b);
    if (!av.same_shape(bv))
      throw DimensionError("add: shape mismatch " + shape_str(av) + " vs " + shape_str(bv));
    Tensor<Real> out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i) ga->data[i] += go.data[i];
      if (auto* gb = g.grad_if_needed(b))
        for (std::size_t i = 0; i < go.data.size(); ++i) gb->data[i] += go.data[i];
    }, "add");
  }

  // a[M x N] + v[N], the one permitted broadcast (leading axis).
  Id add_rowvec(Id a, Id v) {
    const Tensor<Real>& av = value(a);
    const Tensor<Real>& vv = value(v);
    if (av.ndim() != 2 || vv.ndim() != 1 || vv.shape[0] != av.shape[1])
      throw DimensionError("add_rowvec: need [MxN] + [N]");
    const std::size_t m = av.shape[0], n = av.shape[1];
    Tensor<Real> out = av;
    for (std::size_t i = 0; i < m; ++i) {
      Real* o = out.row_ptr(i);
      for (std::size_t j = 0; j < n; ++j) o[j] += vv.data[j];
    }
    return make_node(std::move(out), {a, v}, [a, v, m, n](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i) ga->data[i] += go.data[i];
      if (auto* gv = g.grad_if_needed(v))
        for (std::size_t i = 0; i < m; ++i) {
          const Real* gr = go.row_ptr(i);
          for (std::size_t j = 0; j < n; ++j) gv->data[j] += gr[j];
        }
    }, "add_rowvec");
  }

  Id mul(Id a, Id b) {
    const Tensor<Real>& av = value(a);
    const Tensor<Real>& bv = value(b);
    if (!av.same_shape(bv))
      throw DimensionError("mul: shape mismatch " + shape_str(av) + " vs " + shape_str(bv));
    Tensor<Real> out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& av = g.value(a);
      const Tensor<Real>& bv = g.value(b);
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i) ga->data[i] += go.data[i] * bv.data[i];
      if (auto* gb = g.grad_if_needed(b))
        for (std::size_t i = 0; i < go.data.size(); ++i) gb->data[i] += go.data[i] * av.data[i];
    }, "mul");
  }

  Id scale(Id a, Real c) {
    Tensor<Real> out = value(a);
    for (auto& v : out.data) v *= c;
    return make_node(std::move(out), {a}, [a, c](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i) ga->data[i] += c * go.data[i];
    }, "scale");
  }

  Id relu(Id a) {
    Tensor<Real> out = value(a);
    for (auto& v : out.data) v = v > Real(0) ? v : Real(0);
    return make_node(std::move(out), {a}, [a](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& av = g.value(a);
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i)
          if (av.data[i] > Real(0)) ga->data[i] += go.data[i];
    }, "relu");
  }

  // tanh-form approximation; its exact shape matters less than using the
  // same one everywhere.
  Id gelu(Id a) {
    Tensor<Real> out = value(a);
    for (auto& v : out.data) {
      const double x = static_cast<double>(v);
      const double u = kGeluC * (x + kGeluA * x * x * x);
      v = static_cast<Real>(0.5 * x * (1.0 + std::tanh(u)));
    }
    return make_node(std::move(out), {a}, [a](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& av = g.value(a);
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i) {
          const double x = static_cast<double>(av.data[i]);
          const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
          const double d =
              0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
          ga->data[i] += static_cast<Real>(d) * go.data[i];
        }
    }, "gelu");
  }

  Id log(Id a) {
    Tensor<Real> out = value(a);
    for (auto& v : out.data) {
      if (!(v > Real(0))) throw NumericError("log of non-positive value");
      v = std::log(v);
    }
    return make_node(std::move(out), {a}, [a](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& av = g.value(a);
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < go.data.size(); ++i) ga->data[i] += go.data[i] / av.data[i];
    }, "log");
  }

  // Normalizes each row of x[T x D] to zero mean / unit variance, then
  // applies gain and bias (both [D]).
  Id layer_norm(Id x, Id gain, Id bias) {
    const Tensor<Real>& xv = value(x);
    const Tensor<Real>& gv = value(gain);
    const Tensor<Real>& bv = value(bias);
    if (xv.ndim() != 2 || gv.ndim() != 1 || bv.ndim() != 1 || gv.shape[0] != xv.shape[1] ||
        bv.shape[0] != xv.shape[1])
      throw DimensionError("layer_norm: need x[TxD], gain[D], bias[D]");
    const std::size_t t = xv.shape[0], d = xv.shape[1];
    auto xhat = std::make_shared<Tensor<Real>>(Tensor<Real>::zeros({t, d}));
    auto inv_std = std::make_shared<std::vector<Real>>(t);
    Tensor<Real> out({t, d});
    for (std::size_t i = 0; i < t; ++i) {
      const Real* xr = xv.row_ptr(i);
      double mu = 0.0;
      for (std::size_t j = 0; j < d; ++j) mu += static_cast<double>(xr[j]);
      mu /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double c = static_cast<double>(xr[j]) - mu;
        var += c * c;
      }
      var /= static_cast<double>(d);
      const double is = 1.0 / std::sqrt(var + layer_norm_eps());
      (*inv_std)[i] = static_cast<Real>(is);
      Real* hr = xhat->row_ptr(i);
      Real* o = out.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) {
        hr[j] = static_cast<Real>((static_cast<double>(xr[j]) - mu) * is);
        o[j] = hr[j] * gv.data[j] + bv.data[j];
      }
    }
    return make_node(std::move(out), {x, gain, bias},
                     [x, gain, bias, xhat, inv_std, t, d](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& gv = g.value(gain);
      Tensor<Real>* gx = g.grad_if_needed(x);
      Tensor<Real>* gg = g.grad_if_needed(gain);
      Tensor<Real>* gb = g.grad_if_needed(bias);
      for (std::size_t i = 0; i < t; ++i) {
        const Real* gr = go.row_ptr(i);
        const Real* hr = xhat->row_ptr(i);
        if (gg)
          for (std::size_t j = 0; j < d; ++j) gg->data[j] += gr[j] * hr[j];
        if (gb)
          for (std::size_t j = 0; j < d; ++j) gb->data[j] += gr[j];
        if (gx) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double u = static_cast<double>(gr[j]) * static_cast<double>(gv.data[j]);
            m1 += u;
            m2 += u * static_cast<double>(hr[j]);
          }
          m1 /= static_cast<double>(d);
          m2 /= static_cast<double>(d);
          const double is = static_cast<double>((*inv_std)[i]);
          Real* gxr = gx->row_ptr(i);
          for (std::size_t j = 0; j < d; ++j) {
            const double u = static_cast<double>(gr[j]) * static_cast<double>(gv.data[j]);
            gxr[j] += static_cast<Real>((u - m1 - static_cast<double>(hr[j]) * m2) * is);
          }
        }
      }
    }, "layer_norm");
  }

  // Row-wise softmax. With `causal` set, x must be square and row i is
  // normalized over columns 0..i only; masked entries are exactly zero.
  Id softmax_rows(Id x, bool causal = false) {
    const Tensor<Real>& xv = value(x);
    if (xv.ndim() != 2) throw DimensionError("softmax_rows: need 2-d input");
    if (causal && xv.shape[0] != xv.shape[1])
      throw DimensionError("softmax_rows: causal mask needs a square matrix");
    const std::size_t m = xv.shape[0], n = xv.shape[1];
    Tensor<Real> out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t active = causal ? i + 1 : n;
      const Real* xr = xv.row_ptr(i);
      Real* o = out.row_ptr(i);
      Real mx = xr[0];
      for (std::size_t j = 1; j < active; ++j) mx = std::max(mx, xr[j]);
      double z = 0.0;
      for (std::size_t j = 0; j < active; ++j) {
        const double e = std::exp(static_cast<double>(xr[j] - mx));
        o[j] = static_cast<Real>(e);
        z += e;
      }
      const double iz = 1.0 / z;
      for (std::size_t j = 0; j < active; ++j) o[j] = static_cast<Real>(static_cast<double>(o[j]) * iz);
      for (std::size_t j = active; j < n; ++j) o[j] = Real(0);
    }
    return make_node(std::move(out), {x}, [x, causal, m, n](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& yv = g.value(self);
      if (auto* gx = g.grad_if_needed(x))
        for (std::size_t i = 0; i < m; ++i) {
          const std::size_t active = causal ? i + 1 : n;
          const Real* gr = go.row_ptr(i);
          const Real* yr = yv.row_ptr(i);
          double s = 0.0;
          for (std::size_t j = 0; j < active; ++j)
            s += static_cast<double>(gr[j]) * static_cast<double>(yr[j]);
          Real* gxr = gx->row_ptr(i);
          for (std::size_t j = 0; j < active; ++j)
            gxr[j] += static_cast<Real>(static_cast<double>(yr[j]) *
                                        (static_cast<double>(gr[j]) - s));
        }
    }, "softmax_rows");
  }

  // ------------------------------------------------------------------
  // Linear algebra
  // ------------------------------------------------------------------

  Id matmul(Id a, Id b) {
    const Tensor<Real>& av = value(a);
    const Tensor<Real>& bv = value(b);
    if (av.ndim() != 2 || bv.ndim() != 2 || av.shape[1] != bv.shape[0])
      throw DimensionError("matmul: inner extents differ, " + shape_str(av) + " x " + shape_str(bv));
    const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
    Tensor<Real> out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      const Real* ar = av.row_ptr(i);
      Real* o = out.row_ptr(i);
      for (std::size_t p = 0; p < k; ++p) {
        const Real aik = ar[p];
        const Real* br = bv.row_ptr(p);
        for (std::size_t j = 0; j < n; ++j) o[j] += aik * br[j];
      }
    }
    return make_node(std::move(out), {a, b}, [a, b, m, k, n](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& av = g.value(a);
      const Tensor<Real>& bv = g.value(b);
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < m; ++i) {
          const Real* gr = go.row_ptr(i);
          Real* gar = ga->row_ptr(i);
          for (std::size_t p = 0; p < k; ++p) {
            const Real* br = bv.row_ptr(p);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
              acc += static_cast<double>(gr[j]) * static_cast<double>(br[j]);
            gar[p] += static_cast<Real>(acc);
          }
        }
      if (auto* gb = g.grad_if_needed(b))
        for (std::size_t i = 0; i < m; ++i) {
          const Real* ar = av.row_ptr(i);
          const Real* gr = go.row_ptr(i);
          for (std::size_t p = 0; p < k; ++p) {
            const Real aik = ar[p];
            Real* gbr = gb->row_ptr(p);
            for (std::size_t j = 0; j < n; ++j) gbr[j] += aik * gr[j];
          }
        }
    }, "matmul");
  }

  // a[M x K] * transpose(b[N x K]) -> [M x N]
  Id matmul_nt(Id a, Id b) {
    const Tensor<Real>& av = value(a);
    const Tensor<Real>& bv = value(b);
    if (av.ndim() != 2 || bv.ndim() != 2 || av.shape[1] != bv.shape[1])
      throw DimensionError("matmul_nt: trailing extents differ");
    const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[0];
    Tensor<Real> out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      const Real* ar = av.row_ptr(i);
      Real* o = out.row_ptr(i);
      for (std::size_t j = 0; j < n; ++j) {
        const Real* br = bv.row_ptr(j);
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p)
          acc += static_cast<double>(ar[p]) * static_cast<double>(br[p]);
        o[j] = static_cast<Real>(acc);
      }
    }
    return make_node(std::move(out), {a, b}, [a, b, m, k, n](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& av = g.value(a);
      const Tensor<Real>& bv = g.value(b);
      if (auto* ga = g.grad_if_needed(a))
        for (std::size_t i = 0; i < m; ++i) {
          const Real* gr = go.row_ptr(i);
          Real* gar = ga->row_ptr(i);
          for (std::size_t j = 0; j < n; ++j) {
            const Real gij = gr[j];
            const Real* br = bv.row_ptr(j);
            for (std::size_t p = 0; p < k; ++p) gar[p] += gij * br[p];
          }
        }
      if (auto* gb = g.grad_if_needed(b))
        for (std::size_t i = 0; i < m; ++i) {
          const Real* gr = go.row_ptr(i);
          const Real* ar = av.row_ptr(i);
          for (std::size_t j = 0; j < n; ++j) {
            const Real gij = gr[j];
            Real* gbr = gb->row_ptr(j);
            for (std::size_t p = 0; p < k; ++p) gbr[p] += gij * ar[p];
          }
        }
    }, "matmul_nt");
  }

  // Strided cross-correlation of x[T x Cin] with kernel[W x Cin x Cout].
  Id conv1d(Id x, Id kernel, std::size_t stride) {
    const Tensor<Real>& xv = value(x);
    const Tensor<Real>& kv = value(kernel);
    if (xv.ndim() != 2 || kv.ndim() != 3 || kv.shape[1] != xv.shape[1])
      throw DimensionError("conv1d: need x[TxCin], kernel[WxCinxCout]");
    if (stride == 0) throw DimensionError("conv1d: stride must be positive");
    const std::size_t t_in = xv.shape[0], cin = xv.shape[1];
    const std::size_t w = kv.shape[0], cout = kv.shape[2];
    if (t_in < w) throw InsufficientLengthError("conv1d: input shorter than kernel width");
    const std::size_t t_out = (t_in - w) / stride + 1;
    Tensor<Real> out({t_out, cout});
    for (std::size_t t = 0; t < t_out; ++t) {
      Real* o = out.row_ptr(t);
      for (std::size_t wi = 0; wi < w; ++wi) {
        const Real* xr = xv.row_ptr(t * stride + wi);
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const Real xval = xr[ci];
          const Real* kr = &kv.data[(wi * cin + ci) * cout];
          for (std::size_t co = 0; co < cout; ++co) o[co] += xval * kr[co];
        }
      }
    }
    return make_node(std::move(out), {x, kernel},
                     [x, kernel, stride, t_out, w, cin, cout](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      const Tensor<Real>& xv = g.value(x);
      const Tensor<Real>& kv = g.value(kernel);
      Tensor<Real>* gx = g.grad_if_needed(x);
      Tensor<Real>* gk = g.grad_if_needed(kernel);
      for (std::size_t t = 0; t < t_out; ++t) {
        const Real* gr = go.row_ptr(t);
        for (std::size_t wi = 0; wi < w; ++wi) {
          const std::size_t row = t * stride + wi;
          if (gx) {
            Real* gxr = gx->row_ptr(row);
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const Real* kr = &kv.data[(wi * cin + ci) * cout];
              double acc = 0.0;
              for (std::size_t co = 0; co < cout; ++co)
                acc += static_cast<double>(kr[co]) * static_cast<double>(gr[co]);
              gxr[ci] += static_cast<Real>(acc);
            }
          }
          if (gk) {
            const Real* xr = xv.row_ptr(row);
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const Real xval = xr[ci];
              Real* gkr = &gk->data[(wi * cin + ci) * cout];
              for (std::size_t co = 0; co < cout; ++co) gkr[co] += xval * gr[co];
            }
          }
        }
      }
    }, "conv1d");
  }

  // ------------------------------------------------------------------
  // Data movement
  // ------------------------------------------------------------------

  Id pad_rows(Id x, std::size_t before, std::size_t after) {
    const Tensor<Real>& xv = value(x);
    if (xv.ndim() != 2) throw DimensionError("pad_rows: need 2-d input");
    if (before == 0 && after == 0) return x;
    const std::size_t t = xv.shape[0], d = xv.shape[1];
    Tensor<Real> out({t + before + after, d});
    std::copy(xv.data.begin(), xv.data.end(), out.data.begin() + before * d);
    return make_node(std::move(out), {x}, [x, before, t, d](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* gx = g.grad_if_needed(x))
        for (std::size_t i = 0; i < t * d; ++i) gx->data[i] += go.data[before * d + i];
    }, "pad_rows");
  }

  Id slice_rows(Id x, std::size_t start, std::size_t len) {
    const Tensor<Real>& xv = value(x);
    if (xv.ndim() != 2 || start + len > xv.shape[0]) throw DimensionError("slice_rows: out of range");
    const std::size_t d = xv.shape[1];
    Tensor<Real> out({len, d});
    std::copy(xv.data.begin() + start * d, xv.data.begin() + (start + len) * d, out.data.begin());
    return make_node(std::move(out), {x}, [x, start, len, d](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* gx = g.grad_if_needed(x))
        for (std::size_t i = 0; i < len * d; ++i) gx->data[start * d + i] += go.data[i];
    }, "slice_rows");
  }

  Id slice_cols(Id x, std::size_t start, std::size_t len) {
    const Tensor<Real>& xv = value(x);
    if (xv.ndim() != 2 || start + len > xv.shape[1]) throw DimensionError("slice_cols: out of range");
    const std::size_t t = xv.shape[0], d = xv.shape[1];
    Tensor<Real> out({t, len});
    for (std::size_t i = 0; i < t; ++i)
      std::copy(xv.row_ptr(i) + start, xv.row_ptr(i) + start + len, out.row_ptr(i));
    return make_node(std::move(out), {x}, [x, start, len, t, d](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* gx = g.grad_if_needed(x))
        for (std::size_t i = 0; i < t; ++i) {
          const Real* gr = go.row_ptr(i);
          Real* gxr = gx->row_ptr(i);
          for (std::size_t j = 0; j < len; ++j) gxr[start + j] += gr[j];
        }
    }, "slice_cols");
  }

  Id concat_cols(Id a, Id b) {
    const Tensor<Real>& av = value(a);
    const Tensor<Real>& bv = value(b);
    if (av.ndim() != 2 || bv.ndim() != 2 || av.shape[0] != bv.shape[0])
      throw DimensionError("concat_cols: row counts differ");
    const std::size_t t = av.shape[0], da = av.shape[1], db = bv.shape[1];
    Tensor<Real> out({t, da + db});
    for (std::size_t i = 0; i < t; ++i) {
      std::copy(av.row_ptr(i), av.row_ptr(i) + da, out.row_ptr(i));
      std::copy(bv.row_ptr(i), bv.row_ptr(i) + db, out.row_ptr(i) + da);
    }
    return make_node(std::move(out), {a, b}, [a, b, t, da, db](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      Tensor<Real>* ga = g.grad_if_needed(a);
      Tensor<Real>* gb = g.grad_if_needed(b);
      for (std::size_t i = 0; i < t; ++i) {
        const Real* gr = go.row_ptr(i);
        if (ga) {
          Real* gar = ga->row_ptr(i);
          for (std::size_t j = 0; j < da; ++j) gar[j] += gr[j];
        }
        if (gb) {
          Real* gbr = gb->row_ptr(i);
          for (std::size_t j = 0; j < db; ++j) gbr[j] += gr[da + j];
        }
      }
    }, "concat_cols");
  }

  // Linear-interpolation resampling of rows to a new length. Node positions
  // map endpoints onto endpoints, so equal lengths reproduce the input.
  Id resample_rows(Id x, std::size_t target_len) {
    const Tensor<Real>& xv = value(x);
    if (xv.ndim() != 2) throw DimensionError("resample_rows: need 2-d input");
    if (target_len == 0) throw DimensionError("resample_rows: empty target");
    const std::size_t t = xv.shape[0], d = xv.shape[1];
    auto pos_of = [t, target_len](std::size_t i) {
      if (target_len == 1 || t == 1) return 0.0;
      return static_cast<double>(i) * static_cast<double>(t - 1) /
             static_cast<double>(target_len - 1);
    };
    Tensor<Real> out({target_len, d});
    for (std::size_t i = 0; i < target_len; ++i) {
      const double pos = pos_of(i);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, t - 1);
      const Real f = static_cast<Real>(pos - static_cast<double>(lo));
      const Real* xl = xv.row_ptr(lo);
      const Real* xh = xv.row_ptr(hi);
      Real* o = out.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) o[j] = (Real(1) - f) * xl[j] + f * xh[j];
    }
    return make_node(std::move(out), {x}, [x, pos_of, target_len, t, d](Graph& g, Id self) {
      const Tensor<Real>& go = g.nodes_[self].grad;
      if (auto* gx = g.grad_if_needed(x))
        for (std::size_t i = 0; i < target_len; ++i) {
          const double pos = pos_of(i);
          const std::size_t lo = static_cast<std::size_t>(pos);
          const std::size_t hi = std::min(lo + 1, t - 1);
          const Real f = static_cast<Real>(pos - static_cast<double>(lo));
          const Real* gr = go.row_ptr(i);
          Real* gl = gx->row_ptr(lo);
          Real* gh = gx->row_ptr(hi);
          for (std::size_t j = 0; j < d; ++j) {
            gl[j] += (Real(1) - f) * gr[j];
            gh[j] += f * gr[j];
          }
        }
    }, "resample_rows");
  }

  // ------------------------------------------------------------------
  // Reductions
  // ------------------------------------------------------------------

  Id sum(Id a) {
    const Tensor<Real>& av = value(a);
    double acc = 0.0;
    for (Real v : av.data) acc += static_cast<double>(v);
    return make_node(Tensor<Real>::scalar(static_cast<Real>(acc)), {a}, [a](Graph& g, Id self) {
      const Real go = g.nodes_[self].grad.data[0];
      if (auto* ga = g.grad_if_needed(a))
        for (auto& v : ga->data) v += go;
    }, "sum");
  }

  Id mean(Id a) {
    const Tensor<Real>& av = value(a);
    double acc = 0.0;
    for (Real v : av.data) acc += static_cast<double>(v);
    const std::size_t n = av.numel();
    acc /= static_cast<double>(n);
    return make_node(Tensor<Real>::scalar(static_cast<Real>(acc)), {a}, [a, n](Graph& g, Id self) {
      const Real go = g.nodes_[self].grad.data[0] / static_cast<Real>(n);
      if (auto* ga = g.grad_if_needed(a))
        for (auto& v : ga->data) v += go;
    }, "mean");
  }

  static constexpr double layer_norm_eps() { return sizeof(Real) == 8 ? 1e-10 : 1e-6; }

 private:
  static constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
  static constexpr double kGeluA = 0.044715;

  static void check_finite(const Tensor<Real>& t, const char* what) {
    if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite value produced");
  }

  std::vector<Node> nodes_;
};

}  // namespace mcgurklab::engine
