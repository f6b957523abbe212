// Copyright 2026 The StyleRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stylerl/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "stylerl/errors.h"
#include "stylerl/kernels.h"

namespace stylerl {

const char *OpName(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kEmbeddingLookup: return "embedding_lookup";
    case OpKind::kConv1d: return "conv1d";
    case OpKind::kMaxPoolOverTime: return "max_pool_over_time";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kOneMinus: return "one_minus";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kRelu: return "relu";
    case OpKind::kLogSigmoid: return "log_sigmoid";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kConcat: return "concat";
    case OpKind::kMean: return "mean";
    case OpKind::kSum: return "sum";
    case OpKind::kSlice: return "slice";
    case OpKind::kBroadcast: return "broadcast";
    case OpKind::kReshape: return "reshape";
    case OpKind::kPickSum: return "pick_sum";
    case OpKind::kMaskRows: return "mask_rows";
    case OpKind::kAttend: return "attend";
  }
  return "unknown";
}

const Tensor &Var::value() const { return graph_->value(*this); }
bool Var::requires_grad() const { return graph_->requires_grad(*this); }

const Graph::Node &Graph::node(Var v) const {
  if (v.graph() != this || v.id() < 0 ||
      static_cast<size_t>(v.id()) >= nodes_.size()) {
    throw ContractError("variable does not belong to this graph");
  }
  return nodes_[v.id()];
}

Var Graph::Constant(Tensor value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::Input(Tensor value) {
  Node n;
  n.own = std::move(value);
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::Param(Parameter &param) {
  auto it = param_nodes_.find(&param);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.ref = &param.value;
  n.requires_grad = grad_enabled_;
  n.param = grad_enabled_ ? &param : nullptr;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&param, id);
  return Var(this, id);
}

const Tensor &Graph::grad(Var v) {
  node(v);
  return MutableGrad(v.id());
}

Tensor &Graph::MutableGrad(int id) {
  Node &n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value().shape());
  return n.grad;
}

Var Graph::Record(OpKind kind, Tensor value, std::vector<int> inputs,
                  BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.own = std::move(value);
  bool needs = false;
  if (grad_enabled_) {
    for (int id : inputs) needs = needs || nodes_[id].requires_grad;
  }
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Graph::Backward(Var loss) {
  const Node &root = node(loss);
  if (consumed_) throw ContractError("backward: tape already consumed");
  if (root.value().size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        root.value().ShapeString());
  }
  consumed_ = true;
  backward_visits_ = 0;
  if (!root.requires_grad) return;
  MutableGrad(loss.id())[0] += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node &n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, id);
      ++backward_visits_;
    }
    if (n.param != nullptr) {
      double *dst = n.param->grad.data();
      const double *src = n.grad.data();
      for (size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
    }
  }
  for (Node &n : nodes_) n.backward = nullptr;
}

namespace ops {
namespace {

[[noreturn]] void ShapeFail(const char *op, const Shape &a, const Shape &b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeString(a) + " and " + ShapeString(b));
}

[[noreturn]] void ShapeFail(const char *op, const Shape &a) {
  throw DimensionError(std::string(op) + ": invalid shape " + ShapeString(a));
}

Graph *Same(Var a, Var b) {
  if (a.graph() != b.graph()) {
    throw ContractError("operands belong to different graphs");
  }
  return a.graph();
}

// Binary elementwise broadcast mode: 0 = same shape, 1 = b is a row vector.
int BroadcastMode(const char *op, const Shape &a, const Shape &b) {
  if (a == b) return 0;
  if (a.size() == 2 && b.size() == 2 && b[0] == 1 && a[1] == b[1]) return 1;
  ShapeFail(op, a, b);
}

template <typename Fwd, typename Deriv>
Var Unary(OpKind kind, Var a, Fwd fwd, Deriv deriv) {
  const Tensor &x = a.value();
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return a.graph()->Record(
      kind, std::move(y), {a.id()}, [ia = a.id(), deriv](Graph &g, int self) {
        if (!g.NeedsGrad(ia)) return;
        const Tensor &x = g.ValueOf(ia);
        const Tensor &y = g.ValueOf(self);
        const Tensor &gy = g.MutableGrad(self);
        Tensor &gx = g.MutableGrad(ia);
        for (size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * deriv(x[i], y[i]);
      });
}

double StableSigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double StableLogSigmoid(double v) {
  if (v >= 0) return -std::log1p(std::exp(-v));
  return v - std::log1p(std::exp(v));
}

}  // namespace

Var MatMul(Var a, Var b) {
  Graph *g = Same(a, b);
  const Tensor &x = a.value();
  const Tensor &w = b.value();
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0)) {
    ShapeFail("matmul", x.shape(), w.shape());
  }
  const int m = x.dim(0), k = x.dim(1), n = w.dim(1);
  Tensor y({m, n});
  kernels::GemmNN(m, n, k, x.data(), w.data(), y.data(), false);
  return g->Record(OpKind::kMatMul, std::move(y), {a.id(), b.id()},
                   [ia = a.id(), ib = b.id(), m, n, k](Graph &g, int self) {
                     const Tensor &gy = g.MutableGrad(self);
                     if (g.NeedsGrad(ia)) {
                       kernels::GemmNT(m, k, n, gy.data(), g.ValueOf(ib).data(),
                                       g.MutableGrad(ia).data(), true);
                     }
                     if (g.NeedsGrad(ib)) {
                       kernels::GemmTN(k, n, m, g.ValueOf(ia).data(), gy.data(),
                                       g.MutableGrad(ib).data(), true);
                     }
                   });
}

Var EmbeddingLookup(Var table, std::span<const int> ids) {
  const Tensor &t = table.value();
  if (t.rank() != 2) ShapeFail("embedding_lookup", t.shape());
  if (ids.empty()) throw DimensionError("embedding_lookup: empty id list");
  const int vocab = t.dim(0), d = t.dim(1);
  const int n = static_cast<int>(ids.size());
  Tensor y({n, d});
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw ContractError("embedding_lookup: id " + std::to_string(ids[i]) +
                          " outside vocabulary of size " + std::to_string(vocab));
    }
    std::copy_n(t.data() + static_cast<size_t>(ids[i]) * d, d,
                y.data() + static_cast<size_t>(i) * d);
  }
  return table.graph()->Record(
      OpKind::kEmbeddingLookup, std::move(y), {table.id()},
      [it = table.id(), idv = std::vector<int>(ids.begin(), ids.end()), d](
          Graph &g, int self) {
        const Tensor &gy = g.MutableGrad(self);
        Tensor &gt = g.MutableGrad(it);
        for (size_t i = 0; i < idv.size(); ++i) {
          double *dst = gt.data() + static_cast<size_t>(idv[i]) * d;
          const double *src = gy.data() + i * d;
          for (int j = 0; j < d; ++j) dst[j] += src[j];
        }
      });
}

Var Conv1d(Var x, Var weight, Var bias, int width) {
  Graph *g = Same(x, weight);
  Same(x, bias);
  const Tensor &in = x.value();
  const Tensor &w = weight.value();
  const Tensor &b = bias.value();
  if (in.rank() != 3 || width < 1) ShapeFail("conv1d", in.shape());
  const int steps = in.dim(0), batch = in.dim(1), d = in.dim(2);
  if (w.rank() != 2 || w.dim(0) != width * d) ShapeFail("conv1d", in.shape(), w.shape());
  const int k = w.dim(1);
  if (b.rank() != 2 || b.dim(0) != 1 || b.dim(1) != k) ShapeFail("conv1d", w.shape(), b.shape());
  if (steps < width) {
    throw DimensionError("conv1d: sequence of length " + std::to_string(steps) +
                         " shorter than kernel width " + std::to_string(width));
  }
  const int out_steps = steps - width + 1;
  const int rows = out_steps * batch;
  Tensor y({out_steps, batch, k});
  for (int r = 0; r < rows; ++r) std::copy_n(b.data(), k, y.data() + static_cast<size_t>(r) * k);
  // Time-major layout makes each kernel tap one contiguous product.
  for (int j = 0; j < width; ++j) {
    kernels::GemmNN(rows, k, d, in.data() + static_cast<size_t>(j) * batch * d,
                    w.data() + static_cast<size_t>(j) * d * k, y.data(), true);
  }
  return g->Record(
      OpKind::kConv1d, std::move(y), {x.id(), weight.id(), bias.id()},
      [ix = x.id(), iw = weight.id(), ib = bias.id(), width, batch, d, k, rows](
          Graph &g, int self) {
        const Tensor &gy = g.MutableGrad(self);
        for (int j = 0; j < width; ++j) {
          const size_t xoff = static_cast<size_t>(j) * batch * d;
          const size_t woff = static_cast<size_t>(j) * d * k;
          if (g.NeedsGrad(ix)) {
            kernels::GemmNT(rows, d, k, gy.data(), g.ValueOf(iw).data() + woff,
                            g.MutableGrad(ix).data() + xoff, true);
          }
          if (g.NeedsGrad(iw)) {
            kernels::GemmTN(d, k, rows, g.ValueOf(ix).data() + xoff, gy.data(),
                            g.MutableGrad(iw).data() + woff, true);
          }
        }
        if (g.NeedsGrad(ib)) {
          Tensor &gb = g.MutableGrad(ib);
          for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < k; ++c) gb[c] += gy[static_cast<size_t>(r) * k + c];
          }
        }
      });
}

Var MaxPoolOverTime(Var y, std::span<const int> valid) {
  const Tensor &in = y.value();
  if (in.rank() != 3) ShapeFail("max_pool_over_time", in.shape());
  const int steps = in.dim(0), batch = in.dim(1), k = in.dim(2);
  if (!valid.empty() && static_cast<int>(valid.size()) != batch) {
    throw DimensionError("max_pool_over_time: " + std::to_string(valid.size()) +
                         " lengths for batch of " + std::to_string(batch));
  }
  Tensor out({batch, k});
  std::vector<int> arg(static_cast<size_t>(batch) * k, 0);
  for (int b = 0; b < batch; ++b) {
    const int limit = valid.empty() ? steps : std::clamp(valid[b], 1, steps);
    for (int c = 0; c < k; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      int best_t = 0;
      for (int t = 0; t < limit; ++t) {
        const double v = in[(static_cast<size_t>(t) * batch + b) * k + c];
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      out[static_cast<size_t>(b) * k + c] = best;
      arg[static_cast<size_t>(b) * k + c] = best_t;
    }
  }
  return y.graph()->Record(
      OpKind::kMaxPoolOverTime, std::move(out), {y.id()},
      [iy = y.id(), arg = std::move(arg), batch, k](Graph &g, int self) {
        const Tensor &go = g.MutableGrad(self);
        Tensor &gy = g.MutableGrad(iy);
        for (int b = 0; b < batch; ++b) {
          for (int c = 0; c < k; ++c) {
            const size_t o = static_cast<size_t>(b) * k + c;
            gy[(static_cast<size_t>(arg[o]) * batch + b) * k + c] += go[o];
          }
        }
      });
}

Var Add(Var a, Var b) {
  Graph *g = Same(a, b);
  const Tensor &x = a.value();
  const Tensor &w = b.value();
  const int mode = BroadcastMode("add", x.shape(), w.shape());
  Tensor y(x.shape());
  const size_t n = mode == 0 ? x.size() : static_cast<size_t>(w.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] + w[i % n];
  return g->Record(OpKind::kAdd, std::move(y), {a.id(), b.id()},
                   [ia = a.id(), ib = b.id(), n](Graph &g, int self) {
                     const Tensor &gy = g.MutableGrad(self);
                     if (g.NeedsGrad(ia)) {
                       Tensor &ga = g.MutableGrad(ia);
                       for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
                     }
                     if (g.NeedsGrad(ib)) {
                       Tensor &gb = g.MutableGrad(ib);
                       for (size_t i = 0; i < gy.size(); ++i) gb[i % n] += gy[i];
                     }
                   });
}

Var Sub(Var a, Var b) {
  Graph *g = Same(a, b);
  const Tensor &x = a.value();
  const Tensor &w = b.value();
  const int mode = BroadcastMode("sub", x.shape(), w.shape());
  Tensor y(x.shape());
  const size_t n = mode == 0 ? x.size() : static_cast<size_t>(w.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] - w[i % n];
  return g->Record(OpKind::kSub, std::move(y), {a.id(), b.id()},
                   [ia = a.id(), ib = b.id(), n](Graph &g, int self) {
                     const Tensor &gy = g.MutableGrad(self);
                     if (g.NeedsGrad(ia)) {
                       Tensor &ga = g.MutableGrad(ia);
                       for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
                     }
                     if (g.NeedsGrad(ib)) {
                       Tensor &gb = g.MutableGrad(ib);
                       for (size_t i = 0; i < gy.size(); ++i) gb[i % n] -= gy[i];
                     }
                   });
}

Var Mul(Var a, Var b) {
  Graph *g = Same(a, b);
  const Tensor &x = a.value();
  const Tensor &w = b.value();
  const int mode = BroadcastMode("mul", x.shape(), w.shape());
  Tensor y(x.shape());
  const size_t n = mode == 0 ? x.size() : static_cast<size_t>(w.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * w[i % n];
  return g->Record(OpKind::kMul, std::move(y), {a.id(), b.id()},
                   [ia = a.id(), ib = b.id(), n](Graph &g, int self) {
                     const Tensor &gy = g.MutableGrad(self);
                     const Tensor &x = g.ValueOf(ia);
                     const Tensor &w = g.ValueOf(ib);
                     if (g.NeedsGrad(ia)) {
                       Tensor &ga = g.MutableGrad(ia);
                       for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * w[i % n];
                     }
                     if (g.NeedsGrad(ib)) {
                       Tensor &gb = g.MutableGrad(ib);
                       for (size_t i = 0; i < gy.size(); ++i) gb[i % n] += gy[i] * x[i];
                     }
                   });
}

Var Scale(Var a, double factor) {
  return Unary(
      OpKind::kScale, a, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Var OneMinus(Var a) {
  return Unary(
      OpKind::kOneMinus, a, [](double v) { return 1.0 - v; },
      [](double, double) { return -1.0; });
}

Var Tanh(Var a) {
  return Unary(
      OpKind::kTanh, a, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Sigmoid(Var a) {
  return Unary(OpKind::kSigmoid, a, StableSigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Var Relu(Var a) {
  return Unary(
      OpKind::kRelu, a, [](double v) { return v > 0 ? v : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var LogSigmoid(Var a, double floor) {
  return Unary(
      OpKind::kLogSigmoid, a,
      [floor](double v) { return std::max(StableLogSigmoid(v), floor); },
      [floor](double x, double y) {
        if (y <= floor && StableLogSigmoid(x) <= floor) return 0.0;
        return StableSigmoid(-x);
      });
}

Var Softmax(Var a) {
  const Tensor &x = a.value();
  const int cols = x.shape().back();
  const size_t rows = x.size() / cols;
  Tensor y(x.shape());
  for (size_t r = 0; r < rows; ++r) {
    const double *in = x.data() + r * cols;
    double *out = y.data() + r * cols;
    const double mx = *std::max_element(in, in + cols);
    double total = 0.0;
    for (int c = 0; c < cols; ++c) total += out[c] = std::exp(in[c] - mx);
    for (int c = 0; c < cols; ++c) out[c] /= total;
  }
  return a.graph()->Record(
      OpKind::kSoftmax, std::move(y), {a.id()},
      [ia = a.id(), rows, cols](Graph &g, int self) {
        const Tensor &y = g.ValueOf(self);
        const Tensor &gy = g.MutableGrad(self);
        Tensor &gx = g.MutableGrad(ia);
        for (size_t r = 0; r < rows; ++r) {
          const size_t o = r * cols;
          double dot = 0.0;
          for (int c = 0; c < cols; ++c) dot += gy[o + c] * y[o + c];
          for (int c = 0; c < cols; ++c) gx[o + c] += y[o + c] * (gy[o + c] - dot);
        }
      });
}

Var LogSoftmax(Var a) {
  const Tensor &x = a.value();
  const int cols = x.shape().back();
  const size_t rows = x.size() / cols;
  Tensor y(x.shape());
  for (size_t r = 0; r < rows; ++r) {
    const double *in = x.data() + r * cols;
    double *out = y.data() + r * cols;
    const double mx = *std::max_element(in, in + cols);
    double total = 0.0;
    for (int c = 0; c < cols; ++c) total += std::exp(in[c] - mx);
    const double lse = mx + std::log(total);
    for (int c = 0; c < cols; ++c) out[c] = in[c] - lse;
  }
  return a.graph()->Record(
      OpKind::kLogSoftmax, std::move(y), {a.id()},
      [ia = a.id(), rows, cols](Graph &g, int self) {
        const Tensor &y = g.ValueOf(self);
        const Tensor &gy = g.MutableGrad(self);
        Tensor &gx = g.MutableGrad(ia);
        for (size_t r = 0; r < rows; ++r) {
          const size_t o = r * cols;
          double total = 0.0;
          for (int c = 0; c < cols; ++c) total += gy[o + c];
          for (int c = 0; c < cols; ++c) gx[o + c] += gy[o + c] - std::exp(y[o + c]) * total;
        }
      });
}

Var Concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  Graph *g = parts[0].graph();
  std::vector<int> ids;
  for (const Var &p : parts) {
    Same(parts[0], p);
    ids.push_back(p.id());
  }
  const Shape &first = parts[0].shape();
  if (axis == 0) {
    Shape out_shape = first;
    out_shape[0] = 0;
    for (const Var &p : parts) {
      const Shape &s = p.shape();
      if (s.size() != first.size() || !std::equal(s.begin() + 1, s.end(), first.begin() + 1)) {
        ShapeFail("concat", first, s);
      }
      out_shape[0] += s[0];
    }
    Tensor y(out_shape);
    size_t offset = 0;
    for (const Var &p : parts) {
      const Tensor &v = p.value();
      std::copy_n(v.data(), v.size(), y.data() + offset);
      offset += v.size();
    }
    return g->Record(OpKind::kConcat, std::move(y), ids,
                     [ids](Graph &g, int self) {
                       const Tensor &gy = g.MutableGrad(self);
                       size_t offset = 0;
                       for (int id : ids) {
                         const size_t n = g.ValueOf(id).size();
                         if (g.NeedsGrad(id)) {
                           Tensor &gp = g.MutableGrad(id);
                           for (size_t i = 0; i < n; ++i) gp[i] += gy[offset + i];
                         }
                         offset += n;
                       }
                     });
  }
  if (axis != -1 && axis != 1) throw DimensionError("concat: unsupported axis");
  if (first.size() != 2) ShapeFail("concat", first);
  const int rows = first[0];
  int total = 0;
  std::vector<int> widths;
  for (const Var &p : parts) {
    const Shape &s = p.shape();
    if (s.size() != 2 || s[0] != rows) ShapeFail("concat", first, s);
    widths.push_back(s[1]);
    total += s[1];
  }
  Tensor y({rows, total});
  int col = 0;
  for (size_t i = 0; i < parts.size(); ++i) {
    const Tensor &v = parts[i].value();
    for (int r = 0; r < rows; ++r) {
      std::copy_n(v.data() + static_cast<size_t>(r) * widths[i], widths[i],
                  y.data() + static_cast<size_t>(r) * total + col);
    }
    col += widths[i];
  }
  return g->Record(OpKind::kConcat, std::move(y), ids,
                   [ids, widths, rows, total](Graph &g, int self) {
                     const Tensor &gy = g.MutableGrad(self);
                     int col = 0;
                     for (size_t i = 0; i < ids.size(); ++i) {
                       if (g.NeedsGrad(ids[i])) {
                         Tensor &gp = g.MutableGrad(ids[i]);
                         for (int r = 0; r < rows; ++r) {
                           for (int c = 0; c < widths[i]; ++c) {
                             gp[static_cast<size_t>(r) * widths[i] + c] +=
                                 gy[static_cast<size_t>(r) * total + col + c];
                           }
                         }
                       }
                       col += widths[i];
                     }
                   });
}

Var Sum(Var a) {
  const Tensor &x = a.value();
  double total = 0.0;
  for (size_t i = 0; i < x.size(); ++i) total += x[i];
  return a.graph()->Record(OpKind::kSum, Tensor::Scalar(total), {a.id()},
                           [ia = a.id()](Graph &g, int self) {
                             const double gy = g.MutableGrad(self)[0];
                             Tensor &gx = g.MutableGrad(ia);
                             for (size_t i = 0; i < gx.size(); ++i) gx[i] += gy;
                           });
}

Var Mean(Var a) {
  const Tensor &x = a.value();
  double total = 0.0;
  for (size_t i = 0; i < x.size(); ++i) total += x[i];
  const double n = static_cast<double>(x.size());
  return a.graph()->Record(OpKind::kMean, Tensor::Scalar(total / n), {a.id()},
                           [ia = a.id(), n](Graph &g, int self) {
                             const double gy = g.MutableGrad(self)[0] / n;
                             Tensor &gx = g.MutableGrad(ia);
                             for (size_t i = 0; i < gx.size(); ++i) gx[i] += gy;
                           });
}

Var SliceCols(Var a, int begin, int end) {
  const Tensor &x = a.value();
  if (x.rank() != 2 || begin < 0 || end > x.dim(1) || begin >= end) {
    throw DimensionError("slice: columns [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") of " + x.ShapeString());
  }
  const int rows = x.dim(0), cols = x.dim(1), width = end - begin;
  Tensor y({rows, width});
  for (int r = 0; r < rows; ++r) {
    std::copy_n(x.data() + static_cast<size_t>(r) * cols + begin, width,
                y.data() + static_cast<size_t>(r) * width);
  }
  return a.graph()->Record(
      OpKind::kSlice, std::move(y), {a.id()},
      [ia = a.id(), rows, cols, begin, width](Graph &g, int self) {
        const Tensor &gy = g.MutableGrad(self);
        Tensor &gx = g.MutableGrad(ia);
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < width; ++c) {
            gx[static_cast<size_t>(r) * cols + begin + c] += gy[static_cast<size_t>(r) * width + c];
          }
        }
      });
}

Var SliceRows(Var a, int begin, int end) {
  const Tensor &x = a.value();
  if (begin < 0 || end > x.dim(0) || begin >= end) {
    throw DimensionError("slice: rows [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") of " + x.ShapeString());
  }
  const size_t stride = x.size() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = end - begin;
  Tensor y(shape);
  std::copy_n(x.data() + begin * stride, y.size(), y.data());
  return a.graph()->Record(OpKind::kSlice, std::move(y), {a.id()},
                           [ia = a.id(), offset = begin * stride](Graph &g, int self) {
                             const Tensor &gy = g.MutableGrad(self);
                             Tensor &gx = g.MutableGrad(ia);
                             for (size_t i = 0; i < gy.size(); ++i) gx[offset + i] += gy[i];
                           });
}

Var Broadcast(Var a, int rows) {
  const Tensor &x = a.value();
  if (x.rank() != 2 || x.dim(0) != 1 || rows < 1) ShapeFail("broadcast", x.shape());
  const int cols = x.dim(1);
  Tensor y({rows, cols});
  for (int r = 0; r < rows; ++r) std::copy_n(x.data(), cols, y.data() + static_cast<size_t>(r) * cols);
  return a.graph()->Record(OpKind::kBroadcast, std::move(y), {a.id()},
                           [ia = a.id(), cols](Graph &g, int self) {
                             const Tensor &gy = g.MutableGrad(self);
                             Tensor &gx = g.MutableGrad(ia);
                             for (size_t i = 0; i < gy.size(); ++i) gx[i % cols] += gy[i];
                           });
}

Var Reshape(Var a, Shape shape) {
  Tensor y = a.value();
  y.Reshape(std::move(shape));
  return a.graph()->Record(OpKind::kReshape, std::move(y), {a.id()},
                           [ia = a.id()](Graph &g, int self) {
                             const Tensor &gy = g.MutableGrad(self);
                             Tensor &gx = g.MutableGrad(ia);
                             for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
                           });
}

Var PickSum(Var a, std::span<const int> targets, std::span<const double> weights) {
  const Tensor &x = a.value();
  if (x.rank() != 2) ShapeFail("pick_sum", x.shape());
  const int rows = x.dim(0), cols = x.dim(1);
  if (static_cast<int>(targets.size()) != rows || weights.size() != targets.size()) {
    throw DimensionError("pick_sum: " + std::to_string(targets.size()) +
                         " targets for " + x.ShapeString());
  }
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    if (weights[r] == 0.0) continue;
    if (targets[r] < 0 || targets[r] >= cols) {
      throw ContractError("pick_sum: target " + std::to_string(targets[r]) + " out of range");
    }
    total += weights[r] * x[static_cast<size_t>(r) * cols + targets[r]];
  }
  return a.graph()->Record(
      OpKind::kPickSum, Tensor::Scalar(total), {a.id()},
      [ia = a.id(), t = std::vector<int>(targets.begin(), targets.end()),
       w = std::vector<double>(weights.begin(), weights.end()), cols](Graph &g, int self) {
        const double gy = g.MutableGrad(self)[0];
        Tensor &gx = g.MutableGrad(ia);
        for (size_t r = 0; r < t.size(); ++r) {
          if (w[r] != 0.0) gx[r * cols + t[r]] += w[r] * gy;
        }
      });
}

Var MaskRows(Var a, std::span<const double> mask) {
  const Tensor &x = a.value();
  if (x.rank() != 2 || static_cast<int>(mask.size()) != x.dim(0)) {
    throw DimensionError("mask_rows: " + std::to_string(mask.size()) +
                         " mask entries for " + x.ShapeString());
  }
  const int cols = x.dim(1);
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask[i / cols];
  return a.graph()->Record(
      OpKind::kMaskRows, std::move(y), {a.id()},
      [ia = a.id(), m = std::vector<double>(mask.begin(), mask.end()), cols](Graph &g, int self) {
        const Tensor &gy = g.MutableGrad(self);
        Tensor &gx = g.MutableGrad(ia);
        for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * m[i / cols];
      });
}

Var Attend(Var q, Var m, std::span<const char> valid) {
  Graph *g = Same(q, m);
  const Tensor &qv = q.value();
  const Tensor &mv = m.value();
  if (qv.rank() != 2 || mv.rank() != 2 || qv.dim(1) != mv.dim(1) || mv.dim(0) % qv.dim(0) != 0 ||
      valid.size() != static_cast<size_t>(mv.dim(0))) {
    throw DimensionError("attend: query " + qv.ShapeString() + ", memory " + mv.ShapeString() +
                         ", " + std::to_string(valid.size()) + " flags");
  }
  const int batch = qv.dim(0), d = qv.dim(1), steps = mv.dim(0) / batch;
  Tensor out({batch, d});
  std::vector<double> weights(static_cast<size_t>(steps) * batch, 0.0);
  for (int b = 0; b < batch; ++b) {
    const double *qb = qv.data() + static_cast<size_t>(b) * d;
    double top = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < steps; ++t) {
      const size_t r = static_cast<size_t>(t) * batch + b;
      if (!valid[r]) continue;
      const double *mr = mv.data() + r * d;
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += qb[i] * mr[i];
      weights[r] = s;
      top = std::max(top, s);
    }
    if (top == -std::numeric_limits<double>::infinity()) {
      throw ContractError("attend: row " + std::to_string(b) + " has no valid memory step");
    }
    double z = 0.0;
    for (int t = 0; t < steps; ++t) {
      const size_t r = static_cast<size_t>(t) * batch + b;
      if (valid[r]) z += (weights[r] = std::exp(weights[r] - top));
    }
    double *ob = out.data() + static_cast<size_t>(b) * d;
    for (int t = 0; t < steps; ++t) {
      const size_t r = static_cast<size_t>(t) * batch + b;
      if (!valid[r]) continue;
      weights[r] /= z;
      const double *mr = mv.data() + r * d;
      for (int i = 0; i < d; ++i) ob[i] += weights[r] * mr[i];
    }
  }
  return g->Record(
      OpKind::kAttend, std::move(out), {q.id(), m.id()},
      [iq = q.id(), im = m.id(), w = std::move(weights), batch, d, steps](Graph &g, int self) {
        const Tensor &go = g.MutableGrad(self);
        const Tensor &qv = g.ValueOf(iq);
        const Tensor &mv = g.ValueOf(im);
        const bool need_q = g.NeedsGrad(iq), need_m = g.NeedsGrad(im);
        Tensor *gq = need_q ? &g.MutableGrad(iq) : nullptr;
        Tensor *gm = need_m ? &g.MutableGrad(im) : nullptr;
        std::vector<double> dw(steps);
        for (int b = 0; b < batch; ++b) {
          const double *gob = go.data() + static_cast<size_t>(b) * d;
          const double *qb = qv.data() + static_cast<size_t>(b) * d;
          double dot = 0.0;
          for (int t = 0; t < steps; ++t) {
            const size_t r = static_cast<size_t>(t) * batch + b;
            const double *mr = mv.data() + r * d;
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += gob[i] * mr[i];
            dw[t] = s;
            dot += w[r] * s;
          }
          for (int t = 0; t < steps; ++t) {
            const size_t r = static_cast<size_t>(t) * batch + b;
            if (w[r] == 0.0) continue;
            const double ds = w[r] * (dw[t] - dot);
            const double *mr = mv.data() + r * d;
            if (gq != nullptr) {
              double *gqb = gq->data() + static_cast<size_t>(b) * d;
              for (int i = 0; i < d; ++i) gqb[i] += ds * mr[i];
            }
            if (gm != nullptr) {
              double *gmr = gm->data() + r * d;
              for (int i = 0; i < d; ++i) gmr[i] += w[r] * gob[i] + ds * qb[i];
            }
          }
        }
      });
}

}  // namespace ops
}  // namespace stylerl
