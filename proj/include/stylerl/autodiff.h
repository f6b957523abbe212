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

#ifndef STYLERL_AUTODIFF_H_
#define STYLERL_AUTODIFF_H_

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylerl/tensor.h"

namespace stylerl {

class Graph;

// Primitive operation kinds recorded on the tape.
enum class OpKind {
  kLeaf,
  kMatMul,
  kEmbeddingLookup,
  kConv1d,
  kMaxPoolOverTime,
  kAdd,
  kSub,
  kMul,
  kScale,
  kOneMinus,
  kTanh,
  kSigmoid,
  kRelu,
  kLogSigmoid,
  kSoftmax,
  kLogSoftmax,
  kConcat,
  kMean,
  kSum,
  kSlice,
  kBroadcast,
  kReshape,
  kPickSum,
  kMaskRows,
  kAttend,
};

const char *OpName(OpKind kind);

// Handle to a node of a Graph. Cheap to copy; only valid while the graph
// lives.
class Var {
 public:
  Var() = default;
  Var(Graph *graph, int id) : graph_(graph), id_(id) {}

  Graph *graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Tensor &value() const;
  const Shape &shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Graph *graph_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Operations append nodes in execution order, so the
// record is topologically sorted by construction; Backward() walks it once in
// reverse. A graph belongs to a single thread.
//
// With gradients disabled no backward closures are kept and Param() does not
// mark parameters as trainable, which makes the same model code usable for
// inference.
class Graph {
 public:
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  // Leaf holding a copy of `value` that never receives a gradient.
  Var Constant(Tensor value);
  // Leaf whose gradient is kept on the node (see grad()).
  Var Input(Tensor value);
  // Leaf bound to a parameter. The parameter's value is referenced, not
  // copied; Backward() adds the node gradient into param.grad. Repeated calls
  // with the same parameter return the same node.
  Var Param(Parameter &param);

  const Tensor &value(Var v) const { return node(v).value(); }
  // Gradient accumulated on a node by Backward(); zeros if unreached.
  const Tensor &grad(Var v);
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Loss must be a single-element tensor produced on this graph. The tape is
  // consumed: a second call throws ContractError.
  void Backward(Var loss);
  bool consumed() const { return consumed_; }

  size_t num_nodes() const { return nodes_.size(); }
  OpKind kind(int id) const { return nodes_[id].kind; }
  const std::vector<int> &inputs(int id) const { return nodes_[id].inputs; }
  // Number of op nodes visited by the last Backward().
  size_t backward_visits() const { return backward_visits_; }

  // Used by op implementations.
  using BackwardFn = std::function<void(Graph &, int)>;
  Var Record(OpKind kind, Tensor value, std::vector<int> inputs,
             BackwardFn backward);
  // Gradient buffer of a node, allocated on first use.
  Tensor &MutableGrad(int id);
  bool NeedsGrad(int id) const { return nodes_[id].requires_grad; }
  const Tensor &ValueOf(int id) const { return nodes_[id].value(); }

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    Tensor own;
    const Tensor *ref = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Parameter *param = nullptr;
    std::vector<int> inputs;
    BackwardFn backward;

    const Tensor &value() const { return ref != nullptr ? *ref : own; }
  };

  const Node &node(Var v) const;

  bool grad_enabled_;
  bool consumed_ = false;
  size_t backward_visits_ = 0;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter *, int> param_nodes_;
};

namespace ops {

// a[m,k] x b[k,n].
Var MatMul(Var a, Var b);
// Rows of table[V,d] selected by ids -> [ids.size(), d].
Var EmbeddingLookup(Var table, std::span<const int> ids);
// Valid 1-D convolution over a time-major sequence. x is [T,B,d], weight is
// [width*d, k] with the j-th d-row block applied to step t+j, bias is [1,k].
// Returns [T-width+1, B, k].
Var Conv1d(Var x, Var weight, Var bias, int width);
// Max over the time axis of y[T,B,k] -> [B,k]. When `valid` is non-empty only
// the first valid[b] steps of column b are considered (at least one).
Var MaxPoolOverTime(Var y, std::span<const int> valid = {});
// Elementwise; b may also be [1,n] against a [m,n] a (leading-dim expansion).
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
Var OneMinus(Var a);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var Relu(Var a);
// log(sigmoid(a)) evaluated stably, clamped below at `floor`. Gradient is zero
// where the clamp is active.
Var LogSigmoid(Var a, double floor = -1e300);
// Row-wise over the last axis, max-subtracted.
Var Softmax(Var a);
Var LogSoftmax(Var a);
// axis 0 stacks along the leading dimension; axis -1 joins 2-D columns.
Var Concat(std::span<const Var> parts, int axis);
Var Mean(Var a);
Var Sum(Var a);
// Columns [begin, end) of a 2-D tensor.
Var SliceCols(Var a, int begin, int end);
// Leading-axis range [begin, end).
Var SliceRows(Var a, int begin, int end);
// [1,n] -> [rows,n].
Var Broadcast(Var a, int rows);
Var Reshape(Var a, Shape shape);
// sum_b weights[b] * a[b, targets[b]] for a 2-D a.
Var PickSum(Var a, std::span<const int> targets, std::span<const double> weights);
// Row b of a 2-D tensor scaled by mask[b].
Var MaskRows(Var a, std::span<const double> mask);
// Dot-product attention of query rows q[B,d] over a time-major memory
// m[T*B,d]. Entry t*B+b of `valid` marks whether step t exists for row b;
// every row needs at least one valid step. Returns the weighted sums [B,d].
Var Attend(Var q, Var m, std::span<const char> valid);

}  // namespace ops
}  // namespace stylerl

#endif  // STYLERL_AUTODIFF_H_
