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

#include "stylerl/layers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stylerl/errors.h"

namespace stylerl {

Tensor UniformTensor(Shape shape, std::mt19937_64 &rng, double scale) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

GruCell::GruCell(const std::string &prefix, int input_dim, int hidden, std::mt19937_64 &rng)
    : wx(prefix + ".wx", UniformTensor({input_dim, 3 * hidden}, rng)),
      wh(prefix + ".wh", UniformTensor({hidden, 3 * hidden}, rng)),
      bx(prefix + ".bx", Tensor({1, 3 * hidden})),
      bh(prefix + ".bh", Tensor({1, 3 * hidden})) {}

Var GruCell::Project(Graph &g, Var x) {
  return ops::Add(ops::MatMul(x, g.Param(wx)), g.Param(bx));
}

Var GruCell::Step(Graph &g, Var projected, Var h) {
  const int n = hidden();
  Var gh = ops::Add(ops::MatMul(h, g.Param(wh)), g.Param(bh));
  Var gates = ops::Sigmoid(
      ops::Add(ops::SliceCols(projected, 0, 2 * n), ops::SliceCols(gh, 0, 2 * n)));
  Var reset = ops::SliceCols(gates, 0, n);
  Var update = ops::SliceCols(gates, n, 2 * n);
  Var cand = ops::Tanh(ops::Add(ops::SliceCols(projected, 2 * n, 3 * n),
                                ops::Mul(reset, ops::SliceCols(gh, 2 * n, 3 * n))));
  // (1 - z) * n + z * h == n + z * (h - n)
  return ops::Add(cand, ops::Mul(update, ops::Sub(h, cand)));
}

LstmCell::LstmCell(const std::string &prefix, int input_dim, int hidden, std::mt19937_64 &rng)
    : wx(prefix + ".wx", UniformTensor({input_dim, 4 * hidden}, rng)),
      wh(prefix + ".wh", UniformTensor({hidden, 4 * hidden}, rng)),
      b(prefix + ".b", Tensor({1, 4 * hidden})) {}

Var LstmCell::Project(Graph &g, Var x) {
  return ops::Add(ops::MatMul(x, g.Param(wx)), g.Param(b));
}

void LstmCell::Step(Graph &g, Var projected, Var &h, Var &c) {
  const int n = hidden();
  Var pre = ops::Add(projected, ops::MatMul(h, g.Param(wh)));
  Var ifo_in = ops::Sigmoid(ops::SliceCols(pre, 0, 2 * n));
  Var in_gate = ops::SliceCols(ifo_in, 0, n);
  Var forget = ops::SliceCols(ifo_in, n, 2 * n);
  Var cand = ops::Tanh(ops::SliceCols(pre, 2 * n, 3 * n));
  Var out_gate = ops::Sigmoid(ops::SliceCols(pre, 3 * n, 4 * n));
  c = ops::Add(ops::Mul(forget, c), ops::Mul(in_gate, cand));
  h = ops::Mul(out_gate, ops::Tanh(c));
}

Var MaskedUpdate(Var h, Var next, const std::vector<double> &mask) {
  if (std::all_of(mask.begin(), mask.end(), [](double m) { return m == 1.0; })) return next;
  return ops::Add(h, ops::MaskRows(ops::Sub(next, h), mask));
}

std::vector<int> TimeMajor(const std::vector<TokenIds> &seqs, int steps) {
  const size_t batch = seqs.size();
  std::vector<int> ids(static_cast<size_t>(steps) * batch, kPad);
  for (size_t b = 0; b < batch; ++b) {
    const int n = std::min<int>(steps, static_cast<int>(seqs[b].size()));
    for (int t = 0; t < n; ++t) ids[static_cast<size_t>(t) * batch + b] = seqs[b][t];
  }
  return ids;
}

int ArgmaxRow(const Tensor &t, int r, const std::vector<bool> &banned) {
  const int cols = t.cols();
  const double *row = t.data() + static_cast<size_t>(r) * cols;
  int best = -1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < cols; ++c) {
    if (!banned.empty() && banned[c]) continue;
    if (best < 0 || row[c] > best_v) {
      best = c;
      best_v = row[c];
    }
  }
  return best;
}

Var EmbedSequences(Var table, const std::vector<TokenIds> &seqs, int min_steps,
                   std::vector<int> *lengths) {
  if (seqs.empty()) throw ContractError("empty batch");
  int steps = min_steps;
  lengths->clear();
  for (const TokenIds &s : seqs) {
    if (s.empty()) throw ContractError("empty sentence");
    steps = std::max(steps, static_cast<int>(s.size()));
    lengths->push_back(static_cast<int>(s.size()));
  }
  const int batch = static_cast<int>(seqs.size());
  Var flat = ops::EmbeddingLookup(table, TimeMajor(seqs, steps));
  return ops::Reshape(flat, {steps, batch, table.value().dim(1)});
}

Var EmbedDistributions(Var table, const std::vector<Var> &probs,
                       std::vector<int> &lengths, int min_steps) {
  if (probs.empty()) throw ContractError("no distributions");
  const int batch = probs[0].value().dim(0);
  const int vocab = table.value().dim(0);
  if (static_cast<int>(lengths.size()) != batch) throw ContractError("lengths/batch mismatch");
  int steps = min_steps;
  for (int b = 0; b < batch; ++b) {
    if (lengths[b] > static_cast<int>(probs.size())) {
      throw ContractError("length exceeds number of distribution steps");
    }
    steps = std::max(steps, std::max(lengths[b], 1));
  }
  std::vector<Var> rows;
  std::vector<double> valid(batch), invalid(batch);
  std::vector<int> fallback(batch);
  for (int t = 0; t < steps; ++t) {
    bool any = false;
    for (int b = 0; b < batch; ++b) {
      valid[b] = t < lengths[b] ? 1.0 : 0.0;
      invalid[b] = 1.0 - valid[b];
      fallback[b] = (t == 0 && lengths[b] == 0) ? kUnk : kPad;
      any = any || valid[b] == 1.0;
    }
    Var fill = ops::EmbeddingLookup(table, fallback);
    if (!any) {
      rows.push_back(fill);
      continue;
    }
    const Tensor &p = probs[t].value();
    if (p.rank() != 2 || p.dim(0) != batch || p.dim(1) != vocab) {
      throw DimensionError("distribution step has shape " + p.ShapeString());
    }
    for (int b = 0; b < batch; ++b) {
      if (valid[b] == 0.0) continue;
      double total = 0.0;
      for (int v = 0; v < vocab; ++v) total += p.at(b, v);
      if (std::abs(total - 1.0) > 1e-6) {
        throw ContractError("distribution row sums to " + std::to_string(total));
      }
    }
    Var soft = ops::MatMul(probs[t], table);
    rows.push_back(ops::Add(ops::MaskRows(soft, valid), ops::MaskRows(fill, invalid)));
  }
  for (int b = 0; b < batch; ++b) lengths[b] = std::max(lengths[b], 1);
  return ops::Reshape(ops::Concat(rows, 0), {steps, batch, table.value().dim(1)});
}

void ExportParams(const std::vector<Parameter *> &params, NamedTensors &out) {
  for (const Parameter *p : params) out.emplace_back(p->name, p->value);
}

void ImportParams(const std::vector<Parameter *> &params, const NamedTensors &in) {
  for (Parameter *p : params) {
    auto it = std::find_if(in.begin(), in.end(), [&](const auto &e) { return e.first == p->name; });
    if (it == in.end()) throw FormatError("checkpoint lacks tensor '" + p->name + "'");
    if (it->second.shape() != p->value.shape()) {
      throw FormatError("tensor '" + p->name + "' has shape " + it->second.ShapeString() +
                        ", model expects " + p->value.ShapeString());
    }
    p->value = it->second;
    p->grad = Tensor(p->value.shape());
  }
}

}  // namespace stylerl
