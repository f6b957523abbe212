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

#include "stylerl/generator.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stylerl/errors.h"

namespace stylerl {

Generator::Generator(const GeneratorConfig &config, uint64_t seed) : config_(config) {
  if (config.vocab_size <= kNumSpecials) throw ContractError("generator: vocabulary too small");
  std::mt19937_64 rng(seed);
  embed = Parameter("gen.embed", UniformTensor({config.vocab_size, config.embed_dim}, rng));
  cell = GruCell("gen.gru", config.embed_dim, config.hidden, rng);
  const int memory_dim = config.hidden + config.embed_dim;
  attn_w = Parameter("gen.attn.w", UniformTensor({config.hidden, memory_dim}, rng));
  out_w = Parameter("gen.out.w", UniformTensor({config.hidden + memory_dim, config.vocab_size}, rng));
  out_b = Parameter("gen.out.b", Tensor({1, config.vocab_size}));
  banned_.assign(config.vocab_size, false);
  for (int id : {kPad, kBos, kStyle0, kStyle1}) banned_[id] = true;
}

std::vector<Parameter *> Generator::Params() {
  std::vector<Parameter *> p = {&embed};
  for (Parameter *q : cell.Params()) p.push_back(q);
  p.push_back(&attn_w);
  p.push_back(&out_w);
  p.push_back(&out_b);
  return p;
}

void Generator::CheckIds(const TokenIds &ids) const {
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw ContractError("generator: token id " + std::to_string(id) +
                          " is not a vocabulary id (encode OOV tokens as UNK)");
    }
  }
}

Generator::Decoded Generator::Run(Graph &g, const std::vector<TokenIds> &xs,
                                  const std::vector<int> &styles,
                                  const std::vector<TokenIds> &continuation) {
  const int batch = static_cast<int>(xs.size());
  if (batch == 0) throw ContractError("generator: empty batch");
  if (static_cast<int>(styles.size()) != batch) throw ContractError("generator: styles/batch mismatch");
  int prefix = 0, cont = 0;
  for (int b = 0; b < batch; ++b) {
    if (xs[b].empty()) throw ContractError("generator: empty source sentence");
    if (styles[b] != 0 && styles[b] != 1) throw ContractError("generator: style must be 0 or 1");
    CheckIds(xs[b]);
    prefix = std::max(prefix, static_cast<int>(xs[b].size()) + 2);
    if (!continuation.empty()) {
      CheckIds(continuation[b]);
      cont = std::max(cont, static_cast<int>(continuation[b].size()));
    }
  }
  const int steps = prefix + cont;
  std::vector<int> ids(static_cast<size_t>(steps) * batch, kPad);
  std::vector<int> offset(batch);
  for (int b = 0; b < batch; ++b) {
    offset[b] = prefix - (static_cast<int>(xs[b].size()) + 2);
    int t = offset[b];
    ids[static_cast<size_t>(t++) * batch + b] = kBos;
    for (int id : xs[b]) ids[static_cast<size_t>(t++) * batch + b] = id;
    ids[static_cast<size_t>(t) * batch + b] = StyleToken(styles[b]);
    if (!continuation.empty()) {
      for (size_t j = 0; j < continuation[b].size(); ++j) {
        ids[static_cast<size_t>(prefix + j) * batch + b] = continuation[b][j];
      }
    }
  }
  Var embedded = ops::EmbeddingLookup(g.Param(embed), ids);
  Var projected = cell.Project(g, embedded);
  Var h = g.Constant(Tensor({batch, config_.hidden}));
  Decoded d;
  std::vector<Var> memory;
  std::vector<double> mask(batch);
  d.valid.resize(static_cast<size_t>(prefix) * batch);
  for (int t = 0; t < steps; ++t) {
    Var next = cell.Step(g, ops::SliceRows(projected, t * batch, (t + 1) * batch), h);
    if (t < prefix) {
      for (int b = 0; b < batch; ++b) {
        mask[b] = t >= offset[b] ? 1.0 : 0.0;
        d.valid[static_cast<size_t>(t) * batch + b] = t >= offset[b];
      }
      h = MaskedUpdate(h, next, mask);
      std::vector<Var> slot = {h, ops::SliceRows(embedded, t * batch, (t + 1) * batch)};
      memory.push_back(ops::Concat(slot, -1));
    } else {
      h = next;
    }
    if (t >= prefix - 1) d.states.push_back(h);
  }
  d.memory = ops::Concat(memory, 0);
  return d;
}

Var Generator::Readout(Graph &g, Var state, const Decoded &d) {
  Var context = ops::Attend(ops::MatMul(state, g.Param(attn_w)), d.memory, d.valid);
  std::vector<Var> parts = {state, context};
  return ops::Concat(parts, -1);
}

Var Generator::Logits(Graph &g, Var readout) {
  return ops::Add(ops::MatMul(readout, g.Param(out_w)), g.Param(out_b));
}

TeacherForced Generator::Score(Graph &g, const std::vector<TokenIds> &xs,
                               const std::vector<int> &styles,
                               const std::vector<TokenIds> &ys) {
  const int batch = static_cast<int>(xs.size());
  if (static_cast<int>(ys.size()) != batch) throw ContractError("generator: targets/batch mismatch");
  std::vector<TokenIds> continuation(batch);
  TeacherForced tf;
  tf.batch = batch;
  for (int b = 0; b < batch; ++b) {
    if (ys[b].empty() || ys[b].back() != kEos) {
      throw ContractError("generator: target sequence must end with EOS");
    }
    CheckIds(ys[b]);
    continuation[b].assign(ys[b].begin(), ys[b].end() - 1);
    tf.lengths.push_back(static_cast<int>(ys[b].size()));
    tf.steps = std::max(tf.steps, static_cast<int>(ys[b].size()));
  }
  Decoded d = Run(g, xs, styles, continuation);
  std::vector<Var> readouts;
  for (Var s : d.states) readouts.push_back(Readout(g, s, d));
  tf.log_probs = ops::LogSoftmax(Logits(g, ops::Concat(readouts, 0)));
  tf.targets.assign(static_cast<size_t>(tf.steps) * batch, kPad);
  for (int b = 0; b < batch; ++b) {
    for (size_t t = 0; t < ys[b].size(); ++t) tf.targets[t * batch + b] = ys[b][t];
  }
  return tf;
}

Var Generator::WeightedLogLikelihood(Graph &g, const TeacherForced &tf,
                                     const std::vector<double> &row_weights) {
  (void)g;
  std::vector<double> w(tf.targets.size(), 0.0);
  for (int b = 0; b < tf.batch; ++b) {
    for (int t = 0; t < tf.lengths[b]; ++t) w[static_cast<size_t>(t) * tf.batch + b] = row_weights[b];
  }
  return ops::PickSum(tf.log_probs, tf.targets, w);
}

std::vector<double> Generator::StepLogProbs(const TokenIds &x, int style, const TokenIds &y) {
  Graph g(false);
  TeacherForced tf = Score(g, {x}, {style}, {y});
  const Tensor &lp = tf.log_probs.value();
  std::vector<double> out;
  for (size_t t = 0; t < y.size(); ++t) out.push_back(lp.at(static_cast<int>(t), y[t]));
  return out;
}

int Generator::SampleRow(const Tensor &logits, int r, std::mt19937_64 &rng) const {
  const int cols = logits.cols();
  const double *row = logits.data() + static_cast<size_t>(r) * cols;
  double top = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < cols; ++c) {
    if (!banned_[c]) top = std::max(top, row[c]);
  }
  std::vector<double> weights(cols, 0.0);
  for (int c = 0; c < cols; ++c) {
    if (!banned_[c]) weights[c] = std::exp(row[c] - top);
  }
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  return pick(rng);
}

Rollout Generator::Unroll(Graph &g, const std::vector<TokenIds> &xs,
                          const std::vector<int> &styles, const std::vector<int> &max_lens,
                          bool with_probs, std::mt19937_64 *sampler) {
  const int batch = static_cast<int>(xs.size());
  if (static_cast<int>(max_lens.size()) != batch) throw ContractError("generator: max_lens/batch mismatch");
  for (int m : max_lens) {
    if (m < 1) throw ContractError("generator: max_len must be at least 1");
  }
  Decoded d = Run(g, xs, styles, {});
  Var h = d.states.back();
  Rollout out;
  out.tokens.resize(batch);
  std::vector<bool> done(batch, false);
  while (true) {
    Var logits = Logits(g, Readout(g, h, d));
    out.log_probs.push_back(ops::LogSoftmax(logits));
    if (with_probs) out.probs.push_back(ops::Softmax(logits));
    std::vector<int> next(batch, kPad);
    bool all_done = true;
    for (int b = 0; b < batch; ++b) {
      if (done[b]) continue;
      const int tok = sampler != nullptr ? SampleRow(logits.value(), b, *sampler)
                                         : ArgmaxRow(logits.value(), b, banned_);
      out.tokens[b].push_back(tok);
      next[b] = tok;
      done[b] = tok == kEos || static_cast<int>(out.tokens[b].size()) >= max_lens[b];
      all_done = all_done && done[b];
    }
    if (all_done) break;
    Var in = cell.Project(g, ops::EmbeddingLookup(g.Param(embed), next));
    h = cell.Step(g, in, h);
  }
  return out;
}

std::vector<TokenIds> Generator::Greedy(const std::vector<TokenIds> &xs,
                                        const std::vector<int> &styles,
                                        const std::vector<int> &max_lens) {
  Graph g(false);
  return Unroll(g, xs, styles, max_lens, false).tokens;
}

}  // namespace stylerl
