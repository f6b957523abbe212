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

#include "stylerl/lm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "stylerl/errors.h"
#include "stylerl/optim.h"

namespace stylerl {

NeuralLM::NeuralLM(const LMConfig &config, uint64_t seed) : config_(config) {
  if (config.vocab_size < 2) throw ContractError("lm: vocabulary too small");
  std::mt19937_64 rng(seed);
  embed = Parameter("lm.embed", UniformTensor({config.vocab_size, config.embed_dim}, rng));
  cell = GruCell("lm.gru", config.embed_dim, config.hidden, rng);
  out_w = Parameter("lm.out.w", Tensor({config.hidden, config.vocab_size}));
  out_b = Parameter("lm.out.b", Tensor({1, config.vocab_size}));
}

std::vector<Parameter *> NeuralLM::Params() {
  std::vector<Parameter *> p = {&embed};
  for (Parameter *q : cell.Params()) p.push_back(q);
  p.push_back(&out_w);
  p.push_back(&out_b);
  return p;
}

Var NeuralLM::LogProbs(Graph &g, const std::vector<TokenIds> &xs, std::vector<int> *targets,
                       int *steps) {
  const int batch = static_cast<int>(xs.size());
  if (batch == 0) throw ContractError("lm: empty batch");
  *steps = 0;
  for (const TokenIds &x : xs) {
    if (x.empty()) throw ContractError("lm: empty sentence");
    for (int id : x) {
      if (id < 0 || id >= config_.vocab_size) throw ContractError("lm: token id out of range");
    }
    *steps = std::max(*steps, static_cast<int>(x.size()) + 1);
  }
  std::vector<TokenIds> inputs(batch);
  targets->assign(static_cast<size_t>(*steps) * batch, kPad);
  for (int b = 0; b < batch; ++b) {
    inputs[b].push_back(kBos);
    inputs[b].insert(inputs[b].end(), xs[b].begin(), xs[b].end());
    for (size_t t = 0; t < xs[b].size(); ++t) (*targets)[t * batch + b] = xs[b][t];
    (*targets)[xs[b].size() * batch + b] = kEos;
  }
  Var projected =
      cell.Project(g, ops::EmbeddingLookup(g.Param(embed), TimeMajor(inputs, *steps)));
  Var h = g.Constant(Tensor({batch, config_.hidden}));
  std::vector<Var> states;
  for (int t = 0; t < *steps; ++t) {
    // Rows past their end keep stepping on PAD; their targets get weight 0.
    h = cell.Step(g, ops::SliceRows(projected, t * batch, (t + 1) * batch), h);
    states.push_back(h);
  }
  Var logits = ops::Add(ops::MatMul(ops::Concat(states, 0), g.Param(out_w)), g.Param(out_b));
  return ops::LogSoftmax(logits);
}

Var NeuralLM::Loss(Graph &g, const std::vector<TokenIds> &xs) {
  std::vector<int> targets;
  int steps = 0;
  Var lp = LogProbs(g, xs, &targets, &steps);
  const int batch = static_cast<int>(xs.size());
  double tokens = 0.0;
  for (const TokenIds &x : xs) tokens += static_cast<double>(x.size() + 1);
  std::vector<double> w(targets.size(), 0.0);
  for (int b = 0; b < batch; ++b) {
    for (size_t t = 0; t <= xs[b].size(); ++t) w[t * batch + b] = -1.0 / tokens;
  }
  return ops::PickSum(lp, targets, w);
}

std::vector<std::pair<double, int>> NeuralLM::SentenceNll(const std::vector<TokenIds> &xs) {
  constexpr size_t kChunk = 64;
  std::vector<std::pair<double, int>> out(xs.size());
  for (size_t start = 0; start < xs.size(); start += kChunk) {
    const size_t end = std::min(xs.size(), start + kChunk);
    const int batch = static_cast<int>(end - start);
    std::vector<TokenIds> chunk(xs.begin() + start, xs.begin() + end);
    Graph g(false);
    std::vector<int> targets;
    int steps = 0;
    const Tensor &lp = LogProbs(g, chunk, &targets, &steps).value();
    for (int b = 0; b < batch; ++b) {
      double nll = 0.0;
      const int n = static_cast<int>(chunk[b].size()) + 1;
      for (int t = 0; t < n; ++t) {
        const size_t row = static_cast<size_t>(t) * batch + b;
        nll -= lp.at(static_cast<int>(row), targets[row]);
      }
      out[start + b] = {nll, n};
    }
  }
  return out;
}

double NeuralLM::Perplexity(const TokenIds &x) { return Perplexities({x})[0]; }

std::vector<double> NeuralLM::Perplexities(const std::vector<TokenIds> &xs) {
  std::vector<double> out;
  for (const auto &[nll, n] : SentenceNll(xs)) out.push_back(std::exp(nll / n));
  return out;
}

double NeuralLM::CorpusPerplexity(const std::vector<TokenIds> &xs) {
  if (xs.empty()) throw ContractError("lm: empty corpus");
  double nll = 0.0;
  long tokens = 0;
  for (const auto &[s, n] : SentenceNll(xs)) {
    nll += s;
    tokens += n;
  }
  return std::exp(nll / static_cast<double>(tokens));
}

std::string CorpusFingerprint(const std::string &tag, const std::vector<TokenIds> &xs) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const TokenIds &x : xs) {
    for (int id : x) mix(static_cast<uint32_t>(id));
    mix(0xffffffffu);
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return tag + ":n=" + std::to_string(xs.size()) + ":fnv=" + hex;
}

double FitLM(NeuralLM &lm, const std::vector<TokenIds> &xs, const LMFitConfig &config,
             const std::string &tag) {
  if (xs.empty()) throw DataError("lm: no training sentences");
  if (config.batch_size < 1 || config.epochs < 0) throw ConfigError("lm: bad fit config");
  AdamConfig ac;
  ac.lr = config.lr;
  Adam opt(lm.Params(), ac);
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  double last = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      std::vector<TokenIds> batch;
      for (size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(xs[order[i]]);
      }
      Graph g;
      Var loss = lm.Loss(g, batch);
      total += loss.value().item();
      ++batches;
      g.Backward(loss);
      opt.Step();
    }
    last = total / batches;
  }
  lm.set_fingerprint(CorpusFingerprint(tag, xs));
  return last;
}

}  // namespace stylerl
