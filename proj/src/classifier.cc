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

#include "stylerl/classifier.h"

#include <algorithm>

#include "stylerl/errors.h"
#include "stylerl/kernels.h"

namespace stylerl {

StyleClassifier::StyleClassifier(const ClassifierConfig &config, uint64_t seed) : config_(config) {
  if (config.widths.empty()) throw ContractError("classifier: no filter widths");
  std::mt19937_64 rng(seed);
  embed = Parameter("cls.embed", UniformTensor({config.vocab_size, config.embed_dim}, rng));
  for (int w : config.widths) {
    const std::string tag = "cls.conv" + std::to_string(w);
    conv_w.emplace_back(tag + ".w", UniformTensor({w * config.embed_dim, config.filters}, rng));
    conv_b.emplace_back(tag + ".b", Tensor({1, config.filters}));
  }
  style_embed = Parameter("cls.style", UniformTensor({2, config.style_dim}, rng));
  const int features = config.filters * static_cast<int>(config.widths.size()) + config.style_dim;
  mix_w = Parameter("cls.mix.w", UniformTensor({features, config.hidden}, rng));
  mix_b = Parameter("cls.mix.b", Tensor({1, config.hidden}));
  head_w = Parameter("cls.head.w", Tensor({config.hidden, 1}));
  head_b = Parameter("cls.head.b", Tensor({1, 1}));
}

std::vector<Parameter *> StyleClassifier::Params() {
  std::vector<Parameter *> p = {&embed};
  for (size_t i = 0; i < conv_w.size(); ++i) {
    p.push_back(&conv_w[i]);
    p.push_back(&conv_b[i]);
  }
  p.push_back(&style_embed);
  p.push_back(&mix_w);
  p.push_back(&mix_b);
  p.push_back(&head_w);
  p.push_back(&head_b);
  return p;
}

int StyleClassifier::MinSteps() const {
  return *std::max_element(config_.widths.begin(), config_.widths.end());
}

Var StyleClassifier::Head(Graph &g, Var embedded, const std::vector<int> &lengths,
                          const std::vector<int> &styles) {
  const int batch = embedded.value().dim(1);
  if (static_cast<int>(styles.size()) != batch) throw ContractError("classifier: styles/batch mismatch");
  for (int s : styles) {
    if (s != 0 && s != 1) throw ContractError("classifier: style must be 0 or 1");
  }
  std::vector<Var> pooled;
  std::vector<int> valid(batch);
  for (size_t i = 0; i < config_.widths.size(); ++i) {
    const int w = config_.widths[i];
    for (int b = 0; b < batch; ++b) valid[b] = std::max(1, lengths[b] - w + 1);
    Var conv = ops::Relu(ops::Conv1d(embedded, g.Param(conv_w[i]), g.Param(conv_b[i]), w));
    pooled.push_back(ops::MaxPoolOverTime(conv, valid));
  }
  pooled.push_back(ops::EmbeddingLookup(g.Param(style_embed), styles));
  // A hidden layer lets the score depend on sentence and style jointly; an
  // affine map of the concatenation would shift every logit by the same
  // style offset.
  Var features = ops::Concat(pooled, -1);
  Var mixed = ops::Tanh(ops::Add(ops::MatMul(features, g.Param(mix_w)), g.Param(mix_b)));
  return ops::Add(ops::MatMul(mixed, g.Param(head_w)), g.Param(head_b));
}

Var StyleClassifier::Logits(Graph &g, const std::vector<TokenIds> &xs,
                            const std::vector<int> &styles) {
  std::vector<int> lengths;
  Var emb = EmbedSequences(g.Param(embed), xs, MinSteps(), &lengths);
  return Head(g, emb, lengths, styles);
}

Var StyleClassifier::LogitsSoft(Graph &g, const std::vector<Var> &probs, std::vector<int> lengths,
                                const std::vector<int> &styles) {
  Var emb = EmbedDistributions(g.Param(embed), probs, lengths, MinSteps());
  return Head(g, emb, lengths, styles);
}

double StyleClassifier::Prob(const TokenIds &x, int style) { return Probs({x}, {style})[0]; }

std::vector<double> StyleClassifier::Probs(const std::vector<TokenIds> &xs,
                                           const std::vector<int> &styles) {
  constexpr size_t kChunk = 64;
  std::vector<double> out(xs.size());
  for (size_t start = 0; start < xs.size(); start += kChunk) {
    const size_t end = std::min(xs.size(), start + kChunk);
    Graph g(false);
    std::vector<TokenIds> chunk(xs.begin() + start, xs.begin() + end);
    std::vector<int> st(styles.begin() + start, styles.begin() + end);
    Var p = ops::Sigmoid(Logits(g, chunk, st));
    for (size_t i = start; i < end; ++i) out[i] = p.value()[i - start];
  }
  return out;
}

}  // namespace stylerl
