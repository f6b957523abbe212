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

#include "stylerl/discriminator.h"

#include <algorithm>

#include "stylerl/errors.h"

namespace stylerl {

NaturalnessDiscriminator::NaturalnessDiscriminator(const DiscriminatorConfig &config,
                                                   uint64_t seed)
    : config_(config) {
  std::mt19937_64 rng(seed);
  embed = Parameter("adv.embed", UniformTensor({config.vocab_size, config.embed_dim}, rng));
  cell = LstmCell("adv.lstm", config.embed_dim, config.hidden, rng);
  head_w = Parameter("adv.head.w", Tensor({config.hidden, 1}));
  head_b = Parameter("adv.head.b", Tensor({1, 1}));
}

std::vector<Parameter *> NaturalnessDiscriminator::Params() {
  std::vector<Parameter *> p = {&embed};
  for (Parameter *q : cell.Params()) p.push_back(q);
  p.push_back(&head_w);
  p.push_back(&head_b);
  return p;
}

Var NaturalnessDiscriminator::Encode(Graph &g, Var embedded, const std::vector<int> &lengths) {
  const int steps = embedded.value().dim(0);
  const int batch = embedded.value().dim(1);
  Var flat = ops::Reshape(embedded, {steps * batch, config_.embed_dim});
  Var projected = cell.Project(g, flat);
  Var h = g.Constant(Tensor({batch, config_.hidden}));
  Var c = g.Constant(Tensor({batch, config_.hidden}));
  std::vector<double> mask(batch);
  for (int t = 0; t < steps; ++t) {
    Var nh = h, nc = c;
    cell.Step(g, ops::SliceRows(projected, t * batch, (t + 1) * batch), nh, nc);
    for (int b = 0; b < batch; ++b) mask[b] = t < lengths[b] ? 1.0 : 0.0;
    h = MaskedUpdate(h, nh, mask);
    c = MaskedUpdate(c, nc, mask);
  }
  return ops::Add(ops::MatMul(h, g.Param(head_w)), g.Param(head_b));
}

Var NaturalnessDiscriminator::Logits(Graph &g, const std::vector<TokenIds> &xs) {
  std::vector<int> lengths;
  Var emb = EmbedSequences(g.Param(embed), xs, 1, &lengths);
  return Encode(g, emb, lengths);
}

Var NaturalnessDiscriminator::LogitsSoft(Graph &g, const std::vector<Var> &probs,
                                         std::vector<int> lengths) {
  Var emb = EmbedDistributions(g.Param(embed), probs, lengths, 1);
  return Encode(g, emb, lengths);
}

double NaturalnessDiscriminator::Prob(const TokenIds &x) { return Probs({x})[0]; }

std::vector<double> NaturalnessDiscriminator::Probs(const std::vector<TokenIds> &xs) {
  constexpr size_t kChunk = 64;
  std::vector<double> out(xs.size());
  for (size_t start = 0; start < xs.size(); start += kChunk) {
    const size_t end = std::min(xs.size(), start + kChunk);
    Graph g(false);
    std::vector<TokenIds> chunk(xs.begin() + start, xs.begin() + end);
    Var p = ops::Sigmoid(Logits(g, chunk));
    for (size_t i = start; i < end; ++i) out[i] = p.value()[i - start];
  }
  return out;
}

}  // namespace stylerl
