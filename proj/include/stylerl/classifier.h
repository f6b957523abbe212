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

#ifndef STYLERL_CLASSIFIER_H_
#define STYLERL_CLASSIFIER_H_

#include <cstdint>
#include <vector>

#include "stylerl/layers.h"

namespace stylerl {

struct ClassifierConfig {
  int vocab_size = 0;
  int embed_dim = 64;
  int filters = 32;
  std::vector<int> widths = {2, 3, 4};
  int style_dim = 8;
  // Width of the tanh layer between the joined features and the head.
  int hidden = 32;
};

// Convolutional style scorer f_cls(x, s): probability that sentence x is
// coherent with style s. Max-pooled n-gram features are concatenated with a
// learned style embedding and fed to a logistic head. The head starts at
// zero, so an untrained classifier answers 0.5.
class StyleClassifier {
 public:
  StyleClassifier() = default;
  StyleClassifier(const ClassifierConfig &config, uint64_t seed);

  const ClassifierConfig &config() const { return config_; }
  std::vector<Parameter *> Params();

  // Logits [B,1].
  Var Logits(Graph &g, const std::vector<TokenIds> &xs, const std::vector<int> &styles);
  // Same network on probability-weighted embeddings.
  Var LogitsSoft(Graph &g, const std::vector<Var> &probs, std::vector<int> lengths,
                 const std::vector<int> &styles);

  double Prob(const TokenIds &x, int style);
  std::vector<double> Probs(const std::vector<TokenIds> &xs, const std::vector<int> &styles);

  Parameter embed;
  std::vector<Parameter> conv_w, conv_b;
  Parameter style_embed;
  Parameter mix_w, mix_b;
  Parameter head_w, head_b;

 private:
  Var Head(Graph &g, Var embedded, const std::vector<int> &lengths, const std::vector<int> &styles);
  int MinSteps() const;

  ClassifierConfig config_;
};

}  // namespace stylerl

#endif  // STYLERL_CLASSIFIER_H_
