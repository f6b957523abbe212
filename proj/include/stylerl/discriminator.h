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

#ifndef STYLERL_DISCRIMINATOR_H_
#define STYLERL_DISCRIMINATOR_H_

#include <cstdint>
#include <vector>

#include "stylerl/layers.h"

namespace stylerl {

struct DiscriminatorConfig {
  int vocab_size = 0;
  int embed_dim = 32;
  int hidden = 64;
};

// Recurrent real-vs-generated scorer f_adv(x). The final LSTM state of each
// row goes through a logistic head that starts at zero.
class NaturalnessDiscriminator {
 public:
  NaturalnessDiscriminator() = default;
  NaturalnessDiscriminator(const DiscriminatorConfig &config, uint64_t seed);

  const DiscriminatorConfig &config() const { return config_; }
  std::vector<Parameter *> Params();

  // Logits [B,1].
  Var Logits(Graph &g, const std::vector<TokenIds> &xs);
  Var LogitsSoft(Graph &g, const std::vector<Var> &probs, std::vector<int> lengths);

  double Prob(const TokenIds &x);
  std::vector<double> Probs(const std::vector<TokenIds> &xs);

  Parameter embed;
  LstmCell cell;
  Parameter head_w, head_b;

 private:
  Var Encode(Graph &g, Var embedded, const std::vector<int> &lengths);

  DiscriminatorConfig config_;
};

}  // namespace stylerl

#endif  // STYLERL_DISCRIMINATOR_H_
