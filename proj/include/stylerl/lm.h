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

#ifndef STYLERL_LM_H_
#define STYLERL_LM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "stylerl/layers.h"

namespace stylerl {

struct LMConfig {
  int vocab_size = 0;
  int embed_dim = 32;
  int hidden = 64;
};

struct LMFitConfig {
  int epochs = 3;
  int batch_size = 32;
  double lr = 1e-3;
  uint64_t seed = 1;
};

// Left-to-right recurrent language model. Reads [BOS, x...] and predicts
// [x..., EOS]. The projection starts at zero, so an untrained model is
// uniform over the vocabulary.
class NeuralLM {
 public:
  NeuralLM() = default;
  NeuralLM(const LMConfig &config, uint64_t seed);

  const LMConfig &config() const { return config_; }
  std::vector<Parameter *> Params();

  // Mean per-token NLL over every token of the batch (EOS included).
  Var Loss(Graph &g, const std::vector<TokenIds> &xs);

  // Summed NLL and token count (|x| + 1) per sentence.
  std::vector<std::pair<double, int>> SentenceNll(const std::vector<TokenIds> &xs);
  // exp of mean per-token NLL; ContractError on an empty sentence.
  double Perplexity(const TokenIds &x);
  std::vector<double> Perplexities(const std::vector<TokenIds> &xs);
  // exp(total NLL / total tokens).
  double CorpusPerplexity(const std::vector<TokenIds> &xs);

  // Identifies the sentences the model was fitted on.
  const std::string &fingerprint() const { return fingerprint_; }
  void set_fingerprint(std::string f) { fingerprint_ = std::move(f); }

  Parameter embed;
  GruCell cell;
  Parameter out_w, out_b;

 private:
  Var LogProbs(Graph &g, const std::vector<TokenIds> &xs, std::vector<int> *targets, int *steps);

  LMConfig config_;
  std::string fingerprint_ = "unfitted";
};

// "<tag>:n=<count>:fnv=<hex>" over the sentences in order.
std::string CorpusFingerprint(const std::string &tag, const std::vector<TokenIds> &xs);

// Shuffled minibatch training with Adam. Returns the mean loss of the last
// epoch and sets the fingerprint.
double FitLM(NeuralLM &lm, const std::vector<TokenIds> &xs, const LMFitConfig &config,
             const std::string &tag);

}  // namespace stylerl

#endif  // STYLERL_LM_H_
