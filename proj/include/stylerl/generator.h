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

#ifndef STYLERL_GENERATOR_H_
#define STYLERL_GENERATOR_H_

#include <cstdint>
#include <vector>

#include "stylerl/layers.h"

namespace stylerl {

struct GeneratorConfig {
  int vocab_size = 0;
  int embed_dim = 64;
  int hidden = 128;
};

// Output of a recorded greedy unroll. Step t holds the distribution that
// produced token t of every row; rows stop at EOS or their length limit but
// the batch keeps stepping until all rows have stopped.
struct Rollout {
  std::vector<Var> log_probs;
  std::vector<Var> probs;
  // Emitted tokens per row, including the terminating EOS when one was
  // produced within the limit.
  std::vector<TokenIds> tokens;

  int steps() const { return static_cast<int>(log_probs.size()); }
};

// Teacher-forced scores: log_probs is [steps * batch, V] in time-major order,
// targets[t * batch + b] is token t of row b (PAD past its end).
struct TeacherForced {
  Var log_probs;
  std::vector<int> targets;
  std::vector<int> lengths;
  int batch = 0;
  int steps = 0;
};

// Style-conditioned sequence completion with a single recurrent decoder.
// The decoder reads [BOS, x..., STYLE_s] and then continues autoregressively;
// everything after the style token is the output sentence.
class Generator {
 public:
  Generator() = default;
  Generator(const GeneratorConfig &config, uint64_t seed);

  const GeneratorConfig &config() const { return config_; }
  std::vector<Parameter *> Params();

  // Scores targets ys (each ending with EOS) given sources xs and styles.
  TeacherForced Score(Graph &g, const std::vector<TokenIds> &xs,
                      const std::vector<int> &styles,
                      const std::vector<TokenIds> &ys);

  // sum_b row_weights[b] * sum_t log p(y_bt | ...). With per-token weights
  // 1/|y_b| this is the length-normalized log-likelihood.
  Var WeightedLogLikelihood(Graph &g, const TeacherForced &tf,
                            const std::vector<double> &row_weights);

  // log p_g(y_t | y_<t, x, s) for every step of one target.
  std::vector<double> StepLogProbs(const TokenIds &x, int style, const TokenIds &y);

  // Deterministic argmax decoding; never emits PAD, BOS or style tokens.
  // Each returned sequence has at most max_lens[b] tokens.
  std::vector<TokenIds> Greedy(const std::vector<TokenIds> &xs, const std::vector<int> &styles,
                               const std::vector<int> &max_lens);

  // Recorded unroll: the chosen token is fed back as the next input. Tokens
  // are argmax picks, or draws from the allowed part of the distribution when
  // `sampler` is given. probs are only materialized when `with_probs` is set.
  Rollout Unroll(Graph &g, const std::vector<TokenIds> &xs, const std::vector<int> &styles,
                 const std::vector<int> &max_lens, bool with_probs,
                 std::mt19937_64 *sampler = nullptr);

  // Tokens that greedy decoding may never produce.
  const std::vector<bool> &banned() const { return banned_; }

  Parameter embed;
  GruCell cell;
  // Decoder states attend over their own prefix (states and input
  // embeddings); the output projection reads [state; context].
  Parameter attn_w;
  Parameter out_w, out_b;

 private:
  struct Decoded {
    // States that predict each output position (one per continuation step
    // plus the style-token step).
    std::vector<Var> states;
    // Prefix states joined with their input embeddings, time-major
    // [prefix*B, hidden+embed_dim], and their validity.
    Var memory;
    std::vector<char> valid;
  };

  // Runs the decoder over left-padded prefixes followed by `continuation`
  // (time-major, right-padded).
  Decoded Run(Graph &g, const std::vector<TokenIds> &xs, const std::vector<int> &styles,
              const std::vector<TokenIds> &continuation);
  // [state; context] rows for one step of states [B,hidden].
  Var Readout(Graph &g, Var state, const Decoded &d);
  Var Logits(Graph &g, Var readout);
  void CheckIds(const TokenIds &ids) const;
  int SampleRow(const Tensor &logits, int r, std::mt19937_64 &rng) const;

  GeneratorConfig config_;
  std::vector<bool> banned_;
};

// Default decode limit for a source sentence.
inline int DefaultMaxLen(const TokenIds &x) { return static_cast<int>(x.size()) + 5; }

}  // namespace stylerl

#endif  // STYLERL_GENERATOR_H_
