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

#ifndef STYLERL_REWARDS_H_
#define STYLERL_REWARDS_H_

#include <string>

#include "stylerl/classifier.h"
#include "stylerl/discriminator.h"
#include "stylerl/lm.h"
#include "stylerl/sim.h"

namespace stylerl {

inline constexpr double kProbFloor = 1e-12;

enum class LpVariant {
  // e^{1 - min/max}: grows with the length mismatch.
  kVerbatim,
  // e^{1 - max/min}: shrinks with the length mismatch.
  kPenalize,
};

enum class ContentReward { kSimile, kBleu };

LpVariant ParseLpVariant(const std::string &name);
std::string LpVariantName(LpVariant v);
ContentReward ParseContentReward(const std::string &name);
std::string ContentRewardName(ContentReward c);

struct RewardWeights {
  double cls = 1.0;
  double adv = 0.5;
  double sim = 20.0;
  double lang = 2.0;
  double rec = 1.0;
  double cyc = 0.0;
  double alpha = 0.25;

  // Fine-tuning weights.
  static RewardWeights Finetune() { return RewardWeights(); }
  // Bootstrap weights: cycle, classifier and reconstruction terms only.
  static RewardWeights Bootstrap();
  // ConfigError on a negative entry.
  void Validate() const;
};

// Lengths in tokens; both must be positive.
double LengthPenalty(size_t r_len, size_t h_len, LpVariant variant = LpVariant::kVerbatim);
double LengthPenalty(const Sentence &r, const Sentence &h, LpVariant variant = LpVariant::kVerbatim);

// LP(x, y)^alpha * SIM(x, y).
double SimileReward(const SimModel &sim, const Sentence &x, const Sentence &y, double alpha,
                    LpVariant variant = LpVariant::kVerbatim);

// Smoothed sentence BLEU of y against x, in [0, 1].
double BleuReward(const Sentence &x, const Sentence &y);

// log(max(p, 1e-12)). Clamped calls are counted in ClampEvents().
double ClampedLog(double p);
long ClampEvents();

// log f_cls(y, target).
double StyleReward(StyleClassifier &cls, const TokenIds &y, int target);
// log f_adv(y).
double NaturalnessReward(NaturalnessDiscriminator &adv, const TokenIds &y);
// ppl(x) - ppl(y).
double FluencyReward(NeuralLM &lm, const TokenIds &x, const TokenIds &y);

// Loss sum over the named terms; used by the training loop and checked
// against the weighted sum in tests.
struct LossTerms {
  double cls = 0.0, adv = 0.0, sim = 0.0, lang = 0.0, rec = 0.0, cyc = 0.0;
};
double CombineLosses(const RewardWeights &w, const LossTerms &l);

}  // namespace stylerl

#endif  // STYLERL_REWARDS_H_
