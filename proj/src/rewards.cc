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

#include "stylerl/rewards.h"

#include <atomic>
#include <cmath>

#include "stylerl/bleu.h"
#include "stylerl/errors.h"

namespace stylerl {
namespace {

std::atomic<long> clamp_events{0};

}  // namespace

LpVariant ParseLpVariant(const std::string &name) {
  if (name == "verbatim") return LpVariant::kVerbatim;
  if (name == "penalize") return LpVariant::kPenalize;
  throw ConfigError("lp_variant must be 'verbatim' or 'penalize', got '" + name + "'");
}

std::string LpVariantName(LpVariant v) {
  return v == LpVariant::kVerbatim ? "verbatim" : "penalize";
}

ContentReward ParseContentReward(const std::string &name) {
  if (name == "simile") return ContentReward::kSimile;
  if (name == "bleu") return ContentReward::kBleu;
  throw ConfigError("content_reward must be 'simile' or 'bleu', got '" + name + "'");
}

std::string ContentRewardName(ContentReward c) {
  return c == ContentReward::kSimile ? "simile" : "bleu";
}

RewardWeights RewardWeights::Bootstrap() {
  RewardWeights w;
  w.cyc = 1.0;
  w.cls = 2.0;
  w.rec = 1.0;
  w.adv = 0.0;
  w.sim = 0.0;
  w.lang = 0.0;
  return w;
}

void RewardWeights::Validate() const {
  for (double v : {cls, adv, sim, lang, rec, cyc, alpha}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("reward weights must be finite and >= 0");
  }
}

double LengthPenalty(size_t r_len, size_t h_len, LpVariant variant) {
  if (r_len == 0 || h_len == 0) throw ContractError("length penalty needs nonempty sentences");
  const double lo = static_cast<double>(std::min(r_len, h_len));
  const double hi = static_cast<double>(std::max(r_len, h_len));
  return variant == LpVariant::kVerbatim ? std::exp(1.0 - lo / hi) : std::exp(1.0 - hi / lo);
}

double LengthPenalty(const Sentence &r, const Sentence &h, LpVariant variant) {
  return LengthPenalty(r.size(), h.size(), variant);
}

double SimileReward(const SimModel &sim, const Sentence &x, const Sentence &y, double alpha,
                    LpVariant variant) {
  if (alpha < 0.0) throw ContractError("alpha must be >= 0");
  const double s = sim.Score(x, y);
  if (alpha == 0.0) return s;
  return std::pow(LengthPenalty(x, y, variant), alpha) * s;
}

double BleuReward(const Sentence &x, const Sentence &y) {
  if (x.empty() || y.empty()) throw ContractError("bleu reward needs nonempty sentences");
  return SentenceBleu(y, x);
}

double ClampedLog(double p) {
  if (!(p >= kProbFloor)) {
    clamp_events.fetch_add(1);
    return std::log(kProbFloor);
  }
  return std::log(p);
}

long ClampEvents() { return clamp_events.load(); }

double StyleReward(StyleClassifier &cls, const TokenIds &y, int target) {
  return ClampedLog(cls.Prob(y, target));
}

double NaturalnessReward(NaturalnessDiscriminator &adv, const TokenIds &y) {
  return ClampedLog(adv.Prob(y));
}

double FluencyReward(NeuralLM &lm, const TokenIds &x, const TokenIds &y) {
  std::vector<double> p = lm.Perplexities({x, y});
  return p[0] - p[1];
}

double CombineLosses(const RewardWeights &w, const LossTerms &l) {
  return w.cls * l.cls + w.adv * l.adv + w.sim * l.sim + w.lang * l.lang + w.rec * l.rec +
         w.cyc * l.cyc;
}

}  // namespace stylerl
