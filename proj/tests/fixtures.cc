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

#include "fixtures.h"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "stylerl/generator.h"
#include "stylerl/optim.h"

namespace stylerl::testing {

// Reference implementation kept deliberately different from the library:
// n-grams are space-joined strings in ordered maps and the statistics are
// recomputed from scratch for every call.
namespace {

std::vector<std::string> Split(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::map<std::string, int> Grams(const std::vector<std::string> &w, int n) {
  std::map<std::string, int> out;
  for (int i = 0; i + n <= static_cast<int>(w.size()); ++i) {
    std::string key = w[i];
    for (int j = 1; j < n; ++j) key += " " + w[i + j];
    ++out[key];
  }
  return out;
}

}  // namespace

double ReferenceBleu(const std::vector<std::string> &hyps,
                     const std::vector<std::vector<std::string>> &refs) {
  double match[5] = {0}, total[5] = {0};
  double c = 0, r = 0;
  for (size_t k = 0; k < hyps.size(); ++k) {
    auto h = Split(hyps[k]);
    c += h.size();
    // Closest reference length, shorter wins ties.
    double best = -1;
    for (const auto &ref : refs[k]) {
      const double len = static_cast<double>(Split(ref).size());
      const double d = std::fabs(len - h.size()), bd = std::fabs(best - h.size());
      if (best < 0 || d < bd || (d == bd && len < best)) best = len;
    }
    r += best;
    for (int n = 1; n <= 4; ++n) {
      auto hg = Grams(h, n);
      std::map<std::string, int> clip;
      for (const auto &ref : refs[k]) {
        for (const auto &[g, cnt] : Grams(Split(ref), n)) clip[g] = std::max(clip[g], cnt);
      }
      for (const auto &[g, cnt] : hg) {
        total[n] += cnt;
        match[n] += std::min(cnt, clip.count(g) ? clip[g] : 0);
      }
    }
  }
  if (match[1] == 0) return 0.0;
  double log_sum = 0;
  int orders = 0;
  for (int n = 1; n <= 4; ++n) {
    if (total[n] == 0) continue;
    const double p = match[n] > 0 ? match[n] / total[n] : 1.0 / (total[n] + 1.0);
    log_sum += std::log(p);
    ++orders;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / orders);
}

const std::vector<std::pair<std::string, std::string>> &BleuFixturePairs() {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"the food was great .", "the food was terrible ."},
      {"i loved the staff here", "i loved the staff here"},
      {"service was slow and the room was dirty", "the room was dirty and service was slow"},
      {"a b c d e f g", "a b c x e f g"},
      {"great", "the pizza was great"},
      {"the the the the", "the cat sat on the mat"},
      {"our waiter was friendly and quick", "our waiter was rude"},
      {"this place is a gem", "this place is a total gem indeed"},
      {"completely unrelated words here", "nothing matches at all"},
      {"the coffee here is weak on our visit .", "the coffee here is strong on our visit ."},
  };
  return kPairs;
}

SyntheticSpec SmallSpec(int per_style, int eval_per_style, uint64_t seed) {
  SyntheticSpec spec = SyntheticSpec::Default();
  spec.train_per_style = per_style;
  spec.dev_per_style = eval_per_style;
  spec.test_per_style = eval_per_style;
  spec.seed = seed;
  return spec;
}

std::vector<Sentence> PrefixInjected(const SyntheticSpec &spec, const std::vector<Sentence> &sources,
                                     const std::vector<int> &targets) {
  std::vector<Sentence> out;
  for (size_t i = 0; i < sources.size(); ++i) {
    const auto &lex = spec.strong[targets[i]];
    Sentence y = {lex[i % lex.size()]};
    y.insert(y.end(), sources[i].begin(), sources[i].end());
    out.push_back(std::move(y));
  }
  return out;
}

void Flatten(const StyleSplit &split, std::vector<Sentence> *sources, std::vector<int> *targets) {
  for (int s = 0; s < 2; ++s) {
    for (const Sentence &x : split[s]) {
      sources->push_back(x);
      targets->push_back(1 - s);
    }
  }
}

int ReinforceToyUpdates(uint64_t seed, RolloutMode mode, int max_updates) {
  constexpr int kBatch = 8;
  Generator gen({kNumSpecials + 5, 8, 16}, seed);
  AdamConfig ac;
  ac.lr = 1e-3;
  Adam opt(gen.Params(), ac);
  std::mt19937_64 sampler(seed ^ 0x70f1ULL);
  const std::vector<TokenIds> xs(kBatch, TokenIds{kNumSpecials});
  const std::vector<int> styles(kBatch, 0), lens(kBatch, 1);
  for (int k = 0; k <= max_updates; ++k) {
    const TokenIds greedy = gen.Greedy({xs[0]}, {0}, {1})[0];
    if (greedy.size() == 1 && greedy[0] == kToyTarget) return k;
    if (k == max_updates) break;
    Graph g;
    Rollout r = gen.Unroll(g, xs, styles, lens, false,
                           mode == RolloutMode::kSample ? &sampler : nullptr);
    std::vector<double> rewards(kBatch);
    for (int b = 0; b < kBatch; ++b) rewards[b] = r.tokens[b][0] == kToyTarget ? 1.0 : 0.0;
    g.Backward(ReinforceLoss(r, rewards));
    opt.Step();
  }
  return -1;
}

}  // namespace stylerl::testing
