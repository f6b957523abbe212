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

#ifndef STYLERL_TESTS_FIXTURES_H_
#define STYLERL_TESTS_FIXTURES_H_

#include <string>
#include <utility>
#include <vector>

#include "stylerl/corpus.h"
#include "stylerl/synthetic.h"
#include "stylerl/training.h"

namespace stylerl::testing {

// Corpus BLEU written independently of the library: n-grams are
// space-joined strings in ordered maps. refs[i] holds the references of
// hyps[i].
double ReferenceBleu(const std::vector<std::string> &hyps,
                     const std::vector<std::vector<std::string>> &refs);
// Ten fixed (hypothesis, reference) pairs.
const std::vector<std::pair<std::string, std::string>> &BleuFixturePairs();

// Default synthetic spec scaled down to `per_style` training sentences.
SyntheticSpec SmallSpec(int per_style, int eval_per_style, uint64_t seed = 1);

// Outputs that prepend a strong word of the target style to each source and
// otherwise copy it: the metric-gaming pattern the first-token probe targets.
std::vector<Sentence> PrefixInjected(const SyntheticSpec &spec, const std::vector<Sentence> &sources,
                                     const std::vector<int> &targets);

// Sources and target styles of a split flattened in style order.
void Flatten(const StyleSplit &split, std::vector<Sentence> *sources, std::vector<int> *targets);

// One-step bandit: a generator over five regular tokens is rewarded 1 when
// its single output token is regular token #3. Returns the number of
// REINFORCE updates after which greedy decoding first picks that token, or
// -1 when it does not within `max_updates`.
inline constexpr int kToyTarget = kNumSpecials + 3;
int ReinforceToyUpdates(uint64_t seed, RolloutMode mode, int max_updates);

}  // namespace stylerl::testing

#endif  // STYLERL_TESTS_FIXTURES_H_
