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

#ifndef STYLERL_SYNTHETIC_H_
#define STYLERL_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stylerl/corpus.h"
#include "stylerl/sim.h"

namespace stylerl {

// A topic noun whose occurrences are concentrated in one class.
struct PlantedSkew {
  std::string token = "game";
  Style style = 0;
  // Share of the token's occurrences that fall in `style`.
  double probability = 0.99;
  // Fraction of `style` sentences that use the token as their noun.
  double rate = 0.1;
};

// Templated two-style corpus. Templates contain the slots {noun}, {pol} and
// {tail}; {pol} is filled from the sentence's own polarity lexicon. Each
// lexicon has a strong tier used exclusively by its class and a mild tier
// that leaks into the other class with probability `mild_noise`.
struct SyntheticSpec {
  std::vector<std::string> templates;
  std::array<std::vector<std::string>, 2> strong;
  std::array<std::vector<std::string>, 2> mild;
  std::vector<std::string> nouns;
  std::vector<std::string> tails;
  double strong_rate = 0.3;
  double mild_noise = 0.1;
  std::optional<PlantedSkew> skew;
  int train_per_style = 5000;
  int dev_per_style = 500;
  int test_per_style = 500;
  int embedding_dim = 32;
  // Norm of topic-noun vectors relative to the unit-norm polarity bases.
  double noun_norm = 2.0;
  double synonym_noise = 0.01;
  uint64_t seed = 1;

  static SyntheticSpec Default();
  // Throws ConfigError describing the first violated constraint.
  void Validate() const;
};

struct SyntheticData {
  StyledCorpus corpus;
  SimModel embeddings;
};

// Test references are the test sentences with the polarity word replaced by
// the same-index word of the other style's lexicon tier.
SyntheticData GenerateSynthetic(const SyntheticSpec &spec);

}  // namespace stylerl

#endif  // STYLERL_SYNTHETIC_H_
