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

#ifndef STYLERL_BLEU_H_
#define STYLERL_BLEU_H_

#include <array>
#include <vector>

#include "stylerl/vocab.h"

namespace stylerl {

inline constexpr int kBleuMaxOrder = 4;

// Sufficient statistics of corpus BLEU.
struct BleuStats {
  std::array<long, kBleuMaxOrder> matches{};
  std::array<long, kBleuMaxOrder> totals{};
  long hyp_length = 0;
  long ref_length = 0;

  void Add(const BleuStats &other);
  // Score in [0, 100]. Orders with no hypothesis n-grams are left out of the
  // geometric mean; a zero match count for n >= 2 is smoothed to
  // (0 + 1) / (total + 1). No unigram match means 0.
  double Score(int max_order = kBleuMaxOrder) const;
  double BrevityPenalty() const;
};

// Clipped n-gram counts of one hypothesis against its references. The
// reference length is the one closest to the hypothesis length (shorter on
// ties).
BleuStats SentenceStats(const Sentence &hyp, const std::vector<Sentence> &refs,
                        int max_order = kBleuMaxOrder);

// BLEU in [0, 100]; hyps and refs are aligned, refs[i] holds the references
// of hyps[i].
double CorpusBleu(const std::vector<Sentence> &hyps, const std::vector<std::vector<Sentence>> &refs,
                  int max_order = kBleuMaxOrder);
// Single-reference convenience overload.
double CorpusBleu(const std::vector<Sentence> &hyps, const std::vector<Sentence> &refs,
                  int max_order = kBleuMaxOrder);

// Smoothed BLEU of one pair in [0, 1].
double SentenceBleu(const Sentence &hyp, const Sentence &ref, int max_order = kBleuMaxOrder);

}  // namespace stylerl

#endif  // STYLERL_BLEU_H_
