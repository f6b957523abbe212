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

#include "stylerl/bleu.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "stylerl/errors.h"

namespace stylerl {
namespace {

using NgramCounts = std::map<std::vector<std::string>, long>;

NgramCounts Count(const Sentence &s, int n) {
  NgramCounts out;
  for (size_t i = 0; i + n <= s.size(); ++i) {
    ++out[std::vector<std::string>(s.begin() + i, s.begin() + i + n)];
  }
  return out;
}

}  // namespace

void BleuStats::Add(const BleuStats &other) {
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
}

double BleuStats::BrevityPenalty() const {
  if (hyp_length == 0) return 0.0;
  if (hyp_length >= ref_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_length) / hyp_length);
}

double BleuStats::Score(int max_order) const {
  if (max_order < 1 || max_order > kBleuMaxOrder) throw ContractError("bleu: bad max order");
  if (hyp_length == 0 || totals[0] == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_order; ++n) {
    if (totals[n] == 0) continue;
    double m = static_cast<double>(matches[n]);
    double t = static_cast<double>(totals[n]);
    if (matches[n] == 0) {
      m += 1.0;
      t += 1.0;
    }
    log_sum += std::log(m / t);
    ++orders;
  }
  return 100.0 * BrevityPenalty() * std::exp(log_sum / orders);
}

BleuStats SentenceStats(const Sentence &hyp, const std::vector<Sentence> &refs, int max_order) {
  if (refs.empty()) throw ContractError("bleu: no references");
  BleuStats stats;
  stats.hyp_length = static_cast<long>(hyp.size());
  long best = -1;
  for (const Sentence &r : refs) {
    const long len = static_cast<long>(r.size());
    const long d = std::labs(len - stats.hyp_length);
    const long bd = std::labs(best - stats.hyp_length);
    if (best < 0 || d < bd || (d == bd && len < best)) best = len;
  }
  stats.ref_length = best;
  for (int n = 1; n <= max_order; ++n) {
    NgramCounts h = Count(hyp, n);
    NgramCounts clip;
    for (const Sentence &r : refs) {
      for (const auto &[gram, c] : Count(r, n)) clip[gram] = std::max(clip[gram], c);
    }
    for (const auto &[gram, c] : h) {
      stats.totals[n - 1] += c;
      auto it = clip.find(gram);
      if (it != clip.end()) stats.matches[n - 1] += std::min(c, it->second);
    }
  }
  return stats;
}

double CorpusBleu(const std::vector<Sentence> &hyps, const std::vector<std::vector<Sentence>> &refs,
                  int max_order) {
  if (hyps.size() != refs.size()) throw ContractError("bleu: hypothesis/reference count mismatch");
  BleuStats total;
  for (size_t i = 0; i < hyps.size(); ++i) total.Add(SentenceStats(hyps[i], refs[i], max_order));
  return total.Score(max_order);
}

double CorpusBleu(const std::vector<Sentence> &hyps, const std::vector<Sentence> &refs,
                  int max_order) {
  std::vector<std::vector<Sentence>> wrapped;
  wrapped.reserve(refs.size());
  for (const Sentence &r : refs) wrapped.push_back({r});
  return CorpusBleu(hyps, wrapped, max_order);
}

double SentenceBleu(const Sentence &hyp, const Sentence &ref, int max_order) {
  return SentenceStats(hyp, {ref}, max_order).Score(max_order) / 100.0;
}

}  // namespace stylerl
