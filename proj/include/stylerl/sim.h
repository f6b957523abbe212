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

#ifndef STYLERL_SIM_H_
#define STYLERL_SIM_H_

#include <atomic>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylerl/vocab.h"

namespace stylerl {

// Sentence similarity from averaged subword-unit embeddings. Tokens are
// segmented by greedy longest match over the unit table; characters with no
// matching unit become single-character units (zero vector if unknown), so
// every nonempty sentence yields at least one unit.
class SimModel {
 public:
  explicit SimModel(int dim = 0) : dim_(dim) {}
  SimModel(const SimModel &other);
  SimModel &operator=(const SimModel &other);

  int dim() const { return dim_; }
  size_t num_units() const { return order_.size(); }
  const std::vector<std::string> &units() const { return order_; }

  // Returns true when an existing unit was overwritten.
  bool SetUnit(const std::string &unit, std::vector<double> vec);
  const std::vector<double> *Find(std::string_view unit) const;

  std::vector<std::string> Segment(const Sentence &sentence) const;
  std::vector<double> Embed(const Sentence &sentence) const;

  // Cosine of the two sentence vectors, in [-1, 1]. A zero vector on either
  // side scores 0 and increments zero_norm_events().
  double Score(const Sentence &a, const Sentence &b) const;

  int zero_norm_events() const { return zero_norm_events_.load(); }

 private:
  int dim_;
  size_t max_unit_len_ = 1;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<double>> table_;
  mutable std::atomic<int> zero_norm_events_{0};
};

struct EmbeddingLoadStats {
  int duplicates = 0;
};

// Text format: header "N d", then N lines "unit v1 ... vd".
SimModel LoadEmbeddings(const std::string &path, EmbeddingLoadStats *stats = nullptr);
void WriteEmbeddings(const std::string &path, const SimModel &model);

}  // namespace stylerl

#endif  // STYLERL_SIM_H_
