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

#include "stylerl/vocab.h"

#include <algorithm>
#include <map>

#include "stylerl/errors.h"

namespace stylerl {

Vocab::Vocab() {
  for (const char *s : {"<pad>", "<s>", "</s>", "<unk>", "<style0>", "<style1>"}) {
    index_.emplace(s, static_cast<int>(tokens_.size()));
    tokens_.emplace_back(s);
    counts_.push_back(0);
  }
}

int Vocab::Add(const std::string &token, int64_t count) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(token);
  counts_.push_back(count);
  return id;
}

int Vocab::Id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::Contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string &Vocab::Token(int id) const {
  if (id < 0 || id >= size()) {
    throw ContractError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[id];
}

TokenIds Vocab::Encode(const Sentence &sentence) const {
  TokenIds ids;
  ids.reserve(sentence.size());
  for (const std::string &tok : sentence) ids.push_back(Id(tok));
  return ids;
}

Sentence Vocab::Decode(const TokenIds &ids) const {
  Sentence out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kUnk || !IsSpecial(id)) out.push_back(Token(id));
  }
  return out;
}

Vocab BuildVocab(const std::vector<Sentence> &sentences, int max_size, int min_freq) {
  if (max_size < kNumSpecials + 1) {
    throw ContractError("build_vocab: max_size must be at least " +
                        std::to_string(kNumSpecials + 1));
  }
  std::map<std::string, int64_t> freq;
  for (const Sentence &s : sentences) {
    for (const std::string &tok : s) ++freq[tok];
  }
  std::vector<std::pair<std::string, int64_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  Vocab vocab;
  for (const auto &[tok, count] : ranked) {
    if (vocab.size() >= max_size) break;
    if (count < min_freq) break;
    vocab.Add(tok, count);
  }
  return vocab;
}

}  // namespace stylerl
