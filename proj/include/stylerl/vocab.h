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

#ifndef STYLERL_VOCAB_H_
#define STYLERL_VOCAB_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylerl {

using Sentence = std::vector<std::string>;
using TokenIds = std::vector<int>;

// Fixed leading ids.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kStyle0 = 4;
inline constexpr int kStyle1 = 5;
inline constexpr int kNumSpecials = 6;

inline int StyleToken(int style) { return style == 0 ? kStyle0 : kStyle1; }

class Vocab {
 public:
  Vocab();

  // Appends a regular token; returns its id. Existing tokens keep their id.
  int Add(const std::string &token, int64_t count = 0);

  int size() const { return static_cast<int>(tokens_.size()); }
  // UNK for anything not in the table.
  int Id(std::string_view token) const;
  bool Contains(std::string_view token) const;
  const std::string &Token(int id) const;
  int64_t Count(int id) const { return counts_[id]; }
  const std::vector<std::string> &tokens() const { return tokens_; }

  TokenIds Encode(const Sentence &sentence) const;
  // Stops at the first EOS; PAD, BOS and style markers are dropped.
  Sentence Decode(const TokenIds &ids) const;

  static bool IsSpecial(int id) { return id < kNumSpecials; }

  bool operator==(const Vocab &other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<int64_t> counts_;
  std::unordered_map<std::string, int> index_;
};

// Keeps the most frequent tokens (ties broken lexicographically) with count
// >= min_freq, so that the vocabulary has at most max_size entries including
// the specials. Requires max_size >= kNumSpecials + 1.
Vocab BuildVocab(const std::vector<Sentence> &sentences, int max_size, int min_freq = 1);

}  // namespace stylerl

#endif  // STYLERL_VOCAB_H_
