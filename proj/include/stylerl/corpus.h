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

#ifndef STYLERL_CORPUS_H_
#define STYLERL_CORPUS_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylerl/vocab.h"

namespace stylerl {

// Binary style attribute.
using Style = int;

struct StyledSentence {
  Sentence tokens;
  Style style = 0;
};

// Sentences indexed by style.
using StyleSplit = std::array<std::vector<Sentence>, 2>;

struct StyledCorpus {
  StyleSplit train;
  StyleSplit dev;
  StyleSplit test;
  // Human references aligned line by line with `test`.
  std::optional<StyleSplit> refs;

  // Both styles of a split flattened, style 0 first.
  static std::vector<StyledSentence> Flatten(const StyleSplit &split);
  static std::vector<Sentence> AllSentences(const StyleSplit &split);

  bool operator==(const StyledCorpus &) const = default;
};

struct CorpusLoadStats {
  std::array<int, 2> train{}, dev{}, test{};
  int skipped_blank = 0;
  bool has_refs = false;
};

// Lowercases ASCII letters and splits on whitespace.
Sentence Normalize(std::string_view line);
std::string Join(const Sentence &sentence);

// Reads one sentence per line; blank lines are skipped and counted.
std::vector<Sentence> ReadSentences(const std::string &path, int *skipped = nullptr);
void WriteSentences(const std::string &path, const std::vector<Sentence> &sentences);

// Loads {train,dev,test}.{0,1} and the optional refs.{0,1} from `dir`.
// Missing split files raise DataError naming the file; references whose
// line counts differ from the test files raise DataError.
StyledCorpus LoadCorpus(const std::string &dir, CorpusLoadStats *stats = nullptr);
void WriteCorpus(const std::string &dir, const StyledCorpus &corpus);

// Moves the trailing `fraction` of each style's training sentences into a
// held-out split (returned), leaving the rest in corpus.train.
StyleSplit SplitHeldout(StyledCorpus &corpus, double fraction);

}  // namespace stylerl

#endif  // STYLERL_CORPUS_H_
