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

#include "stylerl/corpus.h"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stylerl/errors.h"

namespace stylerl {

namespace fs = std::filesystem;

std::vector<StyledSentence> StyledCorpus::Flatten(const StyleSplit &split) {
  std::vector<StyledSentence> out;
  for (Style s = 0; s < 2; ++s) {
    for (const Sentence &x : split[s]) out.push_back({x, s});
  }
  return out;
}

std::vector<Sentence> StyledCorpus::AllSentences(const StyleSplit &split) {
  std::vector<Sentence> out(split[0]);
  out.insert(out.end(), split[1].begin(), split[1].end());
  return out;
}

Sentence Normalize(std::string_view line) {
  Sentence out;
  std::string current;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string Join(const Sentence &sentence) {
  std::string out;
  for (size_t i = 0; i < sentence.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += sentence[i];
  }
  return out;
}

std::vector<Sentence> ReadSentences(const std::string &path, int *skipped) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    Sentence s = Normalize(line);
    if (s.empty()) {
      if (skipped != nullptr) ++*skipped;
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void WriteSentences(const std::string &path, const std::vector<Sentence> &sentences) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const Sentence &s : sentences) out << Join(s) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

StyledCorpus LoadCorpus(const std::string &dir, CorpusLoadStats *stats) {
  StyledCorpus corpus;
  CorpusLoadStats local;
  auto load = [&](const char *name, StyleSplit &split, std::array<int, 2> &counts) {
    for (Style s = 0; s < 2; ++s) {
      const fs::path path = fs::path(dir) / (std::string(name) + "." + std::to_string(s));
      if (!fs::exists(path)) throw DataError("missing corpus file " + path.string());
      split[s] = ReadSentences(path.string(), &local.skipped_blank);
      counts[s] = static_cast<int>(split[s].size());
    }
  };
  load("train", corpus.train, local.train);
  load("dev", corpus.dev, local.dev);
  load("test", corpus.test, local.test);
  const fs::path r0 = fs::path(dir) / "refs.0";
  const fs::path r1 = fs::path(dir) / "refs.1";
  if (fs::exists(r0) || fs::exists(r1)) {
    StyleSplit refs;
    for (Style s = 0; s < 2; ++s) {
      const fs::path path = s == 0 ? r0 : r1;
      if (!fs::exists(path)) throw DataError("missing reference file " + path.string());
      refs[s] = ReadSentences(path.string(), &local.skipped_blank);
      if (refs[s].size() != corpus.test[s].size()) {
        throw DataError("reference file " + path.string() + " has " +
                        std::to_string(refs[s].size()) + " lines, test split has " +
                        std::to_string(corpus.test[s].size()));
      }
    }
    corpus.refs = std::move(refs);
    local.has_refs = true;
  }
  if (stats != nullptr) *stats = local;
  return corpus;
}

void WriteCorpus(const std::string &dir, const StyledCorpus &corpus) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  auto write = [&](const char *name, const StyleSplit &split) {
    for (Style s = 0; s < 2; ++s) {
      WriteSentences((fs::path(dir) / (std::string(name) + "." + std::to_string(s))).string(),
                     split[s]);
    }
  };
  write("train", corpus.train);
  write("dev", corpus.dev);
  write("test", corpus.test);
  if (corpus.refs) write("refs", *corpus.refs);
}

StyleSplit SplitHeldout(StyledCorpus &corpus, double fraction) {
  if (fraction < 0 || fraction >= 1) throw ContractError("held-out fraction must be in [0,1)");
  StyleSplit heldout;
  for (Style s = 0; s < 2; ++s) {
    auto &train = corpus.train[s];
    const size_t n = static_cast<size_t>(fraction * static_cast<double>(train.size()));
    heldout[s].assign(train.end() - static_cast<std::ptrdiff_t>(n), train.end());
    train.resize(train.size() - n);
  }
  return heldout;
}

}  // namespace stylerl
