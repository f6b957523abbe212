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

#include "stylerl/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stylerl/errors.h"

namespace stylerl {

SimModel::SimModel(const SimModel &other)
    : dim_(other.dim_),
      max_unit_len_(other.max_unit_len_),
      order_(other.order_),
      table_(other.table_),
      zero_norm_events_(other.zero_norm_events_.load()) {}

SimModel &SimModel::operator=(const SimModel &other) {
  dim_ = other.dim_;
  max_unit_len_ = other.max_unit_len_;
  order_ = other.order_;
  table_ = other.table_;
  zero_norm_events_ = other.zero_norm_events_.load();
  return *this;
}

bool SimModel::SetUnit(const std::string &unit, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw FormatError("unit '" + unit + "' has " + std::to_string(vec.size()) +
                      " values, expected " + std::to_string(dim_));
  }
  auto [it, inserted] = table_.insert_or_assign(unit, std::move(vec));
  if (inserted) {
    order_.push_back(unit);
    max_unit_len_ = std::max(max_unit_len_, unit.size());
  }
  return !inserted;
}

const std::vector<double> *SimModel::Find(std::string_view unit) const {
  auto it = table_.find(std::string(unit));
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<std::string> SimModel::Segment(const Sentence &sentence) const {
  std::vector<std::string> units;
  for (const std::string &token : sentence) {
    size_t i = 0;
    while (i < token.size()) {
      size_t take = 1;
      for (size_t len = std::min(max_unit_len_, token.size() - i); len >= 1; --len) {
        if (table_.count(token.substr(i, len)) > 0) {
          take = len;
          break;
        }
      }
      units.push_back(token.substr(i, take));
      i += take;
    }
  }
  return units;
}

std::vector<double> SimModel::Embed(const Sentence &sentence) const {
  std::vector<double> mean(dim_, 0.0);
  const std::vector<std::string> units = Segment(sentence);
  if (units.empty()) return mean;
  for (const std::string &u : units) {
    if (const auto *v = Find(u)) {
      for (int i = 0; i < dim_; ++i) mean[i] += (*v)[i];
    }
  }
  for (double &x : mean) x /= static_cast<double>(units.size());
  return mean;
}

double SimModel::Score(const Sentence &a, const Sentence &b) const {
  if (a.empty() || b.empty()) throw ContractError("sim_score: empty sentence");
  const std::vector<double> u = Embed(a);
  const std::vector<double> v = Embed(b);
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (int i = 0; i < dim_; ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) {
    ++zero_norm_events_;
    return 0.0;
  }
  if (a == b) return 1.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

SimModel LoadEmbeddings(const std::string &path, EmbeddingLoadStats *stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: missing header");
  long count = 0;
  int dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dim) || count < 0 || dim <= 0) {
      throw ParseError(path + ":1: header must be \"N d\"");
    }
  }
  SimModel model(dim);
  EmbeddingLoadStats local;
  int line_no = 1;
  long read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string unit;
    if (!(fields >> unit)) continue;
    std::vector<double> vec;
    std::string tok;
    while (fields >> tok) {
      char *end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      vec.push_back(v);
    }
    if (static_cast<int>(vec.size()) != dim) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, found " + std::to_string(vec.size()));
    }
    if (model.SetUnit(unit, std::move(vec))) ++local.duplicates;
    ++read;
  }
  if (read != count) {
    throw FormatError(path + ": header declares " + std::to_string(count) + " units, found " +
                      std::to_string(read));
  }
  if (stats != nullptr) *stats = local;
  return model;
}

void WriteEmbeddings(const std::string &path, const SimModel &model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << model.num_units() << ' ' << model.dim() << '\n';
  char buf[32];
  for (const std::string &unit : model.units()) {
    out << unit;
    for (double v : *model.Find(unit)) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace stylerl
