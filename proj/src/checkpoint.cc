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

#include "stylerl/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stylerl/errors.h"

namespace stylerl {
namespace {

class Writer {
 public:
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Str(const std::string &s) {
    U32(static_cast<uint32_t>(s.size()));
    out_ += s;
  }
  void Raw(const char *p, size_t n) { out_.append(p, n); }
  std::string &bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string &bytes, size_t end) : bytes_(bytes), end_(end) {}

  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  void Need(size_t n) const {
    if (pos_ + n > end_) throw IntegrityError("checkpoint is truncated");
  }

  const std::string &bytes_;
  size_t end_;
  size_t pos_ = sizeof(kCheckpointMagic);
};

uint32_t Crc(const std::string &bytes, size_t n) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(bytes.data()), static_cast<uInt>(n)));
}

}  // namespace

const Tensor &Checkpoint::Get(const std::string &name) const {
  for (const auto &[n, t] : tensors) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint lacks tensor '" + name + "'");
}

const std::string &Checkpoint::Param(const std::string &key) const {
  auto it = hparams.find(key);
  if (it == hparams.end()) throw FormatError("checkpoint lacks field '" + key + "'");
  return it->second;
}

double Checkpoint::ParamDouble(const std::string &key) const {
  const std::string &v = Param(key);
  try {
    return std::stod(v);
  } catch (const std::exception &) {
    throw FormatError("checkpoint field '" + key + "' is not a number");
  }
}

int Checkpoint::ParamInt(const std::string &key) const {
  return static_cast<int>(ParamDouble(key));
}

std::string SerializeCheckpoint(const Checkpoint &ckpt) {
  Writer w;
  w.Raw(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.U32(kCheckpointVersion);
  w.Str(ckpt.stage);
  w.Str(ckpt.config_text);
  w.U32(static_cast<uint32_t>(ckpt.vocab.size()));
  for (int id = 0; id < ckpt.vocab.size(); ++id) {
    w.Str(ckpt.vocab.Token(id));
    w.U64(static_cast<uint64_t>(ckpt.vocab.Count(id)));
  }
  w.U32(static_cast<uint32_t>(ckpt.hparams.size()));
  for (const auto &[k, v] : ckpt.hparams) {
    w.Str(k);
    w.Str(v);
  }
  w.U32(static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto &[name, t] : ckpt.tensors) {
    w.Str(name);
    w.U32(static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) w.U32(static_cast<uint32_t>(d));
    for (size_t i = 0; i < t.size(); ++i) w.F64(t[i]);
  }
  w.U32(Crc(w.bytes(), w.bytes().size()));
  return std::move(w.bytes());
}

Checkpoint ParseCheckpoint(const std::string &bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  if (bytes.size() < sizeof(kCheckpointMagic) + 8) throw IntegrityError("checkpoint is truncated");
  const size_t body = bytes.size() - 4;
  {
    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) {
      stored |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
    }
    if (stored != Crc(bytes, body)) throw IntegrityError("checkpoint checksum mismatch");
  }
  Reader r(bytes, body);
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.stage = r.Str();
  c.config_text = r.Str();
  const uint32_t vocab_size = r.U32();
  for (uint32_t id = 0; id < vocab_size; ++id) {
    std::string tok = r.Str();
    const int64_t count = static_cast<int64_t>(r.U64());
    if (static_cast<int>(id) < kNumSpecials) {
      if (tok != c.vocab.Token(static_cast<int>(id))) throw FormatError("checkpoint vocabulary lacks specials");
      continue;
    }
    c.vocab.Add(tok, count);
  }
  const uint32_t nh = r.U32();
  for (uint32_t i = 0; i < nh; ++i) {
    std::string k = r.Str();
    c.hparams[k] = r.Str();
  }
  const uint32_t nt = r.U32();
  for (uint32_t i = 0; i < nt; ++i) {
    std::string name = r.Str();
    const uint32_t rank = r.U32();
    Shape shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(r.U32()));
    Tensor t(shape);
    for (size_t j = 0; j < t.size(); ++j) t[j] = r.F64();
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (!r.done()) throw FormatError("trailing bytes in checkpoint");
  return c;
}

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt) {
  const std::string bytes = SerializeCheckpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseCheckpoint(ss.str());
}

Checkpoint EvalClassifierCheckpoint(const EvalClassifier &clf) {
  Checkpoint c;
  c.stage = "eval-classifier";
  c.hparams["buckets"] = std::to_string(EvalClassifier::kBuckets);
  for (int s = 0; s < 2; ++s) {
    c.tensors.emplace_back("eval.w" + std::to_string(s),
                           Tensor({EvalClassifier::kBuckets}, clf.weights(s)));
  }
  c.tensors.emplace_back("eval.b", Tensor({2}, {clf.bias()[0], clf.bias()[1]}));
  std::vector<double> seen(clf.seen().begin(), clf.seen().end());
  c.tensors.emplace_back("eval.seen", Tensor({EvalClassifier::kBuckets}, seen));
  return c;
}

EvalClassifier EvalClassifierFromCheckpoint(const Checkpoint &ckpt) {
  if (ckpt.stage != "eval-classifier") throw FormatError("not an evaluation classifier checkpoint");
  if (ckpt.ParamInt("buckets") != EvalClassifier::kBuckets) throw FormatError("bucket count mismatch");
  EvalClassifier clf;
  for (int s = 0; s < 2; ++s) {
    const Tensor &t = ckpt.Get("eval.w" + std::to_string(s));
    if (static_cast<int>(t.size()) != EvalClassifier::kBuckets) throw FormatError("bad weight size");
    clf.weights(s).assign(t.data(), t.data() + t.size());
  }
  const Tensor &b = ckpt.Get("eval.b");
  if (b.size() != 2) throw FormatError("bad bias size");
  clf.bias() = {b[0], b[1]};
  const Tensor &seen = ckpt.Get("eval.seen");
  if (static_cast<int>(seen.size()) != EvalClassifier::kBuckets) throw FormatError("bad mask size");
  for (size_t i = 0; i < seen.size(); ++i) clf.seen()[i] = seen[i] != 0.0 ? 1 : 0;
  return clf;
}

}  // namespace stylerl
