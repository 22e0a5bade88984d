// Copyright 2026 The Sciex Authors.
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

#include "sciex/encoder.h"

#include <cmath>
#include <stdexcept>

#include "sciex/bytes.h"
#include "sciex/common.h"

namespace sciex {

using nlohmann::json;

namespace {

constexpr std::string_view kEmbeddingMagic = "SCXEMB01";

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* KindName(EncoderKind kind) {
  return kind == EncoderKind::kToy ? "toy" : "precomputed";
}

struct ToyTrace : EncoderTrace {
  std::vector<size_t> rows;
  Matrix context;  // m_i
  Matrix hidden;   // tanh output before dropout
  Matrix mask;     // dropout scale per unit; empty in infer mode
  std::vector<double> mean;
};

struct PrecomputedTrace : EncoderTrace {};

}  // namespace

bool TokenEncoding::AllFinite() const {
  for (double v : tokens.data) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : sentence) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void EncoderConfig::Validate() const {
  if (d_tok < 1 || d_sent < 1) throw std::invalid_argument("encoder dims must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout_rate must be in [0, 1)");
  }
  if (context_window < 0) throw std::invalid_argument("context_window must be >= 0");
  if (kind == EncoderKind::kToy && oov_buckets < 1) {
    throw std::invalid_argument("oov_buckets must be >= 1");
  }
}

json EncoderConfig::ToJson() const {
  json j = {{"kind", KindName(kind)},
            {"d_tok", d_tok},
            {"d_sent", d_sent},
            {"dropout_rate", dropout_rate}};
  if (kind == EncoderKind::kToy) {
    j["context_window"] = context_window;
    j["oov_buckets"] = oov_buckets;
  } else {
    j["path"] = precomputed_path;
  }
  return j;
}

EncoderConfig EncoderConfig::FromJson(const json& j) {
  EncoderConfig c;
  const std::string kind = j.value("kind", std::string("toy"));
  if (kind == "toy") {
    c.kind = EncoderKind::kToy;
  } else if (kind == "precomputed") {
    c.kind = EncoderKind::kPrecomputed;
  } else {
    throw ParseError("unknown encoder kind: " + kind);
  }
  c.d_tok = j.value("d_tok", c.d_tok);
  c.d_sent = j.value("d_sent", c.d_sent);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.context_window = j.value("context_window", c.context_window);
  c.oov_buckets = j.value("oov_buckets", c.oov_buckets);
  c.precomputed_path = j.value("path", std::string());
  return c;
}

ToyEncoder::ToyEncoder(EncoderConfig config, std::vector<std::string> vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.kind = EncoderKind::kToy;
  config_.Validate();
  for (size_t i = 0; i < vocab_.size(); ++i) {
    if (!vocab_index_.emplace(vocab_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary entry: " + vocab_[i]);
    }
  }
  const size_t d = config_.d_tok;
  const size_t rows = vocab_.size() + config_.oov_buckets;
  embedding_ = Parameter("encoder.embedding", {rows, d});
  self_mix_ = Parameter("encoder.self_mix", {d, d});
  context_mix_ = Parameter("encoder.context_mix", {d, d});
  mix_bias_ = Parameter("encoder.mix_bias", {d});
  sentence_proj_ = Parameter("encoder.sentence_proj", {static_cast<size_t>(config_.d_sent), d});
  sentence_bias_ = Parameter("encoder.sentence_bias", {static_cast<size_t>(config_.d_sent)});
}

void ToyEncoder::Initialize(Rng& rng) {
  const double mix_scale = 1.0 / std::sqrt(static_cast<double>(config_.d_tok));
  // Wide embeddings keep tanh near saturation, so distinct words start far
  // apart; small-step fine-tuning cannot separate them otherwise.
  embedding_.InitUniform(rng, 2.0);
  self_mix_.InitUniform(rng, mix_scale);
  context_mix_.InitUniform(rng, mix_scale);
  sentence_proj_.InitUniform(rng, mix_scale);
}

size_t ToyEncoder::RowFor(const std::string& token) const {
  if (auto it = vocab_index_.find(token); it != vocab_index_.end()) return it->second;
  return vocab_.size() + Fnv1a(token) % static_cast<uint64_t>(config_.oov_buckets);
}

EncoderOutput ToyEncoder::Forward(std::span<const std::string> tokens, EncodeMode mode,
                                  Rng* rng) const {
  if (tokens.empty()) throw Error("cannot encode an empty token list");
  const bool train = mode == EncodeMode::kTrain && config_.dropout_rate > 0.0;
  if (train && rng == nullptr) throw std::invalid_argument("train-mode encoding needs an rng");

  const size_t n = tokens.size();
  const size_t d = config_.d_tok;
  const int w = config_.context_window;
  auto trace = std::make_unique<ToyTrace>();
  trace->rows.reserve(n);
  for (const auto& t : tokens) trace->rows.push_back(RowFor(t));

  trace->context = Matrix(n, d);
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= static_cast<size_t>(w) ? i - w : 0;
    const size_t hi = std::min(n - 1, i + w);
    const size_t count = hi - lo;  // neighbours, excluding i itself
    if (count == 0) continue;
    auto ctx = trace->context.row(i);
    for (size_t j = lo; j <= hi; ++j) {
      if (j != i) AddTo(ctx, embedding_.row(trace->rows[j]), 1.0 / static_cast<double>(count));
    }
  }

  EncoderOutput out;
  out.encoding.tokens = Matrix(n, d);
  trace->hidden = Matrix(n, d);
  if (train) trace->mask = Matrix(n, d);
  std::vector<double> a(d), tmp(d);
  const double keep = 1.0 - config_.dropout_rate;
  for (size_t i = 0; i < n; ++i) {
    MatVec(self_mix_, embedding_.row(trace->rows[i]), mix_bias_.value, a);
    MatVec(context_mix_, trace->context.row(i), {}, tmp);
    auto h = trace->hidden.row(i);
    auto t = out.encoding.tokens.row(i);
    for (size_t k = 0; k < d; ++k) {
      h[k] = std::tanh(a[k] + tmp[k]);
      double scale = 1.0;
      if (train) {
        scale = rng->Uniform() < keep ? 1.0 / keep : 0.0;
        trace->mask.at(i, k) = scale;
      }
      t[k] = h[k] * scale;
    }
  }

  trace->mean.assign(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    AddTo(trace->mean, out.encoding.tokens.row(i), 1.0 / static_cast<double>(n));
  }
  out.encoding.sentence.assign(config_.d_sent, 0.0);
  MatVec(sentence_proj_, trace->mean, sentence_bias_.value, out.encoding.sentence);
  out.trace = std::move(trace);
  return out;
}

void ToyEncoder::Backward(const EncoderTrace& base, const TokenEncoding& grad) {
  const auto& trace = dynamic_cast<const ToyTrace&>(base);
  const size_t n = trace.rows.size();
  const size_t d = config_.d_tok;
  const int w = config_.context_window;

  OuterAccum(sentence_proj_, grad.sentence, trace.mean);
  AddTo(sentence_bias_.grad, grad.sentence);
  std::vector<double> d_mean(d, 0.0);
  MatTVecAccum(sentence_proj_, grad.sentence, d_mean);

  std::vector<double> da(d), d_ctx(d);
  for (size_t i = 0; i < n; ++i) {
    auto h = trace.hidden.row(i);
    auto g = grad.tokens.row(i);
    for (size_t k = 0; k < d; ++k) {
      double dt = g[k] + d_mean[k] / static_cast<double>(n);
      if (!trace.mask.data.empty()) dt *= trace.mask.at(i, k);
      da[k] = dt * (1.0 - h[k] * h[k]);
    }
    OuterAccum(self_mix_, da, embedding_.row(trace.rows[i]));
    OuterAccum(context_mix_, da, trace.context.row(i));
    AddTo(mix_bias_.grad, da);
    MatTVecAccum(self_mix_, da, embedding_.grad_row(trace.rows[i]));

    const size_t lo = i >= static_cast<size_t>(w) ? i - w : 0;
    const size_t hi = std::min(n - 1, i + w);
    const size_t count = hi - lo;
    if (count == 0) continue;
    std::fill(d_ctx.begin(), d_ctx.end(), 0.0);
    MatTVecAccum(context_mix_, da, d_ctx);
    for (size_t j = lo; j <= hi; ++j) {
      if (j != i) {
        AddTo(embedding_.grad_row(trace.rows[j]), d_ctx, 1.0 / static_cast<double>(count));
      }
    }
  }
}

std::vector<Parameter*> ToyEncoder::Parameters() {
  return {&embedding_, &self_mix_, &context_mix_, &mix_bias_, &sentence_proj_, &sentence_bias_};
}

std::unique_ptr<Encoder> ToyEncoder::Clone() const { return std::make_unique<ToyEncoder>(*this); }

PrecomputedEncoder::PrecomputedEncoder(int d_tok, int d_sent, std::shared_ptr<const Table> table,
                                       std::string source_path)
    : d_tok_(d_tok), d_sent_(d_sent), table_(std::move(table)), source_path_(std::move(source_path)) {}

EncoderOutput PrecomputedEncoder::Forward(std::span<const std::string> tokens, EncodeMode,
                                          Rng*) const {
  if (tokens.empty()) throw Error("cannot encode an empty token list");
  const std::string key = SentenceKey(tokens);
  auto it = table_->find(key);
  if (it == table_->end()) throw DataError("no precomputed encoding for sentence: " + key);
  EncoderOutput out;
  out.encoding = it->second;
  out.trace = std::make_unique<PrecomputedTrace>();
  return out;
}

EncoderConfig PrecomputedEncoder::config() const {
  EncoderConfig c;
  c.kind = EncoderKind::kPrecomputed;
  c.d_tok = d_tok_;
  c.d_sent = d_sent_;
  c.dropout_rate = 0.0;
  c.precomputed_path = source_path_;
  return c;
}

std::unique_ptr<Encoder> PrecomputedEncoder::Clone() const {
  return std::make_unique<PrecomputedEncoder>(*this);
}

std::string SentenceKey(std::span<const std::string> tokens) {
  std::string key;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) key.push_back(' ');
    key += tokens[i];
  }
  return key;
}

std::unique_ptr<PrecomputedEncoder> LoadPrecomputed(const std::string& path) {
  const std::string bytes = ReadFileBytes(path);
  if (bytes.size() < 16 || std::string_view(bytes).substr(0, 8) != kEmbeddingMagic) {
    throw IntegrityError(path + ": not a precomputed-embedding container");
  }
  const uint64_t header_len = ReadU64(bytes, 8);
  if (16 + header_len > bytes.size()) throw IntegrityError(path + ": truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(16, header_len));
  } catch (const json::parse_error& e) {
    throw IntegrityError(path + ": bad header: " + e.what());
  }
  int d_tok = 0, d_sent = 0;
  size_t count = 0;
  try {
    d_tok = header.at("d_tok").get<int>();
    d_sent = header.at("d_sent").get<int>();
    count = header.at("count").get<size_t>();
  } catch (const json::exception& e) {
    throw IntegrityError(path + ": " + e.what());
  }
  const json& entries = header.value("entries", json::array());
  if (d_tok < 1 || d_sent < 1) throw IntegrityError(path + ": non-positive dimensions");
  if (entries.size() != count) {
    throw IntegrityError(path + ": header count " + std::to_string(count) + " but " +
                         std::to_string(entries.size()) + " entries");
  }
  auto table = std::make_shared<PrecomputedEncoder::Table>();
  size_t pos = 16 + header_len;
  for (size_t e = 0; e < entries.size(); ++e) {
    const json& entry = entries[e];
    const std::string key = entry.at("key").get<std::string>();
    const size_t n = entry.at("n_tokens").get<size_t>();
    const int entry_d = entry.value("d_tok", d_tok);
    if (entry_d != d_tok) {
      throw IntegrityError(path + ": entry " + std::to_string(e) + " has d_tok " +
                           std::to_string(entry_d) + ", expected " + std::to_string(d_tok));
    }
    const size_t floats = n * d_tok + d_sent;
    if (pos + 4 * floats > bytes.size()) {
      throw IntegrityError(path + ": truncated blob for entry " + std::to_string(e));
    }
    TokenEncoding enc;
    enc.tokens = Matrix(n, d_tok);
    for (double& v : enc.tokens.data) {
      v = ReadF32(bytes, pos);
      pos += 4;
    }
    enc.sentence.resize(d_sent);
    for (double& v : enc.sentence) {
      v = ReadF32(bytes, pos);
      pos += 4;
    }
    if (!table->emplace(key, std::move(enc)).second) {
      throw IntegrityError(path + ": duplicate key " + key);
    }
  }
  if (pos != bytes.size()) throw IntegrityError(path + ": trailing bytes after last entry");
  return std::make_unique<PrecomputedEncoder>(d_tok, d_sent, std::move(table), path);
}

void SavePrecomputed(const std::string& path, int d_tok, int d_sent,
                     const std::vector<PrecomputedEntry>& entries) {
  json header = {{"d_tok", d_tok}, {"d_sent", d_sent}, {"count", entries.size()}};
  json list = json::array();
  std::string blob;
  for (const auto& e : entries) {
    list.push_back({{"key", SentenceKey(e.tokens)},
                    {"n_tokens", e.encoding.tokens.rows},
                    {"d_tok", e.encoding.tokens.cols}});
    for (double v : e.encoding.tokens.data) AppendF32(&blob, static_cast<float>(v));
    for (double v : e.encoding.sentence) AppendF32(&blob, static_cast<float>(v));
  }
  header["entries"] = list;
  const std::string h = header.dump();
  std::string out(kEmbeddingMagic);
  AppendU64(&out, h.size());
  out += h;
  out += blob;
  WriteFileAtomic(path, out);
}

}  // namespace sciex
