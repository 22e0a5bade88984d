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

// Token encoders: per-token contextual vectors plus one sentence vector.
//
// ToyEncoder is a small trainable encoder:
//   e_i = Embedding[id(token_i)]              (hash buckets for OOV words)
//   m_i = mean of e_j for 0 < |j - i| <= context_window (zero if none)
//   h_i = dropout(tanh(SelfMix e_i + ContextMix m_i + mix_bias))
//   sentence = SentenceProj mean_i(h_i) + sentence_bias
//
// PrecomputedEncoder serves vectors produced offline by an external model.
// Its container is
//   "SCXEMB01" | u64 header length | header JSON | f32 LE blobs
// where the header is
//   {"d_tok": int, "d_sent": int, "count": int,
//    "entries": [{"key": str, "n_tokens": int, "d_tok": int}]}
// and each entry's blob is n_tokens * d_tok token floats followed by d_sent
// sentence floats, in entry order. Keys are the tokens joined by spaces.

#ifndef SCIEX_ENCODER_H_
#define SCIEX_ENCODER_H_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sciex/rng.h"
#include "sciex/tensor.h"

namespace sciex {

enum class EncoderKind { kToy, kPrecomputed };
enum class EncodeMode { kTrain, kInfer };

struct TokenEncoding {
  Matrix tokens;                 // n x d_tok
  std::vector<double> sentence;  // d_sent

  size_t size() const { return tokens.rows; }
  bool AllFinite() const;
};

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kToy;
  int d_tok = 64;
  int d_sent = 64;
  int context_window = 2;
  double dropout_rate = 0.1;
  int oov_buckets = 4096;
  std::string precomputed_path;  // kPrecomputed only

  void Validate() const;
  nlohmann::json ToJson() const;
  static EncoderConfig FromJson(const nlohmann::json& j);
  bool operator==(const EncoderConfig&) const = default;
};

// Forward-pass state an encoder needs for its backward pass.
class EncoderTrace {
 public:
  virtual ~EncoderTrace() = default;
};

struct EncoderOutput {
  TokenEncoding encoding;
  std::unique_ptr<EncoderTrace> trace;
};

class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual EncoderKind kind() const = 0;
  virtual int token_dim() const = 0;
  virtual int sentence_dim() const = 0;

  // Throws Error on an empty token list. Train mode needs `rng` for dropout.
  virtual EncoderOutput Forward(std::span<const std::string> tokens, EncodeMode mode,
                                Rng* rng) const = 0;

  TokenEncoding Encode(std::span<const std::string> tokens,
                       EncodeMode mode = EncodeMode::kInfer, Rng* rng = nullptr) const {
    return Forward(tokens, mode, rng).encoding;
  }

  // Accumulates parameter gradients given d(loss)/d(encoding).
  virtual void Backward(const EncoderTrace& trace, const TokenEncoding& grad) = 0;

  virtual std::vector<Parameter*> Parameters() = 0;
  virtual EncoderConfig config() const = 0;
  virtual std::unique_ptr<Encoder> Clone() const = 0;
};

class ToyEncoder : public Encoder {
 public:
  // Parameters start at zero; call Initialize() before training.
  ToyEncoder(EncoderConfig config, std::vector<std::string> vocab);

  void Initialize(Rng& rng);

  EncoderKind kind() const override { return EncoderKind::kToy; }
  int token_dim() const override { return config_.d_tok; }
  int sentence_dim() const override { return config_.d_sent; }

  EncoderOutput Forward(std::span<const std::string> tokens, EncodeMode mode,
                        Rng* rng) const override;
  void Backward(const EncoderTrace& trace, const TokenEncoding& grad) override;
  std::vector<Parameter*> Parameters() override;
  EncoderConfig config() const override { return config_; }
  std::unique_ptr<Encoder> Clone() const override;

  const std::vector<std::string>& vocab() const { return vocab_; }
  // Embedding row for a token: vocabulary id, else a hashed OOV bucket.
  size_t RowFor(const std::string& token) const;

 private:
  EncoderConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, size_t> vocab_index_;
  Parameter embedding_;
  Parameter self_mix_;
  Parameter context_mix_;
  Parameter mix_bias_;
  Parameter sentence_proj_;
  Parameter sentence_bias_;
};

class PrecomputedEncoder : public Encoder {
 public:
  using Table = std::unordered_map<std::string, TokenEncoding>;

  PrecomputedEncoder(int d_tok, int d_sent, std::shared_ptr<const Table> table,
                     std::string source_path = {});

  EncoderKind kind() const override { return EncoderKind::kPrecomputed; }
  int token_dim() const override { return d_tok_; }
  int sentence_dim() const override { return d_sent_; }

  // Throws DataError for a sentence not in the table. Mode is ignored.
  EncoderOutput Forward(std::span<const std::string> tokens, EncodeMode mode,
                        Rng* rng) const override;
  void Backward(const EncoderTrace&, const TokenEncoding&) override {}
  std::vector<Parameter*> Parameters() override { return {}; }
  EncoderConfig config() const override;
  std::unique_ptr<Encoder> Clone() const override;

  size_t size() const { return table_->size(); }

 private:
  int d_tok_;
  int d_sent_;
  std::shared_ptr<const Table> table_;
  std::string source_path_;
};

std::string SentenceKey(std::span<const std::string> tokens);

// Throws IntegrityError on truncated data or inconsistent dimensions.
std::unique_ptr<PrecomputedEncoder> LoadPrecomputed(const std::string& path);

struct PrecomputedEntry {
  std::vector<std::string> tokens;
  TokenEncoding encoding;
};
void SavePrecomputed(const std::string& path, int d_tok, int d_sent,
                     const std::vector<PrecomputedEntry>& entries);

}  // namespace sciex

#endif  // SCIEX_ENCODER_H_
