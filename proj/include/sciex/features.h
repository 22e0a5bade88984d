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

// Token-level features: rule tokenizer, part-of-speech tagging, the 6-bit
// binary POS code and the learned span-width table.

#ifndef SCIEX_FEATURES_H_
#define SCIEX_FEATURES_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sciex/tensor.h"

namespace sciex {

inline constexpr int kPosCodeBits = 6;
inline constexpr int kMaxPosTags = (1 << kPosCodeBits) - 1;  // code 0 is padding
inline constexpr int kDefaultMaxSpanLen = 10;
inline constexpr int kDefaultWidthDim = 25;

struct Token {
  std::string text;
  size_t begin = 0;  // byte offsets into the tokenized text
  size_t end = 0;

  bool operator==(const Token&) const = default;
};

// Whitespace split, then leading/trailing punctuation peeled into separate
// tokens. Punctuation between alphanumerics (SiO2/Al2O3, ZSM-5, 3.5) stays
// inside the token, as do balanced inner brackets such as (NH4)2SO4.
std::vector<Token> Tokenize(std::string_view text);

class PosTagset {
 public:
  // Throws SchemaError unless 1 <= size <= 63 and names are unique.
  explicit PosTagset(std::vector<std::string> tags);

  const std::vector<std::string>& tags() const { return tags_; }
  size_t size() const { return tags_.size(); }

  // Index in tags(), or -1.
  int Index(const std::string& tag) const;
  // Binary code of a tag: index + 1. Throws SchemaError for unknown tags.
  int Code(const std::string& tag) const;

  bool operator==(const PosTagset& other) const { return tags_ == other.tags_; }

 private:
  std::vector<std::string> tags_;
  std::map<std::string, int> index_;
};

// The 45-tag Penn Treebank set in its conventional order.
const PosTagset& PennTreebankTagset();
PosTagset LoadTagset(const std::string& path);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<std::string> Tag(std::span<const std::string> tokens) const = 0;
};

// Lexicon lookup (case-insensitive) followed by suffix and shape rules.
// Unknown words fall back to NN.
class LexiconTagger : public PosTagger {
 public:
  // Starts from the built-in closed-class lexicon; `overlay` entries win.
  explicit LexiconTagger(std::map<std::string, std::string> overlay = {});

  std::vector<std::string> Tag(std::span<const std::string> tokens) const override;
  std::string TagWord(const std::string& word) const;

  const std::map<std::string, std::string>& overlay() const { return overlay_; }

 private:
  std::map<std::string, std::string> lexicon_;
  std::map<std::string, std::string> overlay_;
};

// Word -> tag JSON map.
std::map<std::string, std::string> LoadTaggerLexicon(const std::string& path);

// Binary POS code of a span: slot i holds the 6-bit big-endian code of
// token i; unused slots are zero. `codes` are tag codes (index + 1), 0 for
// an empty slot. Throws std::invalid_argument if codes.size() > slots or a
// code exceeds 63.
std::vector<uint8_t> EncodePosCodes(std::span<const int> codes, int slots = kDefaultMaxSpanLen);

// Inverse of EncodePosCodes: left-aligned codes up to the first all-zero
// slot. Throws std::invalid_argument on a length that is not a multiple of 6
// or a bit that is not 0/1.
std::vector<int> DecodePosCodes(std::span<const uint8_t> bits);
std::vector<std::string> DecodePos(const PosTagset& tagset, std::span<const uint8_t> bits);

// Left-aligned code of a tag sequence, length max_span_len * 6.
std::vector<uint8_t> EncodePos(const PosTagset& tagset, std::span<const std::string> tags,
                               int max_span_len = kDefaultMaxSpanLen);

// Learned per-width vectors; row k (1-based) embeds spans of width k.
class WidthTable {
 public:
  WidthTable(int max_span_len = kDefaultMaxSpanLen, int dim = kDefaultWidthDim);

  int max_span_len() const { return max_span_len_; }
  int dim() const { return dim_; }

  // Throws std::out_of_range unless 1 <= k <= max_span_len.
  std::span<const double> Lookup(int k) const;
  void AccumulateGrad(int k, std::span<const double> grad);

  Parameter& parameter() { return rows_; }
  const Parameter& parameter() const { return rows_; }

 private:
  int max_span_len_;
  int dim_;
  Parameter rows_;
};

}  // namespace sciex

#endif  // SCIEX_FEATURES_H_
