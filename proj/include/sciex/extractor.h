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

// Span-based joint entity and relation extraction.
//
// Every contiguous span of up to max_span_len tokens is classified into
// k entity types plus "none" (class 0) from the fused vector
//
//   x_s = maxpool(token vectors) ++ POS code (6 bits x L) ++ width row ++
//         sentence vector
//
// Spans not labelled none become entities. Every ordered pair of distinct
// entities is scored per relation type with a sigmoid over
//
//   x_r = maxpool(head) ++ maxpool(tail) ++ maxpool(context between) ++
//         POS(head[:5] | tail[:5]) ++ POS(context edges) ++
//         width(head) ++ width(tail)
//
// and the best type is emitted only if its score is strictly above the
// relation threshold.

#ifndef SCIEX_EXTRACTOR_H_
#define SCIEX_EXTRACTOR_H_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sciex/corpus.h"
#include "sciex/encoder.h"
#include "sciex/features.h"
#include "sciex/tensor.h"

namespace sciex {

inline constexpr int kPairPosTokens = 5;  // tokens per entity / context edge

struct SpanCandidate {
  int start = 0;
  int end = 0;  // exclusive

  int width() const { return end - start; }
  bool operator==(const SpanCandidate&) const = default;
  auto operator<=>(const SpanCandidate&) const = default;
};

// All spans of width 1..min(max_span_len, n), ordered by (start, width).
std::vector<SpanCandidate> EnumerateSpans(int n, int max_span_len = kDefaultMaxSpanLen);

struct ModelConfig {
  int max_span_len = kDefaultMaxSpanLen;
  int width_dim = kDefaultWidthDim;
  double rel_threshold = 0.4;
  int max_sentence_len = 256;
  EncoderConfig encoder;

  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
};

size_t SpanFeatureDim(int d_tok, int d_sent, int max_span_len = kDefaultMaxSpanLen,
                      int width_dim = kDefaultWidthDim);
size_t RelationFeatureDim(int d_tok, int max_span_len = kDefaultMaxSpanLen,
                          int width_dim = kDefaultWidthDim);

// Component-wise max over rows [start, end) of `tokens`. `argmax` records the
// winning row per component (first on ties); an empty range pools to zeros
// with argmax -1.
struct PooledSpan {
  std::vector<double> values;
  std::vector<int> argmax;
};
PooledSpan MaxPool(const Matrix& tokens, int start, int end);

// Routes `grad` to the rows that won the pooling.
void MaxPoolBackward(const PooledSpan& pooled, std::span<const double> grad, Matrix* token_grad);

// Token range strictly between two spans; empty when they overlap.
SpanCandidate ContextBetween(const SpanCandidate& head, const SpanCandidate& tail);

// Slot codes (tag code per slot, 0 = padding) for the relation POS blocks.
// Pair block: the head's first 5 tokens in slots 0-4, the tail's first 5 in
// slots 5-9, each left-aligned. Context block: the first 5 context tokens
// left-aligned in slots 0-4, then up to 5 further tokens nearest the right
// boundary right-aligned in slots 5-9.
std::vector<int> PairPosSlots(const SpanCandidate& head, const SpanCandidate& tail,
                              std::span<const int> tag_codes, int slots = kDefaultMaxSpanLen);
std::vector<int> ContextPosSlots(const SpanCandidate& head, const SpanCandidate& tail,
                                 std::span<const int> tag_codes, int slots = kDefaultMaxSpanLen);

struct SpanFeatureTrace {
  PooledSpan pooled;
};

std::vector<double> SpanFeatures(const SpanCandidate& span, const TokenEncoding& enc,
                                 std::span<const int> tag_codes, const WidthTable& widths,
                                 SpanFeatureTrace* trace = nullptr);
void SpanFeaturesBackward(const SpanCandidate& span, const SpanFeatureTrace& trace,
                          std::span<const double> grad, TokenEncoding* enc_grad,
                          WidthTable* widths);

struct RelationFeatureTrace {
  PooledSpan head;
  PooledSpan tail;
  PooledSpan context;
};

// `head_pool` / `tail_pool` may be passed to reuse span-stage pooling.
std::vector<double> RelationFeatures(const SpanCandidate& head, const SpanCandidate& tail,
                                     const TokenEncoding& enc, std::span<const int> tag_codes,
                                     const WidthTable& widths, RelationFeatureTrace* trace = nullptr,
                                     const PooledSpan* head_pool = nullptr,
                                     const PooledSpan* tail_pool = nullptr);
void RelationFeaturesBackward(const SpanCandidate& head, const SpanCandidate& tail,
                              const RelationFeatureTrace& trace, std::span<const double> grad,
                              int d_tok, TokenEncoding* enc_grad, WidthTable* widths);

// Single affine layer: y = W x + b.
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(const std::string& name, size_t in, size_t out);

  size_t in_dim() const { return weight_.cols(); }
  size_t out_dim() const { return weight_.rows(); }

  std::vector<double> Forward(std::span<const double> x) const;
  // Accumulates weight/bias grads; adds W^T dy into dx when non-null.
  void Backward(std::span<const double> x, std::span<const double> dy,
                std::vector<double>* dx);

  void Initialize(Rng& rng, double scale);
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const Parameter& weight() const { return weight_; }
  const Parameter& bias() const { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

std::vector<double> Softmax(std::span<const double> logits);
double Sigmoid(double z);
// Index of the maximum; the lowest index wins ties.
size_t ArgMax(std::span<const double> values);

struct SpanPrediction {
  SpanCandidate span;
  int label = 0;  // 0 = none, else entity type index + 1
  double probability = 0.0;
};

// Softmax + argmax with lowest-index tie-breaking, per span.
std::vector<SpanPrediction> ClassifySpans(std::span<const SpanCandidate> spans,
                                          const std::vector<std::vector<double>>& logits);

// All ordered (head, tail) index pairs with head != tail: n (n - 1) pairs.
std::vector<std::pair<int, int>> PairCandidates(size_t n);

struct RelationDecision {
  int type = -1;  // -1 = no relation
  double score = 0.0;
};

// Picks the highest sigmoid score (lowest index on ties) and keeps it only
// if score > threshold.
RelationDecision DecideRelation(std::span<const double> scores, double threshold);

struct TypedRelation {
  int head = 0;
  int tail = 0;
  int type = 0;
  double score = 0.0;
};

// DecideRelation per pair; `scores[i]` belongs to `pairs[i]`.
std::vector<TypedRelation> ClassifyRelations(const std::vector<std::pair<int, int>>& pairs,
                                             const std::vector<std::vector<double>>& scores,
                                             double threshold);

struct ExtractedEntity {
  EntitySpan span;
  double confidence = 0.0;
};

struct ExtractedRelation {
  RelationTriple triple;
  double confidence = 0.0;
};

struct Extraction {
  std::vector<ExtractedEntity> entities;
  std::vector<ExtractedRelation> relations;

  Sentence ToSentence(std::vector<std::string> tokens) const;
};

struct ExtractOptions {
  // Added to the span logits (size k + 1) before the softmax; empty = none.
  std::vector<double> span_logit_bias;
};

class SpanRelationModel {
 public:
  SpanRelationModel(ExtractionSchema schema, PosTagset tagset, ModelConfig config,
                    std::unique_ptr<Encoder> encoder,
                    std::map<std::string, std::string> tagger_overlay = {});
  SpanRelationModel(const SpanRelationModel& other);
  SpanRelationModel& operator=(const SpanRelationModel&) = delete;

  const ExtractionSchema& schema() const { return schema_; }
  const PosTagset& tagset() const { return tagset_; }
  const ModelConfig& config() const { return config_; }
  const LexiconTagger& tagger() const { return tagger_; }
  const std::map<std::string, std::string>& tagger_overlay() const { return tagger_overlay_; }

  Encoder& encoder() { return *encoder_; }
  const Encoder& encoder() const { return *encoder_; }
  WidthTable& widths() { return widths_; }
  const WidthTable& widths() const { return widths_; }
  LinearLayer& span_classifier() { return span_classifier_; }
  const LinearLayer& span_classifier() const { return span_classifier_; }
  LinearLayer& relation_classifier() { return relation_classifier_; }
  const LinearLayer& relation_classifier() const { return relation_classifier_; }

  int version() const { return version_; }
  void set_version(int v) { version_ = v; }
  const nlohmann::json& metadata() const { return metadata_; }
  void set_metadata(nlohmann::json m) { metadata_ = std::move(m); }

  // Encoder parameters first, then width table, span and relation heads.
  std::vector<Parameter*> Parameters();
  void ZeroGrad();
  // Random init of width table and both classifiers.
  void InitializeHeads(Rng& rng);

  // Tag codes (index + 1): gold tags when given, else the tagger's.
  std::vector<int> TagCodes(std::span<const std::string> tokens,
                            std::span<const std::string> gold_tags = {}) const;

  // Throws DataError if the sentence exceeds max_sentence_len.
  Extraction Extract(std::span<const std::string> tokens,
                     std::span<const std::string> gold_tags = {},
                     const ExtractOptions& options = {}) const;

 private:
  ExtractionSchema schema_;
  PosTagset tagset_;
  ModelConfig config_;
  std::map<std::string, std::string> tagger_overlay_;
  LexiconTagger tagger_;
  std::unique_ptr<Encoder> encoder_;
  WidthTable widths_;
  LinearLayer span_classifier_;
  LinearLayer relation_classifier_;
  int version_ = 1;
  nlohmann::json metadata_ = nlohmann::json::object();
};

}  // namespace sciex

#endif  // SCIEX_EXTRACTOR_H_
