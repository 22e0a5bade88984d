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

#include "sciex/extractor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sciex/common.h"

namespace sciex {

using nlohmann::json;

std::vector<SpanCandidate> EnumerateSpans(int n, int max_span_len) {
  std::vector<SpanCandidate> spans;
  if (n <= 0 || max_span_len <= 0) return spans;
  const int max_width = std::min(n, max_span_len);
  for (int start = 0; start < n; ++start) {
    for (int w = 1; w <= max_width && start + w <= n; ++w) spans.push_back({start, start + w});
  }
  return spans;
}

json ModelConfig::ToJson() const {
  return {{"max_span_len", max_span_len},
          {"width_dim", width_dim},
          {"rel_threshold", rel_threshold},
          {"max_sentence_len", max_sentence_len},
          {"encoder", encoder.ToJson()}};
}

ModelConfig ModelConfig::FromJson(const json& j) {
  ModelConfig c;
  c.max_span_len = j.value("max_span_len", c.max_span_len);
  c.width_dim = j.value("width_dim", c.width_dim);
  c.rel_threshold = j.value("rel_threshold", c.rel_threshold);
  c.max_sentence_len = j.value("max_sentence_len", c.max_sentence_len);
  if (j.contains("encoder")) c.encoder = EncoderConfig::FromJson(j.at("encoder"));
  return c;
}

size_t SpanFeatureDim(int d_tok, int d_sent, int max_span_len, int width_dim) {
  return static_cast<size_t>(d_tok + kPosCodeBits * max_span_len + width_dim + d_sent);
}

size_t RelationFeatureDim(int d_tok, int max_span_len, int width_dim) {
  return static_cast<size_t>(3 * d_tok + 2 * kPosCodeBits * max_span_len + 2 * width_dim);
}

PooledSpan MaxPool(const Matrix& tokens, int start, int end) {
  PooledSpan out;
  out.values.assign(tokens.cols, 0.0);
  out.argmax.assign(tokens.cols, -1);
  if (start >= end) return out;
  for (size_t k = 0; k < tokens.cols; ++k) {
    double best = -std::numeric_limits<double>::infinity();
    int arg = start;
    for (int i = start; i < end; ++i) {
      const double v = tokens.at(static_cast<size_t>(i), k);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    out.values[k] = best;
    out.argmax[k] = arg;
  }
  return out;
}

void MaxPoolBackward(const PooledSpan& pooled, std::span<const double> grad, Matrix* token_grad) {
  for (size_t k = 0; k < grad.size(); ++k) {
    if (pooled.argmax[k] >= 0) token_grad->at(static_cast<size_t>(pooled.argmax[k]), k) += grad[k];
  }
}

SpanCandidate ContextBetween(const SpanCandidate& head, const SpanCandidate& tail) {
  if (head.end <= tail.start) return {head.end, tail.start};
  if (tail.end <= head.start) return {tail.end, head.start};
  return {0, 0};
}

std::vector<int> PairPosSlots(const SpanCandidate& head, const SpanCandidate& tail,
                              std::span<const int> tag_codes, int slots) {
  const int half = slots / 2;
  std::vector<int> codes(slots, 0);
  for (int i = 0; i < std::min(half, head.width()); ++i) codes[i] = tag_codes[head.start + i];
  for (int i = 0; i < std::min(half, tail.width()); ++i) {
    codes[half + i] = tag_codes[tail.start + i];
  }
  return codes;
}

std::vector<int> ContextPosSlots(const SpanCandidate& head, const SpanCandidate& tail,
                                 std::span<const int> tag_codes, int slots) {
  const int half = slots / 2;
  std::vector<int> codes(slots, 0);
  const SpanCandidate ctx = ContextBetween(head, tail);
  const int len = ctx.width();
  if (len <= 0) return codes;
  const int left = std::min(half, len);
  for (int i = 0; i < left; ++i) codes[i] = tag_codes[ctx.start + i];
  const int right = std::min(slots - half, len - left);
  for (int i = 0; i < right; ++i) {
    codes[slots - right + i] = tag_codes[ctx.end - right + i];
  }
  return codes;
}

namespace {

void AppendBits(const std::vector<uint8_t>& bits, std::vector<double>* x) {
  for (uint8_t b : bits) x->push_back(b);
}

void Append(std::span<const double> v, std::vector<double>* x) {
  x->insert(x->end(), v.begin(), v.end());
}

}  // namespace

std::vector<double> SpanFeatures(const SpanCandidate& span, const TokenEncoding& enc,
                                 std::span<const int> tag_codes, const WidthTable& widths,
                                 SpanFeatureTrace* trace) {
  const int slots = widths.max_span_len();
  PooledSpan pooled = MaxPool(enc.tokens, span.start, span.end);
  std::vector<double> x;
  x.reserve(SpanFeatureDim(static_cast<int>(enc.tokens.cols), static_cast<int>(enc.sentence.size()),
                           slots, widths.dim()));
  Append(pooled.values, &x);
  AppendBits(EncodePosCodes(tag_codes.subspan(span.start, span.width()), slots), &x);
  Append(widths.Lookup(span.width()), &x);
  Append(enc.sentence, &x);
  if (trace) trace->pooled = std::move(pooled);
  return x;
}

void SpanFeaturesBackward(const SpanCandidate& span, const SpanFeatureTrace& trace,
                          std::span<const double> grad, TokenEncoding* enc_grad,
                          WidthTable* widths) {
  const size_t d_tok = enc_grad->tokens.cols;
  const size_t pos_dim = static_cast<size_t>(kPosCodeBits * widths->max_span_len());
  const size_t wd = static_cast<size_t>(widths->dim());
  MaxPoolBackward(trace.pooled, grad.subspan(0, d_tok), &enc_grad->tokens);
  widths->AccumulateGrad(span.width(), grad.subspan(d_tok + pos_dim, wd));
  AddTo(enc_grad->sentence, grad.subspan(d_tok + pos_dim + wd));
}

std::vector<double> RelationFeatures(const SpanCandidate& head, const SpanCandidate& tail,
                                     const TokenEncoding& enc, std::span<const int> tag_codes,
                                     const WidthTable& widths, RelationFeatureTrace* trace,
                                     const PooledSpan* head_pool, const PooledSpan* tail_pool) {
  const int slots = widths.max_span_len();
  RelationFeatureTrace local;
  RelationFeatureTrace& t = trace ? *trace : local;
  t.head = head_pool ? *head_pool : MaxPool(enc.tokens, head.start, head.end);
  t.tail = tail_pool ? *tail_pool : MaxPool(enc.tokens, tail.start, tail.end);
  const SpanCandidate ctx = ContextBetween(head, tail);
  t.context = MaxPool(enc.tokens, ctx.start, ctx.end);

  std::vector<double> x;
  x.reserve(RelationFeatureDim(static_cast<int>(enc.tokens.cols), slots, widths.dim()));
  Append(t.head.values, &x);
  Append(t.tail.values, &x);
  Append(t.context.values, &x);
  AppendBits(EncodePosCodes(PairPosSlots(head, tail, tag_codes, slots), slots), &x);
  AppendBits(EncodePosCodes(ContextPosSlots(head, tail, tag_codes, slots), slots), &x);
  Append(widths.Lookup(head.width()), &x);
  Append(widths.Lookup(tail.width()), &x);
  return x;
}

void RelationFeaturesBackward(const SpanCandidate& head, const SpanCandidate& tail,
                              const RelationFeatureTrace& trace, std::span<const double> grad,
                              int d_tok, TokenEncoding* enc_grad, WidthTable* widths) {
  const size_t d = static_cast<size_t>(d_tok);
  const size_t pos_dim = static_cast<size_t>(kPosCodeBits * widths->max_span_len());
  const size_t wd = static_cast<size_t>(widths->dim());
  MaxPoolBackward(trace.head, grad.subspan(0, d), &enc_grad->tokens);
  MaxPoolBackward(trace.tail, grad.subspan(d, d), &enc_grad->tokens);
  MaxPoolBackward(trace.context, grad.subspan(2 * d, d), &enc_grad->tokens);
  const size_t w0 = 3 * d + 2 * pos_dim;
  widths->AccumulateGrad(head.width(), grad.subspan(w0, wd));
  widths->AccumulateGrad(tail.width(), grad.subspan(w0 + wd, wd));
}

LinearLayer::LinearLayer(const std::string& name, size_t in, size_t out)
    : weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {}

std::vector<double> LinearLayer::Forward(std::span<const double> x) const {
  if (x.size() != in_dim()) {
    throw std::invalid_argument(weight_.name + ": input dim " + std::to_string(x.size()) +
                                ", expected " + std::to_string(in_dim()));
  }
  std::vector<double> y(out_dim());
  MatVec(weight_, x, bias_.value, y);
  return y;
}

void LinearLayer::Backward(std::span<const double> x, std::span<const double> dy,
                           std::vector<double>* dx) {
  OuterAccum(weight_, dy, x);
  AddTo(bias_.grad, dy);
  if (dx) MatTVecAccum(weight_, dy, *dx);
}

void LinearLayer::Initialize(Rng& rng, double scale) {
  weight_.InitUniform(rng, scale);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

size_t ArgMax(std::span<const double> values) {
  size_t best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<SpanPrediction> ClassifySpans(std::span<const SpanCandidate> spans,
                                          const std::vector<std::vector<double>>& logits) {
  std::vector<SpanPrediction> out;
  out.reserve(spans.size());
  for (size_t i = 0; i < spans.size(); ++i) {
    const auto probs = Softmax(logits[i]);
    const size_t label = ArgMax(logits[i]);
    out.push_back({spans[i], static_cast<int>(label), probs[label]});
  }
  return out;
}

std::vector<std::pair<int, int>> PairCandidates(size_t n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n * (n > 0 ? n - 1 : 0));
  for (size_t h = 0; h < n; ++h) {
    for (size_t t = 0; t < n; ++t) {
      if (h != t) pairs.emplace_back(static_cast<int>(h), static_cast<int>(t));
    }
  }
  return pairs;
}

RelationDecision DecideRelation(std::span<const double> scores, double threshold) {
  if (scores.empty()) return {};
  const size_t best = ArgMax(scores);
  if (scores[best] > threshold) return {static_cast<int>(best), scores[best]};
  return {-1, scores[best]};
}

std::vector<TypedRelation> ClassifyRelations(const std::vector<std::pair<int, int>>& pairs,
                                             const std::vector<std::vector<double>>& scores,
                                             double threshold) {
  std::vector<TypedRelation> out;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const RelationDecision d = DecideRelation(scores[i], threshold);
    if (d.type >= 0) out.push_back({pairs[i].first, pairs[i].second, d.type, d.score});
  }
  return out;
}

Sentence Extraction::ToSentence(std::vector<std::string> tokens) const {
  Sentence s;
  s.tokens = std::move(tokens);
  for (const auto& e : entities) s.entities.push_back(e.span);
  for (const auto& r : relations) s.relations.push_back(r.triple);
  return s;
}

SpanRelationModel::SpanRelationModel(ExtractionSchema schema, PosTagset tagset,
                                     ModelConfig config, std::unique_ptr<Encoder> encoder,
                                     std::map<std::string, std::string> tagger_overlay)
    : schema_(std::move(schema)),
      tagset_(std::move(tagset)),
      config_(std::move(config)),
      tagger_overlay_(std::move(tagger_overlay)),
      tagger_(tagger_overlay_),
      encoder_(std::move(encoder)),
      widths_(config_.max_span_len, config_.width_dim) {
  if (!encoder_) throw std::invalid_argument("model needs an encoder");
  if (!(config_.rel_threshold > 0.0 && config_.rel_threshold < 1.0)) {
    throw std::invalid_argument("relation threshold must be in (0, 1)");
  }
  if (config_.max_span_len % 2 != 0) {
    throw std::invalid_argument("max_span_len must be even (pair POS blocks split it in half)");
  }
  config_.encoder = encoder_->config();
  const int d_tok = encoder_->token_dim();
  const int d_sent = encoder_->sentence_dim();
  span_classifier_ =
      LinearLayer("span_classifier",
                  SpanFeatureDim(d_tok, d_sent, config_.max_span_len, config_.width_dim),
                  schema_.entity_types().size() + 1);
  relation_classifier_ = LinearLayer(
      "relation_classifier", RelationFeatureDim(d_tok, config_.max_span_len, config_.width_dim),
      schema_.relation_types().size());
}

SpanRelationModel::SpanRelationModel(const SpanRelationModel& o)
    : schema_(o.schema_),
      tagset_(o.tagset_),
      config_(o.config_),
      tagger_overlay_(o.tagger_overlay_),
      tagger_(o.tagger_),
      encoder_(o.encoder_->Clone()),
      widths_(o.widths_),
      span_classifier_(o.span_classifier_),
      relation_classifier_(o.relation_classifier_),
      version_(o.version_),
      metadata_(o.metadata_) {}

std::vector<Parameter*> SpanRelationModel::Parameters() {
  std::vector<Parameter*> params = encoder_->Parameters();
  params.push_back(&widths_.parameter());
  params.push_back(&span_classifier_.weight());
  params.push_back(&span_classifier_.bias());
  params.push_back(&relation_classifier_.weight());
  params.push_back(&relation_classifier_.bias());
  return params;
}

void SpanRelationModel::ZeroGrad() {
  for (Parameter* p : Parameters()) p->ZeroGrad();
}

void SpanRelationModel::InitializeHeads(Rng& rng) {
  widths_.parameter().InitUniform(rng, 1.0);
  // Unit-scale heads. With a 5e-5 step size, 1/sqrt(fan_in) heads need
  // roughly three times as many epochs to fit the toy corpus.
  span_classifier_.Initialize(rng, 1.0);
  relation_classifier_.Initialize(rng, 1.0);
}

std::vector<int> SpanRelationModel::TagCodes(std::span<const std::string> tokens,
                                             std::span<const std::string> gold_tags) const {
  std::vector<int> codes;
  codes.reserve(tokens.size());
  if (!gold_tags.empty()) {
    if (gold_tags.size() != tokens.size()) {
      throw SchemaError("gold POS tags do not match the token count");
    }
    for (const auto& t : gold_tags) codes.push_back(tagset_.Code(t));
    return codes;
  }
  for (const auto& t : tagger_.Tag(tokens)) {
    const int idx = tagset_.Index(t);
    codes.push_back(idx < 0 ? tagset_.Code(tagset_.tags().front()) : idx + 1);
  }
  return codes;
}

Extraction SpanRelationModel::Extract(std::span<const std::string> tokens,
                                      std::span<const std::string> gold_tags,
                                      const ExtractOptions& options) const {
  Extraction result;
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return result;
  if (n > config_.max_sentence_len) {
    throw DataError("sentence of " + std::to_string(n) + " tokens exceeds the limit of " +
                    std::to_string(config_.max_sentence_len));
  }
  const TokenEncoding enc = encoder_->Encode(tokens, EncodeMode::kInfer);
  const std::vector<int> codes = TagCodes(tokens, gold_tags);

  const auto spans = EnumerateSpans(n, config_.max_span_len);
  std::vector<std::vector<double>> logits;
  std::vector<PooledSpan> pools;
  logits.reserve(spans.size());
  pools.reserve(spans.size());
  for (const auto& span : spans) {
    SpanFeatureTrace trace;
    std::vector<double> z = span_classifier_.Forward(SpanFeatures(span, enc, codes, widths_, &trace));
    if (!options.span_logit_bias.empty()) AddTo(z, options.span_logit_bias);
    logits.push_back(std::move(z));
    pools.push_back(std::move(trace.pooled));
  }

  for (const auto& pred : ClassifySpans(spans, logits)) {
    if (pred.label == 0) continue;
    result.entities.push_back(
        {{pred.span.start, pred.span.end, schema_.entity_types()[pred.label - 1]}, pred.probability});
  }
  if (result.entities.size() < 2 || schema_.relation_types().empty()) return result;

  // Map entities back to their pooled span vectors.
  std::vector<const PooledSpan*> entity_pool;
  for (const auto& e : result.entities) {
    const SpanCandidate sc{e.span.start, e.span.end};
    const auto it = std::lower_bound(spans.begin(), spans.end(), sc, [](const auto& a, const auto& b) {
      return a.start != b.start ? a.start < b.start : a.width() < b.width();
    });
    entity_pool.push_back(&pools[static_cast<size_t>(it - spans.begin())]);
  }

  const auto pairs = PairCandidates(result.entities.size());
  std::vector<std::vector<double>> scores;
  scores.reserve(pairs.size());
  for (const auto& [h, t] : pairs) {
    const SpanCandidate head{result.entities[h].span.start, result.entities[h].span.end};
    const SpanCandidate tail{result.entities[t].span.start, result.entities[t].span.end};
    std::vector<double> z = relation_classifier_.Forward(
        RelationFeatures(head, tail, enc, codes, widths_, nullptr, entity_pool[h], entity_pool[t]));
    for (double& v : z) v = Sigmoid(v);
    scores.push_back(std::move(z));
  }

  std::vector<TypedRelation> relations = ClassifyRelations(pairs, scores, config_.rel_threshold);
  // A symmetric relation found in both directions is reported once, keeping
  // the higher-scoring direction.
  std::vector<bool> dropped(relations.size(), false);
  for (size_t i = 0; i < relations.size(); ++i) {
    if (dropped[i] || !schema_.IsSymmetric(relations[i].type)) continue;
    for (size_t j = i + 1; j < relations.size(); ++j) {
      if (!dropped[j] && relations[j].type == relations[i].type &&
          relations[j].head == relations[i].tail && relations[j].tail == relations[i].head) {
        if (relations[j].score > relations[i].score) {
          dropped[i] = true;
        } else {
          dropped[j] = true;
        }
        break;
      }
    }
  }
  for (size_t i = 0; i < relations.size(); ++i) {
    if (dropped[i]) continue;
    const auto& r = relations[i];
    result.relations.push_back({{r.head, r.tail, schema_.relation_types()[r.type]}, r.score});
  }
  return result;
}

}  // namespace sciex
