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

#include "sciex/metrics.h"

#include <set>
#include <tuple>

#include "sciex/common.h"

namespace sciex {

using nlohmann::json;

double F1Score(int64_t tp, int64_t fp, int64_t fn) {
  const int64_t denom = 2 * tp + fn + fp;
  return denom == 0 ? 1.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

double Accuracy(int64_t tp, int64_t tn, int64_t fp, int64_t fn) {
  const int64_t denom = tp + tn + fp + fn;
  return denom == 0 ? 1.0 : static_cast<double>(tp + tn) / static_cast<double>(denom);
}

double PrfCounts::precision() const {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PrfCounts::recall() const {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

json TaskScores::ToJson() const {
  json types = json::object();
  for (const auto& t : per_type) {
    types[t.type] = {{"tp", t.counts.tp},
                     {"fp", t.counts.fp},
                     {"fn", t.counts.fn},
                     {"precision", t.counts.precision()},
                     {"recall", t.counts.recall()},
                     {"f1", t.counts.f1()}};
  }
  return {{"per_type", types},
          {"macro_f1", macro_f1},
          {"micro_f1", micro_f1},
          {"micro", {{"tp", micro.tp}, {"fp", micro.fp}, {"fn", micro.fn},
                     {"precision", micro.precision()}, {"recall", micro.recall()}}}};
}

json EvalReport::ToJson() const {
  return {{"entities", entities.ToJson()},
          {"relations", relations.ToJson()},
          {"span_decisions",
           {{"tp", span_decisions.tp},
            {"tn", span_decisions.tn},
            {"fp", span_decisions.fp},
            {"fn", span_decisions.fn}}},
          {"accuracy", accuracy},
          {"sentences", sentences}};
}

namespace {

using SpanKey = std::pair<int, int>;
using RelKey = std::tuple<SpanKey, SpanKey, int>;

std::set<std::pair<SpanKey, int>> EntityKeys(const Sentence& s, const ExtractionSchema& schema) {
  std::set<std::pair<SpanKey, int>> keys;
  for (const auto& e : s.entities) {
    const int type = schema.EntityIndex(e.type);
    if (type < 0) throw SchemaError("entity type not in schema: " + e.type);
    keys.insert({{e.start, e.end}, type});
  }
  return keys;
}

std::set<RelKey> RelationKeys(const Sentence& s, const ExtractionSchema& schema) {
  std::set<RelKey> keys;
  for (const auto& r : s.relations) {
    const int type = schema.RelationIndex(r.type);
    if (type < 0) throw SchemaError("relation type not in schema: " + r.type);
    const auto& h = s.entities.at(r.head);
    const auto& t = s.entities.at(r.tail);
    SpanKey hk{h.start, h.end}, tk{t.start, t.end};
    if (schema.IsSymmetric(type) && tk < hk) std::swap(hk, tk);
    keys.insert({hk, tk, type});
  }
  return keys;
}

template <typename Key, typename TypeOf>
void Count(const std::set<Key>& gold, const std::set<Key>& pred, TypeOf type_of,
           std::vector<PrfCounts>* counts) {
  for (const auto& k : pred) {
    if (gold.count(k)) {
      ++(*counts)[type_of(k)].tp;
    } else {
      ++(*counts)[type_of(k)].fp;
    }
  }
  for (const auto& k : gold) {
    if (!pred.count(k)) ++(*counts)[type_of(k)].fn;
  }
}

TaskScores Summarize(const std::vector<std::string>& names, const std::vector<PrfCounts>& counts) {
  TaskScores out;
  double macro_sum = 0.0;
  int active = 0;
  for (size_t i = 0; i < names.size(); ++i) {
    out.per_type.push_back({names[i], counts[i]});
    out.micro.tp += counts[i].tp;
    out.micro.fp += counts[i].fp;
    out.micro.fn += counts[i].fn;
    if (counts[i].tp + counts[i].fp + counts[i].fn > 0) {
      macro_sum += counts[i].f1();
      ++active;
    }
  }
  out.micro_f1 = out.micro.f1();
  out.macro_f1 = active == 0 ? 1.0 : macro_sum / active;
  return out;
}

}  // namespace

EvalAccumulator::EvalAccumulator(ExtractionSchema schema, int max_span_len)
    : schema_(std::move(schema)),
      max_span_len_(max_span_len),
      entity_counts_(schema_.entity_types().size()),
      relation_counts_(schema_.relation_types().size()) {}

void EvalAccumulator::Add(const Sentence& gold, const Sentence& predicted) {
  if (gold.tokens.size() != predicted.tokens.size()) {
    throw Error("prediction and gold differ in token count");
  }
  ++sentences_;
  const auto gold_entities = EntityKeys(gold, schema_);
  const auto pred_entities = EntityKeys(predicted, schema_);
  Count(gold_entities, pred_entities, [](const auto& k) { return k.second; }, &entity_counts_);
  Count(RelationKeys(gold, schema_), RelationKeys(predicted, schema_),
        [](const RelKey& k) { return std::get<2>(k); }, &relation_counts_);

  // Span decisions.
  std::map<SpanKey, std::set<int>> gold_by_span, pred_by_span;
  for (const auto& [span, type] : gold_entities) gold_by_span[span].insert(type);
  for (const auto& [span, type] : pred_entities) pred_by_span[span].insert(type);
  std::set<SpanKey> labelled;
  for (const auto& [span, types] : gold_by_span) labelled.insert(span);
  for (const auto& [span, types] : pred_by_span) labelled.insert(span);

  const int64_t n = static_cast<int64_t>(gold.tokens.size());
  const int64_t width = std::min<int64_t>(n, max_span_len_);
  int64_t enumerated = 0;
  for (int64_t w = 1; w <= width; ++w) enumerated += n - w + 1;
  int64_t labelled_in_universe = 0;
  for (const auto& span : labelled) {
    if (span.second - span.first <= max_span_len_) ++labelled_in_universe;
    const auto g = gold_by_span.find(span);
    const auto p = pred_by_span.find(span);
    if (p == pred_by_span.end()) {
      ++decisions_.fn;
      continue;
    }
    bool hit = false;
    if (g != gold_by_span.end()) {
      for (int t : p->second) hit = hit || g->second.count(t) > 0;
    }
    if (hit) {
      ++decisions_.tp;
    } else {
      ++decisions_.fp;
    }
  }
  decisions_.tn += enumerated - labelled_in_universe;
}

EvalReport EvalAccumulator::Report() const {
  EvalReport r;
  r.entities = Summarize(schema_.entity_types(), entity_counts_);
  r.relations = Summarize(schema_.relation_types(), relation_counts_);
  r.span_decisions = decisions_;
  r.accuracy = Accuracy(decisions_.tp, decisions_.tn, decisions_.fp, decisions_.fn);
  r.sentences = sentences_;
  return r;
}

EvalReport ScoreExtractions(const ExtractionSchema& schema, const std::vector<Sentence>& gold,
                            const std::vector<Sentence>& predicted, int max_span_len) {
  if (gold.size() != predicted.size()) throw Error("gold and predictions differ in length");
  EvalAccumulator acc(schema, max_span_len);
  for (size_t i = 0; i < gold.size(); ++i) acc.Add(gold[i], predicted[i]);
  return acc.Report();
}

}  // namespace sciex
