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

// Exact-match scoring of extracted entities and relations.
//
// An entity is correct iff (start, end, type) equals a gold entity; a
// relation iff (head span, tail span, type) equals a gold relation, with
// symmetric relation types compared direction-free. Per-type F1 is
// 2TP / (2TP + FN + FP); macro F1 averages it over types that occur in gold
// or predictions. Accuracy, (TP + TN) / (TP + TN + FP + FN), is computed
// over span-classification decisions: every span of width <= max_span_len,
// plus any longer gold or predicted span.

#ifndef SCIEX_METRICS_H_
#define SCIEX_METRICS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sciex/corpus.h"

namespace sciex {

// 2TP / (2TP + FN + FP); 1.0 when all counts are zero.
double F1Score(int64_t tp, int64_t fp, int64_t fn);
// (TP + TN) / (TP + TN + FP + FN); 1.0 when all counts are zero.
double Accuracy(int64_t tp, int64_t tn, int64_t fp, int64_t fn);

struct PrfCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  // Vacuous ratios (no predictions / no gold) are 1.0.
  double precision() const;
  double recall() const;
  double f1() const { return F1Score(tp, fp, fn); }

  bool operator==(const PrfCounts&) const = default;
};

struct TypeScore {
  std::string type;
  PrfCounts counts;
};

struct TaskScores {
  std::vector<TypeScore> per_type;  // schema order
  PrfCounts micro;
  double macro_f1 = 1.0;
  double micro_f1 = 1.0;

  nlohmann::json ToJson() const;
};

struct DecisionCounts {
  int64_t tp = 0;
  int64_t tn = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  bool operator==(const DecisionCounts&) const = default;
};

struct EvalReport {
  TaskScores entities;
  TaskScores relations;
  DecisionCounts span_decisions;
  double accuracy = 1.0;
  size_t sentences = 0;

  nlohmann::json ToJson() const;
};

// Accumulates counts sentence by sentence; the result does not depend on
// the order sentences are added.
class EvalAccumulator {
 public:
  EvalAccumulator(ExtractionSchema schema, int max_span_len);

  // `predicted` must have the same tokens as `gold`.
  void Add(const Sentence& gold, const Sentence& predicted);
  EvalReport Report() const;

 private:
  ExtractionSchema schema_;
  int max_span_len_;
  std::vector<PrfCounts> entity_counts_;
  std::vector<PrfCounts> relation_counts_;
  DecisionCounts decisions_;
  size_t sentences_ = 0;
};

EvalReport ScoreExtractions(const ExtractionSchema& schema, const std::vector<Sentence>& gold,
                            const std::vector<Sentence>& predicted, int max_span_len);

}  // namespace sciex

#endif  // SCIEX_METRICS_H_
