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

// Joint training of the span and relation classifiers.
//
// Each sentence contributes its gold spans plus up to max_neg_entities
// sampled non-gold spans (target: none), and its gold entity pairs plus up to
// max_neg_relations unrelated gold-entity pairs. The batch loss is
//
//   mean span cross-entropy + mean relation binary cross-entropy
//
// where the BCE mean runs over every (pair, relation type) output with
// multi-hot targets. Optimization is AdamW with bias correction and global
// gradient-norm clipping.

#ifndef SCIEX_TRAINER_H_
#define SCIEX_TRAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sciex/corpus.h"
#include "sciex/extractor.h"
#include "sciex/features.h"
#include "sciex/metrics.h"

namespace sciex {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 2;
  double learning_rate = 5e-5;
  double dropout = 0.1;
  int max_neg_entities = 100;
  int max_neg_relations = 100;
  double rel_threshold = 0.4;
  int max_span_len = kDefaultMaxSpanLen;
  int width_dim = kDefaultWidthDim;
  uint64_t seed = 0;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double grad_clip_norm = 1.0;
  EncoderConfig encoder;  // dropout_rate is overridden by `dropout`
  // Fresh models only; warm starts keep the base model's tagging.
  std::optional<PosTagset> tagset;                   // default: Penn Treebank
  std::map<std::string, std::string> tagger_lexicon;  // word -> tag overlay

  // Throws std::invalid_argument for non-positive values.
  void Validate() const;
  ModelConfig ToModelConfig() const;
  nlohmann::json ToJson() const;
  // Missing keys keep their defaults.
  static TrainConfig FromJson(const nlohmann::json& j);
};

struct NegativeSamples {
  std::vector<SpanCandidate> spans;          // sorted by (start, width)
  std::vector<std::pair<int, int>> pairs;    // (head, tail) entity indices
};

// Uniform sampling without replacement from the spans that match no gold
// span and from the unrelated ordered gold-entity pairs.
NegativeSamples SampleNegatives(const Sentence& sentence, const ExtractionSchema& schema,
                                int max_span_len, int max_neg_entities, int max_neg_relations,
                                uint64_t seed);

struct PairTarget {
  SpanCandidate head;
  SpanCandidate tail;
  std::vector<double> targets;  // multi-hot over relation types
};

struct TrainingExample {
  const Sentence* sentence = nullptr;
  std::vector<int> tag_codes;
  std::vector<SpanCandidate> spans;
  std::vector<int> span_labels;  // 0 = none
  std::vector<PairTarget> pairs;
};

TrainingExample BuildExample(const SpanRelationModel& model, const Sentence& sentence,
                             const NegativeSamples& negatives);

double CrossEntropy(std::span<const double> logits, int target);
// Numerically stable BCE on a logit.
double BinaryCrossEntropy(double logit, double target);

struct LossValue {
  double ce = 0.0;
  double bce = 0.0;
  double total = 0.0;
  size_t span_count = 0;
  size_t relation_outputs = 0;
};

// Forward pass over a batch; with `accumulate` the gradient of the total is
// added to the model's parameter grads. Throws TrainingError on a non-finite
// loss.
LossValue ComputeLoss(SpanRelationModel& model, std::span<const TrainingExample> batch,
                      EncodeMode mode, Rng* rng, bool accumulate);

// Scales all gradients so their global L2 norm is at most max_norm; returns
// the norm before clipping.
double ClipGradNorm(const std::vector<Parameter*>& params, double max_norm);

class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, double lr, double beta1, double beta2, double epsilon,
        double weight_decay);

  // Biases are not decayed.
  void Step();
  int64_t steps() const { return step_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, epsilon_, weight_decay_;
  int64_t step_ = 0;
};

struct TrainLogRecord {
  int epoch = 0;  // 1-based
  int batch = 0;  // 1-based within the epoch
  double loss_ce = 0.0;
  double loss_bce = 0.0;
  double loss_total = 0.0;

  nlohmann::json ToJson() const;
};

using TrainLogSink = std::function<void(const TrainLogRecord&)>;

struct TrainResult {
  std::unique_ptr<SpanRelationModel> model;
  std::vector<double> epoch_losses;  // mean batch total per epoch
};

// Builds a fresh toy (or precomputed-encoder) model from `config`, or
// continues training a copy of `warm_start`. Throws Error on an empty
// dataset.
TrainResult Train(const Dataset& dataset, const TrainConfig& config,
                  const TrainLogSink& log = {}, const SpanRelationModel* warm_start = nullptr);

// Throws SchemaError if the model and dataset schemas differ.
EvalReport Evaluate(const Dataset& dataset, const SpanRelationModel& model);

struct CrossValidationReport {
  std::vector<Fold> folds;
  std::vector<EvalReport> reports;
  std::map<std::string, double> mean;
  std::map<std::string, double> stdev;  // sample standard deviation

  nlohmann::json ToJson() const;
};

// Headline metrics of a report, keyed as in CrossValidationReport::mean.
std::map<std::string, double> HeadlineMetrics(const EvalReport& report);

// Folds come from SplitKFold(dataset, k, config.seed). Fold jobs are
// independent; `threads` > 1 runs them concurrently.
CrossValidationReport CrossValidate(const Dataset& dataset, size_t k, const TrainConfig& config,
                                    size_t threads = 1);

}  // namespace sciex

#endif  // SCIEX_TRAINER_H_
