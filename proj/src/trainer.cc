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

#include "sciex/trainer.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sciex/common.h"

namespace sciex {

using nlohmann::json;

void TrainConfig::Validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw std::invalid_argument(std::string("train config: ") + name + " must be > 0");
  };
  positive(epochs, "epochs");
  positive(batch_size, "batch_size");
  positive(learning_rate, "learning_rate");
  positive(max_neg_entities, "max_neg_entities");
  positive(max_neg_relations, "max_neg_relations");
  positive(rel_threshold, "rel_threshold");
  positive(max_span_len, "max_span_len");
  positive(width_dim, "width_dim");
  positive(grad_clip_norm, "grad_clip_norm");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("train config: dropout must be in [0, 1)");
  }
  if (!(rel_threshold < 1.0)) throw std::invalid_argument("train config: rel_threshold must be < 1");
  if (weight_decay < 0) throw std::invalid_argument("train config: weight_decay must be >= 0");
}

ModelConfig TrainConfig::ToModelConfig() const {
  ModelConfig m;
  m.max_span_len = max_span_len;
  m.width_dim = width_dim;
  m.rel_threshold = rel_threshold;
  m.encoder = encoder;
  m.encoder.dropout_rate = dropout;
  return m;
}

json TrainConfig::ToJson() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"dropout", dropout},
          {"max_neg_entities", max_neg_entities},
          {"max_neg_relations", max_neg_relations},
          {"rel_threshold", rel_threshold},
          {"max_span_len", max_span_len},
          {"width_dim", width_dim},
          {"seed", seed},
          {"weight_decay", weight_decay},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_epsilon", adam_epsilon},
          {"grad_clip_norm", grad_clip_norm},
          {"encoder", encoder.ToJson()},
          {"tagset", tagset ? json(tagset->tags()) : json()},
          {"tagger_lexicon", tagger_lexicon}};
}

TrainConfig TrainConfig::FromJson(const json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.dropout = j.value("dropout", c.dropout);
    c.max_neg_entities = j.value("max_neg_entities", c.max_neg_entities);
    c.max_neg_relations = j.value("max_neg_relations", c.max_neg_relations);
    c.rel_threshold = j.value("rel_threshold", c.rel_threshold);
    c.max_span_len = j.value("max_span_len", c.max_span_len);
    c.width_dim = j.value("width_dim", c.width_dim);
    c.seed = j.value("seed", c.seed);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
    if (j.contains("encoder")) c.encoder = EncoderConfig::FromJson(j.at("encoder"));
    if (j.contains("tagset") && !j.at("tagset").is_null()) {
      c.tagset = PosTagset(j.at("tagset").get<std::vector<std::string>>());
    }
    if (j.contains("tagger_lexicon")) {
      c.tagger_lexicon = j.at("tagger_lexicon").get<std::map<std::string, std::string>>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  return c;
}

NegativeSamples SampleNegatives(const Sentence& sentence, const ExtractionSchema& schema,
                                int max_span_len, int max_neg_entities, int max_neg_relations,
                                uint64_t seed) {
  Rng rng(seed);
  NegativeSamples out;

  std::set<std::pair<int, int>> gold_spans;
  for (const auto& e : sentence.entities) gold_spans.insert({e.start, e.end});
  for (const auto& span : EnumerateSpans(static_cast<int>(sentence.tokens.size()), max_span_len)) {
    if (!gold_spans.count({span.start, span.end})) out.spans.push_back(span);
  }
  rng.Shuffle(std::span<SpanCandidate>(out.spans));
  if (out.spans.size() > static_cast<size_t>(max_neg_entities)) out.spans.resize(max_neg_entities);
  std::sort(out.spans.begin(), out.spans.end());

  std::set<std::pair<int, int>> related;
  for (const auto& r : sentence.relations) {
    related.insert({r.head, r.tail});
    if (schema.IsSymmetric(schema.RelationIndex(r.type))) related.insert({r.tail, r.head});
  }
  for (const auto& pair : PairCandidates(sentence.entities.size())) {
    if (!related.count(pair)) out.pairs.push_back(pair);
  }
  rng.Shuffle(std::span<std::pair<int, int>>(out.pairs));
  if (out.pairs.size() > static_cast<size_t>(max_neg_relations)) out.pairs.resize(max_neg_relations);
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

TrainingExample BuildExample(const SpanRelationModel& model, const Sentence& sentence,
                             const NegativeSamples& negatives) {
  const ExtractionSchema& schema = model.schema();
  TrainingExample ex;
  ex.sentence = &sentence;
  ex.tag_codes = model.TagCodes(sentence.tokens, sentence.pos_tags);
  for (const auto& e : sentence.entities) {
    if (e.width() > model.config().max_span_len) continue;  // cannot be enumerated
    ex.spans.push_back({e.start, e.end});
    ex.span_labels.push_back(schema.EntityIndex(e.type) + 1);
  }
  for (const auto& s : negatives.spans) {
    ex.spans.push_back(s);
    ex.span_labels.push_back(0);
  }

  auto usable = [&](int idx) { return sentence.entities[idx].width() <= model.config().max_span_len; };
  auto span_of = [&](int idx) {
    return SpanCandidate{sentence.entities[idx].start, sentence.entities[idx].end};
  };
  const size_t num_types = schema.relation_types().size();
  if (num_types == 0) return ex;
  std::map<std::pair<int, int>, std::vector<double>> positives;
  for (const auto& r : sentence.relations) {
    if (!usable(r.head) || !usable(r.tail)) continue;
    const int type = schema.RelationIndex(r.type);
    auto& fwd = positives[{r.head, r.tail}];
    fwd.resize(num_types, 0.0);
    fwd[type] = 1.0;
    if (schema.IsSymmetric(type)) {
      auto& rev = positives[{r.tail, r.head}];
      rev.resize(num_types, 0.0);
      rev[type] = 1.0;
    }
  }
  for (const auto& [pair, targets] : positives) {
    ex.pairs.push_back({span_of(pair.first), span_of(pair.second), targets});
  }
  for (const auto& [h, t] : negatives.pairs) {
    if (!usable(h) || !usable(t)) continue;
    ex.pairs.push_back({span_of(h), span_of(t), std::vector<double>(num_types, 0.0)});
  }
  return ex;
}

double CrossEntropy(std::span<const double> logits, int target) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return std::log(z) + m - logits[target];
}

double BinaryCrossEntropy(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

LossValue ComputeLoss(SpanRelationModel& model, std::span<const TrainingExample> batch,
                      EncodeMode mode, Rng* rng, bool accumulate) {
  LossValue loss;
  const size_t num_types = model.schema().relation_types().size();
  for (const auto& ex : batch) {
    loss.span_count += ex.spans.size();
    loss.relation_outputs += ex.pairs.size() * num_types;
  }
  const double span_scale = loss.span_count ? 1.0 / static_cast<double>(loss.span_count) : 0.0;
  const double rel_scale =
      loss.relation_outputs ? 1.0 / static_cast<double>(loss.relation_outputs) : 0.0;
  const int d_tok = model.encoder().token_dim();

  for (const auto& ex : batch) {
    const auto& tokens = ex.sentence->tokens;
    EncoderOutput out = model.encoder().Forward(tokens, mode, rng);
    const TokenEncoding& enc = out.encoding;
    TokenEncoding enc_grad;
    if (accumulate) {
      enc_grad.tokens = Matrix(enc.tokens.rows, enc.tokens.cols);
      enc_grad.sentence.assign(enc.sentence.size(), 0.0);
    }

    for (size_t i = 0; i < ex.spans.size(); ++i) {
      SpanFeatureTrace trace;
      const auto x = SpanFeatures(ex.spans[i], enc, ex.tag_codes, model.widths(), &trace);
      const auto z = model.span_classifier().Forward(x);
      loss.ce += span_scale * CrossEntropy(z, ex.span_labels[i]);
      if (!accumulate) continue;
      std::vector<double> dz = Softmax(z);
      dz[ex.span_labels[i]] -= 1.0;
      for (double& v : dz) v *= span_scale;
      std::vector<double> dx(x.size(), 0.0);
      model.span_classifier().Backward(x, dz, &dx);
      SpanFeaturesBackward(ex.spans[i], trace, dx, &enc_grad, &model.widths());
    }

    for (const auto& pair : ex.pairs) {
      RelationFeatureTrace trace;
      const auto x = RelationFeatures(pair.head, pair.tail, enc, ex.tag_codes, model.widths(), &trace);
      const auto z = model.relation_classifier().Forward(x);
      std::vector<double> dz(num_types);
      for (size_t t = 0; t < num_types; ++t) {
        loss.bce += rel_scale * BinaryCrossEntropy(z[t], pair.targets[t]);
        dz[t] = rel_scale * (Sigmoid(z[t]) - pair.targets[t]);
      }
      if (!accumulate) continue;
      std::vector<double> dx(x.size(), 0.0);
      model.relation_classifier().Backward(x, dz, &dx);
      RelationFeaturesBackward(pair.head, pair.tail, trace, dx, d_tok, &enc_grad, &model.widths());
    }

    if (accumulate) model.encoder().Backward(*out.trace, enc_grad);
  }
  loss.total = loss.ce + loss.bce;
  if (!std::isfinite(loss.total)) {
    std::ostringstream msg;
    msg << "non-finite loss (ce=" << loss.ce << ", bce=" << loss.bce << ") over "
        << loss.span_count << " spans and " << loss.relation_outputs << " relation outputs";
    throw TrainingError(msg.str());
  }
  return loss;
}

double ClipGradNorm(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad) g *= scale;
    }
  }
  return norm;
}

AdamW::AdamW(std::vector<Parameter*> params, double lr, double beta1, double beta2, double epsilon,
             double weight_decay)
    : params_(std::move(params)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      weight_decay_(weight_decay) {
  for (const Parameter* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void AdamW::Step() {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    const bool decay = p.name.size() < 4 || p.name.compare(p.name.size() - 4, 4, "bias") != 0;
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t k = 0; k < p.size(); ++k) {
      const double g = p.grad[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
      const double update = (m[k] / c1) / (std::sqrt(v[k] / c2) + epsilon_);
      p.value[k] -= lr_ * (update + (decay ? weight_decay_ * p.value[k] : 0.0));
    }
  }
}

json TrainLogRecord::ToJson() const {
  return {{"epoch", epoch},
          {"batch", batch},
          {"loss_ce", loss_ce},
          {"loss_bce", loss_bce},
          {"loss_total", loss_total}};
}

namespace {

std::vector<std::string> BuildVocab(const Dataset& ds) {
  std::set<std::string> words;
  for (const auto& s : ds.sentences) words.insert(s.tokens.begin(), s.tokens.end());
  return {words.begin(), words.end()};
}

std::unique_ptr<SpanRelationModel> FreshModel(const Dataset& ds, const TrainConfig& config) {
  const ModelConfig mc = config.ToModelConfig();
  std::unique_ptr<Encoder> encoder;
  Rng init(MixSeed(config.seed, 0x696e6974ULL));
  if (mc.encoder.kind == EncoderKind::kToy) {
    auto toy = std::make_unique<ToyEncoder>(mc.encoder, BuildVocab(ds));
    toy->Initialize(init);
    encoder = std::move(toy);
  } else {
    encoder = LoadPrecomputed(mc.encoder.precomputed_path);
  }
  auto model = std::make_unique<SpanRelationModel>(
      ds.schema, config.tagset ? *config.tagset : PennTreebankTagset(), mc, std::move(encoder),
      config.tagger_lexicon);
  model->InitializeHeads(init);
  model->set_metadata({{"train_config", config.ToJson()}, {"train_sentences", ds.sentences.size()}});
  return model;
}

}  // namespace

TrainResult Train(const Dataset& dataset, const TrainConfig& config, const TrainLogSink& log,
                  const SpanRelationModel* warm_start) {
  config.Validate();
  if (dataset.sentences.empty()) throw Error("cannot train on an empty dataset");
  for (size_t i = 0; i < dataset.sentences.size(); ++i) {
    ValidateSentence(dataset.sentences[i], dataset.schema, i);
  }

  TrainResult result;
  if (warm_start) {
    if (!(warm_start->schema() == dataset.schema)) {
      throw SchemaError("warm-start model schema differs from the dataset schema");
    }
    result.model = std::make_unique<SpanRelationModel>(*warm_start);
  } else {
    result.model = FreshModel(dataset, config);
  }
  SpanRelationModel& model = *result.model;
  const int max_span_len = model.config().max_span_len;

  const auto params = model.Parameters();
  AdamW optimizer(params, config.learning_rate, config.adam_beta1, config.adam_beta2,
                  config.adam_epsilon, config.weight_decay);

  std::vector<size_t> order(dataset.sentences.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle(MixSeed(config.seed, 0x7368756600000000ULL + epoch));
    shuffle.Shuffle(std::span<size_t>(order));
    double epoch_total = 0.0;
    int batches = 0;
    for (size_t b = 0; b < order.size(); b += config.batch_size) {
      const size_t e = std::min(order.size(), b + config.batch_size);
      std::vector<TrainingExample> batch;
      for (size_t i = b; i < e; ++i) {
        const Sentence& s = dataset.sentences[order[i]];
        const uint64_t sample_seed = MixSeed(MixSeed(config.seed, epoch), order[i]);
        batch.push_back(BuildExample(
            model, s,
            SampleNegatives(s, dataset.schema, max_span_len, config.max_neg_entities,
                            config.max_neg_relations, sample_seed)));
      }
      Rng dropout(MixSeed(config.seed ^ 0x64726f70ULL, optimizer.steps()));
      model.ZeroGrad();
      const LossValue loss = ComputeLoss(model, batch, EncodeMode::kTrain, &dropout, true);
      ClipGradNorm(params, config.grad_clip_norm);
      optimizer.Step();
      ++batches;
      epoch_total += loss.total;
      if (log) log({epoch, batches, loss.ce, loss.bce, loss.total});
    }
    result.epoch_losses.push_back(epoch_total / batches);
  }
  model.ZeroGrad();
  return result;
}

EvalReport Evaluate(const Dataset& dataset, const SpanRelationModel& model) {
  if (!(model.schema() == dataset.schema)) {
    throw SchemaError("model schema does not match the dataset schema");
  }
  EvalAccumulator acc(dataset.schema, model.config().max_span_len);
  for (const auto& gold : dataset.sentences) {
    const Extraction ex = model.Extract(gold.tokens, gold.pos_tags);
    acc.Add(gold, ex.ToSentence(gold.tokens));
  }
  return acc.Report();
}

std::map<std::string, double> HeadlineMetrics(const EvalReport& r) {
  return {{"ner_macro_f1", r.entities.macro_f1},
          {"ner_micro_f1", r.entities.micro_f1},
          {"re_macro_f1", r.relations.macro_f1},
          {"re_micro_f1", r.relations.micro_f1},
          {"accuracy", r.accuracy}};
}

json CrossValidationReport::ToJson() const {
  json folds_json = json::array();
  for (size_t f = 0; f < reports.size(); ++f) {
    folds_json.push_back({{"fold", f}, {"test", folds[f].test}, {"report", reports[f].ToJson()}});
  }
  return {{"folds", folds_json}, {"mean", mean}, {"stdev", stdev}};
}

CrossValidationReport CrossValidate(const Dataset& dataset, size_t k, const TrainConfig& config,
                                    size_t threads) {
  CrossValidationReport out;
  out.folds = SplitKFold(dataset, k, config.seed);
  out.reports.resize(k);

  auto run_fold = [&](size_t f) {
    TrainConfig fold_config = config;
    fold_config.seed = MixSeed(config.seed, 0x666f6c64ULL + f);
    const Dataset train = Subset(dataset, out.folds[f].train);
    const Dataset test = Subset(dataset, out.folds[f].test);
    TrainResult trained = Train(train, fold_config);
    out.reports[f] = Evaluate(test, *trained.model);
  };
  if (threads <= 1) {
    for (size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    for (size_t start = 0; start < k; start += threads) {
      std::vector<std::future<void>> jobs;
      for (size_t f = start; f < std::min(k, start + threads); ++f) {
        jobs.push_back(std::async(std::launch::async, run_fold, f));
      }
      for (auto& j : jobs) j.get();
    }
  }

  std::map<std::string, std::vector<double>> values;
  for (const auto& r : out.reports) {
    for (const auto& [name, v] : HeadlineMetrics(r)) values[name].push_back(v);
  }
  for (const auto& [name, vs] : values) {
    const double mean = std::accumulate(vs.begin(), vs.end(), 0.0) / static_cast<double>(vs.size());
    double ss = 0.0;
    for (double v : vs) ss += (v - mean) * (v - mean);
    out.mean[name] = mean;
    out.stdev[name] = vs.size() > 1 ? std::sqrt(ss / static_cast<double>(vs.size() - 1)) : 0.0;
  }
  return out;
}

}  // namespace sciex
