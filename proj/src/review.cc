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

#include "sciex/review.h"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>

#include "sciex/bytes.h"
#include "sciex/checkpoint.h"
#include "sciex/common.h"
#include "sciex/features.h"
#include "sciex/rng.h"
#include "sciex/utf8.h"

namespace sciex {

using nlohmann::json;

std::string StatusName(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::kPending:
      return "pending";
    case ReviewStatus::kInReview:
      return "in_review";
    case ReviewStatus::kVerified:
      return "verified";
    case ReviewStatus::kRejected:
      return "rejected";
  }
  return "pending";
}

std::optional<ReviewStatus> ParseStatus(const std::string& name) {
  for (auto s : {ReviewStatus::kPending, ReviewStatus::kInReview, ReviewStatus::kVerified,
                 ReviewStatus::kRejected}) {
    if (StatusName(s) == name) return s;
  }
  return std::nullopt;
}

bool IsLegalTransition(ReviewStatus from, ReviewStatus to) {
  if (from == ReviewStatus::kPending) return to == ReviewStatus::kInReview;
  if (from == ReviewStatus::kInReview) {
    return to == ReviewStatus::kVerified || to == ReviewStatus::kRejected;
  }
  return false;
}

json ReviewRecord::ToJson() const {
  json j = {{"doc_id", doc_id},
            {"status", StatusName(status)},
            {"pre", pre.ToJson()},
            {"corrected", corrected ? corrected->ToJson() : json()},
            {"reviewer", reviewer},
            {"created_ms", created_ms},
            {"updated_ms", updated_ms},
            {"model_version", model_version}};
  return j;
}

json ReviewRecord::Summary() const {
  return {{"doc_id", doc_id},
          {"status", StatusName(status)},
          {"reviewer", reviewer},
          {"model_version", model_version},
          {"labels", pre.labels.size()},
          {"connections", pre.connections.size()},
          {"updated_ms", updated_ms}};
}

ReviewRecord ReviewRecord::FromJson(const json& j) {
  ReviewRecord r;
  try {
    r.doc_id = j.at("doc_id").get<std::string>();
    const auto status = ParseStatus(j.at("status").get<std::string>());
    if (!status) throw ParseError("review record: unknown status " + j.at("status").dump());
    r.status = *status;
    r.pre = PreAnnotation::FromJson(j.at("pre"));
    if (j.contains("corrected") && !j.at("corrected").is_null()) {
      r.corrected = PreAnnotation::FromJson(j.at("corrected"));
    }
    r.reviewer = j.value("reviewer", std::string());
    r.created_ms = j.value("created_ms", int64_t{0});
    r.updated_ms = j.value("updated_ms", int64_t{0});
    r.model_version = j.value("model_version", 0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("review record: ") + e.what());
  }
  return r;
}

json ModelEntry::ToJson() const {
  return {{"version", version},
          {"checkpoint", checkpoint},
          {"metrics", metrics},
          {"job_id", job_id},
          {"created_ms", created_ms}};
}

ModelEntry ModelEntry::FromJson(const json& j) {
  try {
    return {j.at("version").get<int>(), j.value("checkpoint", std::string()),
            j.value("metrics", json::object()), j.value("job_id", std::string()),
            j.value("created_ms", int64_t{0})};
  } catch (const json::exception& e) {
    throw ParseError(std::string("model entry: ") + e.what());
  }
}

std::string EncodeFrame(const std::string& payload) {
  std::string frame;
  AppendU32(&frame, static_cast<uint32_t>(payload.size()));
  AppendU32(&frame, Crc32(payload));
  frame += payload;
  return frame;
}

ReviewStore::ReviewStore(std::string path) : path_(std::move(path)) {
  Load();
  OpenForAppend();
}

ReviewStore::~ReviewStore() {
  if (file_) std::fclose(file_);
}

void ReviewStore::OpenForAppend() {
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw Error("review store: cannot open " + path_ + " for appending");
}

void ReviewStore::Load() {
  if (!std::filesystem::exists(path_)) return;
  const std::string bytes = ReadFileBytes(path_);
  size_t pos = 0;
  while (pos < bytes.size()) {
    std::string problem;
    if (bytes.size() - pos < 8) {
      problem = "torn frame header";
    } else {
      const uint32_t len = ReadU32(bytes, pos);
      const uint32_t crc = ReadU32(bytes, pos + 4);
      if (bytes.size() - pos - 8 < len) {
        problem = "torn frame payload";
      } else {
        const std::string_view payload = std::string_view(bytes).substr(pos + 8, len);
        if (Crc32(payload) != crc) {
          problem = "checksum mismatch";
        } else {
          try {
            const json entry = json::parse(payload);
            const std::string kind = entry.at("kind").get<std::string>();
            if (kind == "record") {
              ReviewRecord r = ReviewRecord::FromJson(entry.at("record"));
              if (!records_.count(r.doc_id)) order_.push_back(r.doc_id);
              records_[r.doc_id] = std::move(r);
            } else if (kind == "model") {
              ModelEntry m = ModelEntry::FromJson(entry.at("model"));
              models_[m.version] = std::move(m);
            }
          } catch (const std::exception& e) {
            problem = std::string("undecodable frame: ") + e.what();
          }
        }
      }
    }
    if (!problem.empty()) {
      load_warnings_.push_back("review store " + path_ + ": " + problem + " at byte " +
                               std::to_string(pos) + "; discarded " +
                               std::to_string(bytes.size() - pos) + " trailing bytes");
      std::filesystem::resize_file(path_, pos);
      break;
    }
    pos += 8 + ReadU32(bytes, pos);
    ++frames_;
  }
}

void ReviewStore::Append(const json& entry) {
  const std::string frame = EncodeFrame(entry.dump());
  if (std::fwrite(frame.data(), 1, frame.size(), file_) != frame.size() || std::fflush(file_) != 0) {
    throw Error("review store: write to " + path_ + " failed");
  }
  ::fsync(fileno(file_));
  ++frames_;
}

void ReviewStore::PutRecord(const ReviewRecord& record) {
  std::lock_guard<std::mutex> lock(mu_);
  Append({{"kind", "record"}, {"record", record.ToJson()}});
  if (!records_.count(record.doc_id)) order_.push_back(record.doc_id);
  records_[record.doc_id] = record;
  MaybeCompact();
}

void ReviewStore::PutModel(const ModelEntry& model) {
  std::lock_guard<std::mutex> lock(mu_);
  Append({{"kind", "model"}, {"model", model.ToJson()}});
  models_[model.version] = model;
  MaybeCompact();
}

std::optional<ReviewRecord> ReviewStore::GetRecord(const std::string& doc_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = records_.find(doc_id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<ReviewRecord> ReviewStore::Records() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ReviewRecord> out;
  for (const auto& id : order_) out.push_back(records_.at(id));
  return out;
}

std::vector<ModelEntry> ReviewStore::Models() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ModelEntry> out;
  for (const auto& [v, m] : models_) out.push_back(m);
  return out;
}

size_t ReviewStore::frames_in_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return frames_;
}

void ReviewStore::MaybeCompact() {
  const size_t live = records_.size() + models_.size();
  if (frames_ >= 256 && frames_ >= 4 * live) RewriteLog();
}

void ReviewStore::RewriteLog() {
  std::string bytes;
  for (const auto& id : order_) {
    bytes += EncodeFrame(json{{"kind", "record"}, {"record", records_.at(id).ToJson()}}.dump());
  }
  for (const auto& [v, m] : models_) {
    bytes += EncodeFrame(json{{"kind", "model"}, {"model", m.ToJson()}}.dump());
  }
  std::fclose(file_);
  file_ = nullptr;
  WriteFileAtomic(path_, bytes);
  frames_ = records_.size() + models_.size();
  OpenForAppend();
}

void ReviewStore::Compact() {
  std::lock_guard<std::mutex> lock(mu_);
  RewriteLog();
}

namespace {

// Paragraph byte ranges of content (blocks are separated by blank lines).
std::vector<TextSpan> Paragraphs(const std::string& content) {
  std::vector<TextSpan> out;
  size_t start = 0;
  while (start <= content.size()) {
    size_t end = content.find("\n\n", start);
    if (end == std::string::npos) end = content.size();
    if (end > start) out.push_back({start, end});
    start = end + 2;
  }
  return out;
}

}  // namespace

ExportResult ExportVerified(const std::vector<ReviewRecord>& records,
                            const ExtractionSchema& schema,
                            const std::vector<std::string>& abbreviations) {
  ExportResult result;
  result.dataset.schema = schema;
  result.dataset.provenance = "review-export";
  for (const auto& record : records) {
    if (record.status != ReviewStatus::kVerified || !record.corrected) continue;
    const PreAnnotation& a = *record.corrected;
    const auto cp = utf8::CodepointByteOffsets(a.content);

    struct Placed {
      size_t sentence;
      int entity;
    };
    std::map<std::string, Placed> placed;
    std::vector<Sentence> sentences;
    std::vector<std::vector<Token>> sentence_tokens;
    std::vector<size_t> sentence_base;  // byte offset of each sentence

    for (const TextSpan& para : Paragraphs(a.content)) {
      const std::string_view ptext =
          std::string_view(a.content).substr(para.begin, para.end - para.begin);
      for (const TextSpan& s : SplitSentences(ptext, abbreviations)) {
        auto tokens = Tokenize(ptext.substr(s.begin, s.end - s.begin));
        if (tokens.empty()) continue;
        Sentence sent;
        for (const auto& t : tokens) sent.tokens.push_back(t.text);
        sentences.push_back(std::move(sent));
        sentence_tokens.push_back(std::move(tokens));
        sentence_base.push_back(para.begin + s.begin);
      }
    }

    for (const auto& label : a.labels) {
      if (label.end > cp.size() - 1 || label.start >= label.end) {
        result.quarantined.push_back({record.doc_id, label.id, "offsets outside content"});
        continue;
      }
      const size_t b = cp[label.start], e = cp[label.end];
      bool done = false;
      std::string reason = "label is not inside a sentence";
      for (size_t si = 0; si < sentences.size() && !done; ++si) {
        const auto& toks = sentence_tokens[si];
        const size_t base = sentence_base[si];
        const size_t s_begin = base + toks.front().begin, s_end = base + toks.back().end;
        if (e <= s_begin || b >= s_end) continue;
        if (b < s_begin || e > s_end) {
          reason = "label crosses a sentence boundary";
          break;
        }
        int first = -1, last = -1;
        for (size_t k = 0; k < toks.size(); ++k) {
          const size_t tb = base + toks[k].begin, te = base + toks[k].end;
          if (te <= b || tb >= e) continue;
          if (first < 0) first = static_cast<int>(k);
          last = static_cast<int>(k);
        }
        if (first < 0 || base + toks[first].begin != b || base + toks[last].end != e) {
          reason = "label boundary falls inside a token";
          break;
        }
        placed[label.id] = {si, static_cast<int>(sentences[si].entities.size())};
        sentences[si].entities.push_back({first, last + 1, label.type});
        done = true;
      }
      if (!done) result.quarantined.push_back({record.doc_id, label.id, reason});
    }

    for (size_t i = 0; i < a.connections.size(); ++i) {
      const auto& c = a.connections[i];
      const auto h = placed.find(c.head), t = placed.find(c.tail);
      const std::string name = "connection " + std::to_string(i);
      if (h == placed.end() || t == placed.end()) {
        result.quarantined.push_back({record.doc_id, name, "endpoint label was quarantined"});
      } else if (h->second.sentence != t->second.sentence) {
        result.quarantined.push_back({record.doc_id, name, "endpoints are in different sentences"});
      } else {
        sentences[h->second.sentence].relations.push_back(
            {h->second.entity, t->second.entity, c.type});
      }
    }

    for (auto& s : sentences) {
      NormalizeSentence(&s);
      ValidateSentence(s, schema, result.dataset.sentences.size());
      result.dataset.sentences.push_back(std::move(s));
      result.doc_ids.push_back(record.doc_id);
    }
  }
  return result;
}

RetrainOutcome RunRetrain(const SpanRelationModel& base, const std::vector<ReviewRecord>& verified,
                          const RetrainConfig& config, int new_version) {
  RetrainOutcome out;
  try {
    ExportResult exported = ExportVerified(verified, base.schema());
    out.quarantined = exported.quarantined;
    if (config.strict_alignment && !exported.quarantined.empty()) {
      const auto& q = exported.quarantined.front();
      out.message = "export alignment failure: " + std::to_string(exported.quarantined.size()) +
                    " quarantined (first: " + q.doc_id + " " + q.label_id + ": " + q.reason + ")";
      return out;
    }
    const Dataset& all = exported.dataset;
    if (all.sentences.empty()) {
      out.message = "verified records produced no sentences";
      return out;
    }

    std::vector<size_t> order(all.sentences.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(MixSeed(config.train.seed, 0x686f6c64ULL));
    rng.Shuffle(std::span<size_t>(order));
    size_t holdout = 0;
    if (order.size() >= 2 && config.holdout_fraction > 0) {
      holdout = std::max<size_t>(1, static_cast<size_t>(config.holdout_fraction * order.size()));
      holdout = std::min(holdout, order.size() - 1);
    }
    std::vector<size_t> held(order.begin(), order.begin() + holdout);
    std::vector<size_t> train(order.begin() + holdout, order.end());
    std::sort(held.begin(), held.end());
    std::sort(train.begin(), train.end());

    const Dataset train_set = Subset(all, train);
    Dataset heldback = Subset(all, held);
    if (config.reference) {
      if (!(config.reference->schema == base.schema())) {
        out.message = "reference dataset schema differs from the model schema";
        return out;
      }
      heldback.sentences.insert(heldback.sentences.end(), config.reference->sentences.begin(),
                                config.reference->sentences.end());
    }
    // Nothing held back: gate on the training data itself.
    if (heldback.sentences.empty()) heldback = train_set;
    out.train_sentences = train_set.sentences.size();
    out.heldback_sentences = heldback.sentences.size();

    const auto before = HeadlineMetrics(Evaluate(heldback, base));
    TrainResult trained = Train(train_set, config.train, {}, &base);
    const auto after = HeadlineMetrics(Evaluate(heldback, *trained.model));
    out.base_metrics = before;
    out.new_metrics = after;

    for (const char* key : {"ner_macro_f1", "re_macro_f1"}) {
      const double drop = before.at(key) - after.at(key);
      if (drop > config.regression_tolerance) {
        out.message = std::string("regression gate: ") + key + " fell from " +
                      std::to_string(before.at(key)) + " to " + std::to_string(after.at(key));
        return out;
      }
    }
    trained.model->set_version(new_version);
    json meta = trained.model->metadata();
    meta["warm_start_from"] = base.version();
    meta["heldback_metrics"] = after;
    trained.model->set_metadata(meta);
    out.model = std::move(trained.model);
    out.published = true;
    out.message = "published version " + std::to_string(new_version);
  } catch (const std::exception& e) {
    out.message = std::string("retrain failed: ") + e.what();
  }
  return out;
}

std::string JobStateName(JobState state) {
  switch (state) {
    case JobState::kQueued:
      return "queued";
    case JobState::kRunning:
      return "running";
    case JobState::kDone:
      return "done";
    case JobState::kFailed:
      return "failed";
  }
  return "queued";
}

json RetrainJob::ToJson() const {
  return {{"job_id", job_id},
          {"base_version", base_version},
          {"record_count", record_count},
          {"state", JobStateName(state)},
          {"produced_version", produced_version ? json(*produced_version) : json()},
          {"message", message},
          {"metrics", metrics}};
}

namespace {

ApiResponse ErrorResponse(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

}  // namespace

ReviewService::ReviewService(ServiceConfig config, std::shared_ptr<const SpanRelationModel> model)
    : config_(std::move(config)), store_(config_.store_path), model_(std::move(model)) {
  if (model_ && !(model_->schema() == config_.schema)) {
    throw SchemaError("served model schema differs from the service schema");
  }
  for (const auto& w : store_.load_warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (model_) {
    const auto models = store_.Models();
    if (models.empty() || models.back().version < model_->version()) {
      store_.PutModel({model_->version(), "", json::object(), "", Now()});
    }
  }
}

ReviewService::~ReviewService() { WaitForJobs(); }

int64_t ReviewService::Now() const {
  if (config_.clock) return config_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::shared_ptr<const SpanRelationModel> ReviewService::CurrentModel() const {
  std::lock_guard<std::mutex> lock(model_mu_);
  return model_;
}

int ReviewService::CurrentVersion() const {
  auto m = CurrentModel();
  return m ? m->version() : 0;
}

bool ReviewService::AddPreAnnotation(const PreAnnotation& annotation) {
  std::lock_guard<std::mutex> lock(mu_);
  if (store_.GetRecord(annotation.doc_id)) return false;
  ReviewRecord r;
  r.doc_id = annotation.doc_id;
  r.pre = annotation;
  r.created_ms = r.updated_ms = Now();
  r.model_version = annotation.model_version;
  store_.PutRecord(r);
  return true;
}

ApiResponse ReviewService::ListDocs(const std::string& status, int page) const {
  std::optional<ReviewStatus> filter;
  if (!status.empty()) {
    filter = ParseStatus(status);
    if (!filter) return ErrorResponse(400, "unknown status filter '" + status + "'");
  }
  if (page < 1) return ErrorResponse(400, "page must be >= 1");
  std::vector<ReviewRecord> matching;
  for (auto& r : store_.Records()) {
    if (!filter || r.status == *filter) matching.push_back(std::move(r));
  }
  json items = json::array();
  const size_t begin = static_cast<size_t>(page - 1) * config_.page_size;
  for (size_t i = begin; i < std::min(matching.size(), begin + config_.page_size); ++i) {
    items.push_back(matching[i].Summary());
  }
  std::map<std::string, size_t> counts;
  for (const auto& r : store_.Records()) ++counts[StatusName(r.status)];
  return {200,
          {{"items", items},
           {"page", page},
           {"page_size", config_.page_size},
           {"total", matching.size()},
           {"counts", counts}}};
}

ApiResponse ReviewService::GetDoc(const std::string& doc_id) const {
  const auto r = store_.GetRecord(doc_id);
  if (!r) return ErrorResponse(404, "unknown document " + doc_id);
  return {200, r->ToJson()};
}

ApiResponse ReviewService::PutAnnotations(const std::string& doc_id, const std::string& body,
                                          const std::string& header_reviewer) {
  std::lock_guard<std::mutex> lock(mu_);
  auto current = store_.GetRecord(doc_id);
  if (!current) return ErrorResponse(404, "unknown document " + doc_id);

  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return ErrorResponse(400, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("status") || !j.at("status").is_string()) {
    return ErrorResponse(400, "payload needs a string 'status'");
  }
  const auto status = ParseStatus(j.at("status").get<std::string>());
  if (!status) return ErrorResponse(400, "unknown status " + j.at("status").dump());
  std::string reviewer = header_reviewer;
  if (j.contains("reviewer") && j.at("reviewer").is_string()) {
    reviewer = j.at("reviewer").get<std::string>();
  }
  std::optional<PreAnnotation> corrected;
  if (j.contains("corrected") && !j.at("corrected").is_null()) {
    try {
      corrected = PreAnnotation::FromJson(j.at("corrected"));
    } catch (const ParseError& e) {
      return ErrorResponse(400, e.what());
    }
  }

  // Identical resubmission: nothing to do.
  if (*status == current->status && corrected == current->corrected &&
      reviewer == current->reviewer) {
    return {200, current->ToJson()};
  }
  if (!IsLegalTransition(current->status, *status)) {
    return ErrorResponse(409, "illegal transition " + StatusName(current->status) + " -> " +
                                  StatusName(*status));
  }
  if (current->status == ReviewStatus::kInReview && reviewer != current->reviewer) {
    return ErrorResponse(409, "document is in review by '" + current->reviewer + "'");
  }
  const bool terminal = *status == ReviewStatus::kVerified || *status == ReviewStatus::kRejected;
  if (terminal && !corrected) {
    return ErrorResponse(400, StatusName(*status) + " requires a corrected annotation");
  }
  if (!terminal && corrected) {
    return ErrorResponse(400, "corrected annotation is only accepted with verified or rejected");
  }
  if (corrected) {
    if (corrected->content != current->pre.content) {
      return ErrorResponse(400, "corrected content differs from the pre-annotation content");
    }
    if (!corrected->doc_id.empty() && corrected->doc_id != doc_id) {
      return ErrorResponse(400, "corrected doc_id " + corrected->doc_id + " does not match");
    }
    if (const auto issue = CheckPreAnnotation(*corrected, &config_.schema)) {
      return ErrorResponse(issue->kind == AnnotationIssue::Kind::kSchemaMismatch ? 422 : 400,
                           issue->message);
    }
    corrected->doc_id = doc_id;
  }

  ReviewRecord next = *current;
  next.status = *status;
  next.corrected = corrected;
  next.reviewer = reviewer;
  next.updated_ms = Now();
  store_.PutRecord(next);
  return {200, next.ToJson()};
}

ApiResponse ReviewService::CreateDoc(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return ErrorResponse(400, std::string("invalid JSON: ") + e.what());
  }
  PreAnnotation annotation;
  try {
    if (j.contains("pages")) {
      const auto model = CurrentModel();
      if (!model) return ErrorResponse(409, "no model is loaded");
      annotation = RunPipeline(ParseBlockDump(j), *model, config_.schema, config_.lexicon,
                               config_.pipeline);
    } else {
      annotation = PreAnnotation::FromJson(j);
    }
  } catch (const SchemaError& e) {
    return ErrorResponse(422, e.what());
  } catch (const DataError& e) {
    return ErrorResponse(400, e.what());
  }
  if (annotation.doc_id.empty()) return ErrorResponse(400, "doc_id is required");
  if (const auto issue = CheckPreAnnotation(annotation, &config_.schema)) {
    return ErrorResponse(issue->kind == AnnotationIssue::Kind::kSchemaMismatch ? 422 : 400,
                         issue->message);
  }
  if (!AddPreAnnotation(annotation)) {
    return ErrorResponse(409, "document " + annotation.doc_id + " already exists");
  }
  return {201, store_.GetRecord(annotation.doc_id)->Summary()};
}

ApiResponse ReviewService::StartRetrain() {
  std::unique_lock<std::mutex> lock(mu_);
  for (const auto& job : jobs_) {
    if (job.state == JobState::kQueued || job.state == JobState::kRunning) {
      return ErrorResponse(409, "retrain job " + job.job_id + " is already running");
    }
  }
  const auto base = CurrentModel();
  if (!base) return ErrorResponse(409, "no model is loaded");
  std::vector<ReviewRecord> verified;
  for (auto& r : store_.Records()) {
    if (r.status == ReviewStatus::kVerified) verified.push_back(std::move(r));
  }
  if (verified.empty()) return ErrorResponse(409, "no verified records to train on");

  int new_version = base->version();
  for (const auto& m : store_.Models()) new_version = std::max(new_version, m.version);
  ++new_version;

  RetrainJob job;
  job.job_id = "job-" + std::to_string(jobs_.size() + 1);
  job.base_version = base->version();
  job.record_count = verified.size();
  job.state = JobState::kRunning;
  jobs_.push_back(job);

  if (worker_.joinable()) worker_.join();
  if (config_.async_jobs) {
    worker_ = std::thread(&ReviewService::RunJob, this, job.job_id, base, std::move(verified),
                          new_version);
  } else {
    lock.unlock();
    RunJob(job.job_id, base, std::move(verified), new_version);
    lock.lock();
  }
  for (const auto& j : jobs_) {
    if (j.job_id == job.job_id) return {202, j.ToJson()};
  }
  return {202, job.ToJson()};
}

void ReviewService::RunJob(std::string job_id, std::shared_ptr<const SpanRelationModel> base,
                           std::vector<ReviewRecord> verified, int new_version) {
  RetrainOutcome outcome = RunRetrain(*base, verified, config_.retrain, new_version);
  std::optional<int> produced;
  if (outcome.published) {
    try {
      std::string path;
      if (!config_.model_dir.empty()) {
        std::filesystem::create_directories(config_.model_dir);
        path = (std::filesystem::path(config_.model_dir) /
                ("model-v" + std::to_string(new_version) + ".ckpt"))
                   .string();
        SaveCheckpoint(*outcome.model, path);
      }
      store_.PutModel({new_version, path, outcome.new_metrics, job_id, Now()});
      std::shared_ptr<const SpanRelationModel> next(std::move(outcome.model));
      {
        std::lock_guard<std::mutex> lock(model_mu_);
        model_ = std::move(next);
      }
      produced = new_version;
    } catch (const std::exception& e) {
      outcome.published = false;
      outcome.message = std::string("publishing failed: ") + e.what();
    }
  }

  std::lock_guard<std::mutex> lock(mu_);
  for (auto& job : jobs_) {
    if (job.job_id != job_id) continue;
    job.state = outcome.published ? JobState::kDone : JobState::kFailed;
    job.produced_version = produced;
    job.message = outcome.message;
    job.metrics = {{"base", outcome.base_metrics},
                   {"new", outcome.new_metrics},
                   {"train_sentences", outcome.train_sentences},
                   {"heldback_sentences", outcome.heldback_sentences},
                   {"quarantined", outcome.quarantined.size()}};
  }
}

void ReviewService::WaitForJobs() {
  if (worker_.joinable()) worker_.join();
}

ApiResponse ReviewService::ListJobs() const {
  std::lock_guard<std::mutex> lock(mu_);
  json items = json::array();
  for (const auto& j : jobs_) items.push_back(j.ToJson());
  return {200, {{"jobs", items}}};
}

ApiResponse ReviewService::GetJob(const std::string& job_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& j : jobs_) {
    if (j.job_id == job_id) return {200, j.ToJson()};
  }
  return ErrorResponse(404, "unknown job " + job_id);
}

ApiResponse ReviewService::ListModels() const {
  json items = json::array();
  for (const auto& m : store_.Models()) items.push_back(m.ToJson());
  return {200, {{"current_version", CurrentVersion()}, {"models", items}}};
}

ApiResponse ReviewService::GetSchema() const {
  json j = config_.schema.ToJson();
  j["public_fields"] = json::array();
  for (const auto& f : MolecularSievePublicFields()) {
    if (config_.schema.EntityIndex(f) >= 0) j["public_fields"].push_back(f);
  }
  return {200, j};
}

}  // namespace sciex
