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

// Human review of pre-annotations: the record state machine, a durable
// append-only store, export of verified records as training data, and
// gated warm-start retraining.

#ifndef SCIEX_REVIEW_H_
#define SCIEX_REVIEW_H_

#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sciex/corpus.h"
#include "sciex/extractor.h"
#include "sciex/pipeline.h"
#include "sciex/trainer.h"

namespace sciex {

enum class ReviewStatus { kPending, kInReview, kVerified, kRejected };

std::string StatusName(ReviewStatus status);
std::optional<ReviewStatus> ParseStatus(const std::string& name);
// pending -> in_review -> {verified, rejected}.
bool IsLegalTransition(ReviewStatus from, ReviewStatus to);

struct ReviewRecord {
  std::string doc_id;
  ReviewStatus status = ReviewStatus::kPending;
  PreAnnotation pre;
  std::optional<PreAnnotation> corrected;  // iff verified or rejected
  std::string reviewer;
  int64_t created_ms = 0;
  int64_t updated_ms = 0;
  int model_version = 0;

  nlohmann::json ToJson() const;
  nlohmann::json Summary() const;
  static ReviewRecord FromJson(const nlohmann::json& j);
};

struct ModelEntry {
  int version = 0;
  std::string checkpoint;  // path
  nlohmann::json metrics = nlohmann::json::object();
  std::string job_id;
  int64_t created_ms = 0;

  nlohmann::json ToJson() const;
  static ModelEntry FromJson(const nlohmann::json& j);
};

// Append-only log of length-prefixed, checksummed JSON frames:
//
//   u32 LE payload length | u32 LE CRC-32 of payload | payload
//
// The latest frame per doc id (or model version) wins. On open, a torn or
// corrupt tail is cut off and reported in load_warnings().
class ReviewStore {
 public:
  explicit ReviewStore(std::string path);
  ~ReviewStore();
  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  void PutRecord(const ReviewRecord& record);
  void PutModel(const ModelEntry& model);

  std::optional<ReviewRecord> GetRecord(const std::string& doc_id) const;
  // Insertion order of first appearance.
  std::vector<ReviewRecord> Records() const;
  std::vector<ModelEntry> Models() const;  // by version

  // Rewrites the log with only the live entries (tmp file + rename).
  void Compact();

  const std::string& path() const { return path_; }
  size_t frames_in_log() const;
  const std::vector<std::string>& load_warnings() const { return load_warnings_; }

 private:
  void Load();
  void Append(const nlohmann::json& entry);
  void MaybeCompact();
  void RewriteLog();
  void OpenForAppend();

  std::string path_;
  mutable std::mutex mu_;
  std::FILE* file_ = nullptr;
  std::vector<std::string> order_;
  std::map<std::string, ReviewRecord> records_;
  std::map<int, ModelEntry> models_;
  size_t frames_ = 0;
  std::vector<std::string> load_warnings_;
};

// Serialized frame, exposed for fault-injection tests.
std::string EncodeFrame(const std::string& payload);

struct QuarantinedLabel {
  std::string doc_id;
  std::string label_id;  // label or "connection <i>"
  std::string reason;
};

struct ExportResult {
  Dataset dataset;
  std::vector<QuarantinedLabel> quarantined;
  std::vector<std::string> doc_ids;  // one per exported sentence
};

// Splits each corrected annotation into paragraphs and sentences, tokenizes
// them and maps character-offset labels onto token spans. Labels whose
// boundaries fall inside a token or that cross a sentence are quarantined,
// as are connections touching them.
ExportResult ExportVerified(const std::vector<ReviewRecord>& records,
                            const ExtractionSchema& schema,
                            const std::vector<std::string>& abbreviations = DefaultAbbreviations());

struct RetrainConfig {
  TrainConfig train = [] {
    TrainConfig c;
    c.epochs = 5;
    return c;
  }();
  double regression_tolerance = 0.02;
  double holdout_fraction = 0.2;
  // Clean data always added to the held-back slice.
  std::optional<Dataset> reference;
  // Quarantined labels fail the job instead of being skipped.
  bool strict_alignment = true;
};

struct RetrainOutcome {
  bool published = false;
  std::string message;
  std::unique_ptr<SpanRelationModel> model;  // set when published
  nlohmann::json base_metrics;
  nlohmann::json new_metrics;
  size_t train_sentences = 0;
  size_t heldback_sentences = 0;
  std::vector<QuarantinedLabel> quarantined;
};

// Export, fine-tune a copy of `base` and compare NER and RE macro F1 on the
// held-back slice. Publishes (version = new_version) unless either drops by
// more than the tolerance. Never throws for data problems; they fail the
// outcome.
RetrainOutcome RunRetrain(const SpanRelationModel& base, const std::vector<ReviewRecord>& verified,
                          const RetrainConfig& config, int new_version);

enum class JobState { kQueued, kRunning, kDone, kFailed };
std::string JobStateName(JobState state);

struct RetrainJob {
  std::string job_id;
  int base_version = 0;
  size_t record_count = 0;
  JobState state = JobState::kQueued;
  std::optional<int> produced_version;
  std::string message;
  nlohmann::json metrics = nlohmann::json::object();

  nlohmann::json ToJson() const;
};

struct ServiceConfig {
  std::string store_path;
  std::string model_dir;  // published checkpoints
  ExtractionSchema schema;
  SectionLexicon lexicon;
  PipelineOptions pipeline;
  RetrainConfig retrain;
  size_t page_size = 20;
  std::function<int64_t()> clock;  // ms since epoch; defaults to the system clock
  bool async_jobs = true;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Transport-independent API. All methods are thread-safe; writes are
// serialized and at most one retrain job runs at a time.
class ReviewService {
 public:
  ReviewService(ServiceConfig config, std::shared_ptr<const SpanRelationModel> model);
  ~ReviewService();

  ApiResponse ListDocs(const std::string& status, int page) const;
  ApiResponse GetDoc(const std::string& doc_id) const;
  // Body: {"status", "corrected"?, "reviewer"?}; `header_reviewer` is used
  // when the body names none.
  ApiResponse PutAnnotations(const std::string& doc_id, const std::string& body,
                             const std::string& header_reviewer = "");
  // Body: a PreAnnotation, or a block dump run through the current model.
  ApiResponse CreateDoc(const std::string& body);
  ApiResponse StartRetrain();
  ApiResponse ListJobs() const;
  ApiResponse GetJob(const std::string& job_id) const;
  ApiResponse ListModels() const;
  ApiResponse GetSchema() const;

  // Adds a pending record; false if the doc id exists.
  bool AddPreAnnotation(const PreAnnotation& annotation);

  std::shared_ptr<const SpanRelationModel> CurrentModel() const;
  int CurrentVersion() const;
  void WaitForJobs();
  ReviewStore& store() { return store_; }

 private:
  void RunJob(std::string job_id, std::shared_ptr<const SpanRelationModel> base,
              std::vector<ReviewRecord> verified, int new_version);
  int64_t Now() const;

  ServiceConfig config_;
  ReviewStore store_;
  mutable std::mutex mu_;        // records and jobs
  mutable std::mutex model_mu_;  // model pointer
  std::shared_ptr<const SpanRelationModel> model_;
  std::vector<RetrainJob> jobs_;
  std::thread worker_;
};

// Blocks serving `service` over HTTP on host:port until Stop() is called.
// Serves `ui_dir` statically at / when non-empty.
class ReviewServer {
 public:
  ReviewServer(ReviewService* service, std::string ui_dir = "");
  ~ReviewServer();

  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port; returns it or -1.
  int BindAny(const std::string& host);
  bool ListenAfterBind();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sciex

#endif  // SCIEX_REVIEW_H_
