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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gtest/gtest.h"
#include "httplib.h"
#include "sciex/checkpoint.h"
#include "sciex/common.h"
#include "testing.h"

namespace sciex {
namespace {

using nlohmann::json;

const std::vector<ReviewStatus> kStatuses = {ReviewStatus::kPending, ReviewStatus::kInReview,
                                             ReviewStatus::kVerified, ReviewStatus::kRejected};

TEST(StatusTest, NamesAndTransitions) {
  EXPECT_EQ(StatusName(ReviewStatus::kInReview), "in_review");
  for (auto s : kStatuses) EXPECT_EQ(ParseStatus(StatusName(s)), s);
  EXPECT_FALSE(ParseStatus("done").has_value());
  int legal = 0;
  for (auto a : kStatuses) {
    for (auto b : kStatuses) legal += IsLegalTransition(a, b);
  }
  EXPECT_EQ(legal, 3);
  EXPECT_TRUE(IsLegalTransition(ReviewStatus::kPending, ReviewStatus::kInReview));
  EXPECT_TRUE(IsLegalTransition(ReviewStatus::kInReview, ReviewStatus::kVerified));
  EXPECT_TRUE(IsLegalTransition(ReviewStatus::kInReview, ReviewStatus::kRejected));
  EXPECT_FALSE(IsLegalTransition(ReviewStatus::kVerified, ReviewStatus::kPending));
}

// Trained once; reaches perfect scores on the toy corpus.
std::shared_ptr<const SpanRelationModel> BaseModel() {
  static const std::shared_ptr<const SpanRelationModel> model = [] {
    TrainConfig c;
    c.epochs = 200;
    return std::shared_ptr<const SpanRelationModel>(Train(testing::ToyDataset(), c).model);
  }();
  return model;
}

PreAnnotation DocFor(size_t i) {
  const auto ds = testing::ToyDataset();
  return testing::AnnotationFromSentences("doc-" + std::to_string(i),
                                          {ds.sentences[i % ds.sentences.size()]});
}

ReviewRecord RecordFor(size_t i, ReviewStatus status) {
  ReviewRecord r;
  r.pre = DocFor(i);
  r.doc_id = r.pre.doc_id;
  r.status = status;
  if (status == ReviewStatus::kVerified || status == ReviewStatus::kRejected) r.corrected = r.pre;
  r.reviewer = "ann";
  return r;
}

class ServiceTest : public ::testing::Test {
 protected:
  ServiceConfig Config() {
    ServiceConfig c;
    c.store_path = dir_.File("review.log");
    c.model_dir = dir_.File("models");
    c.schema = testing::ToySchema();
    c.lexicon = LoadSectionLexicon(testing::DataFile("sections.json"));
    c.page_size = 2;
    c.clock = [this] { return ++now_; };
    c.async_jobs = false;
    c.retrain.train.encoder.d_tok = 16;
    c.retrain.train.encoder.d_sent = 8;
    c.retrain.train.epochs = 2;
    return c;
  }

  std::unique_ptr<ReviewService> Make(std::optional<ServiceConfig> config = std::nullopt) {
    return std::make_unique<ReviewService>(config ? *config : Config(), BaseModel());
  }

  static std::string Put(const std::string& status, const std::string& reviewer,
                         const std::optional<PreAnnotation>& corrected = std::nullopt) {
    json j = {{"status", status}, {"reviewer", reviewer}};
    if (corrected) j["corrected"] = corrected->ToJson();
    return j.dump();
  }

  // pending -> in_review -> verified with the pre-annotation as correction.
  static void Verify(ReviewService& service, const PreAnnotation& a) {
    ASSERT_EQ(service.PutAnnotations(a.doc_id, Put("in_review", "ann")).status, 200);
    ASSERT_EQ(service.PutAnnotations(a.doc_id, Put("verified", "ann", a)).status, 200);
  }

  testing::TempDir dir_;
  int64_t now_ = 1000;
};

TEST_F(ServiceTest, CreateAndFetch) {
  auto service = Make();
  const auto a = DocFor(0);
  auto r = service->CreateDoc(a.ToJson().dump());
  EXPECT_EQ(r.status, 201);
  EXPECT_EQ(r.body["status"], "pending");
  EXPECT_EQ(service->CreateDoc(a.ToJson().dump()).status, 409);
  r = service->GetDoc(a.doc_id);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(PreAnnotation::FromJson(r.body["pre"]), a);
  EXPECT_TRUE(r.body["corrected"].is_null());
  EXPECT_EQ(service->GetDoc("nope").status, 404);
}

TEST_F(ServiceTest, CreateValidates) {
  auto service = Make();
  auto a = DocFor(0);
  a.connections.push_back({"T1", "T42", "WorksFor", 0.5});
  auto r = service->CreateDoc(a.ToJson().dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body["error"].get<std::string>().find("T42"), std::string::npos);
  a = DocFor(0);
  a.labels[0].type = "Planet";
  EXPECT_EQ(service->CreateDoc(a.ToJson().dump()).status, 422);
  EXPECT_EQ(service->CreateDoc("{not json").status, 400);
  a = DocFor(0);
  a.doc_id = "";
  EXPECT_EQ(service->CreateDoc(a.ToJson().dump()).status, 400);
}

TEST_F(ServiceTest, CreateFromBlockDump) {
  auto service = Make();
  std::ifstream in(testing::TestData("fixture.blocks.json"));
  std::stringstream buf;
  buf << in.rdbuf();
  const auto r = service->CreateDoc(buf.str());
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body["doc_id"], "fixture-001");
  EXPECT_GT(r.body["labels"].get<int>(), 0);
}

TEST_F(ServiceTest, PutErrors) {
  auto service = Make();
  const auto a = DocFor(1);
  ASSERT_TRUE(service->AddPreAnnotation(a));
  EXPECT_EQ(service->PutAnnotations("nope", Put("in_review", "ann")).status, 404);
  EXPECT_EQ(service->PutAnnotations(a.doc_id, "[").status, 400);
  EXPECT_EQ(service->PutAnnotations(a.doc_id, R"({"status": "done"})").status, 400);
  // pending -> verified skips review.
  EXPECT_EQ(service->PutAnnotations(a.doc_id, Put("verified", "ann", a)).status, 409);
  ASSERT_EQ(service->PutAnnotations(a.doc_id, Put("in_review", "ann")).status, 200);
  // Another reviewer holds it.
  auto r = service->PutAnnotations(a.doc_id, Put("verified", "bob", a));
  EXPECT_EQ(r.status, 409);
  EXPECT_NE(r.body["error"].get<std::string>().find("ann"), std::string::npos);
  // Terminal status needs a correction.
  EXPECT_EQ(service->PutAnnotations(a.doc_id, Put("verified", "ann")).status, 400);
  auto bad = a;
  bad.connections.push_back({"T2", "T77", "LocatedIn", 1.0});
  r = service->PutAnnotations(a.doc_id, Put("verified", "ann", bad));
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body["error"].get<std::string>().find("T77"), std::string::npos);
  bad = a;
  bad.labels[0].type = "Planet";
  EXPECT_EQ(service->PutAnnotations(a.doc_id, Put("verified", "ann", bad)).status, 422);
  bad = a;
  bad.content += " more";
  EXPECT_EQ(service->PutAnnotations(a.doc_id, Put("verified", "ann", bad)).status, 400);
  EXPECT_EQ(service->GetDoc(a.doc_id).body["status"], "in_review");
  // The header supplies the reviewer when the body has none.
  json no_reviewer = {{"status", "verified"}, {"corrected", a.ToJson()}};
  EXPECT_EQ(service->PutAnnotations(a.doc_id, no_reviewer.dump(), "ann").status, 200);
  EXPECT_EQ(service->PutAnnotations(a.doc_id, Put("in_review", "ann")).status, 409);
}

TEST_F(ServiceTest, IdempotentPut) {
  auto service = Make();
  const auto a = DocFor(2);
  ASSERT_TRUE(service->AddPreAnnotation(a));
  Verify(*service, a);
  const size_t frames = service->store().frames_in_log();
  const auto before = service->GetDoc(a.doc_id).body;
  const auto r = service->PutAnnotations(a.doc_id, Put("verified", "ann", a));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, before);
  EXPECT_EQ(service->store().frames_in_log(), frames);
}

TEST_F(ServiceTest, ListDocsPaging) {
  auto service = Make();
  for (size_t i = 0; i < 5; ++i) ASSERT_TRUE(service->AddPreAnnotation(DocFor(i)));
  std::vector<std::string> seen;
  for (int page = 1; page <= 3; ++page) {
    const auto r = service->ListDocs("", page);
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["total"], 5);
    EXPECT_EQ(r.body["items"].size(), page < 3 ? 2u : 1u);
    for (const auto& item : r.body["items"]) seen.push_back(item["doc_id"]);
  }
  EXPECT_EQ(seen, (std::vector<std::string>{"doc-0", "doc-1", "doc-2", "doc-3", "doc-4"}));
  EXPECT_TRUE(service->ListDocs("", 4).body["items"].empty());
  EXPECT_EQ(service->ListDocs("bogus", 1).status, 400);
  EXPECT_EQ(service->ListDocs("", 0).status, 400);
  ASSERT_EQ(service->PutAnnotations("doc-3", Put("in_review", "ann")).status, 200);
  const auto r = service->ListDocs("in_review", 1);
  ASSERT_EQ(r.body["items"].size(), 1u);
  EXPECT_EQ(r.body["items"][0]["doc_id"], "doc-3");
  EXPECT_EQ(r.body["counts"]["pending"], 4);
}

TEST_F(ServiceTest, SchemaEndpoint) {
  auto service = Make();
  const auto r = service->GetSchema();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(ExtractionSchema::FromJson(r.body), testing::ToySchema());
  EXPECT_TRUE(r.body["public_fields"].empty());
}

// Random API traffic against a reference state machine.
TEST_F(ServiceTest, StateMachineProperty) {
  auto service = Make();
  const std::vector<std::string> reviewers = {"ann", "bob", ""};
  const std::vector<std::string> names = {"pending", "in_review", "verified", "rejected"};
  struct Model {
    ReviewStatus status = ReviewStatus::kPending;
    std::string reviewer;
    bool corrected = false;
  };
  std::map<std::string, Model> model;
  for (size_t i = 0; i < 6; ++i) {
    ASSERT_TRUE(service->AddPreAnnotation(DocFor(i)));
    model[DocFor(i).doc_id] = {};
  }
  Rng rng(99);
  for (int step = 0; step < 2000; ++step) {
    const size_t d = rng.Below(6);
    const auto a = DocFor(d);
    auto& m = model[a.doc_id];
    const auto to = kStatuses[rng.Below(4)];
    const std::string reviewer = reviewers[rng.Below(3)];
    const bool with_correction = rng.Below(2);
    const auto r = service->PutAnnotations(
        a.doc_id, Put(names[static_cast<int>(to)], reviewer,
                      with_correction ? std::optional<PreAnnotation>(a) : std::nullopt));
    const bool terminal = to == ReviewStatus::kVerified || to == ReviewStatus::kRejected;
    const bool same = to == m.status && reviewer == m.reviewer && with_correction == m.corrected;
    int expected;
    if (same) {
      expected = 200;
    } else if (!IsLegalTransition(m.status, to) ||
               (m.status == ReviewStatus::kInReview && reviewer != m.reviewer)) {
      expected = 409;
    } else if (terminal != with_correction) {
      expected = 400;
    } else {
      expected = 200;
      m = {to, reviewer, with_correction};
    }
    ASSERT_EQ(r.status, expected) << "step " << step << " " << r.body.dump();
    // Invariants on every stored record.
    const auto rec = service->store().GetRecord(a.doc_id);
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->status, m.status);
    EXPECT_EQ(rec->corrected.has_value(),
              rec->status == ReviewStatus::kVerified || rec->status == ReviewStatus::kRejected);
  }
  // The same state survives a restart.
  service.reset();
  ReviewStore store(Config().store_path);
  EXPECT_TRUE(store.load_warnings().empty());
  for (const auto& [id, m] : model) {
    const auto rec = store.GetRecord(id);
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->status, m.status);
    EXPECT_EQ(rec->reviewer, m.reviewer);
  }
}

TEST_F(ServiceTest, RetrainNeedsVerifiedRecords) {
  auto service = Make();
  ASSERT_TRUE(service->AddPreAnnotation(DocFor(0)));
  const auto r = service->StartRetrain();
  EXPECT_EQ(r.status, 409);
  EXPECT_TRUE(service->ListJobs().body["jobs"].empty());
}

TEST_F(ServiceTest, RetrainPublishesNextVersion) {
  auto service = Make();
  const int base = service->CurrentVersion();
  for (size_t i = 0; i < 7; ++i) ASSERT_TRUE(service->AddPreAnnotation(DocFor(i)));
  for (size_t i = 0; i < 5; ++i) Verify(*service, DocFor(i));
  const auto r = service->StartRetrain();
  ASSERT_EQ(r.status, 202);
  EXPECT_EQ(r.body["record_count"], 5);
  EXPECT_EQ(r.body["base_version"], base);
  const auto job = service->GetJob(r.body["job_id"]).body;
  EXPECT_EQ(job["state"], "done") << job.dump();
  EXPECT_EQ(job["produced_version"], base + 1);
  EXPECT_EQ(service->CurrentVersion(), base + 1);
  const auto models = service->ListModels().body;
  EXPECT_EQ(models["current_version"], base + 1);
  const std::string path = models["models"].back()["checkpoint"];
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_EQ(LoadCheckpoint(path)->version(), base + 1);
  EXPECT_EQ(service->GetJob("job-99").status, 404);

  // A restarted service remembers the published version.
  service.reset();
  ReviewStore store(Config().store_path);
  EXPECT_EQ(store.Models().back().version, base + 1);
}

TEST_F(ServiceTest, OneJobAtATime) {
  auto config = Config();
  config.async_jobs = true;
  config.retrain.train.epochs = 40;
  auto service = Make(config);
  for (size_t i = 0; i < 5; ++i) {
    ASSERT_TRUE(service->AddPreAnnotation(DocFor(i)));
    Verify(*service, DocFor(i));
  }
  ASSERT_EQ(service->StartRetrain().status, 202);
  const auto second = service->StartRetrain();
  EXPECT_EQ(second.status, 409);
  EXPECT_NE(second.body["error"].get<std::string>().find("job-1"), std::string::npos);
  service->WaitForJobs();
  EXPECT_EQ(service->GetJob("job-1").body["state"], "done");
  EXPECT_EQ(service->StartRetrain().status, 202);
  service->WaitForJobs();
}

// Labels with swapped types and reversed relations.
PreAnnotation Corrupt(PreAnnotation a) {
  for (auto& l : a.labels) {
    l.type = l.type == "Person" ? "Location" : l.type == "Location" ? "Person" : l.type;
  }
  for (auto& c : a.connections) {
    std::swap(c.head, c.tail);
    c.type = c.type == "WorksFor" ? "LocatedIn" : "WorksFor";
  }
  return a;
}

RetrainConfig GateConfig() {
  RetrainConfig c;
  c.train.epochs = 30;
  c.train.learning_rate = 1e-3;
  c.reference = testing::ToyDataset();
  return c;
}

TEST_F(ServiceTest, GateBlocksCorruptedData) {
  auto config = Config();
  config.retrain = GateConfig();
  auto service = Make(config);
  const auto served = service->CurrentModel();
  for (size_t i = 0; i < 10; ++i) {
    const auto a = DocFor(i);
    ASSERT_TRUE(service->AddPreAnnotation(a));
    ASSERT_EQ(service->PutAnnotations(a.doc_id, Put("in_review", "ann")).status, 200);
    ASSERT_EQ(service->PutAnnotations(a.doc_id, Put("verified", "ann", Corrupt(a))).status, 200);
  }
  const auto r = service->StartRetrain();
  ASSERT_EQ(r.status, 202);
  const auto job = service->GetJob(r.body["job_id"]).body;
  EXPECT_EQ(job["state"], "failed");
  EXPECT_NE(job["message"].get<std::string>().find("regression gate"), std::string::npos)
      << job.dump(1);
  EXPECT_TRUE(job["produced_version"].is_null());
  EXPECT_EQ(service->CurrentModel(), served);
  EXPECT_EQ(service->ListModels().body["models"].size(), 1u);
}

TEST(RetrainTest, CleanDataPassesTheGate) {
  std::vector<ReviewRecord> records;
  for (size_t i = 0; i < 10; ++i) records.push_back(RecordFor(i, ReviewStatus::kVerified));
  RetrainConfig c;
  c.reference = testing::ToyDataset();
  const auto out = RunRetrain(*BaseModel(), records, c, 7);
  EXPECT_TRUE(out.published) << out.message;
  ASSERT_NE(out.model, nullptr);
  EXPECT_EQ(out.model->version(), 7);
  EXPECT_EQ(out.train_sentences + out.heldback_sentences, 10u + 20u);
}

TEST(RetrainTest, ModelOwnOutputsPublish) {
  const auto ds = testing::ToyDataset();
  std::vector<ReviewRecord> records;
  for (size_t i = 0; i < 8; ++i) {
    const auto& tokens = ds.sentences[i].tokens;
    Sentence s = BaseModel()->Extract(tokens).ToSentence(tokens);
    ReviewRecord r;
    r.doc_id = "own-" + std::to_string(i);
    r.status = ReviewStatus::kVerified;
    r.corrected = testing::AnnotationFromSentences(r.doc_id, {s});
    r.pre = *r.corrected;
    records.push_back(r);
  }
  const auto out = RunRetrain(*BaseModel(), records, RetrainConfig{}, 2);
  EXPECT_TRUE(out.published) << out.message;
}

TEST(RetrainTest, AlignmentFailures) {
  auto rec = RecordFor(0, ReviewStatus::kVerified);
  rec.corrected->labels[0].end -= 1;  // "Farid" -> "Fari"
  RetrainConfig c = GateConfig();
  auto out = RunRetrain(*BaseModel(), {rec}, c, 2);
  EXPECT_FALSE(out.published);
  EXPECT_NE(out.message.find("alignment"), std::string::npos);
  ASSERT_EQ(out.quarantined.size(), 2u);  // the label and its connection
  c.strict_alignment = false;
  c.train.epochs = 1;
  c.train.learning_rate = 1e-5;
  out = RunRetrain(*BaseModel(), {rec}, c, 2);
  EXPECT_TRUE(out.published) << out.message;
}

TEST(ExportTest, VerifiedRecordsRoundTrip) {
  const auto ds = testing::ToyDataset();
  std::vector<ReviewRecord> records = {RecordFor(0, ReviewStatus::kVerified),
                                       RecordFor(1, ReviewStatus::kPending),
                                       RecordFor(2, ReviewStatus::kRejected),
                                       RecordFor(3, ReviewStatus::kVerified)};
  ReviewRecord multi;
  multi.doc_id = "multi";
  multi.status = ReviewStatus::kVerified;
  multi.corrected = testing::AnnotationFromSentences("multi", {ds.sentences[4], ds.sentences[5]});
  multi.pre = *multi.corrected;
  records.push_back(multi);
  const auto out = ExportVerified(records, ds.schema);
  EXPECT_TRUE(out.quarantined.empty());
  ASSERT_EQ(out.dataset.sentences.size(), 4u);
  EXPECT_EQ(out.doc_ids, (std::vector<std::string>{"doc-0", "doc-3", "multi", "multi"}));
  const std::vector<size_t> expect = {0, 3, 4, 5};
  for (size_t i = 0; i < expect.size(); ++i) {
    Sentence want = ds.sentences[expect[i]];
    NormalizeSentence(&want);
    want.pos_tags.clear();
    EXPECT_EQ(out.dataset.sentences[i], want) << i;
  }
}

TEST(ExportTest, QuarantinesMisalignedLabels) {
  Sentence s;
  s.tokens = {"Ada", "works", "for", "Initech", "."};
  s.entities = {{0, 1, "Person"}, {3, 4, "Organization"}};
  s.relations = {{0, 1, "WorksFor"}};
  ReviewRecord r;
  r.doc_id = "q";
  r.status = ReviewStatus::kVerified;
  r.corrected = testing::AnnotationFromSentences("q", {s});
  r.corrected->labels[1].start += 2;  // "itech"
  r.corrected->labels.push_back({"T9", 0, 9, "Person", 1.0});  // "Ada works"
  r.pre = *r.corrected;
  const auto out = ExportVerified({r}, testing::ToySchema());
  ASSERT_EQ(out.quarantined.size(), 2u);
  EXPECT_EQ(out.quarantined[0].label_id, "T2");
  EXPECT_NE(out.quarantined[0].reason.find("inside a token"), std::string::npos);
  EXPECT_EQ(out.quarantined[1].label_id, "connection 0");
  ASSERT_EQ(out.dataset.sentences.size(), 1u);
  // The two-token span is a valid entity; only the broken one is dropped.
  EXPECT_EQ(out.dataset.sentences[0].entities,
            (std::vector<EntitySpan>{{0, 1, "Person"}, {0, 2, "Person"}}));
  EXPECT_TRUE(out.dataset.sentences[0].relations.empty());
}

class StoreTest : public ::testing::Test {
 protected:
  std::string Path() const { return dir_.File("store.log"); }
  testing::TempDir dir_;
};

TEST_F(StoreTest, Durable) {
  {
    ReviewStore store(Path());
    for (size_t i = 0; i < 3; ++i) store.PutRecord(RecordFor(i, ReviewStatus::kPending));
    store.PutRecord(RecordFor(1, ReviewStatus::kVerified));
    store.PutModel({1, "a.ckpt", {{"f1", 0.5}}, "", 5});
  }
  ReviewStore store(Path());
  EXPECT_TRUE(store.load_warnings().empty());
  const auto records = store.Records();
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[1].doc_id, "doc-1");
  EXPECT_EQ(records[1].status, ReviewStatus::kVerified);
  EXPECT_EQ(records[1].corrected, records[1].pre);
  EXPECT_EQ(store.Models().at(0).checkpoint, "a.ckpt");
  EXPECT_EQ(store.frames_in_log(), 5u);
  EXPECT_EQ(ReviewRecord::FromJson(records[1].ToJson()).ToJson(), records[1].ToJson());
}

TEST_F(StoreTest, TornTailIsRecovered) {
  {
    ReviewStore store(Path());
    store.PutRecord(RecordFor(0, ReviewStatus::kPending));
    store.PutRecord(RecordFor(1, ReviewStatus::kPending));
  }
  const auto size = std::filesystem::file_size(Path());
  const std::string frame = EncodeFrame(
      json{{"kind", "record"}, {"record", RecordFor(2, ReviewStatus::kPending).ToJson()}}.dump());
  for (size_t cut : {size_t{3}, size_t{8}, frame.size() / 2, frame.size() - 1}) {
    {
      std::ofstream out(Path(), std::ios::binary | std::ios::app);
      out << frame.substr(0, cut);
    }
    ReviewStore store(Path());
    ASSERT_EQ(store.load_warnings().size(), 1u) << cut;
    EXPECT_NE(store.load_warnings()[0].find("discarded"), std::string::npos);
    EXPECT_EQ(store.Records().size(), 2u);
    EXPECT_EQ(std::filesystem::file_size(Path()), size);
  }
  {
    // Appends after recovery land on a clean boundary.
    ReviewStore store(Path());
    store.PutRecord(RecordFor(2, ReviewStatus::kPending));
  }
  ReviewStore store(Path());
  EXPECT_TRUE(store.load_warnings().empty());
  EXPECT_EQ(store.Records().size(), 3u);
}

TEST_F(StoreTest, CorruptFrameIsCut) {
  {
    ReviewStore store(Path());
    store.PutRecord(RecordFor(0, ReviewStatus::kPending));
    store.PutRecord(RecordFor(0, ReviewStatus::kInReview));
  }
  std::string bytes = ReadFileBytes(Path());
  bytes[bytes.size() - 10] ^= 0x01;
  WriteFileAtomic(Path(), bytes);
  ReviewStore store(Path());
  ASSERT_EQ(store.load_warnings().size(), 1u);
  EXPECT_NE(store.load_warnings()[0].find("checksum"), std::string::npos);
  EXPECT_EQ(store.GetRecord("doc-0")->status, ReviewStatus::kPending);
}

TEST_F(StoreTest, Compaction) {
  {
    ReviewStore store(Path());
    for (int i = 0; i < 50; ++i) {
      store.PutRecord(RecordFor(0, i % 2 ? ReviewStatus::kInReview : ReviewStatus::kPending));
    }
    store.PutRecord(RecordFor(1, ReviewStatus::kVerified));
    EXPECT_EQ(store.frames_in_log(), 51u);
    store.Compact();
    EXPECT_EQ(store.frames_in_log(), 2u);
    store.PutModel({2, "", json::object(), "", 0});
  }
  ReviewStore store(Path());
  EXPECT_TRUE(store.load_warnings().empty());
  EXPECT_EQ(store.frames_in_log(), 3u);
  EXPECT_EQ(store.GetRecord("doc-0")->status, ReviewStatus::kInReview);
  EXPECT_EQ(store.Records().size(), 2u);

  // Automatic once dead frames dominate.
  for (int i = 0; i < 300; ++i) store.PutRecord(RecordFor(3, ReviewStatus::kPending));
  EXPECT_LT(store.frames_in_log(), 256u);
  EXPECT_EQ(store.Records().size(), 3u);
}

TEST_F(ServiceTest, HttpSmoke) {
  auto service = Make();
  ASSERT_TRUE(service->AddPreAnnotation(DocFor(0)));
  ReviewServer server(service.get());
  const int port = server.BindAny("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.ListenAfterBind(); });
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/docs?status=pending&page=1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["items"][0]["doc_id"], "doc-0");
  res = client.Get("/api/docs/doc-0");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["pre"]["content"], DocFor(0).content);
  res = client.Get("/api/docs/missing");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = client.Put("/api/docs/doc-0/annotations", {{"X-Reviewer", "ann"}},
                   R"({"status": "in_review"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["reviewer"], "ann");
  res = client.Post("/api/retrain", "", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  for (const char* path : {"/api/models", "/api/schema", "/api/jobs"}) {
    res = client.Get(path);
    ASSERT_TRUE(res) << path;
    EXPECT_EQ(res->status, 200) << path;
  }
  res = client.Post("/api/docs", DocFor(1).ToJson().dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  server.Stop();
  t.join();
}

}  // namespace
}  // namespace sciex

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
