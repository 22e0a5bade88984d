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

// sciex: command-line front end.
//
// Exit status: 0 success, 1 usage error, 2 bad input data, 3 runtime
// failure.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sciex/checkpoint.h"
#include "sciex/common.h"
#include "sciex/corpus.h"
#include "sciex/features.h"
#include "sciex/layout.h"
#include "sciex/pipeline.h"
#include "sciex/review.h"
#include "sciex/trainer.h"

#ifndef SCIEX_DEFAULT_LEXICON
#define SCIEX_DEFAULT_LEXICON "data/sections.json"
#endif

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

// Thrown for flag combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::optional<uint64_t> seed;
  std::string config;
  std::string model;
  std::string schema;
};

void AddCommon(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--seed", f->seed, "Random seed (overrides the config file)");
  cmd->add_option("--config", f->config, "JSON run config (TrainConfig fields plus paths)");
  cmd->add_option("--model", f->model, "Model checkpoint");
  cmd->add_option("--schema", f->schema, "Extraction schema JSON");
}

json ReadJson(const std::string& path) {
  try {
    return json::parse(sciex::ReadFileBytes(path));
  } catch (const json::parse_error& e) {
    throw sciex::ParseError(path + ": " + e.what());
  }
}

struct RunConfig {
  sciex::TrainConfig train;
  std::string lexicon = SCIEX_DEFAULT_LEXICON;
};

// Path-valued keys are resolved against the config file's directory.
RunConfig LoadRunConfig(const CommonFlags& flags) {
  RunConfig rc;
  if (!flags.config.empty()) {
    json j = ReadJson(flags.config);
    const fs::path dir = fs::path(flags.config).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (dir / p).string(); };
    if (j.contains("lexicon") && j["lexicon"].is_string()) {
      rc.lexicon = resolve(j["lexicon"].get<std::string>());
      j.erase("lexicon");
    }
    if (j.contains("tagset") && j["tagset"].is_string()) {
      j["tagset"] = sciex::LoadTagset(resolve(j["tagset"].get<std::string>())).tags();
    }
    if (j.contains("tagger_lexicon") && j["tagger_lexicon"].is_string()) {
      j["tagger_lexicon"] = sciex::LoadTaggerLexicon(resolve(j["tagger_lexicon"].get<std::string>()));
    }
    if (j.contains("encoder") && j["encoder"].contains("precomputed_path") &&
        j["encoder"]["precomputed_path"].is_string()) {
      j["encoder"]["precomputed_path"] = resolve(j["encoder"]["precomputed_path"].get<std::string>());
    }
    rc.train = sciex::TrainConfig::FromJson(j);
  }
  if (flags.seed) rc.train.seed = *flags.seed;
  return rc;
}

void Require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError(flag + " is required");
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
  } else {
    sciex::WriteFileAtomic(path, text + "\n");
  }
}

sciex::ReviewServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server) g_server->Stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Span-based joint entity and relation extraction for scientific documents"};
  app.require_subcommand(1);
  CommonFlags common;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Block dump -> layout report (categories, order, sections)");
  AddCommon(ingest, &common);
  std::string dump_path, out_path, lexicon_flag;
  ingest->add_option("dump", dump_path, "Block dump JSON")->required();
  ingest->add_option("--lexicon", lexicon_flag, "Section lexicon JSON");
  ingest->add_option("-o,--out", out_path, "Output file (default stdout)");

  // train
  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  AddCommon(train, &common);
  std::string data_path, log_path;
  std::optional<int> epochs;
  train->add_option("--data", data_path, "Dataset JSON")->required();
  train->add_option("-o,--out", out_path, "Checkpoint to write")->required();
  train->add_option("--log", log_path, "Per-batch loss log (NDJSON)");
  train->add_option("--epochs", epochs, "Override the number of epochs");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a model on a dataset");
  AddCommon(eval, &common);
  eval->add_option("--data", data_path, "Dataset JSON")->required();
  eval->add_option("-o,--out", out_path, "Report file (default stdout)");

  // xval
  auto* xval = app.add_subcommand("xval", "k-fold cross-validation");
  AddCommon(xval, &common);
  size_t folds = 10, threads = 1;
  xval->add_option("--data", data_path, "Dataset JSON")->required();
  xval->add_option("-k,--folds", folds, "Number of folds")
      ->check(CLI::Range(size_t{2}, std::numeric_limits<size_t>::max()))
      ->capture_default_str();
  xval->add_option("--threads", threads, "Concurrent fold jobs")->capture_default_str();
  xval->add_option("--epochs", epochs, "Override the number of epochs");
  xval->add_option("-o,--out", out_path, "Report file (default stdout)");

  // extract
  auto* extract = app.add_subcommand("extract", "Block dump -> pre-annotation JSON");
  AddCommon(extract, &common);
  bool no_public = false;
  std::vector<std::string> sections = {"method", "experiment"};
  extract->add_option("dump", dump_path, "Block dump JSON")->required();
  extract->add_option("--lexicon", lexicon_flag, "Section lexicon JSON");
  extract->add_option("--sections", sections, "Section kinds to extract from")->delimiter(',');
  extract->add_flag("--no-public", no_public, "Skip front-matter (public field) blocks");
  extract->add_option("-o,--out", out_path, "Output file (default stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the review service");
  AddCommon(serve, &common);
  std::string store_path = "review.log", models_dir = "models", ui_dir, host = "127.0.0.1";
  std::string reference_path;
  int port = 8080;
  std::vector<std::string> imports;
  serve->add_option("--store", store_path, "Review log file")->capture_default_str();
  serve->add_option("--models-dir", models_dir, "Directory for published checkpoints")
      ->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Static review UI bundle");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--import", imports, "Pre-annotation JSON files to enqueue");
  serve->add_option("--reference", reference_path, "Clean dataset added to the retrain gate");
  serve->add_option("--lexicon", lexicon_flag, "Section lexicon JSON");
  serve->add_option("--epochs", epochs, "Retrain epochs (default 5)");

  // retrain
  auto* retrain = app.add_subcommand("retrain", "Warm-start training on verified review records");
  AddCommon(retrain, &common);
  bool lenient = false;
  retrain->add_option("--store", store_path, "Review log file")->required();
  retrain->add_option("-o,--out", out_path, "Checkpoint to write when published")->required();
  retrain->add_option("--reference", reference_path, "Clean dataset added to the retrain gate");
  retrain->add_option("--epochs", epochs, "Override the epochs (default 5)");
  retrain->add_flag("--lenient", lenient, "Skip misaligned labels instead of failing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const RunConfig rc = LoadRunConfig(common);
    const std::string lexicon_path = lexicon_flag.empty() ? rc.lexicon : lexicon_flag;

    if (*ingest) {
      const auto doc = sciex::AnalyzeLayout(sciex::LoadBlockDump(dump_path));
      const auto secs = sciex::LocateSections(doc, sciex::LoadSectionLexicon(lexicon_path));
      WriteOutput(out_path, sciex::LayoutReport(doc, secs).dump(2));
    } else if (*train) {
      Require(common.schema, "--schema");
      const auto schema = sciex::LoadSchema(common.schema);
      const auto dataset = sciex::LoadDataset(data_path, schema);
      sciex::TrainConfig config = rc.train;
      if (epochs) config.epochs = *epochs;
      std::ofstream log;
      if (!log_path.empty()) log.open(log_path);
      auto result = sciex::Train(dataset, config, [&](const sciex::TrainLogRecord& r) {
        if (log.is_open()) log << r.ToJson().dump() << "\n";
      });
      sciex::SaveCheckpoint(*result.model, out_path);
      std::cerr << "epoch losses: first " << result.epoch_losses.front() << ", last "
                << result.epoch_losses.back() << "\n";
    } else if (*eval) {
      Require(common.model, "--model");
      const auto model = sciex::LoadCheckpoint(common.model);
      const auto schema = common.schema.empty() ? model->schema() : sciex::LoadSchema(common.schema);
      const auto dataset = sciex::LoadDataset(data_path, schema);
      WriteOutput(out_path, sciex::Evaluate(dataset, *model).ToJson().dump(2));
    } else if (*xval) {
      Require(common.schema, "--schema");
      const auto schema = sciex::LoadSchema(common.schema);
      const auto dataset = sciex::LoadDataset(data_path, schema);
      sciex::TrainConfig config = rc.train;
      if (epochs) config.epochs = *epochs;
      WriteOutput(out_path, sciex::CrossValidate(dataset, folds, config, threads).ToJson().dump(2));
    } else if (*extract) {
      Require(common.model, "--model");
      const auto model = sciex::LoadCheckpoint(common.model);
      const auto schema = common.schema.empty() ? model->schema() : sciex::LoadSchema(common.schema);
      sciex::PipelineOptions options;
      options.section_kinds = {sections.begin(), sections.end()};
      options.public_fields = !no_public;
      const auto annotation =
          sciex::RunPipeline(sciex::LoadBlockDump(dump_path), *model, schema,
                             sciex::LoadSectionLexicon(lexicon_path), options);
      WriteOutput(out_path, annotation.ToJson().dump(2));
    } else if (*serve) {
      Require(common.model, "--model");
      std::shared_ptr<const sciex::SpanRelationModel> model = sciex::LoadCheckpoint(common.model);
      sciex::ServiceConfig sc;
      sc.store_path = store_path;
      sc.model_dir = models_dir;
      sc.schema = common.schema.empty() ? model->schema() : sciex::LoadSchema(common.schema);
      sc.lexicon = sciex::LoadSectionLexicon(lexicon_path);
      sc.retrain.train = rc.train;
      sc.retrain.train.epochs = epochs.value_or(common.config.empty() ? 5 : rc.train.epochs);
      if (!reference_path.empty()) sc.retrain.reference = sciex::LoadDataset(reference_path, sc.schema);
      sciex::ReviewService service(std::move(sc), model);
      for (const auto& path : imports) {
        const auto a = sciex::PreAnnotation::FromJson(ReadJson(path));
        if (!service.AddPreAnnotation(a)) std::cerr << "skipped existing document " << a.doc_id << "\n";
      }
      sciex::ReviewServer server(&service, ui_dir);
      g_server = &server;
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      std::cerr << "serving on http://" << host << ":" << port << "\n";
      if (!server.Listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitRuntime;
      }
      g_server = nullptr;
    } else if (*retrain) {
      Require(common.model, "--model");
      const auto base = sciex::LoadCheckpoint(common.model);
      sciex::ReviewStore store(store_path);
      for (const auto& w : store.load_warnings()) std::cerr << "warning: " << w << "\n";
      std::vector<sciex::ReviewRecord> verified;
      for (const auto& r : store.Records()) {
        if (r.status == sciex::ReviewStatus::kVerified) verified.push_back(r);
      }
      if (verified.empty()) throw sciex::DataError("no verified records in " + store_path);
      sciex::RetrainConfig config;
      config.train = rc.train;
      config.train.epochs = epochs.value_or(common.config.empty() ? 5 : rc.train.epochs);
      config.strict_alignment = !lenient;
      if (!reference_path.empty()) config.reference = sciex::LoadDataset(reference_path, base->schema());
      int version = base->version();
      for (const auto& m : store.Models()) version = std::max(version, m.version);
      const auto outcome = sciex::RunRetrain(*base, verified, config, version + 1);
      json report = {{"published", outcome.published},
                     {"message", outcome.message},
                     {"base_metrics", outcome.base_metrics},
                     {"new_metrics", outcome.new_metrics},
                     {"train_sentences", outcome.train_sentences},
                     {"heldback_sentences", outcome.heldback_sentences},
                     {"quarantined", outcome.quarantined.size()}};
      std::cout << report.dump(2) << "\n";
      if (!outcome.published) return kExitRuntime;
      sciex::SaveCheckpoint(*outcome.model, out_path);
      store.PutModel({outcome.model->version(), out_path, outcome.new_metrics, "cli", 0});
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return kExitUsage;
  } catch (const sciex::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
