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

#include "sciex/corpus.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "sciex/common.h"
#include "sciex/rng.h"

namespace sciex {

using nlohmann::json;

namespace {

void CheckNames(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw SchemaError(std::string("empty ") + what + " name");
    if (n == "none" || n == "None") {
      throw SchemaError(std::string("reserved ") + what + " name: " + n);
    }
    if (!seen.insert(n).second) {
      throw SchemaError(std::string("duplicate ") + what + " name: " + n);
    }
  }
}

int IndexOf(const std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

std::vector<std::string> StringList(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const json& arr = j.at(key);
  if (!arr.is_array()) throw ParseError(std::string("schema: '") + key + "' must be an array");
  for (const auto& v : arr) {
    if (!v.is_string()) throw ParseError(std::string("schema: '") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string Where(size_t index) { return "sentence " + std::to_string(index) + ": "; }

}  // namespace

ExtractionSchema::ExtractionSchema(std::vector<std::string> entity_types,
                                   std::vector<std::string> relation_types,
                                   std::vector<std::string> symmetric_relations)
    : entity_types_(std::move(entity_types)),
      relation_types_(std::move(relation_types)),
      symmetric_(std::move(symmetric_relations)) {
  CheckNames(entity_types_, "entity type");
  CheckNames(relation_types_, "relation type");
  for (const auto& s : symmetric_) {
    if (IndexOf(relation_types_, s) < 0) {
      throw SchemaError("symmetric relation is not a relation type: " + s);
    }
  }
}

int ExtractionSchema::EntityIndex(const std::string& name) const {
  return IndexOf(entity_types_, name);
}

int ExtractionSchema::RelationIndex(const std::string& name) const {
  return IndexOf(relation_types_, name);
}

bool ExtractionSchema::IsSymmetric(int relation_index) const {
  if (relation_index < 0 || relation_index >= static_cast<int>(relation_types_.size())) {
    return false;
  }
  return IndexOf(symmetric_, relation_types_[relation_index]) >= 0;
}

json ExtractionSchema::ToJson() const {
  return json{{"entities", entity_types_},
              {"relations", relation_types_},
              {"symmetric", symmetric_}};
}

ExtractionSchema ExtractionSchema::FromJson(const json& j) {
  if (!j.is_object()) throw ParseError("schema must be a JSON object");
  return ExtractionSchema(StringList(j, "entities"), StringList(j, "relations"),
                          StringList(j, "symmetric"));
}

ExtractionSchema LoadSchema(const std::string& path) {
  json j;
  try {
    j = json::parse(ReadFileBytes(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return ExtractionSchema::FromJson(j);
}

const std::vector<std::string>& MolecularSievePublicFields() {
  static const std::vector<std::string> kPublic = {
      "Title", "Author", "Unit", "DOI", "Published Time", "Zeolite", "Magazine"};
  return kPublic;
}

ExtractionSchema MolecularSieveSchema() {
  std::vector<std::string> fields = MolecularSievePublicFields();
  const std::vector<std::string> kPrivate = {
      "Alkali Source",
      "Cations",
      "Fluorine Source",
      "Crystallization Conditions temperature",
      "Crystallization Conditions time",
      "Crystallization Conditions rotational speed",
      "Germanium Source",
      "Gel Composition",
      "Phosphorus Source",
      "Silicon Source",
      "Template Agent",
      "Aluminum Source",
      "Molecular Sieve Structure Information",
  };
  fields.insert(fields.end(), kPrivate.begin(), kPrivate.end());
  return ExtractionSchema(std::move(fields), {});
}

void ValidateSentence(const Sentence& s, const ExtractionSchema& schema, size_t index) {
  const int n = static_cast<int>(s.tokens.size());
  if (!s.pos_tags.empty() && s.pos_tags.size() != s.tokens.size()) {
    throw SchemaError(Where(index) + "pos has " + std::to_string(s.pos_tags.size()) +
                          " tags for " + std::to_string(n) + " tokens",
                      index);
  }
  for (size_t e = 0; e < s.entities.size(); ++e) {
    const EntitySpan& span = s.entities[e];
    if (schema.EntityIndex(span.type) < 0) {
      throw SchemaError(Where(index) + "unknown entity type '" + span.type + "'", index);
    }
    if (span.start < 0 || span.start >= span.end || span.end > n) {
      throw SchemaError(Where(index) + "entity " + std::to_string(e) + " has invalid span [" +
                            std::to_string(span.start) + ", " + std::to_string(span.end) +
                            ") for " + std::to_string(n) + " tokens",
                        index);
    }
  }
  const int num_entities = static_cast<int>(s.entities.size());
  for (size_t r = 0; r < s.relations.size(); ++r) {
    const RelationTriple& rel = s.relations[r];
    if (schema.RelationIndex(rel.type) < 0) {
      throw SchemaError(Where(index) + "unknown relation type '" + rel.type + "'", index);
    }
    if (rel.head < 0 || rel.head >= num_entities || rel.tail < 0 || rel.tail >= num_entities) {
      throw SchemaError(Where(index) + "relation " + std::to_string(r) +
                            " references a missing entity",
                        index);
    }
    if (rel.head == rel.tail) {
      throw SchemaError(Where(index) + "relation " + std::to_string(r) + " is a self-relation",
                        index);
    }
  }
}

void NormalizeSentence(Sentence* s) {
  std::vector<size_t> order(s->entities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return s->entities[a] < s->entities[b];
  });
  std::vector<EntitySpan> entities;
  std::vector<int> remap(s->entities.size(), -1);
  for (size_t old : order) {
    if (entities.empty() || entities.back() != s->entities[old]) {
      entities.push_back(s->entities[old]);
    }
    remap[old] = static_cast<int>(entities.size()) - 1;
  }
  std::set<RelationTriple> relations;
  for (const auto& r : s->relations) {
    RelationTriple t = r;
    if (t.head >= 0 && t.head < static_cast<int>(remap.size())) t.head = remap[t.head];
    if (t.tail >= 0 && t.tail < static_cast<int>(remap.size())) t.tail = remap[t.tail];
    relations.insert(t);
  }
  s->entities = std::move(entities);
  s->relations.assign(relations.begin(), relations.end());
}

namespace {

Sentence ParseSentence(const json& j, size_t index) {
  if (!j.is_object()) throw ParseError(Where(index) + "expected an object");
  Sentence s;
  try {
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    if (j.contains("pos") && !j.at("pos").is_null()) {
      s.pos_tags = j.at("pos").get<std::vector<std::string>>();
    }
    if (j.contains("entities")) {
      for (const auto& e : j.at("entities")) {
        s.entities.push_back(
            {e.at("start").get<int>(), e.at("end").get<int>(), e.at("type").get<std::string>()});
      }
    }
    if (j.contains("relations")) {
      for (const auto& r : j.at("relations")) {
        s.relations.push_back(
            {r.at("head").get<int>(), r.at("tail").get<int>(), r.at("type").get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(Where(index) + e.what());
  }
  return s;
}

}  // namespace

Dataset ParseDataset(const json& j, const ExtractionSchema& schema, std::string provenance) {
  if (!j.is_array()) throw ParseError("dataset must be a JSON array of sentences");
  Dataset ds;
  ds.schema = schema;
  ds.provenance = std::move(provenance);
  ds.sentences.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    Sentence s = ParseSentence(j[i], i);
    ValidateSentence(s, schema, i);
    NormalizeSentence(&s);
    ds.sentences.push_back(std::move(s));
  }
  return ds;
}

Dataset LoadDataset(const std::string& path, const ExtractionSchema& schema) {
  json j;
  try {
    j = json::parse(ReadFileBytes(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return ParseDataset(j, schema, path);
}

json SentenceToJson(const Sentence& s) {
  json entities = json::array();
  for (const auto& e : s.entities) {
    entities.push_back({{"type", e.type}, {"start", e.start}, {"end", e.end}});
  }
  json relations = json::array();
  for (const auto& r : s.relations) {
    relations.push_back({{"type", r.type}, {"head", r.head}, {"tail", r.tail}});
  }
  json out = {{"tokens", s.tokens}, {"entities", entities}, {"relations", relations}};
  if (!s.pos_tags.empty()) out["pos"] = s.pos_tags;
  return out;
}

json DatasetToJson(const Dataset& ds) {
  json out = json::array();
  for (const auto& s : ds.sentences) out.push_back(SentenceToJson(s));
  return out;
}

void SaveDataset(const Dataset& ds, const std::string& path) {
  WriteFileAtomic(path, DatasetToJson(ds).dump(1) + "\n");
}

std::vector<Fold> SplitKFold(const Dataset& ds, size_t k, uint64_t seed) {
  const size_t n = ds.sentences.size();
  if (k < 2) throw Error("k-fold split needs k >= 2");
  if (k > n) {
    throw DataError("k-fold split: k = " + std::to_string(k) + " exceeds dataset size " +
                std::to_string(n));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(MixSeed(seed, 0x6b666f6c64ULL));
  rng.Shuffle(std::span<size_t>(order));

  std::vector<Fold> folds(k);
  for (size_t pos = 0; pos < n; ++pos) folds[pos % k].test.push_back(order[pos]);
  for (size_t f = 0; f < k; ++f) {
    std::sort(folds[f].test.begin(), folds[f].test.end());
    std::vector<bool> in_test(n, false);
    for (size_t i : folds[f].test) in_test[i] = true;
    for (size_t i = 0; i < n; ++i) {
      if (!in_test[i]) folds[f].train.push_back(i);
    }
  }
  return folds;
}

Dataset Subset(const Dataset& ds, const std::vector<size_t>& indices) {
  Dataset out;
  out.schema = ds.schema;
  out.provenance = ds.provenance;
  out.sentences.reserve(indices.size());
  for (size_t i : indices) out.sentences.push_back(ds.sentences.at(i));
  return out;
}

}  // namespace sciex
