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

// Extraction schemas, token-level annotated sentences, dataset I/O and
// k-fold splitting.
//
// Dataset JSON is a top-level array of
//   {"tokens": [str], "pos": [str]?,
//    "entities": [{"type": str, "start": int, "end": int}],
//    "relations": [{"type": str, "head": int, "tail": int}]}
// with exclusive `end` token indices. Relation head/tail index `entities`.
//
// Schema JSON: {"entities": [str], "relations": [str], "symmetric": [str]}.
// The "none" entity class is never listed; models reserve class 0 for it.

#ifndef SCIEX_CORPUS_H_
#define SCIEX_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sciex {

class ExtractionSchema {
 public:
  ExtractionSchema() = default;
  // Throws SchemaError on duplicate/empty names or a symmetric relation that
  // is not a relation type.
  ExtractionSchema(std::vector<std::string> entity_types,
                   std::vector<std::string> relation_types,
                   std::vector<std::string> symmetric_relations = {});

  const std::vector<std::string>& entity_types() const { return entity_types_; }
  const std::vector<std::string>& relation_types() const { return relation_types_; }
  const std::vector<std::string>& symmetric_relations() const { return symmetric_; }

  // Indices into entity_types() / relation_types(), or -1.
  int EntityIndex(const std::string& name) const;
  int RelationIndex(const std::string& name) const;
  bool IsSymmetric(int relation_index) const;

  nlohmann::json ToJson() const;
  static ExtractionSchema FromJson(const nlohmann::json& j);

  bool operator==(const ExtractionSchema& other) const = default;

 private:
  std::vector<std::string> entity_types_;
  std::vector<std::string> relation_types_;
  std::vector<std::string> symmetric_;
};

ExtractionSchema LoadSchema(const std::string& path);

// The 20 bibliographic and synthesis-condition fields used for molecular
// sieve literature: 7 public fields followed by 13 private ones. No
// relation types.
ExtractionSchema MolecularSieveSchema();

// Fields of MolecularSieveSchema() that live in document front matter.
const std::vector<std::string>& MolecularSievePublicFields();

struct EntitySpan {
  int start = 0;  // inclusive token index
  int end = 0;    // exclusive token index
  std::string type;

  int width() const { return end - start; }
  bool operator==(const EntitySpan&) const = default;
  auto operator<=>(const EntitySpan&) const = default;
};

struct RelationTriple {
  int head = 0;  // index into Sentence::entities
  int tail = 0;
  std::string type;

  bool operator==(const RelationTriple&) const = default;
  auto operator<=>(const RelationTriple&) const = default;
};

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;  // empty when no gold tags
  std::vector<EntitySpan> entities;
  std::vector<RelationTriple> relations;

  bool operator==(const Sentence&) const = default;
};

struct Dataset {
  ExtractionSchema schema;
  std::vector<Sentence> sentences;
  std::string provenance;
};

// Throws SchemaError naming the problem. `index` is reported in messages.
void ValidateSentence(const Sentence& sentence, const ExtractionSchema& schema,
                      size_t index);

// Sorts entities by (start, end, type), drops exact duplicates, remaps the
// relations onto the new entity order and drops duplicate relations.
void NormalizeSentence(Sentence* sentence);

// Parses and validates; errors carry the sentence index.
Dataset ParseDataset(const nlohmann::json& j, const ExtractionSchema& schema,
                     std::string provenance = {});
Dataset LoadDataset(const std::string& path, const ExtractionSchema& schema);

nlohmann::json SentenceToJson(const Sentence& sentence);
nlohmann::json DatasetToJson(const Dataset& dataset);
void SaveDataset(const Dataset& dataset, const std::string& path);

struct Fold {
  std::vector<size_t> train;  // sentence indices, ascending
  std::vector<size_t> test;
};

// Seeded shuffle then round-robin assignment: the k test sets partition the
// dataset and their sizes differ by at most one. Requires 2 <= k <= size.
std::vector<Fold> SplitKFold(const Dataset& dataset, size_t k, uint64_t seed);

// Sentences at `indices`, sharing the schema.
Dataset Subset(const Dataset& dataset, const std::vector<size_t>& indices);

}  // namespace sciex

#endif  // SCIEX_CORPUS_H_
