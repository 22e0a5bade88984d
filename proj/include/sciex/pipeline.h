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

// Block dump in, pre-annotation out: layout analysis, section filtering,
// sentence splitting, extraction and the mapping of token spans back to
// character offsets in the reconstructed text.

#ifndef SCIEX_PIPELINE_H_
#define SCIEX_PIPELINE_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sciex/corpus.h"
#include "sciex/extractor.h"
#include "sciex/layout.h"

namespace sciex {

// Offsets count Unicode code points of the content; end is exclusive.
struct PreLabel {
  std::string id;
  size_t start = 0;
  size_t end = 0;
  std::string type;
  double confidence = 0.0;  // classifier probability, uncalibrated

  bool operator==(const PreLabel&) const = default;
};

struct PreConnection {
  std::string head;  // label ids
  std::string tail;
  std::string type;
  double confidence = 0.0;

  bool operator==(const PreConnection&) const = default;
};

struct PreAnnotation {
  std::string doc_id;
  std::string content;
  std::vector<PreLabel> labels;
  std::vector<PreConnection> connections;
  int model_version = 0;

  nlohmann::json ToJson() const;
  // Throws ParseError on missing fields or wrong types; does not check
  // the invariants (see CheckPreAnnotation).
  static PreAnnotation FromJson(const nlohmann::json& j);

  bool operator==(const PreAnnotation&) const = default;
};

struct AnnotationIssue {
  enum class Kind { kInvalid, kSchemaMismatch };
  Kind kind = Kind::kInvalid;
  std::string message;
};

// Offsets inside content, unique non-empty label ids, connections naming
// existing labels (the message names a dangling id). With a schema, label
// and connection types must belong to it (kSchemaMismatch).
std::optional<AnnotationIssue> CheckPreAnnotation(const PreAnnotation& annotation,
                                                  const ExtractionSchema* schema = nullptr);

// Byte range into the text handed to SplitSentences.
struct TextSpan {
  size_t begin = 0;
  size_t end = 0;

  bool operator==(const TextSpan&) const = default;
};

const std::vector<std::string>& DefaultAbbreviations();

// Breaks after ., ! or ? (plus closing quotes) when whitespace and then an
// uppercase letter or digit follow, except inside parentheses or brackets
// and after a listed abbreviation. Returned spans exclude surrounding
// whitespace.
std::vector<TextSpan> SplitSentences(std::string_view text,
                                     const std::vector<std::string>& abbreviations =
                                         DefaultAbbreviations());

struct PipelineOptions {
  // Section kinds whose blocks are extracted; empty disables them.
  std::set<std::string> section_kinds = {"method", "experiment"};
  // Extract from front-matter blocks (title, author and the page-0 blocks
  // before the first heading).
  bool public_fields = true;
  // Added to the logit of the entity type named like a block's category
  // (title -> Title, author -> Author) in front-matter blocks.
  double category_prior = 2.0;
  std::vector<std::string> abbreviations = DefaultAbbreviations();
};

// Whitespace runs collapsed to one space, trimmed.
std::string NormalizeWhitespace(std::string_view text);

struct ReconstructedText {
  std::string content;
  // Parallel to the block ids in reading order that made it into content.
  std::vector<std::string> block_ids;
  std::vector<TextSpan> block_spans;  // byte ranges into content
};

// Non-figure blocks in reading order joined by blank lines.
ReconstructedText ReconstructContent(const DocumentLayout& doc);

// Throws DataError for a document with no text and SchemaError if the
// model was trained on a different schema.
PreAnnotation RunPipeline(const DocumentLayout& dump, const SpanRelationModel& model,
                          const ExtractionSchema& schema, const SectionLexicon& lexicon,
                          const PipelineOptions& options = {});

}  // namespace sciex

#endif  // SCIEX_PIPELINE_H_
