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

#include "sciex/pipeline.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <tuple>

#include "sciex/common.h"
#include "sciex/features.h"
#include "sciex/utf8.h"

namespace sciex {

using nlohmann::json;

json PreAnnotation::ToJson() const {
  json jl = json::array();
  for (const auto& l : labels) {
    jl.push_back({{"id", l.id}, {"start", l.start}, {"end", l.end}, {"type", l.type},
                  {"confidence", l.confidence}});
  }
  json jc = json::array();
  for (const auto& c : connections) {
    jc.push_back({{"head", c.head}, {"tail", c.tail}, {"type", c.type},
                  {"confidence", c.confidence}});
  }
  return {{"doc_id", doc_id},
          {"content", content},
          {"labels", jl},
          {"connections", jc},
          {"model_version", model_version}};
}

PreAnnotation PreAnnotation::FromJson(const json& j) {
  PreAnnotation a;
  try {
    if (!j.is_object()) throw ParseError("pre-annotation: expected an object");
    a.doc_id = j.value("doc_id", std::string());
    a.content = j.at("content").get<std::string>();
    a.model_version = j.value("model_version", 0);
    for (const auto& l : j.at("labels")) {
      const auto start = l.at("start").get<int64_t>();
      const auto end = l.at("end").get<int64_t>();
      if (start < 0 || end < 0) throw ParseError("pre-annotation: negative label offset");
      a.labels.push_back({l.at("id").get<std::string>(), static_cast<size_t>(start),
                          static_cast<size_t>(end), l.at("type").get<std::string>(),
                          l.value("confidence", 0.0)});
    }
    for (const auto& c : j.at("connections")) {
      a.connections.push_back({c.at("head").get<std::string>(), c.at("tail").get<std::string>(),
                               c.at("type").get<std::string>(), c.value("confidence", 0.0)});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("pre-annotation: ") + e.what());
  }
  return a;
}

std::optional<AnnotationIssue> CheckPreAnnotation(const PreAnnotation& a,
                                                  const ExtractionSchema* schema) {
  using Kind = AnnotationIssue::Kind;
  const size_t length = utf8::Length(a.content);
  std::set<std::string> ids;
  for (const auto& l : a.labels) {
    if (l.id.empty()) return AnnotationIssue{Kind::kInvalid, "label with an empty id"};
    if (!ids.insert(l.id).second) {
      return AnnotationIssue{Kind::kInvalid, "duplicate label id " + l.id};
    }
    if (l.start >= l.end || l.end > length) {
      return AnnotationIssue{Kind::kInvalid, "label " + l.id + " offsets [" +
                                                 std::to_string(l.start) + ", " +
                                                 std::to_string(l.end) + ") outside content of " +
                                                 std::to_string(length) + " characters"};
    }
    if (schema && schema->EntityIndex(l.type) < 0) {
      return AnnotationIssue{Kind::kSchemaMismatch,
                             "label " + l.id + " has type '" + l.type + "' not in the schema"};
    }
  }
  for (size_t i = 0; i < a.connections.size(); ++i) {
    const auto& c = a.connections[i];
    for (const std::string* end : {&c.head, &c.tail}) {
      if (!ids.count(*end)) {
        return AnnotationIssue{Kind::kInvalid, "connection " + std::to_string(i) +
                                                   " references unknown label id " + *end};
      }
    }
    if (c.head == c.tail) {
      return AnnotationIssue{Kind::kInvalid,
                             "connection " + std::to_string(i) + " links label " + c.head +
                                 " to itself"};
    }
    if (schema && schema->RelationIndex(c.type) < 0) {
      return AnnotationIssue{Kind::kSchemaMismatch, "connection " + std::to_string(i) +
                                                        " has type '" + c.type +
                                                        "' not in the schema"};
    }
  }
  return std::nullopt;
}

const std::vector<std::string>& DefaultAbbreviations() {
  static const std::vector<std::string> kAbbreviations = {
      "Fig.", "Figs.", "fig.", "e.g.", "i.e.", "al.", "Eq.", "Eqs.", "Ref.", "Refs.",
      "No.", "vs.", "ca.", "approx.", "Tab.", "Dr.", "Mr.", "Mrs.", "Prof.", "etc.", "cf."};
  return kAbbreviations;
}

namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

TextSpan TrimSpan(std::string_view text, size_t b, size_t e) {
  while (b < e && IsSpace(text[b])) ++b;
  while (e > b && IsSpace(text[e - 1])) --e;
  return {b, e};
}

}  // namespace

std::vector<TextSpan> SplitSentences(std::string_view text,
                                     const std::vector<std::string>& abbreviations) {
  std::vector<TextSpan> out;
  size_t start = 0;
  int depth = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(' || c == '[') {
      ++depth;
      continue;
    }
    if (c == ')' || c == ']') {
      depth = std::max(0, depth - 1);
      continue;
    }
    if ((c != '.' && c != '!' && c != '?') || depth > 0) continue;
    size_t end = i + 1;
    while (end < text.size() && (text[end] == '"' || text[end] == '\'')) ++end;
    if (end >= text.size() || !IsSpace(text[end])) continue;
    size_t next = end;
    while (next < text.size() && IsSpace(text[next])) ++next;
    if (next >= text.size()) continue;
    const unsigned char n = static_cast<unsigned char>(text[next]);
    if (!std::isupper(n) && !std::isdigit(n)) continue;
    if (c == '.') {
      size_t w = i;
      while (w > start && !IsSpace(text[w - 1])) --w;
      const std::string_view word = text.substr(w, i + 1 - w);
      if (std::find(abbreviations.begin(), abbreviations.end(), word) != abbreviations.end()) {
        continue;
      }
    }
    const TextSpan s = TrimSpan(text, start, end);
    if (s.begin < s.end) out.push_back(s);
    start = end;
    i = end - 1;
  }
  const TextSpan s = TrimSpan(text, start, text.size());
  if (s.begin < s.end) out.push_back(s);
  return out;
}

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

ReconstructedText ReconstructContent(const DocumentLayout& doc) {
  ReconstructedText r;
  for (const auto& id : doc.reading_order) {
    const Block& b = doc.block(id);
    if (b.category == "figure") continue;
    const std::string text = NormalizeWhitespace(b.text);
    if (text.empty()) continue;
    if (!r.content.empty()) r.content += "\n\n";
    r.block_ids.push_back(id);
    r.block_spans.push_back({r.content.size(), r.content.size() + text.size()});
    r.content += text;
  }
  return r;
}

namespace {

bool Extractable(const std::string& category) {
  return category != "figure" && category != "table" && category != "formula" &&
         category != "caption" && category != "reference";
}

// Title, author, and page-0 blocks ahead of the first abstract or heading.
std::set<std::string> FrontMatter(const DocumentLayout& doc) {
  std::set<std::string> ids;
  bool open = true;
  for (const auto& id : doc.reading_order) {
    const Block& b = doc.block(id);
    if (b.category == "abstract" || b.category == "heading" || b.page > 0) open = false;
    if (b.category == "title" || b.category == "author" || (open && b.page == 0)) ids.insert(id);
  }
  return ids;
}

double Round6(double v) { return std::round(v * 1e6) / 1e6; }

struct RawLabel {
  size_t start, end;  // code points
  int type;
  double confidence;
};

}  // namespace

PreAnnotation RunPipeline(const DocumentLayout& dump, const SpanRelationModel& model,
                          const ExtractionSchema& schema, const SectionLexicon& lexicon,
                          const PipelineOptions& options) {
  if (!(model.schema() == schema)) {
    throw SchemaError("model schema does not match the requested schema");
  }
  const DocumentLayout doc = AnalyzeLayout(dump);
  const ReconstructedText text = ReconstructContent(doc);
  if (text.content.empty()) throw DataError("document " + doc.doc_id + " has no text");

  std::set<std::string> targets;
  if (!options.section_kinds.empty()) {
    for (const auto& s : LocateSections(doc, lexicon)) {
      if (options.section_kinds.count(s.kind)) targets.insert(s.block_ids.begin(), s.block_ids.end());
    }
  }
  const std::set<std::string> front = options.public_fields ? FrontMatter(doc)
                                                            : std::set<std::string>{};

  const auto cp_offsets = utf8::CodepointByteOffsets(text.content);
  auto to_cp = [&](size_t byte) {
    return static_cast<size_t>(std::lower_bound(cp_offsets.begin(), cp_offsets.end(), byte) -
                               cp_offsets.begin());
  };
  const size_t num_entity_types = schema.entity_types().size();
  const size_t max_len = static_cast<size_t>(model.config().max_sentence_len);

  std::vector<RawLabel> labels;
  struct RawConnection {
    size_t head, tail;  // into labels
    int type;
    double confidence;
  };
  std::vector<RawConnection> connections;

  for (size_t bi = 0; bi < text.block_ids.size(); ++bi) {
    const Block& block = doc.block(text.block_ids[bi]);
    const bool is_front = front.count(block.id) > 0;
    if (!Extractable(block.category) || (!targets.count(block.id) && !is_front)) continue;

    ExtractOptions extract_options;
    if (is_front && options.category_prior != 0.0) {
      for (size_t t = 0; t < num_entity_types; ++t) {
        std::string lower;
        for (unsigned char ch : schema.entity_types()[t]) lower.push_back(std::tolower(ch));
        if (lower == block.category) {
          extract_options.span_logit_bias.assign(num_entity_types + 1, 0.0);
          extract_options.span_logit_bias[t + 1] = options.category_prior;
        }
      }
    }

    const TextSpan bspan = text.block_spans[bi];
    const std::string_view block_text =
        std::string_view(text.content).substr(bspan.begin, bspan.end - bspan.begin);
    for (const TextSpan& sent : SplitSentences(block_text, options.abbreviations)) {
      const auto tokens = Tokenize(block_text.substr(sent.begin, sent.end - sent.begin));
      for (size_t chunk = 0; chunk < tokens.size(); chunk += max_len) {
        const size_t chunk_end = std::min(tokens.size(), chunk + max_len);
        std::vector<std::string> words;
        for (size_t k = chunk; k < chunk_end; ++k) words.push_back(tokens[k].text);
        const Extraction ex = model.Extract(words, {}, extract_options);
        const size_t base = labels.size();
        auto byte_of = [&](size_t tok, bool end) {
          const Token& t = tokens[chunk + tok];
          return bspan.begin + sent.begin + (end ? t.end : t.begin);
        };
        for (const auto& e : ex.entities) {
          labels.push_back({to_cp(byte_of(e.span.start, false)),
                            to_cp(byte_of(e.span.end - 1, true)),
                            schema.EntityIndex(e.span.type), e.confidence});
        }
        for (const auto& r : ex.relations) {
          connections.push_back({base + r.triple.head, base + r.triple.tail,
                                 schema.RelationIndex(r.triple.type), r.confidence});
        }
      }
    }
  }

  // Ids follow document position.
  std::vector<size_t> order(labels.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::tie(labels[a].start, labels[a].end, labels[a].type) <
           std::tie(labels[b].start, labels[b].end, labels[b].type);
  });
  std::vector<size_t> rank(labels.size());
  PreAnnotation out;
  out.doc_id = doc.doc_id;
  out.content = text.content;
  out.model_version = model.version();
  for (size_t i = 0; i < order.size(); ++i) {
    const RawLabel& l = labels[order[i]];
    rank[order[i]] = i;
    out.labels.push_back({"T" + std::to_string(i + 1), l.start, l.end, schema.entity_types()[l.type],
                          Round6(l.confidence)});
  }
  std::sort(connections.begin(), connections.end(), [&](const RawConnection& a, const RawConnection& b) {
    return std::tie(rank[a.head], rank[a.tail], a.type) < std::tie(rank[b.head], rank[b.tail], b.type);
  });
  for (const auto& c : connections) {
    out.connections.push_back({out.labels[rank[c.head]].id, out.labels[rank[c.tail]].id,
                               schema.relation_types()[c.type], Round6(c.confidence)});
  }
  return out;
}

}  // namespace sciex
