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

// Block classification, reading order and functional-section location over
// block dumps produced by an external PDF text extractor.

#ifndef SCIEX_LAYOUT_H_
#define SCIEX_LAYOUT_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sciex {

// Ordered as listed in the block-dump format.
const std::vector<std::string>& BlockCategories();
bool IsBlockCategory(const std::string& category);

struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // page points, origin top-left

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

struct Block {
  std::string id;
  int page = 0;
  BBox bbox;
  std::string text;
  std::optional<double> font_size;
  std::string category;  // empty until classified
};

struct DocumentLayout {
  std::string doc_id;
  std::vector<Block> blocks;
  std::vector<std::string> reading_order;  // block ids

  // Throws std::out_of_range for unknown ids.
  const Block& block(const std::string& id) const;
};

// Throws ParseError on malformed JSON, bad geometry, duplicate ids or an
// unknown category.
DocumentLayout ParseBlockDump(const nlohmann::json& j);
DocumentLayout LoadBlockDump(const std::string& path);
nlohmann::json BlockDumpToJson(const DocumentLayout& doc);

// Fills the category of every block that has none. Pure.
std::vector<Block> ClassifyBlocks(std::vector<Block> blocks);

// Page by page. Blocks wider than half the page's text extent split the page
// into horizontal bands; inside a band, blocks whose horizontal overlap is at
// least half the narrower width share a column, and columns are read left to
// right, each top to bottom.
std::vector<std::string> ReadingOrder(const std::vector<Block>& blocks);

// ClassifyBlocks followed by ReadingOrder.
DocumentLayout AnalyzeLayout(DocumentLayout doc);

// Section kind -> heading keywords. Kinds are "method" and "experiment".
struct SectionLexicon {
  std::map<std::string, std::vector<std::string>> keywords;
};

SectionLexicon ParseSectionLexicon(const nlohmann::json& j);
SectionLexicon LoadSectionLexicon(const std::string& path);

// Lowercased, with one common English suffix removed.
std::string StemWord(const std::string& word);
// Equal stems, or one stem a prefix (of at least 5 chars) of the other.
bool StemsMatch(const std::string& a, const std::string& b);

struct HeadingMatch {
  std::string kind;       // "other" when nothing matched
  double strength = 0.0;  // 0.5 + 0.5 * matched / content words, 0 if none
};
HeadingMatch MatchHeading(const std::string& heading, const SectionLexicon& lexicon);

struct FunctionalSection {
  std::string kind;  // method, experiment or other
  std::vector<std::string> block_ids;
  double score = 0.0;
  std::string heading;  // empty for the preamble / fallback section
};

// Every heading block starts a section running up to the next heading.
// score = heading strength * (0.5 + 0.5 * sin(pi * p)), p the heading's
// relative reading position. Numbered subheadings ("2.1 ...") that match
// nothing inherit the kind of their numbered parent. If no heading matches,
// the result is one "other" section over the whole document with score 0.
// Requires doc.reading_order.
std::vector<FunctionalSection> LocateSections(const DocumentLayout& doc,
                                              const SectionLexicon& lexicon);

nlohmann::json LayoutReport(const DocumentLayout& doc,
                            const std::vector<FunctionalSection>& sections);

}  // namespace sciex

#endif  // SCIEX_LAYOUT_H_
