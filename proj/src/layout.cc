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

#include "sciex/layout.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "sciex/common.h"

namespace sciex {

using nlohmann::json;

const std::vector<std::string>& BlockCategories() {
  static const std::vector<std::string> kCategories = {
      "title", "author", "abstract", "heading", "paragraph", "table",
      "figure", "caption", "formula", "reference", "other"};
  return kCategories;
}

bool IsBlockCategory(const std::string& category) {
  const auto& c = BlockCategories();
  return std::find(c.begin(), c.end(), category) != c.end();
}

const Block& DocumentLayout::block(const std::string& id) const {
  for (const auto& b : blocks) {
    if (b.id == id) return b;
  }
  throw std::out_of_range("no block with id " + id);
}

DocumentLayout ParseBlockDump(const json& j) {
  DocumentLayout doc;
  std::set<std::string> seen;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    for (const auto& page : j.at("pages")) {
      const int page_no = page.at("page").get<int>();
      if (page_no < 0) throw ParseError("block dump: negative page number");
      for (const auto& jb : page.at("blocks")) {
        Block b;
        b.id = jb.at("id").get<std::string>();
        b.page = page_no;
        const auto box = jb.at("bbox").get<std::vector<double>>();
        if (box.size() != 4) throw ParseError("block dump: bbox of " + b.id + " needs 4 numbers");
        b.bbox = {box[0], box[1], box[2], box[3]};
        if (!(b.bbox.x0 < b.bbox.x1) || !(b.bbox.y0 < b.bbox.y1)) {
          throw ParseError("block dump: degenerate bbox for block " + b.id);
        }
        b.text = jb.value("text", std::string());
        if (jb.contains("font_size") && !jb.at("font_size").is_null()) {
          b.font_size = jb.at("font_size").get<double>();
        }
        if (jb.contains("category") && !jb.at("category").is_null()) {
          b.category = jb.at("category").get<std::string>();
          if (!IsBlockCategory(b.category)) {
            throw ParseError("block dump: unknown category '" + b.category + "' on " + b.id);
          }
        }
        if (!seen.insert(b.id).second) throw ParseError("block dump: duplicate block id " + b.id);
        doc.blocks.push_back(std::move(b));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("block dump: ") + e.what());
  }
  return doc;
}

DocumentLayout LoadBlockDump(const std::string& path) {
  const std::string bytes = ReadFileBytes(path);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return ParseBlockDump(j);
}

json BlockDumpToJson(const DocumentLayout& doc) {
  std::map<int, json> pages;
  for (const auto& b : doc.blocks) {
    json jb = {{"id", b.id},
               {"bbox", {b.bbox.x0, b.bbox.y0, b.bbox.x1, b.bbox.y1}},
               {"text", b.text}};
    if (b.font_size) jb["font_size"] = *b.font_size;
    if (!b.category.empty()) jb["category"] = b.category;
    pages[b.page].push_back(jb);
  }
  json out = {{"doc_id", doc.doc_id}, {"pages", json::array()}};
  for (auto& [page, blocks] : pages) out["pages"].push_back({{"page", page}, {"blocks", blocks}});
  return out;
}

namespace {

std::string Trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> Words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<std::string> Lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (!Trim(line).empty()) out.push_back(line);
  }
  return out;
}

// "2." / "2.1" / "3.2.1" prefix of a heading, without the trailing dot.
std::optional<std::string> HeadingNumber(const std::string& text) {
  static const std::regex kNumber(R"(^\s*(\d+(?:\.\d+)*)\.?\s+\S)");
  std::smatch m;
  if (std::regex_search(text, m, kNumber)) return m[1].str();
  return std::nullopt;
}

bool IsCaption(const std::string& t) {
  static const std::regex kCaption(R"(^(fig\.?|figure|table|tab\.|scheme)\s*\d+)",
                                   std::regex::icase);
  return std::regex_search(t, kCaption);
}

bool IsReference(const std::string& t) {
  static const std::regex kRef(R"(^\[\d+\])");
  return std::regex_search(t, kRef);
}

bool IsTable(const std::string& t) {
  size_t digits = 0, visible = 0;
  for (unsigned char c : t) {
    if (std::isspace(c)) continue;
    ++visible;
    if (std::isdigit(c)) ++digits;
  }
  if (visible == 0 || digits * 10 < visible * 3) return false;
  // Aligned columns: two or more lines with the same field count (>= 2).
  std::map<size_t, int> field_counts;
  for (const auto& line : Lines(t)) ++field_counts[Words(line).size()];
  for (const auto& [fields, lines] : field_counts) {
    if (fields >= 2 && lines >= 2) return true;
  }
  return false;
}

bool IsFormula(const std::string& t) {
  if (t.size() > 200 || t.find('=') == std::string::npos) return false;
  size_t letters = 0, visible = 0;
  for (unsigned char c : t) {
    if (std::isspace(c)) continue;
    ++visible;
    if (std::isalpha(c)) ++letters;
  }
  return letters * 2 < visible;
}

bool HasLetter(const std::string& t) {
  return std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c) || c >= 0x80; });
}

bool EndsSentence(const std::string& t) {
  return !t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?');
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<Block> ClassifyBlocks(std::vector<Block> blocks) {
  std::vector<double> fonts;
  double page0_height = 0.0;
  for (const auto& b : blocks) {
    if (b.font_size) fonts.push_back(*b.font_size);
    if (b.page == 0) page0_height = std::max(page0_height, b.bbox.y1);
  }
  const double median_font = Median(fonts);

  // Title: given, or the largest-font page-0 block in the top 30%.
  const Block* title = nullptr;
  for (const auto& b : blocks) {
    if (b.category == "title") title = &b;
  }
  if (!title) {
    for (const auto& b : blocks) {
      if (!b.category.empty() || b.page != 0 || !b.font_size || Trim(b.text).empty()) continue;
      if (*b.font_size <= median_font || b.bbox.y0 > 0.3 * page0_height) continue;
      if (!title || *b.font_size > *title->font_size ||
          (*b.font_size == *title->font_size && b.bbox.y0 < title->bbox.y0)) {
        title = &b;
      }
    }
  }
  const std::string title_id = title ? title->id : "";
  const double title_y0 = title ? title->bbox.y0 : 0.0;
  const double title_font = title && title->font_size ? *title->font_size : 0.0;

  // First page-0 abstract or heading bounds the author zone from below.
  double front_end = page0_height;
  for (const auto& b : blocks) {
    if (b.page != 0) continue;
    const std::string t = Trim(b.text);
    const bool abstract = b.category == "abstract" || t.rfind("Abstract", 0) == 0 ||
                          t.rfind("ABSTRACT", 0) == 0;
    const bool heading = b.category == "heading" || (b.category.empty() && HeadingNumber(t) &&
                                                     Words(t).size() <= 12);
    if (abstract || heading) front_end = std::min(front_end, b.bbox.y0);
  }

  for (auto& b : blocks) {
    if (!b.category.empty()) continue;
    const std::string t = Trim(b.text);
    const auto words = Words(t);
    const auto lines = Lines(t);
    const bool bigger_font = b.font_size && median_font > 0 && *b.font_size > 1.15 * median_font;
    if (t.empty()) {
      b.category = "figure";
    } else if (b.id == title_id) {
      b.category = "title";
    } else if (IsCaption(t)) {
      b.category = "caption";
    } else if (IsReference(t)) {
      b.category = "reference";
    } else if (t.rfind("Abstract", 0) == 0 || t.rfind("ABSTRACT", 0) == 0) {
      b.category = "abstract";
    } else if (IsTable(t)) {
      b.category = "table";
    } else if (IsFormula(t)) {
      b.category = "formula";
    } else if (lines.size() == 1 && words.size() <= 12 && HasLetter(t) &&
               (HeadingNumber(t) || bigger_font) && !(EndsSentence(t) && words.size() > 3)) {
      b.category = "heading";
    } else if (title && b.page == 0 && b.bbox.y0 > title_y0 && b.bbox.y0 < front_end &&
               words.size() <= 30 && !EndsSentence(t) && HasLetter(t) &&
               (!b.font_size || *b.font_size <= title_font)) {
      b.category = "author";
    } else if (HasLetter(t)) {
      b.category = "paragraph";
    } else {
      b.category = "other";
    }
  }
  return blocks;
}

namespace {

int FindRoot(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

bool SameColumn(const BBox& a, const BBox& b) {
  const double overlap = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  return overlap > 0 && overlap >= 0.5 * std::min(a.width(), b.width());
}

}  // namespace

std::vector<std::string> ReadingOrder(const std::vector<Block>& blocks) {
  std::map<int, std::vector<const Block*>> pages;
  for (const auto& b : blocks) pages[b.page].push_back(&b);

  std::vector<std::string> order;
  order.reserve(blocks.size());
  for (auto& [page, page_blocks] : pages) {
    std::sort(page_blocks.begin(), page_blocks.end(), [](const Block* a, const Block* b) {
      return std::tie(a->bbox.y0, a->bbox.x0, a->id) < std::tie(b->bbox.y0, b->bbox.x0, b->id);
    });
    double min_x = page_blocks.front()->bbox.x0, max_x = page_blocks.front()->bbox.x1;
    for (const Block* b : page_blocks) {
      min_x = std::min(min_x, b->bbox.x0);
      max_x = std::max(max_x, b->bbox.x1);
    }
    const double extent = max_x - min_x;

    auto flush_band = [&](std::vector<const Block*>& band) {
      if (band.empty()) return;
      const int n = static_cast<int>(band.size());
      std::vector<int> parent(n);
      std::iota(parent.begin(), parent.end(), 0);
      for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
          if (SameColumn(band[i]->bbox, band[k]->bbox)) {
            parent[FindRoot(parent, i)] = FindRoot(parent, k);
          }
        }
      }
      std::map<int, double> column_x;
      for (int i = 0; i < n; ++i) {
        const int r = FindRoot(parent, i);
        auto it = column_x.find(r);
        if (it == column_x.end()) {
          column_x[r] = band[i]->bbox.x0;
        } else {
          it->second = std::min(it->second, band[i]->bbox.x0);
        }
      }
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const int ra = FindRoot(parent, a), rb = FindRoot(parent, b);
        const auto& ba = band[a]->bbox;
        const auto& bb = band[b]->bbox;
        return std::tie(column_x[ra], ra, ba.y0, ba.x0, band[a]->id) <
               std::tie(column_x[rb], rb, bb.y0, bb.x0, band[b]->id);
      });
      for (int i : idx) order.push_back(band[i]->id);
      band.clear();
    };

    std::vector<const Block*> band;
    for (const Block* b : page_blocks) {
      if (extent > 0 && b->bbox.width() > 0.5 * extent) {
        flush_band(band);
        order.push_back(b->id);
      } else {
        band.push_back(b);
      }
    }
    flush_band(band);
  }
  return order;
}

DocumentLayout AnalyzeLayout(DocumentLayout doc) {
  doc.blocks = ClassifyBlocks(std::move(doc.blocks));
  doc.reading_order = ReadingOrder(doc.blocks);
  return doc;
}

SectionLexicon ParseSectionLexicon(const json& j) {
  SectionLexicon lex;
  if (!j.is_object()) throw ParseError("section lexicon: expected an object");
  for (const auto& [kind, words] : j.items()) {
    if (kind != "method" && kind != "experiment") {
      throw ParseError("section lexicon: unknown section kind '" + kind + "'");
    }
    try {
      lex.keywords[kind] = words.get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ParseError("section lexicon: " + kind + ": " + e.what());
    }
  }
  return lex;
}

SectionLexicon LoadSectionLexicon(const std::string& path) {
  try {
    return ParseSectionLexicon(json::parse(ReadFileBytes(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string StemWord(const std::string& word) {
  std::string w;
  for (unsigned char c : word) w.push_back(static_cast<char>(std::tolower(c)));
  static const std::vector<std::pair<std::string, std::string>> kSuffixes = {
      {"ations", ""}, {"ation", ""}, {"ments", ""}, {"ment", ""}, {"ical", ""},
      {"ally", ""},   {"ing", ""},   {"ies", "y"},  {"als", ""},  {"al", ""},
      {"ed", ""},     {"es", ""},    {"s", ""}};
  for (const auto& [suffix, replacement] : kSuffixes) {
    if (w.size() >= suffix.size() + 4 && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return w.substr(0, w.size() - suffix.size()) + replacement;
    }
  }
  return w;
}

bool StemsMatch(const std::string& a, const std::string& b) {
  if (a == b) return true;
  const std::string& shorter = a.size() < b.size() ? a : b;
  const std::string& longer = a.size() < b.size() ? b : a;
  return shorter.size() >= 5 && longer.compare(0, shorter.size(), shorter) == 0;
}

HeadingMatch MatchHeading(const std::string& heading, const SectionLexicon& lexicon) {
  static const std::set<std::string> kStopwords = {
      "a", "an", "and", "at", "by", "for", "from", "in", "of", "on",
      "the", "to", "with", "section", "part", "chapter"};
  std::vector<std::string> stems;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    const bool numeric = std::all_of(word.begin(), word.end(), [](unsigned char c) {
      return std::isdigit(c) || c == '.' || c == '-';
    });
    std::string lower = StemWord(word);
    if (!numeric && !kStopwords.count(lower)) {
      stems.push_back(lower);
    }
    word.clear();
  };
  for (unsigned char c : heading) {
    if (std::isalnum(c) || c == '-' || c >= 0x80) {
      word.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();

  HeadingMatch best{"other", 0.0};
  if (stems.empty()) return best;
  size_t best_count = 0;
  for (const auto& [kind, keywords] : lexicon.keywords) {
    size_t count = 0;
    for (const auto& s : stems) {
      for (const auto& k : keywords) {
        if (StemsMatch(s, StemWord(k))) {
          ++count;
          break;
        }
      }
    }
    if (count > best_count) {
      best_count = count;
      best = {kind, 0.5 + 0.5 * static_cast<double>(count) / static_cast<double>(stems.size())};
    }
  }
  return best;
}

std::vector<FunctionalSection> LocateSections(const DocumentLayout& doc,
                                              const SectionLexicon& lexicon) {
  std::map<std::string, const Block*> by_id;
  for (const auto& b : doc.blocks) by_id[b.id] = &b;
  const size_t n = doc.reading_order.size();

  std::vector<FunctionalSection> sections;
  std::map<std::string, std::pair<std::string, double>> numbered;  // number -> (kind, score)
  bool any_match = false;
  for (size_t i = 0; i < n; ++i) {
    const Block& b = *by_id.at(doc.reading_order[i]);
    if (b.category == "heading") {
      FunctionalSection s;
      s.heading = Trim(b.text);
      const HeadingMatch m = MatchHeading(s.heading, lexicon);
      const double p = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
      const double prior = 0.5 + 0.5 * std::sin(M_PI * p);
      s.kind = m.kind;
      s.score = m.strength * prior;
      const auto number = HeadingNumber(s.heading);
      if (s.kind == "other" && number) {
        // Walk up "2.1.3" -> "2.1" -> "2".
        std::string parent = *number;
        for (size_t dot; (dot = parent.rfind('.')) != std::string::npos;) {
          parent.resize(dot);
          if (auto it = numbered.find(parent); it != numbered.end() && it->second.first != "other") {
            s.kind = it->second.first;
            s.score = it->second.second;
            break;
          }
        }
      }
      if (number) numbered[*number] = {s.kind, s.score};
      any_match = any_match || s.kind != "other";
      sections.push_back(std::move(s));
    } else if (sections.empty()) {
      sections.push_back({"other", {}, 0.0, ""});
    }
    sections.back().block_ids.push_back(b.id);
  }
  if (!any_match) return {{"other", doc.reading_order, 0.0, ""}};
  return sections;
}

json LayoutReport(const DocumentLayout& doc, const std::vector<FunctionalSection>& sections) {
  json blocks = json::array();
  for (const auto& id : doc.reading_order) {
    const Block& b = doc.block(id);
    blocks.push_back({{"id", b.id}, {"page", b.page}, {"category", b.category}});
  }
  json secs = json::array();
  for (const auto& s : sections) {
    secs.push_back({{"kind", s.kind}, {"score", s.score}, {"heading", s.heading},
                    {"block_ids", s.block_ids}});
  }
  return {{"doc_id", doc.doc_id}, {"reading_order", blocks}, {"sections", secs}};
}

}  // namespace sciex
