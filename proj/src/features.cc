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

#include "sciex/features.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "sciex/common.h"

namespace sciex {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool IsTrailingPunct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case '"': case '\'':
      return true;
    default:
      return false;
  }
}

bool IsQuote(char c) { return c == '"' || c == '\'' || c == '`'; }

char MatchingCloser(char c) {
  switch (c) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
    default: return 0;
  }
}

char MatchingOpener(char c) {
  switch (c) {
    case ')': return '(';
    case ']': return '[';
    case '}': return '{';
    default: return 0;
  }
}

long Count(std::string_view s, char c) { return std::count(s.begin(), s.end(), c); }

// Splits one whitespace-free chunk text[b, e) into tokens.
void SplitChunk(std::string_view text, size_t b, size_t e, std::vector<Token>* out) {
  std::vector<size_t> front;  // single-character tokens peeled from the left
  std::vector<size_t> back;   // ... and from the right, innermost last
  bool changed = true;
  while (changed && b < e) {
    changed = false;
    const std::string_view chunk = text.substr(b, e - b);
    const char last = text[e - 1];
    if (IsTrailingPunct(last)) {
      back.push_back(--e);
      changed = true;
      continue;
    }
    if (char opener = MatchingOpener(last)) {
      if (Count(chunk, last) > Count(chunk, opener)) {
        back.push_back(--e);
        changed = true;
        continue;
      }
    }
    const char first = text[b];
    if (IsQuote(first)) {
      front.push_back(b++);
      changed = true;
      continue;
    }
    if (char closer = MatchingCloser(first)) {
      if (Count(chunk, first) > Count(chunk, closer)) {
        front.push_back(b++);
        changed = true;
      } else if (e - b >= 2 && last == closer) {
        front.push_back(b++);
        back.push_back(--e);
        changed = true;
      }
    }
  }
  for (size_t pos : front) out->push_back({std::string(text.substr(pos, 1)), pos, pos + 1});
  if (b < e) out->push_back({std::string(text.substr(b, e - b)), b, e});
  for (auto it = back.rbegin(); it != back.rend(); ++it) {
    out->push_back({std::string(text.substr(*it, 1)), *it, *it + 1});
  }
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool IsNumber(std::string_view s) {
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  bool digit = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

const std::map<std::string, std::string>& ClosedClassLexicon() {
  static const auto* kLexicon = [] {
    auto* m = new std::map<std::string, std::string>;
    auto add = [m](const std::string& tag, std::initializer_list<const char*> words) {
      for (const char* w : words) (*m)[w] = tag;
    };
    add("DT", {"the", "a", "an", "this", "these", "those", "each", "every", "some", "any",
               "no", "all", "both", "another", "either", "neither"});
    add("IN", {"of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "over",
               "under", "between", "through", "during", "after", "before", "above", "below",
               "about", "against", "among", "within", "without", "via", "per", "than", "upon",
               "if", "because", "although", "whereas", "since", "as", "whether", "until",
               "that", "near", "across", "toward", "towards", "while", "like"});
    add("TO", {"to"});
    add("CC", {"and", "or", "but", "nor", "yet", "&"});
    add("PRP", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
                "itself", "themselves"});
    add("PRP$", {"my", "your", "his", "her", "its", "our", "their"});
    add("MD", {"can", "could", "will", "would", "shall", "should", "may", "might", "must"});
    add("VBZ", {"is", "has", "does"});
    add("VBP", {"are", "have", "do", "am"});
    add("VBD", {"was", "were", "had", "did", "said"});
    add("VB", {"be"});
    add("VBN", {"been"});
    add("VBG", {"being"});
    add("WDT", {"which", "whatever", "whichever"});
    add("WP", {"who", "what", "whom"});
    add("WP$", {"whose"});
    add("WRB", {"when", "where", "why", "how"});
    add("EX", {"there"});
    add("RB", {"not", "also", "very", "then", "thus", "however", "only", "too", "here",
               "further", "respectively", "approximately", "again", "still", "often"});
    add("CD", {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
               "ten", "hundred", "thousand"});
    add("JJ", {"new", "high", "low", "other", "such", "same", "different", "large",
               "small", "several"});
    add("POS", {"'s"});
    add(".", {".", "!", "?"});
    add(",", {","});
    add(":", {":", ";", "-", "--", "..."});
    add("(", {"(", "[", "{"});
    add(")", {")", "]", "}"});
    add("``", {"``", "\"", "`"});
    add("''", {"''", "'"});
    add("$", {"$"});
    add("#", {"#"});
    add("SYM", {"=", "+", "<", ">", "~", "\xC3\x97"});  // U+00D7 multiplication sign
    return m;
  }();
  return *kLexicon;
}

}  // namespace

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) SplitChunk(text, i, j, &tokens);
    i = j;
  }
  return tokens;
}

PosTagset::PosTagset(std::vector<std::string> tags) : tags_(std::move(tags)) {
  if (tags_.empty() || tags_.size() > static_cast<size_t>(kMaxPosTags)) {
    throw SchemaError("tagset must hold between 1 and 63 tags, got " +
                      std::to_string(tags_.size()));
  }
  for (size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i].empty()) throw SchemaError("empty tag name in tagset");
    if (!index_.emplace(tags_[i], static_cast<int>(i)).second) {
      throw SchemaError("duplicate tag in tagset: " + tags_[i]);
    }
  }
}

int PosTagset::Index(const std::string& tag) const {
  auto it = index_.find(tag);
  return it == index_.end() ? -1 : it->second;
}

int PosTagset::Code(const std::string& tag) const {
  const int idx = Index(tag);
  if (idx < 0) throw SchemaError("tag not in tagset: " + tag);
  return idx + 1;
}

const PosTagset& PennTreebankTagset() {
  static const PosTagset kPenn({
      "CC",  "CD",  "DT",  "EX",  "FW",   "IN",  "JJ",  "JJR", "JJS", "LS",  "MD",  "NN",
      "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",  "SYM",
      "TO",  "UH",  "VB",  "VBD", "VBG",  "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB",
      "#",   "$",   "''",  "(",   ")",    ",",   ".",   ":",   "``",
  });
  return kPenn;
}

PosTagset LoadTagset(const std::string& path) {
  try {
    return PosTagset(nlohmann::json::parse(ReadFileBytes(path)).get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::map<std::string, std::string> LoadTaggerLexicon(const std::string& path) {
  try {
    return nlohmann::json::parse(ReadFileBytes(path)).get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

LexiconTagger::LexiconTagger(std::map<std::string, std::string> overlay)
    : lexicon_(ClosedClassLexicon()), overlay_(std::move(overlay)) {
  for (const auto& [word, tag] : overlay_) lexicon_[Lower(word)] = tag;
}

std::string LexiconTagger::TagWord(const std::string& word) const {
  if (auto it = lexicon_.find(word); it != lexicon_.end()) return it->second;
  const std::string lower = Lower(word);
  if (auto it = lexicon_.find(lower); it != lexicon_.end()) return it->second;

  if (IsNumber(word)) return "CD";
  const bool has_alpha = std::any_of(word.begin(), word.end(),
                                     [](unsigned char c) { return std::isalpha(c); });
  const bool has_digit = std::any_of(word.begin(), word.end(),
                                     [](unsigned char c) { return std::isdigit(c); });
  const bool has_high = std::any_of(word.begin(), word.end(),
                                    [](unsigned char c) { return c >= 0x80; });
  if (!has_alpha && !has_digit && !has_high) return "SYM";
  if (has_alpha && has_digit) return "NN";

  const bool capitalized = std::isupper(static_cast<unsigned char>(word[0])) != 0;
  if (capitalized && word.size() > 1 && word.find('-') == std::string::npos) return "NNP";

  const size_t n = lower.size();
  if (n > 4 && EndsWith(lower, "ing")) return "VBG";
  if (n > 3 && EndsWith(lower, "ed")) return "VBN";
  if (n > 3 && EndsWith(lower, "ly")) return "RB";
  for (const char* suffix : {"tion", "sion", "ment", "ness", "ity", "ance", "ence", "ism"}) {
    if (n > 4 && EndsWith(lower, suffix)) return "NN";
  }
  for (const char* suffix : {"ous", "ful", "ive", "able", "ible", "ical", "ic", "al"}) {
    if (n > 4 && EndsWith(lower, suffix)) return "JJ";
  }
  if (n > 3 && EndsWith(lower, "s") && !EndsWith(lower, "ss") && !EndsWith(lower, "us") &&
      !EndsWith(lower, "is")) {
    return "NNS";
  }
  return "NN";
}

std::vector<std::string> LexiconTagger::Tag(std::span<const std::string> tokens) const {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(TagWord(t));
  return tags;
}

std::vector<uint8_t> EncodePosCodes(std::span<const int> codes, int slots) {
  if (codes.size() > static_cast<size_t>(slots)) {
    throw std::invalid_argument("POS code: " + std::to_string(codes.size()) +
                                " tokens exceed " + std::to_string(slots) + " slots");
  }
  std::vector<uint8_t> bits(static_cast<size_t>(slots) * kPosCodeBits, 0);
  for (size_t i = 0; i < codes.size(); ++i) {
    const int code = codes[i];
    if (code < 0 || code > kMaxPosTags) {
      throw std::invalid_argument("POS code out of range: " + std::to_string(code));
    }
    for (int b = 0; b < kPosCodeBits; ++b) {
      bits[i * kPosCodeBits + b] = static_cast<uint8_t>((code >> (kPosCodeBits - 1 - b)) & 1);
    }
  }
  return bits;
}

std::vector<int> DecodePosCodes(std::span<const uint8_t> bits) {
  if (bits.size() % kPosCodeBits != 0) {
    throw std::invalid_argument("POS code length " + std::to_string(bits.size()) +
                                " is not a multiple of 6");
  }
  std::vector<int> codes;
  for (size_t slot = 0; slot < bits.size() / kPosCodeBits; ++slot) {
    int code = 0;
    for (int b = 0; b < kPosCodeBits; ++b) {
      const uint8_t bit = bits[slot * kPosCodeBits + b];
      if (bit > 1) throw std::invalid_argument("POS code bit is not 0/1");
      code = (code << 1) | bit;
    }
    if (code == 0) break;
    codes.push_back(code);
  }
  return codes;
}

std::vector<std::string> DecodePos(const PosTagset& tagset, std::span<const uint8_t> bits) {
  std::vector<std::string> tags;
  for (int code : DecodePosCodes(bits)) {
    if (code > static_cast<int>(tagset.size())) {
      throw std::invalid_argument("POS code " + std::to_string(code) + " not in tagset");
    }
    tags.push_back(tagset.tags()[code - 1]);
  }
  return tags;
}

std::vector<uint8_t> EncodePos(const PosTagset& tagset, std::span<const std::string> tags,
                               int max_span_len) {
  std::vector<int> codes;
  codes.reserve(tags.size());
  for (const auto& t : tags) codes.push_back(tagset.Code(t));
  return EncodePosCodes(codes, max_span_len);
}

WidthTable::WidthTable(int max_span_len, int dim)
    : max_span_len_(max_span_len),
      dim_(dim),
      rows_("width_embedding", {static_cast<size_t>(max_span_len), static_cast<size_t>(dim)}) {
  if (max_span_len < 1 || dim < 1) throw std::invalid_argument("width table needs positive shape");
}

std::span<const double> WidthTable::Lookup(int k) const {
  if (k < 1 || k > max_span_len_) {
    throw std::out_of_range("span width " + std::to_string(k) + " outside [1, " +
                            std::to_string(max_span_len_) + "]");
  }
  return rows_.row(static_cast<size_t>(k - 1));
}

void WidthTable::AccumulateGrad(int k, std::span<const double> grad) {
  (void)Lookup(k);
  AddTo(rows_.grad_row(static_cast<size_t>(k - 1)), grad);
}

}  // namespace sciex
