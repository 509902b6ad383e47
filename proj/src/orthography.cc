// src/orthography.cc

// Copyright 2026  The fieldasr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fieldasr/orthography.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "fieldasr/errors.h"
#include "fieldasr/text.h"

namespace fieldasr {

namespace {

std::string FormatCodepoint(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
  return buf;
}

bool ParseClass(std::string_view name, GraphemeClass* out) {
  static const std::pair<std::string_view, GraphemeClass> kNames[] = {
      {"consonant", GraphemeClass::kConsonant},
      {"vowel", GraphemeClass::kVowel},
      {"boundary", GraphemeClass::kBoundaryMarker},
      {"boundary-marker", GraphemeClass::kBoundaryMarker},
      {"suprasegmental", GraphemeClass::kSuprasegmental},
      {"separator", GraphemeClass::kSeparator},
  };
  for (const auto& [n, c] : kNames) {
    if (n == name) {
      *out = c;
      return true;
    }
  }
  return false;
}

// Strips a trailing '\r' so CRLF files parse like LF files.
std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

UnknownSymbolError::UnknownSymbolError(std::size_t byte_offset,
                                       std::size_t char_offset,
                                       char32_t codepoint)
    : ValidationError("unknown symbol " + FormatCodepoint(codepoint) +
                      " at character " + std::to_string(char_offset) +
                      " (byte " + std::to_string(byte_offset) + ")"),
      byte_offset_(byte_offset),
      char_offset_(char_offset),
      codepoint_(codepoint) {}

std::string_view GraphemeClassName(GraphemeClass c) {
  switch (c) {
    case GraphemeClass::kConsonant: return "consonant";
    case GraphemeClass::kVowel: return "vowel";
    case GraphemeClass::kBoundaryMarker: return "boundary";
    case GraphemeClass::kSuprasegmental: return "suprasegmental";
    case GraphemeClass::kSeparator: return "separator";
  }
  return "unknown";
}

Orthography Orthography::Load(std::string_view config_text) {
  Orthography orth;
  orth.name_ = "unnamed";
  orth.separator_ = Grapheme{" ", GraphemeClass::kSeparator, " "};
  std::set<std::string> seen;
  bool separator_declared = false;

  const std::string text = NormalizeNfc(config_text);
  const std::vector<std::string> lines = SplitString(text, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = StripCr(lines[i]);
    std::string_view trimmed = TrimWhitespace(line);
    // Blank and comment lines. A line made only of a space could be a
    // separator symbol, but separators need a TAB, so this is unambiguous.
    if (trimmed.empty() && line.find('\t') == std::string_view::npos) continue;
    if (!trimmed.empty() && trimmed.front() == '#') continue;
    if (trimmed.starts_with("orthography ") &&
        line.find('\t') == std::string_view::npos) {
      orth.name_ = std::string(TrimWhitespace(trimmed.substr(12)));
      if (orth.name_.empty()) throw ParseError(lineno, "empty orthography name");
      continue;
    }

    std::vector<std::string> fields = SplitString(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(lineno,
                       "expected symbol<TAB>class[<TAB>simplified], got " +
                           std::to_string(fields.size()) + " field(s)");
    }
    Grapheme g;
    g.symbol = fields[0];
    if (g.symbol.empty()) throw ParseError(lineno, "empty symbol");
    if (g.symbol.find_first_of("\t\r\n") != std::string::npos) {
      throw ParseError(lineno, "symbol contains a control character");
    }
    std::string_view cls_name = TrimWhitespace(fields[1]);
    if (!ParseClass(cls_name, &g.cls)) {
      throw ParseError(lineno,
                       "unknown class '" + std::string(cls_name) + "'");
    }
    const bool has_simplified = fields.size() == 3;
    if (g.cls == GraphemeClass::kSuprasegmental) {
      if (has_simplified && !fields[2].empty()) {
        throw ParseError(lineno,
                         "suprasegmental grapheme must render empty in the "
                         "simplified scheme");
      }
      g.simplified.clear();
    } else {
      g.simplified = has_simplified ? fields[2] : g.symbol;
    }

    if (!seen.insert(g.symbol).second) {
      throw ParseError(lineno, "duplicate symbol '" + g.symbol + "'");
    }
    if (g.cls == GraphemeClass::kSeparator) {
      if (separator_declared) {
        throw ParseError(lineno, "separator declared twice");
      }
      separator_declared = true;
      orth.separator_ = g;
    } else {
      orth.graphemes_.push_back(std::move(g));
    }
  }

  if (!separator_declared && seen.count(orth.separator_.symbol)) {
    throw ValidationError(
        "an inventory grapheme uses the default separator symbol (space)");
  }

  orth.by_length_ = orth.graphemes_;
  orth.by_length_.push_back(orth.separator_);
  std::stable_sort(orth.by_length_.begin(), orth.by_length_.end(),
                   [](const Grapheme& a, const Grapheme& b) {
                     return a.symbol.size() > b.symbol.size();
                   });
  return orth;
}

std::vector<Grapheme> Orthography::Tokenize(std::string_view text) const {
  const std::string nfc = NormalizeNfc(text);
  std::string_view s = nfc;
  std::vector<Grapheme> out;
  std::size_t pos = 0, chars = 0;
  while (pos < s.size()) {
    const Grapheme* match = nullptr;
    for (const Grapheme& g : by_length_) {
      if (s.compare(pos, g.symbol.size(), g.symbol) == 0) {
        match = &g;
        break;
      }
    }
    if (match == nullptr) {
      std::size_t p = pos;
      char32_t c = NextCodepoint(s, p);
      throw UnknownSymbolError(pos, chars, c);
    }
    chars += CountCodepoints(match->symbol);
    pos += match->symbol.size();
    out.push_back(*match);
  }
  return out;
}

std::vector<std::string> Orthography::TokenizeSymbols(
    std::string_view text) const {
  std::vector<std::string> out;
  for (Grapheme& g : Tokenize(text)) out.push_back(std::move(g.symbol));
  return out;
}

std::string Orthography::Normalize(std::string_view text) const {
  std::string out;
  for (const Grapheme& g : Tokenize(text)) {
    if (g.cls != GraphemeClass::kSuprasegmental) out += g.symbol;
  }
  return out;
}

const Grapheme* Orthography::Find(std::string_view symbol) const {
  if (symbol == separator_.symbol) return &separator_;
  for (const Grapheme& g : graphemes_) {
    if (g.symbol == symbol) return &g;
  }
  return nullptr;
}

TransliterationScheme TransliterationScheme::Identity(const Orthography& orth,
                                                      std::string name) {
  TransliterationScheme s;
  s.name_ = std::move(name);
  for (const Grapheme& g : orth.graphemes()) s.map_[g.symbol] = g.symbol;
  s.map_[orth.separator().symbol] = orth.separator().symbol;
  return s;
}

TransliterationScheme TransliterationScheme::Simplified(
    const Orthography& orth, std::string name) {
  TransliterationScheme s;
  s.name_ = std::move(name);
  for (const Grapheme& g : orth.graphemes()) s.map_[g.symbol] = g.simplified;
  s.map_[orth.separator().symbol] = orth.separator().simplified;
  return s;
}

TransliterationScheme TransliterationScheme::Load(std::string_view text,
                                                  const Orthography& orth) {
  TransliterationScheme s;
  const std::string nfc = NormalizeNfc(text);
  const std::vector<std::string> lines = SplitString(nfc, '\n');
  bool have_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = StripCr(lines[i]);
    std::string_view trimmed = TrimWhitespace(line);
    if (trimmed.empty() && line.find('\t') == std::string_view::npos) continue;
    if (!trimmed.empty() && trimmed.front() == '#') continue;
    if (!have_header) {
      if (!trimmed.starts_with("scheme ")) {
        throw ParseError(lineno, "expected 'scheme <name>' header");
      }
      s.name_ = std::string(TrimWhitespace(trimmed.substr(7)));
      if (s.name_.empty()) throw ParseError(lineno, "empty scheme name");
      have_header = true;
      continue;
    }
    std::vector<std::string> fields = SplitString(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(lineno, "expected symbol<TAB>rendering");
    }
    if (orth.Find(fields[0]) == nullptr) {
      throw ParseError(lineno, "symbol '" + fields[0] +
                                   "' is not in orthography '" + orth.name() +
                                   "'");
    }
    if (!s.map_.emplace(fields[0], fields[1]).second) {
      throw ParseError(lineno, "duplicate symbol '" + fields[0] + "'");
    }
  }
  if (!have_header) throw ParseError(1, "missing 'scheme <name>' header");
  for (const Grapheme& g : orth.graphemes()) {
    if (!s.map_.count(g.symbol)) {
      throw ValidationError("scheme '" + s.name_ + "' has no rendering for '" +
                            g.symbol + "'");
    }
  }
  s.map_.emplace(orth.separator().symbol, orth.separator().symbol);
  return s;
}

const std::string& TransliterationScheme::Render(const Grapheme& g) const {
  auto it = map_.find(g.symbol);
  if (it == map_.end()) {
    throw ValidationError("scheme '" + name_ + "' has no rendering for '" +
                          g.symbol + "'");
  }
  return it->second;
}

std::string TransliterationScheme::Apply(std::string_view text,
                                         const Orthography& orth) const {
  std::string out;
  for (const Grapheme& g : orth.Tokenize(text)) out += Render(g);
  return out;
}

Vocab BuildVocab(const Orthography& orth) {
  std::vector<std::string> symbols;
  symbols.push_back(orth.separator().symbol);
  for (const Grapheme& g : orth.graphemes()) {
    if (g.cls != GraphemeClass::kSuprasegmental) symbols.push_back(g.symbol);
  }
  return Vocab(symbols);
}

}  // namespace fieldasr
