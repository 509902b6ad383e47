// fieldasr/orthography.h

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

#ifndef FIELDASR_ORTHOGRAPHY_H_
#define FIELDASR_ORTHOGRAPHY_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fieldasr/vocab.h"

namespace fieldasr {

enum class GraphemeClass {
  kConsonant,
  kVowel,
  kBoundaryMarker,
  kSuprasegmental,
  kSeparator,
};

std::string_view GraphemeClassName(GraphemeClass c);

struct Grapheme {
  std::string symbol;
  GraphemeClass cls = GraphemeClass::kConsonant;
  // Rendering in the built-in "simplified" scheme.
  std::string simplified;

  bool operator==(const Grapheme&) const = default;
};

/// A phonemic writing system: an ordered grapheme inventory plus the word
/// separator. Immutable after Load().
///
/// Config format (UTF-8, NFC-normalized on load):
///
///   # comment
///   orthography <name>              (optional header)
///   <symbol> TAB <class> [TAB <simplified>]
///
/// Classes: consonant, vowel, boundary, suprasegmental, separator. A missing
/// simplified column renders the symbol unchanged, except for suprasegmental
/// graphemes, which always render empty. The separator defaults to a single
/// space; a `separator` line overrides its symbol.
class Orthography {
 public:
  static Orthography Load(std::string_view config_text);

  const std::string& name() const { return name_; }
  /// Inventory without the separator, in declaration order.
  const std::vector<Grapheme>& graphemes() const { return graphemes_; }
  const Grapheme& separator() const { return separator_; }

  /// Greedy longest-match decomposition of NFC(text). Concatenating the
  /// symbols of the result reproduces NFC(text). Throws UnknownSymbolError.
  std::vector<Grapheme> Tokenize(std::string_view text) const;

  /// Tokenize() reduced to symbols.
  std::vector<std::string> TokenizeSymbols(std::string_view text) const;

  /// Drops suprasegmental graphemes; idempotent.
  std::string Normalize(std::string_view text) const;

  /// Lookup by symbol (separator included); nullptr if absent.
  const Grapheme* Find(std::string_view symbol) const;

 private:
  Orthography() = default;

  std::string name_;
  std::vector<Grapheme> graphemes_;
  Grapheme separator_;
  // All matchable graphemes (inventory + separator) sorted by descending
  // byte length for longest-match.
  std::vector<Grapheme> by_length_;
};

/// Total map from the graphemes of one orthography to display strings.
class TransliterationScheme {
 public:
  /// Every grapheme maps to itself.
  static TransliterationScheme Identity(const Orthography& orth,
                                        std::string name = "phonemic");
  /// Every grapheme maps to its `simplified` column.
  static TransliterationScheme Simplified(const Orthography& orth,
                                          std::string name = "simplified");

  /// Parses a scheme file: `scheme <name>` header, then
  /// `<symbol> TAB <rendering>` lines. Every non-separator grapheme of `orth`
  /// must be listed; the separator renders as itself unless listed.
  static TransliterationScheme Load(std::string_view text,
                                    const Orthography& orth);

  const std::string& name() const { return name_; }
  const std::string& Render(const Grapheme& g) const;

  /// Per-grapheme replacement of a tokenized text.
  std::string Apply(std::string_view text, const Orthography& orth) const;

 private:
  std::string name_;
  std::map<std::string, std::string, std::less<>> map_;
};

/// Free-function aliases matching the operation names used across the
/// project.
inline std::vector<Grapheme> Tokenize(std::string_view text,
                                      const Orthography& orth) {
  return orth.Tokenize(text);
}
inline std::string Normalize(std::string_view text, const Orthography& orth) {
  return orth.Normalize(text);
}
inline std::string Transliterate(std::string_view text,
                                 const Orthography& orth,
                                 const TransliterationScheme& scheme) {
  return scheme.Apply(text, orth);
}

/// CTC alphabet for an orthography: blank, separator, then every
/// non-suprasegmental grapheme in inventory order.
Vocab BuildVocab(const Orthography& orth);

}  // namespace fieldasr

#endif  // FIELDASR_ORTHOGRAPHY_H_
