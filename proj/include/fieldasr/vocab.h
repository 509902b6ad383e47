// fieldasr/vocab.h

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

#ifndef FIELDASR_VOCAB_H_
#define FIELDASR_VOCAB_H_

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fieldasr {

/// CTC output alphabet. Index 0 is always the blank.
class Vocab {
 public:
  static constexpr int kBlank = 0;
  static constexpr const char* kBlankSymbol = "<blank>";

  /// `symbols` excludes the blank; it is prepended. Throws ValidationError on
  /// duplicates or a symbol equal to the blank marker.
  explicit Vocab(const std::vector<std::string>& symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int index) const;
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::optional<int> Find(const std::string& symbol) const;

  /// Maps grapheme symbols to indices; throws ValidationError if one is not
  /// in the vocabulary.
  std::vector<int> Encode(std::span<const std::string> graphemes) const;

  /// Concatenates the symbols of `ids` (no collapsing).
  std::string Render(std::span<const int> ids) const;

  bool operator==(const Vocab& other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace fieldasr

#endif  // FIELDASR_VOCAB_H_
