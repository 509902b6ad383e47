// src/vocab.cc

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

#include "fieldasr/vocab.h"

#include "fieldasr/errors.h"

namespace fieldasr {

Vocab::Vocab(const std::vector<std::string>& symbols) {
  symbols_.reserve(symbols.size() + 1);
  symbols_.push_back(kBlankSymbol);
  index_.emplace(kBlankSymbol, kBlank);
  for (const std::string& s : symbols) {
    if (s.empty()) throw ValidationError("empty vocabulary symbol");
    if (!index_.emplace(s, static_cast<int>(symbols_.size())).second) {
      throw ValidationError("duplicate vocabulary symbol '" + s + "'");
    }
    symbols_.push_back(s);
  }
}

const std::string& Vocab::symbol(int index) const {
  if (index < 0 || index >= size()) {
    throw ValidationError("vocabulary index " + std::to_string(index) +
                          " out of range");
  }
  return symbols_[static_cast<std::size_t>(index)];
}

std::optional<int> Vocab::Find(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocab::Encode(std::span<const std::string> graphemes) const {
  std::vector<int> ids;
  ids.reserve(graphemes.size());
  for (const std::string& g : graphemes) {
    auto id = Find(g);
    if (!id || *id == kBlank) {
      throw ValidationError("symbol '" + g + "' is not in the vocabulary");
    }
    ids.push_back(*id);
  }
  return ids;
}

std::string Vocab::Render(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id != kBlank) out += symbol(id);
  }
  return out;
}

}  // namespace fieldasr
