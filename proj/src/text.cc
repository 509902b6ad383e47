// src/text.cc

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

#include "fieldasr/text.h"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "fieldasr/errors.h"

namespace fieldasr {

std::string NormalizeNfc(std::string_view utf8) {
  // Validate first: ICU silently substitutes U+FFFD for bad sequences.
  std::size_t pos = 0;
  bool ascii = true;
  while (pos < utf8.size()) {
    if (static_cast<unsigned char>(utf8[pos]) >= 0x80) ascii = false;
    NextCodepoint(utf8, pos);
  }
  if (ascii) return std::string(utf8);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out = nfc->normalize(in, status);
  if (U_FAILURE(status)) throw ValidationError("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

char32_t NextCodepoint(std::string_view utf8, std::size_t& pos) {
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  int32_t i = static_cast<int32_t>(pos);
  const int32_t length = static_cast<int32_t>(utf8.size());
  UChar32 c;
  U8_NEXT(s, i, length, c);
  if (c < 0) {
    throw ValidationError("ill-formed UTF-8 at byte " + std::to_string(pos));
  }
  pos = static_cast<std::size_t>(i);
  return static_cast<char32_t>(c);
}

std::size_t CountCodepoints(std::string_view utf8) {
  std::size_t pos = 0, n = 0;
  while (pos < utf8.size()) {
    NextCodepoint(utf8, pos);
    ++n;
  }
  return n;
}

std::vector<std::string> SplitString(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(delim, start);
    if (end == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
}

std::string_view TrimWhitespace(std::string_view s) {
  const char* ws = " \t\r\n";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace fieldasr
