// fieldasr/text.h

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

#ifndef FIELDASR_TEXT_H_
#define FIELDASR_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace fieldasr {

// UTF-8 helpers shared by the orthography, corpus and CLI code.

/// NFC-normalizes UTF-8 text. Throws ValidationError on ill-formed UTF-8.
std::string NormalizeNfc(std::string_view utf8);

/// Decodes the codepoint starting at byte `pos`, advancing `pos` past it.
/// Throws ValidationError on ill-formed input.
char32_t NextCodepoint(std::string_view utf8, std::size_t& pos);

std::size_t CountCodepoints(std::string_view utf8);

std::vector<std::string> SplitString(std::string_view s, char delim);

std::string_view TrimWhitespace(std::string_view s);

}  // namespace fieldasr

#endif  // FIELDASR_TEXT_H_
