// fieldasr/errors.h

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

#ifndef FIELDASR_ERRORS_H_
#define FIELDASR_ERRORS_H_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fieldasr {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a format rule or a domain invariant (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file or storage location could not be read or written (exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Nothing to work on: empty split, all targets infeasible (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Text-format error tied to a 1-based line of its source.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// No grapheme of the orthography matches at a text position. Offsets refer
/// to the NFC-normalized text.
class UnknownSymbolError : public ValidationError {
 public:
  UnknownSymbolError(std::size_t byte_offset, std::size_t char_offset,
                     char32_t codepoint);
  std::size_t byte_offset() const { return byte_offset_; }
  std::size_t char_offset() const { return char_offset_; }
  char32_t codepoint() const { return codepoint_; }

 private:
  std::size_t byte_offset_;
  std::size_t char_offset_;
  char32_t codepoint_;
};

}  // namespace fieldasr

#endif  // FIELDASR_ERRORS_H_
