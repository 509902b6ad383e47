// fieldasr/eval.h

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

#ifndef FIELDASR_EVAL_H_
#define FIELDASR_EVAL_H_

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldasr/orthography.h"

namespace fieldasr {

class AcousticModel;
struct Utterance;

/// Levenshtein distance with unit costs, two-row DP.
template <typename T>
std::size_t EditDistance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t EditDistance(std::string_view a, std::string_view b) {
  return EditDistance(std::span<const char>(a.data(), a.size()),
                      std::span<const char>(b.data(), b.size()));
}

/// Grapheme error rate: edit distance over tokenized graphemes divided by the
/// reference grapheme count. Throws ValidationError for an empty reference.
double Cer(std::string_view ref, std::string_view hyp, const Orthography& orth);

/// Word error rate over whitespace-separated words.
double Wer(std::string_view ref, std::string_view hyp);

struct SegmentScore {
  std::string id;
  std::string reference;
  std::string hypothesis;
  std::size_t edits = 0;
  std::size_t reference_length = 0;  // graphemes
  double cer = 0.0;
};

struct EvalReport {
  std::vector<SegmentScore> segments;
  std::size_t total_edits = 0;
  std::size_t total_reference = 0;
  /// Corpus-level micro average: total_edits / total_reference.
  double aggregate_cer = 0.0;

  std::string ToTable() const;
  /// One JSON object per segment, then a summary object.
  std::string ToJsonl() const;
  static EvalReport FromJsonl(std::string_view text);
};

struct TranscriptPair {
  std::string id;
  std::string reference;
  std::string hypothesis;
};

/// Scores reference/hypothesis pairs. Segments whose reference is empty
/// contribute their insertions to total_edits and report cer = 0 if the
/// hypothesis is empty too (and 1 per inserted grapheme otherwise). Throws
/// DataError when there is nothing to score.
EvalReport ScoreTranscripts(std::span<const TranscriptPair> pairs,
                            const Orthography& orth);

/// Greedy-decodes every utterance and scores it.
EvalReport Evaluate(const AcousticModel& model,
                    std::span<const Utterance> utterances,
                    const Orthography& orth);

/// One row of a transcription-speedup comparison. Times in seconds.
struct SpeedupEntry {
  std::string sample_id;
  double length_s = 0.0;
  double time_without_s = 0.0;
  double time_with_s = 0.0;
  double cer_without = 0.0;
  double cer_with = 0.0;

  void Validate() const;
};

/// time_without / time_with, rounded half-up to one decimal and suffixed
/// with "×".
std::string FormatSpeedup(double time_without_s, double time_with_s);

/// "15sec", "3min", "89sec", ... as in the speedup table.
std::string FormatDuration(double seconds);

/// Table with columns Length, Without (time, CER %), With (time, CER %),
/// Speedup. Throws ValidationError for non-positive times or an empty list.
std::string SpeedupReport(std::span<const SpeedupEntry> entries);

std::string SpeedupEntryToJson(const SpeedupEntry& e);
SpeedupEntry SpeedupEntryFromJson(std::string_view line);

}  // namespace fieldasr

#endif  // FIELDASR_EVAL_H_
