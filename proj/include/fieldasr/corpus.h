// fieldasr/corpus.h

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

#ifndef FIELDASR_CORPUS_H_
#define FIELDASR_CORPUS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldasr/audio.h"
#include "fieldasr/orthography.h"

namespace fieldasr {

/// Longest allowed training segment.
inline constexpr double kMaxSegmentSeconds = 15.0;
inline constexpr int64_t kMaxSegmentSamples =
    static_cast<int64_t>(kMaxSegmentSeconds * kCanonicalRate);

enum class Split { kTrain, kTest, kUnassigned };

std::string_view SplitName(Split s);
Split ParseSplit(std::string_view name);

/// A verbatim-labeled slice [start_sample, end_sample) of a 16 kHz source
/// recording.
struct Segment {
  std::string id;
  std::string source_recording;  // path relative to the recordings dir
  int64_t start_sample = 0;
  int64_t end_sample = 0;
  std::string transcript;
  std::string speaker_id;
  std::string dialect;
  Split split = Split::kUnassigned;

  double duration_s() const {
    return static_cast<double>(end_sample - start_sample) / kCanonicalRate;
  }
  bool operator==(const Segment&) const = default;
};

struct Manifest {
  std::string orthography_name;
  std::string created;   // ISO-8601 UTC, second precision
  std::string modified;  // ISO-8601 UTC, second precision
  std::vector<Segment> segments;

  bool operator==(const Manifest&) const = default;

  const Segment* Find(std::string_view id) const;
  std::size_t Count(Split s) const;
};

/// Current UTC time formatted as used in manifests.
std::string UtcTimestamp();

/// A human-supplied cut, in seconds.
struct Cut {
  double start_s = 0.0;
  double end_s = 0.0;
};

/// round-half-up(seconds * 16000).
int64_t SecondsToSamples(double seconds);

struct SegmentOptions {
  std::string source_recording;
  std::string speaker_id;
  std::string dialect;
  Split split = Split::kUnassigned;
  // Segment ids are "<id_prefix>-0001", "<id_prefix>-0002", ...
  std::string id_prefix;
};

/// One Segment per cut. Transcripts are validated and stored normalized.
/// Throws ValidationError for length mismatch, over-length, inverted,
/// overlapping or out-of-range cuts, and for transcripts that do not
/// tokenize.
std::vector<Segment> SegmentRecording(const AudioClip& clip,
                                      std::span<const Cut> cuts,
                                      std::span<const std::string> transcripts,
                                      const Orthography& orth,
                                      const SegmentOptions& options);

/// Samples of `segment` taken from its (already loaded) source clip.
AudioClip SliceSegment(const AudioClip& source, const Segment& segment);

/// Energy-based cut proposal. Frames are 25 ms; a frame is voiced when its
/// level exceeds `silence_db` dBFS. Voiced runs separated by less than
/// 250 ms are merged; runs longer than `max_len_s` are split at the
/// lowest-energy frame in the second half of each admissible window.
std::vector<Cut> SuggestCuts(const AudioClip& clip, double max_len_s,
                             double silence_db);

/// Seeded shuffle; floor(n * train_fraction) segments become train, the
/// rest test.
Manifest SplitManifest(const Manifest& m, double train_fraction,
                       uint64_t seed);

/// Line-delimited serialization: a header object, then one flat JSON object
/// per segment.
std::string ExportManifest(const Manifest& m);

/// Inverse of ExportManifest. Schema violations are reported with the line
/// number; segment invariants are re-checked, including transcript
/// validation when `orth` is given.
Manifest ImportManifest(std::string_view text,
                        const Orthography* orth = nullptr);

/// Checks Segment invariants; throws ValidationError.
void ValidateSegment(const Segment& s, const Orthography* orth);

/// Confirms that every referenced recording exists under `recordings_dir`
/// and that segments lie within the recordings' lengths.
void ValidateRecordings(const Manifest& m, const std::string& recordings_dir);

/// Cuts file: one `start_s<TAB>end_s<TAB>transcript` line per segment.
struct CutsFile {
  std::vector<Cut> cuts;
  std::vector<std::string> transcripts;
};
CutsFile ParseCutsFile(std::string_view text);
std::string FormatCutsFile(const CutsFile& cuts);

}  // namespace fieldasr

#endif  // FIELDASR_CORPUS_H_
