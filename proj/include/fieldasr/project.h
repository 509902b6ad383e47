// fieldasr/project.h

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

#ifndef FIELDASR_PROJECT_H_
#define FIELDASR_PROJECT_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldasr/acoustic.h"
#include "fieldasr/corpus.h"
#include "fieldasr/eval.h"
#include "fieldasr/orthography.h"
#include "fieldasr/train.h"

namespace fieldasr {

struct ChunkingParams {
  double window_s = 15.0;
  double overlap_s = 2.0;
};

struct CollectParams {
  std::filesystem::path storage_dir;
  std::filesystem::path seed_sentences;  // optional, one sentence per line
  std::string token;                     // empty disables the token check
  std::string reviewer_token;            // empty disables activation
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Project layout and defaults, read from a JSON file. Relative paths are
/// resolved against the directory holding the file.
///
///   {
///     "recordings_dir": "recordings",
///     "manifest": "manifest.jsonl",
///     "models_dir": "models",
///     "orthography": "orthography.txt",
///     "schemes": ["schemes/latin.txt"],
///     "augment": {"speed_factors": [0.9, 1.1], ...} | null,
///     "train": {"learning_rate": 1e-3, "epochs": 30, ...},
///     "chunking": {"window_s": 15, "overlap_s": 2},
///     "collect": {"storage_dir": "collect", "token": "...", ...}
///   }
struct ProjectConfig {
  std::filesystem::path root;
  std::filesystem::path recordings_dir;
  std::filesystem::path manifest;
  std::filesystem::path models_dir;
  std::filesystem::path orthography;
  std::vector<std::filesystem::path> schemes;
  std::optional<AugmentSpec> augment;
  TrainConfig train;
  ChunkingParams chunking;
  CollectParams collect;

  /// Throws IoError if the file cannot be read and ValidationError for
  /// schema errors, a window over 15 s, an overlap outside [0, window) or a
  /// referenced orthography or scheme file that does not exist.
  static ProjectConfig Load(const std::filesystem::path& path);
  static ProjectConfig Parse(std::string_view json_text,
                             const std::filesystem::path& root);

  std::filesystem::path DefaultModelPath() const {
    return models_dir / "model.nlr";
  }
  std::filesystem::path EvalReportPath() const {
    return models_dir / "model.eval.jsonl";
  }
  std::filesystem::path TimingsPath() const { return root / "timings.jsonl"; }
  std::filesystem::path AcceptLogPath() const { return root / "accepted.jsonl"; }
  std::filesystem::path LockPath() const {
    return std::filesystem::path(manifest.string() + ".lock");
  }

  Orthography LoadOrthography() const;
  /// "phonemic", "simplified", then every configured scheme file.
  std::vector<TransliterationScheme> LoadSchemes(const Orthography& orth) const;
};

/// Exclusive per-project lock: a file created with O_EXCL that holds the
/// owner's pid. Throws IoError if the lock is held.
class ProjectLock {
 public:
  explicit ProjectLock(std::filesystem::path path);
  ~ProjectLock();
  ProjectLock(const ProjectLock&) = delete;
  ProjectLock& operator=(const ProjectLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Reads the manifest; IoError if it is missing.
Manifest ReadManifest(const std::filesystem::path& path,
                      const Orthography* orth);
/// Atomic replace, stamping `modified`.
void WriteManifest(const std::filesystem::path& path, Manifest m);

/// One window of a long recording. [start_s, end_s) is decoded;
/// [keep_start_s, keep_end_s) is the part whose text is kept. Kept spans
/// tile the recording without gaps or overlap.
struct Chunk {
  double start_s = 0.0;
  double end_s = 0.0;
  double keep_start_s = 0.0;
  double keep_end_s = 0.0;
};

/// Windows start every (window - overlap) seconds; the last one ends at the
/// recording end. Half of each overlap is trimmed from either neighbour.
std::vector<Chunk> PlanChunks(double duration_s, const ChunkingParams& params);

struct DraftLine {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
};

/// Decodes every chunk and keeps the frames whose start lies in the chunk's
/// keep span. `beam_width` 1 is greedy decoding.
std::vector<DraftLine> Transcribe(const AcousticModel& model,
                                  const AudioClip& clip,
                                  const ChunkingParams& params,
                                  int beam_width = 1);

/// Draft lines in cuts-file form: `start<TAB>end<TAB>text`.
std::string FormatDraft(std::span<const DraftLine> lines);

}  // namespace fieldasr

#endif  // FIELDASR_PROJECT_H_
