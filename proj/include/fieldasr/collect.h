// fieldasr/collect.h

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

#ifndef FIELDASR_COLLECT_H_
#define FIELDASR_COLLECT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldasr/corpus.h"
#include "fieldasr/errors.h"
#include "fieldasr/orthography.h"

namespace fieldasr {

/// Store-level failure carrying the HTTP status and a stable error code.
class CollectError : public Error {
 public:
  CollectError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  // Character offset of an orthography failure, if any.
  std::optional<std::size_t> position;

 private:
  int status_;
  std::string code_;
};

struct Sentence {
  std::string id;
  std::string text_phonemic;  // normalized
  std::string contributed_by;  // empty for seeded prompts
  bool active = false;
};

struct Contributor {
  std::string id;
  std::string dialect;
  std::string preferred_scheme;
};

struct Submission {
  std::string id;
  std::string sentence_id;
  std::string contributor_id;
  std::string audio;           // normalized clip, relative to the storage dir
  std::string original_audio;  // uploaded bytes, relative to the storage dir
  std::string received_at;
  int64_t samples = 0;  // at 16 kHz
  double duration_s = 0.0;
  std::string idempotency_key;
};

struct SentencePage {
  std::size_t page = 1;
  std::size_t page_size = 20;
  std::size_t total = 0;
  std::vector<Sentence> sentences;
};

struct CollectCounts {
  std::size_t sentences = 0;
  std::size_t active_sentences = 0;
  std::size_t contributors = 0;
  std::size_t submissions = 0;
};

/// Durable state of the collection service: an append-only `log.jsonl`
/// replayed at open, plus audio files under `audio/`. Mutations hold an
/// exclusive lock; reads share one.
class CollectStore {
 public:
  /// Creates the storage directory if needed and replays the log. Prompts in
  /// `seed_sentences` (one per line, '#' comments) are added as active
  /// sentences the first time their text is seen.
  CollectStore(std::filesystem::path storage_dir, Orthography orth,
               std::vector<TransliterationScheme> schemes,
               std::string_view seed_sentences = {});

  const Orthography& orthography() const { return orth_; }
  const std::filesystem::path& storage_dir() const { return dir_; }
  std::vector<std::string> SchemeNames() const;
  const TransliterationScheme& Scheme(std::string_view name) const;

  /// Active sentences ordered by id; page is 1-based. `include_inactive`
  /// lists the review queue as well.
  SentencePage ListSentences(std::size_t page, std::size_t page_size,
                             bool include_inactive = false) const;
  std::optional<Sentence> FindSentence(std::string_view id) const;

  /// New contributor sentences start inactive.
  Sentence AddSentence(std::string_view text, std::string_view contributor_id,
                       bool active = false);
  Sentence ActivateSentence(std::string_view id);

  /// Creates or updates a contributor.
  Contributor PutContributor(const Contributor& c);
  std::optional<Contributor> FindContributor(std::string_view id) const;

  /// Returns the stored submission and whether it was created now. A repeated
  /// idempotency key returns the earlier submission.
  std::pair<Submission, bool> SubmitRecording(std::string_view sentence_id,
                                              std::string_view contributor_id,
                                              std::span<const uint8_t> wav,
                                              std::string_view idempotency_key);
  std::vector<Submission> Submissions() const;

  /// Every submission as one whole-clip segment, split unassigned.
  Manifest ExportCorpus() const;

  CollectCounts Counts() const;
  /// True when a probe file can be created in the storage directory.
  bool Writable() const;

 private:
  void Append(const std::string& line);
  void Replay(std::string_view text);
  std::string NextId(char prefix, std::size_t n) const;
  std::string NormalizeSentence(std::string_view text) const;

  std::filesystem::path dir_;
  Orthography orth_;
  std::vector<TransliterationScheme> schemes_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Sentence, std::less<>> sentences_;
  std::map<std::string, Contributor, std::less<>> contributors_;
  std::vector<Submission> submissions_;
  std::map<std::string, std::size_t, std::less<>> by_key_;
};

struct CollectServerOptions {
  std::string token;           // X-Project-Token; empty disables
  std::string reviewer_token;  // X-Reviewer-Token for activation
  std::size_t max_page_size = 100;
};

/// HTTP+JSON front end over a CollectStore.
///
///   GET  /api/health
///   GET  /api/schemes
///   GET  /api/sentences?scheme=&page=&page_size=&include_inactive=
///   POST /api/sentences                 {"contributor_id", "text_phonemic"}
///   POST /api/sentences/{id}/activate   (reviewer token)
///   POST /api/validate                  {"text"}
///   POST /api/contributors              {"id", "dialect", "preferred_scheme"}
///   GET  /api/contributors/{id}
///   POST /api/recordings                multipart: audio, sentence_id,
///                                       contributor_id, idempotency_key
///   GET  /api/export
///
/// Failures answer {"error": {"code", "message"}}.
class CollectServer {
 public:
  CollectServer(CollectStore& store, CollectServerOptions options);
  ~CollectServer();
  CollectServer(const CollectServer&) = delete;
  CollectServer& operator=(const CollectServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int Bind(const std::string& host, int port);
  /// Serves until Stop(). Call after Bind().
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fieldasr

#endif  // FIELDASR_COLLECT_H_
