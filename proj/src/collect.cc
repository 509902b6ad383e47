// src/collect.cc

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

#include "fieldasr/collect.h"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fieldasr/audio.h"
#include "fieldasr/text.h"

namespace fieldasr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

bool ValidId(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return id != "." && id != "..";
}

ordered_json SubmissionJson(const Submission& s) {
  ordered_json j;
  j["type"] = "submission";
  j["id"] = s.id;
  j["sentence_id"] = s.sentence_id;
  j["contributor_id"] = s.contributor_id;
  j["audio"] = s.audio;
  j["original_audio"] = s.original_audio;
  j["received_at"] = s.received_at;
  j["samples"] = s.samples;
  j["duration_s"] = s.duration_s;
  j["idempotency_key"] = s.idempotency_key;
  return j;
}

}  // namespace

CollectStore::CollectStore(fs::path storage_dir, Orthography orth,
                           std::vector<TransliterationScheme> schemes,
                           std::string_view seed_sentences)
    : dir_(std::move(storage_dir)),
      orth_(std::move(orth)),
      schemes_(std::move(schemes)) {
  std::error_code ec;
  fs::create_directories(dir_ / "audio", ec);
  if (ec) {
    throw IoError("cannot create storage '" + dir_.string() +
                  "': " + ec.message());
  }
  if (schemes_.empty()) {
    schemes_.push_back(TransliterationScheme::Identity(orth_));
  }
  const fs::path log = dir_ / "log.jsonl";
  if (fs::exists(log)) {
    const std::vector<uint8_t> bytes = ReadFileBytes(log.string());
    Replay(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                            bytes.size()));
  }
  for (const std::string& raw : SplitString(seed_sentences, '\n')) {
    std::string_view line = TrimWhitespace(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string text = NormalizeSentence(line);
    bool seen = false;
    for (const auto& [id, s] : sentences_) seen = seen || s.text_phonemic == text;
    if (!seen) AddSentence(text, "", true);
  }
}

void CollectStore::Replay(std::string_view text) {
  const std::vector<std::string> lines = SplitString(text, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (TrimWhitespace(lines[i]).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
      const std::string type = j.at("type").get<std::string>();
      if (type == "sentence") {
        Sentence s{j.at("id"), j.at("text"), j.at("contributed_by"),
                   j.at("active")};
        sentences_[s.id] = s;
      } else if (type == "activate") {
        sentences_.at(j.at("id").get<std::string>()).active = true;
      } else if (type == "contributor") {
        Contributor c{j.at("id"), j.at("dialect"), j.at("preferred_scheme")};
        contributors_[c.id] = c;
      } else if (type == "submission") {
        Submission s{j.at("id"),          j.at("sentence_id"),
                     j.at("contributor_id"), j.at("audio"),
                     j.at("original_audio"), j.at("received_at"),
                     j.at("samples"),     j.at("duration_s"),
                     j.at("idempotency_key")};
        if (!s.idempotency_key.empty()) {
          by_key_[s.idempotency_key] = submissions_.size();
        }
        submissions_.push_back(std::move(s));
      } else {
        throw ParseError(i + 1, "unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      // A torn final line is what an interrupted append leaves behind.
      if (i + 1 == lines.size()) break;
      throw ParseError(i + 1, std::string("corrupt log record: ") + e.what());
    } catch (const std::out_of_range&) {
      throw ParseError(i + 1, "log record references an unknown id");
    }
  }
}

void CollectStore::Append(const std::string& line) {
  const fs::path log = dir_ / "log.jsonl";
  std::ofstream out(log, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to '" + log.string() + "'");
  out << line << '\n';
  out.flush();
  if (!out) throw IoError("error appending to '" + log.string() + "'");
}

std::string CollectStore::NextId(char prefix, std::size_t n) const {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%c%06zu", prefix, n + 1);
  return buf;
}

std::string CollectStore::NormalizeSentence(std::string_view text) const {
  if (TrimWhitespace(text).empty()) {
    throw CollectError(422, "empty_text", "sentence text is empty");
  }
  std::string out;
  try {
    out = orth_.Normalize(text);
  } catch (const UnknownSymbolError& e) {
    CollectError err(422, "orthography", e.what());
    err.position = e.char_offset();
    throw err;
  }
  if (TrimWhitespace(out).empty()) {
    throw CollectError(422, "empty_text", "sentence has no graphemes");
  }
  return out;
}

std::vector<std::string> CollectStore::SchemeNames() const {
  std::vector<std::string> out;
  for (const auto& s : schemes_) out.push_back(s.name());
  return out;
}

const TransliterationScheme& CollectStore::Scheme(std::string_view name) const {
  for (const auto& s : schemes_) {
    if (s.name() == name) return s;
  }
  throw CollectError(400, "unknown_scheme",
                     "unknown scheme '" + std::string(name) + "'");
}

SentencePage CollectStore::ListSentences(std::size_t page,
                                         std::size_t page_size,
                                         bool include_inactive) const {
  if (page < 1 || page_size < 1) {
    throw CollectError(400, "bad_request", "page and page_size must be >= 1");
  }
  std::shared_lock lock(mu_);
  SentencePage out;
  out.page = page;
  out.page_size = page_size;
  const std::size_t first = (page - 1) * page_size;
  for (const auto& [id, s] : sentences_) {
    if (!s.active && !include_inactive) continue;
    if (out.total >= first && out.sentences.size() < page_size) {
      out.sentences.push_back(s);
    }
    ++out.total;
  }
  return out;
}

std::optional<Sentence> CollectStore::FindSentence(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = sentences_.find(id);
  if (it == sentences_.end()) return std::nullopt;
  return it->second;
}

Sentence CollectStore::AddSentence(std::string_view text,
                                   std::string_view contributor_id,
                                   bool active) {
  const std::string normalized = NormalizeSentence(text);
  std::unique_lock lock(mu_);
  if (!contributor_id.empty() && !contributors_.contains(contributor_id)) {
    throw CollectError(404, "unknown_contributor",
                       "unknown contributor '" + std::string(contributor_id) +
                           "'");
  }
  Sentence s{NextId('s', sentences_.size()), normalized,
             std::string(contributor_id), active};
  ordered_json j;
  j["type"] = "sentence";
  j["id"] = s.id;
  j["text"] = s.text_phonemic;
  j["contributed_by"] = s.contributed_by;
  j["active"] = s.active;
  Append(j.dump());
  sentences_[s.id] = s;
  return s;
}

Sentence CollectStore::ActivateSentence(std::string_view id) {
  std::unique_lock lock(mu_);
  auto it = sentences_.find(id);
  if (it == sentences_.end()) {
    throw CollectError(404, "unknown_sentence",
                       "unknown sentence '" + std::string(id) + "'");
  }
  if (!it->second.active) {
    ordered_json j;
    j["type"] = "activate";
    j["id"] = it->first;
    Append(j.dump());
    it->second.active = true;
  }
  return it->second;
}

Contributor CollectStore::PutContributor(const Contributor& c) {
  if (!ValidId(c.id)) {
    throw CollectError(422, "invalid_id",
                       "contributor id must be 1-64 characters of "
                       "[A-Za-z0-9._-]");
  }
  Scheme(c.preferred_scheme);
  std::unique_lock lock(mu_);
  ordered_json j;
  j["type"] = "contributor";
  j["id"] = c.id;
  j["dialect"] = c.dialect;
  j["preferred_scheme"] = c.preferred_scheme;
  Append(j.dump());
  contributors_[c.id] = c;
  return c;
}

std::optional<Contributor> CollectStore::FindContributor(
    std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = contributors_.find(id);
  if (it == contributors_.end()) return std::nullopt;
  return it->second;
}

std::pair<Submission, bool> CollectStore::SubmitRecording(
    std::string_view sentence_id, std::string_view contributor_id,
    std::span<const uint8_t> wav, std::string_view idempotency_key) {
  std::unique_lock lock(mu_);
  if (!idempotency_key.empty()) {
    auto it = by_key_.find(idempotency_key);
    if (it != by_key_.end()) return {submissions_[it->second], false};
  }
  auto sentence = sentences_.find(sentence_id);
  if (sentence == sentences_.end()) {
    throw CollectError(404, "unknown_sentence",
                       "unknown sentence '" + std::string(sentence_id) + "'");
  }
  if (!sentence->second.active) {
    throw CollectError(409, "inactive_sentence",
                       "sentence '" + std::string(sentence_id) +
                           "' is awaiting review");
  }
  if (!contributors_.contains(contributor_id)) {
    throw CollectError(404, "unknown_contributor",
                       "unknown contributor '" + std::string(contributor_id) +
                           "'");
  }
  AudioClip clip;
  try {
    clip = IngestWav(wav);
  } catch (const ValidationError& e) {
    throw CollectError(422, "undecodable_audio", e.what());
  }
  if (static_cast<int64_t>(clip.samples.size()) > kMaxSegmentSamples) {
    char msg[96];
    std::snprintf(msg, sizeof(msg),
                  "recording is %.2f s long; the limit is 15 s",
                  clip.duration_s());
    throw CollectError(413, "too_long", msg);
  }
  if (clip.samples.empty()) {
    throw CollectError(422, "undecodable_audio", "recording has no samples");
  }

  Submission s;
  s.id = NextId('r', submissions_.size());
  s.sentence_id = std::string(sentence_id);
  s.contributor_id = std::string(contributor_id);
  s.audio = "audio/" + s.id + ".wav";
  s.original_audio = "audio/" + s.id + ".orig.wav";
  s.received_at = UtcTimestamp();
  s.samples = static_cast<int64_t>(clip.samples.size());
  s.duration_s = clip.duration_s();
  s.idempotency_key = std::string(idempotency_key);
  WriteFileAtomic((dir_ / s.original_audio).string(), wav);
  WriteFileAtomic((dir_ / s.audio).string(), EncodeWav(clip));
  Append(SubmissionJson(s).dump());
  if (!s.idempotency_key.empty()) by_key_[s.idempotency_key] = submissions_.size();
  submissions_.push_back(s);
  return {s, true};
}

std::vector<Submission> CollectStore::Submissions() const {
  std::shared_lock lock(mu_);
  return submissions_;
}

Manifest CollectStore::ExportCorpus() const {
  std::shared_lock lock(mu_);
  Manifest m;
  m.orthography_name = orth_.name();
  m.created = m.modified = UtcTimestamp();
  for (const Submission& s : submissions_) {
    Segment seg;
    seg.id = s.id;
    seg.source_recording = s.audio;
    seg.start_sample = 0;
    seg.end_sample = s.samples;
    seg.transcript = sentences_.at(s.sentence_id).text_phonemic;
    seg.speaker_id = s.contributor_id;
    auto c = contributors_.find(s.contributor_id);
    if (c != contributors_.end()) seg.dialect = c->second.dialect;
    seg.split = Split::kUnassigned;
    m.segments.push_back(std::move(seg));
  }
  return m;
}

CollectCounts CollectStore::Counts() const {
  std::shared_lock lock(mu_);
  CollectCounts c;
  c.sentences = sentences_.size();
  for (const auto& [id, s] : sentences_) c.active_sentences += s.active;
  c.contributors = contributors_.size();
  c.submissions = submissions_.size();
  return c;
}

bool CollectStore::Writable() const {
  const fs::path probe = dir_ / ".probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    if (!out) return false;
    out << "ok";
    if (!out.flush()) return false;
  }
  std::error_code ec;
  fs::remove(probe, ec);
  return !ec;
}

}  // namespace fieldasr
