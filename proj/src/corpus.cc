// src/corpus.cc

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

#include "fieldasr/corpus.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "fieldasr/errors.h"
#include "fieldasr/text.h"

namespace fieldasr {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFrameSamples = kCanonicalRate / 40;  // 25 ms
constexpr int kMergeGapFrames = 10;                 // 250 ms
constexpr double kTieDb = 0.1;
constexpr const char* kManifestFormat = "fieldasr-manifest";
constexpr int kManifestVersion = 1;

std::string FormatSeconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

double ParseDouble(std::string_view s, std::size_t lineno, const char* what) {
  s = TrimWhitespace(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(lineno, std::string("invalid ") + what + " '" +
                                 std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

const Segment* Manifest::Find(std::string_view id) const {
  for (const Segment& s : segments) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::size_t Manifest::Count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(),
                    [s](const Segment& seg) { return seg.split == s; }));
}

std::string UtcTimestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int64_t SecondsToSamples(double seconds) {
  return static_cast<int64_t>(std::floor(seconds * kCanonicalRate + 0.5));
}

void ValidateSegment(const Segment& s, const Orthography* orth) {
  if (s.id.empty()) throw ValidationError("segment has an empty id");
  if (s.source_recording.empty()) {
    throw ValidationError("segment '" + s.id + "' has no source recording");
  }
  if (s.start_sample < 0 || s.start_sample >= s.end_sample) {
    throw ValidationError("segment '" + s.id + "' has inverted bounds [" +
                          std::to_string(s.start_sample) + ", " +
                          std::to_string(s.end_sample) + ")");
  }
  if (s.end_sample - s.start_sample > kMaxSegmentSamples) {
    throw ValidationError("segment '" + s.id + "' is " +
                          FormatSeconds(s.duration_s()) +
                          " s long; the limit is 15 s");
  }
  if (orth != nullptr) {
    try {
      orth->Tokenize(s.transcript);
    } catch (const UnknownSymbolError& e) {
      throw ValidationError("segment '" + s.id + "' transcript: " + e.what());
    }
  }
}

std::vector<Segment> SegmentRecording(const AudioClip& clip,
                                      std::span<const Cut> cuts,
                                      std::span<const std::string> transcripts,
                                      const Orthography& orth,
                                      const SegmentOptions& options) {
  if (cuts.size() != transcripts.size()) {
    throw ValidationError(std::to_string(cuts.size()) + " cuts but " +
                          std::to_string(transcripts.size()) + " transcripts");
  }
  if (clip.sample_rate != kCanonicalRate) {
    throw ValidationError("segmentation expects 16 kHz audio");
  }
  const auto length = static_cast<int64_t>(clip.samples.size());
  std::vector<Segment> out;
  int64_t previous_end = 0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const Cut& cut = cuts[i];
    const std::string label = "cut " + std::to_string(i + 1) + " (" +
                              FormatSeconds(cut.start_s) + "-" +
                              FormatSeconds(cut.end_s) + " s)";
    if (!(cut.start_s >= 0.0) || !(cut.end_s > cut.start_s)) {
      throw ValidationError(label + " is inverted or empty");
    }
    Segment seg;
    seg.start_sample = SecondsToSamples(cut.start_s);
    seg.end_sample = SecondsToSamples(cut.end_s);
    if (seg.end_sample - seg.start_sample > kMaxSegmentSamples) {
      throw ValidationError(label + " is longer than 15 s");
    }
    if (seg.start_sample >= seg.end_sample) {
      throw ValidationError(label + " is shorter than one sample");
    }
    if (i > 0 && seg.start_sample < previous_end) {
      throw ValidationError(label + " overlaps the previous cut");
    }
    if (seg.end_sample > length) {
      throw ValidationError(label + " extends past the end of the recording (" +
                            FormatSeconds(clip.duration_s()) + " s)");
    }
    previous_end = seg.end_sample;
    try {
      seg.transcript = orth.Normalize(transcripts[i]);
    } catch (const UnknownSymbolError& e) {
      throw ValidationError(label + " transcript: " + e.what());
    }
    char id[24];
    std::snprintf(id, sizeof(id), "%04zu", i + 1);
    seg.id = options.id_prefix + "-" + id;
    seg.source_recording = options.source_recording;
    seg.speaker_id = options.speaker_id;
    seg.dialect = options.dialect;
    seg.split = options.split;
    ValidateSegment(seg, &orth);
    out.push_back(std::move(seg));
  }
  return out;
}

AudioClip SliceSegment(const AudioClip& source, const Segment& segment) {
  if (segment.start_sample < 0 || segment.end_sample < segment.start_sample ||
      segment.end_sample > static_cast<int64_t>(source.samples.size())) {
    throw ValidationError("segment '" + segment.id +
                          "' lies outside its source recording");
  }
  AudioClip out;
  out.sample_rate = source.sample_rate;
  out.samples.assign(source.samples.begin() + segment.start_sample,
                     source.samples.begin() + segment.end_sample);
  return out;
}

std::vector<Cut> SuggestCuts(const AudioClip& clip, double max_len_s,
                             double silence_db) {
  if (!(max_len_s > 0.0) || max_len_s > kMaxSegmentSeconds) {
    throw ValidationError("max segment length must be in (0, 15] s");
  }
  const auto n = static_cast<int64_t>(clip.samples.size());
  if (n < kFrameSamples) {
    throw ValidationError("clip is shorter than one 25 ms frame");
  }
  const int64_t max_samples = SecondsToSamples(max_len_s);
  if (max_samples < 2 * kFrameSamples) {
    throw ValidationError("max segment length must cover at least two frames");
  }

  const int64_t frames = (n + kFrameSamples - 1) / kFrameSamples;
  std::vector<double> level(static_cast<std::size_t>(frames));
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t a = f * kFrameSamples;
    const int64_t b = std::min(n, a + kFrameSamples);
    double energy = 0.0;
    for (int64_t i = a; i < b; ++i) {
      const double x = clip.samples[static_cast<std::size_t>(i)];
      energy += x * x;
    }
    level[static_cast<std::size_t>(f)] =
        10.0 * std::log10(energy / static_cast<double>(b - a) + 1e-20);
  }

  // Voiced runs as [first, last) frame ranges, merging short gaps.
  std::vector<std::pair<int64_t, int64_t>> runs;
  for (int64_t f = 0; f < frames; ++f) {
    if (level[static_cast<std::size_t>(f)] <= silence_db) continue;
    if (!runs.empty() && f - runs.back().second < kMergeGapFrames) {
      runs.back().second = f + 1;
    } else {
      runs.emplace_back(f, f + 1);
    }
  }

  std::vector<Cut> cuts;
  auto emit = [&](int64_t a, int64_t b) {
    cuts.push_back({static_cast<double>(a) / kCanonicalRate,
                    static_cast<double>(b) / kCanonicalRate});
  };
  for (const auto& [first, last] : runs) {
    int64_t start = first * kFrameSamples;
    const int64_t end = std::min(n, last * kFrameSamples);
    while (end - start > max_samples) {
      // Boundaries at frame starts within [start + max/2, start + max].
      const int64_t lo = (start + max_samples / 2 + kFrameSamples - 1) /
                         kFrameSamples;
      const int64_t hi = (start + max_samples) / kFrameSamples;
      double best = std::numeric_limits<double>::infinity();
      for (int64_t f = lo; f <= hi; ++f) {
        best = std::min(best, level[static_cast<std::size_t>(f)]);
      }
      int64_t boundary = lo;
      for (int64_t f = hi; f >= lo; --f) {
        if (level[static_cast<std::size_t>(f)] <= best + kTieDb) {
          boundary = f;
          break;
        }
      }
      emit(start, boundary * kFrameSamples);
      start = boundary * kFrameSamples;
    }
    emit(start, end);
  }
  return cuts;
}

Manifest SplitManifest(const Manifest& m, double train_fraction,
                       uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  if (m.segments.empty()) throw DataError("cannot split an empty manifest");
  std::vector<std::size_t> order(m.segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(m.segments.size()) * train_fraction));
  Manifest out = m;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.segments[order[i]].split = i < n_train ? Split::kTrain : Split::kTest;
  }
  return out;
}

std::string ExportManifest(const Manifest& m) {
  std::string out;
  ordered_json header;
  header["format"] = kManifestFormat;
  header["version"] = kManifestVersion;
  header["orthography"] = m.orthography_name;
  header["created"] = m.created;
  header["modified"] = m.modified;
  out += header.dump() + "\n";
  for (const Segment& s : m.segments) {
    ordered_json j;
    j["id"] = s.id;
    j["source_recording"] = s.source_recording;
    j["start_sample"] = s.start_sample;
    j["end_sample"] = s.end_sample;
    j["transcript"] = s.transcript;
    j["speaker_id"] = s.speaker_id;
    j["dialect"] = s.dialect;
    j["split"] = SplitName(s.split);
    out += j.dump() + "\n";
  }
  return out;
}

Manifest ImportManifest(std::string_view text, const Orthography* orth) {
  Manifest m;
  const std::vector<std::string> lines = SplitString(text, '\n');
  bool have_header = false;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = TrimWhitespace(lines[i]);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "record is not an object");

    auto get_string = [&](const char* key) -> std::string {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) {
        throw ParseError(lineno, std::string("missing string field '") + key +
                                     "'");
      }
      return it->get<std::string>();
    };
    auto get_int = [&](const char* key) -> int64_t {
      auto it = j.find(key);
      if (it == j.end() || !it->is_number_integer()) {
        throw ParseError(lineno, std::string("missing integer field '") +
                                     key + "'");
      }
      return it->get<int64_t>();
    };

    if (!have_header) {
      if (get_string("format") != kManifestFormat) {
        throw ParseError(lineno, "not a manifest header");
      }
      if (get_int("version") != kManifestVersion) {
        throw ParseError(lineno, "unsupported manifest version");
      }
      m.orthography_name = get_string("orthography");
      m.created = get_string("created");
      m.modified = get_string("modified");
      if (j.size() != 5) throw ParseError(lineno, "unexpected header field");
      have_header = true;
      continue;
    }

    Segment s;
    s.id = get_string("id");
    s.source_recording = get_string("source_recording");
    s.start_sample = get_int("start_sample");
    s.end_sample = get_int("end_sample");
    s.transcript = get_string("transcript");
    s.speaker_id = get_string("speaker_id");
    s.dialect = get_string("dialect");
    try {
      s.split = ParseSplit(get_string("split"));
      if (j.size() != 8) throw ValidationError("unexpected segment field");
      ValidateSegment(s, orth);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
    if (!ids.insert(s.id).second) {
      throw ParseError(lineno, "duplicate segment id '" + s.id + "'");
    }
    m.segments.push_back(std::move(s));
  }
  if (!have_header) throw ParseError(1, "missing manifest header");
  return m;
}

void ValidateRecordings(const Manifest& m, const std::string& recordings_dir) {
  std::map<std::string, std::size_t> lengths;
  for (const Segment& s : m.segments) {
    auto it = lengths.find(s.source_recording);
    if (it == lengths.end()) {
      const std::string path =
          (std::filesystem::path(recordings_dir) / s.source_recording)
              .string();
      if (!std::filesystem::exists(path)) {
        throw ValidationError("segment '" + s.id + "' references missing "
                              "recording '" + s.source_recording + "'");
      }
      WavData wav = DecodeWav(ReadFileBytes(path));
      if (wav.sample_rate != kCanonicalRate || wav.channels != 1) {
        throw ValidationError("recording '" + s.source_recording +
                              "' is not canonical 16 kHz mono");
      }
      it = lengths.emplace(s.source_recording, wav.frames()).first;
    }
    if (s.end_sample > static_cast<int64_t>(it->second)) {
      throw ValidationError("segment '" + s.id +
                            "' extends past the end of its recording");
    }
  }
}

CutsFile ParseCutsFile(std::string_view text) {
  CutsFile out;
  const std::vector<std::string> lines = SplitString(text, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (TrimWhitespace(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields = SplitString(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(lineno, "expected start_s<TAB>end_s<TAB>transcript");
    }
    Cut cut;
    cut.start_s = ParseDouble(fields[0], lineno, "start time");
    cut.end_s = ParseDouble(fields[1], lineno, "end time");
    out.cuts.push_back(cut);
    out.transcripts.push_back(fields[2]);
  }
  return out;
}

std::string FormatCutsFile(const CutsFile& cuts) {
  std::string out;
  for (std::size_t i = 0; i < cuts.cuts.size(); ++i) {
    out += FormatSeconds(cuts.cuts[i].start_s) + "\t" +
           FormatSeconds(cuts.cuts[i].end_s) + "\t" + cuts.transcripts[i] +
           "\n";
  }
  return out;
}

}  // namespace fieldasr
