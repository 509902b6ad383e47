// src/project.cc

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

#include "fieldasr/project.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "fieldasr/ctc.h"
#include "fieldasr/errors.h"
#include "fieldasr/features.h"
#include "fieldasr/text.h"

namespace fieldasr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ReadText(const fs::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path.string());
  return std::string(bytes.begin(), bytes.end());
}

void CheckKeys(const json& j, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void Get(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": '" + key + "' has the wrong type");
  }
}

fs::path Resolve(const fs::path& root, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : root / path;
}

AugmentSpec ParseAugment(const json& j) {
  CheckKeys(j, {"speed_factors", "pitch_semitones", "noise_snr_db", "seed"},
            "augment");
  AugmentSpec a = AugmentSpec::None();
  Get(j, "speed_factors", a.speed_factors, "augment");
  Get(j, "pitch_semitones", a.pitch_semitones, "augment");
  Get(j, "noise_snr_db", a.noise_snr_db, "augment");
  Get(j, "seed", a.seed, "augment");
  a.Validate();
  return a;
}

void ParseTrain(const json& j, TrainConfig& t) {
  CheckKeys(j,
            {"learning_rate", "epochs", "batch_size", "seed", "freeze_encoder",
             "freeze_context", "grad_clip_norm", "shape"},
            "train");
  Get(j, "learning_rate", t.learning_rate, "train");
  Get(j, "epochs", t.epochs, "train");
  Get(j, "batch_size", t.batch_size, "train");
  Get(j, "seed", t.seed, "train");
  Get(j, "freeze_encoder", t.freeze_encoder, "train");
  Get(j, "freeze_context", t.freeze_context, "train");
  Get(j, "grad_clip_norm", t.grad_clip_norm, "train");
  if (j.contains("shape")) {
    const json& s = j.at("shape");
    CheckKeys(s,
              {"encoder_width", "context_width", "encoder_channels",
               "context_channels"},
              "train.shape");
    Get(s, "encoder_width", t.shape.encoder_width, "train.shape");
    Get(s, "context_width", t.shape.context_width, "train.shape");
    Get(s, "encoder_channels", t.shape.encoder_channels, "train.shape");
    Get(s, "context_channels", t.shape.context_channels, "train.shape");
  }
}

}  // namespace

ProjectConfig ProjectConfig::Load(const fs::path& path) {
  const std::string text = ReadText(path);
  fs::path root = path.parent_path();
  if (root.empty()) root = ".";
  return Parse(text, fs::absolute(root));
}

ProjectConfig ProjectConfig::Parse(std::string_view json_text,
                                   const fs::path& root) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("project config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("project config: expected an object");
  CheckKeys(j,
            {"recordings_dir", "manifest", "models_dir", "orthography",
             "schemes", "augment", "train", "chunking", "collect"},
            "project config");

  ProjectConfig c;
  c.root = root;
  std::string recordings = "recordings", manifest = "manifest.jsonl",
              models = "models", orthography;
  std::vector<std::string> schemes;
  Get(j, "recordings_dir", recordings, "project config");
  Get(j, "manifest", manifest, "project config");
  Get(j, "models_dir", models, "project config");
  Get(j, "orthography", orthography, "project config");
  Get(j, "schemes", schemes, "project config");
  if (orthography.empty()) {
    throw ValidationError("project config: 'orthography' is required");
  }
  c.recordings_dir = Resolve(root, recordings);
  c.manifest = Resolve(root, manifest);
  c.models_dir = Resolve(root, models);
  c.orthography = Resolve(root, orthography);
  if (!fs::is_regular_file(c.orthography)) {
    throw ValidationError("orthography file '" + c.orthography.string() +
                          "' does not exist");
  }
  for (const std::string& s : schemes) {
    c.schemes.push_back(Resolve(root, s));
    if (!fs::is_regular_file(c.schemes.back())) {
      throw ValidationError("scheme file '" + c.schemes.back().string() +
                            "' does not exist");
    }
  }

  if (j.contains("augment") && !j.at("augment").is_null()) {
    c.augment = ParseAugment(j.at("augment"));
  }
  if (j.contains("train")) ParseTrain(j.at("train"), c.train);
  c.train.augment = c.augment;
  c.train.Validate();

  if (j.contains("chunking")) {
    const json& ch = j.at("chunking");
    CheckKeys(ch, {"window_s", "overlap_s"}, "chunking");
    Get(ch, "window_s", c.chunking.window_s, "chunking");
    Get(ch, "overlap_s", c.chunking.overlap_s, "chunking");
  }
  if (!(c.chunking.window_s > 0.0 &&
        c.chunking.window_s <= kMaxSegmentSeconds)) {
    throw ValidationError("chunking.window_s must be in (0, 15]");
  }
  if (!(c.chunking.overlap_s >= 0.0 &&
        c.chunking.overlap_s < c.chunking.window_s)) {
    throw ValidationError("chunking.overlap_s must be in [0, window_s)");
  }

  c.collect.storage_dir = root / "collect";
  if (j.contains("collect")) {
    const json& co = j.at("collect");
    CheckKeys(co,
              {"storage_dir", "seed_sentences", "token", "reviewer_token",
               "host", "port"},
              "collect");
    std::string storage, seeds;
    Get(co, "storage_dir", storage, "collect");
    Get(co, "seed_sentences", seeds, "collect");
    Get(co, "token", c.collect.token, "collect");
    Get(co, "reviewer_token", c.collect.reviewer_token, "collect");
    Get(co, "host", c.collect.host, "collect");
    Get(co, "port", c.collect.port, "collect");
    if (!storage.empty()) c.collect.storage_dir = Resolve(root, storage);
    if (!seeds.empty()) {
      c.collect.seed_sentences = Resolve(root, seeds);
      if (!fs::is_regular_file(c.collect.seed_sentences)) {
        throw ValidationError("seed sentence file '" +
                              c.collect.seed_sentences.string() +
                              "' does not exist");
      }
    }
    if (c.collect.port < 0 || c.collect.port > 65535) {
      throw ValidationError("collect.port out of range");
    }
  }
  return c;
}

Orthography ProjectConfig::LoadOrthography() const {
  return Orthography::Load(ReadText(orthography));
}

std::vector<TransliterationScheme> ProjectConfig::LoadSchemes(
    const Orthography& orth) const {
  std::vector<TransliterationScheme> out = {
      TransliterationScheme::Identity(orth),
      TransliterationScheme::Simplified(orth)};
  for (const fs::path& p : schemes) {
    out.push_back(TransliterationScheme::Load(ReadText(p), orth));
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      if (out[i].name() == out.back().name()) {
        throw ValidationError("duplicate scheme name '" + out.back().name() +
                              "'");
      }
    }
  }
  return out;
}

ProjectLock::ProjectLock(fs::path path) : path_(std::move(path)) {
  if (!path_.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(path_.parent_path(), ec);
  }
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw IoError("project is locked by another process ('" +
                    path_.string() + "'); remove the file if it is stale");
    }
    throw IoError("cannot create lock '" + path_.string() +
                  "': " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  const ssize_t n = ::write(fd, pid.data(), pid.size());
  (void)n;
  ::close(fd);
}

ProjectLock::~ProjectLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Manifest ReadManifest(const fs::path& path, const Orthography* orth) {
  if (!fs::exists(path)) {
    throw IoError("manifest '" + path.string() + "' does not exist");
  }
  return ImportManifest(ReadText(path), orth);
}

void WriteManifest(const fs::path& path, Manifest m) {
  m.modified = UtcTimestamp();
  if (m.created.empty()) m.created = m.modified;
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  WriteFileAtomic(path.string(), ExportManifest(m));
}

std::vector<Chunk> PlanChunks(double duration_s, const ChunkingParams& params) {
  if (!(duration_s > 0.0)) throw ValidationError("audio is empty");
  if (!(params.window_s > 0.0) || !(params.overlap_s >= 0.0) ||
      params.overlap_s >= params.window_s) {
    throw ValidationError("invalid chunking parameters");
  }
  const double step = params.window_s - params.overlap_s;
  const double half = params.overlap_s / 2.0;
  std::vector<Chunk> out;
  for (int k = 0;; ++k) {
    Chunk c;
    c.start_s = k * step;
    c.end_s = std::min(c.start_s + params.window_s, duration_s);
    c.keep_start_s = k == 0 ? 0.0 : c.start_s + half;
    const bool last = c.end_s >= duration_s;
    c.keep_end_s = last ? duration_s : c.end_s - half;
    out.push_back(c);
    if (last) break;
  }
  return out;
}

std::vector<DraftLine> Transcribe(const AcousticModel& model,
                                  const AudioClip& clip,
                                  const ChunkingParams& params,
                                  int beam_width) {
  if (beam_width < 1) throw ValidationError("beam width must be >= 1");
  const FeatureSpec& spec = model.feature_spec();
  const double rate = clip.sample_rate;
  std::vector<DraftLine> out;
  for (const Chunk& c : PlanChunks(clip.duration_s(), params)) {
    const auto begin = static_cast<std::size_t>(SecondsToSamples(c.start_s));
    const auto end = std::min(clip.samples.size(),
                              static_cast<std::size_t>(SecondsToSamples(c.end_s)));
    DraftLine line{c.keep_start_s, c.keep_end_s, ""};
    if (FeatureFrameCount(end - begin, spec) > 0) {
      AudioClip part{std::vector<float>(clip.samples.begin() + begin,
                                        clip.samples.begin() + end),
                     clip.sample_rate};
      const LogProbMatrix lp = model.Forward(part);
      // A frame belongs to the chunk whose keep span holds its center.
      int first = lp.frames(), last = 0;
      for (int t = 0; t < lp.frames(); ++t) {
        const double center =
            c.start_s + (t * spec.hop_samples() + spec.window_samples() / 2.0) /
                            rate;
        if (center >= c.keep_start_s && center < c.keep_end_s) {
          first = std::min(first, t);
          last = t + 1;
        }
      }
      if (last > first) {
        const LogProbMatrix kept = lp.Rows(first, last);
        const std::string text =
            beam_width == 1 ? GreedyDecode(kept, model.vocab())
                            : BeamDecode(kept, model.vocab(), beam_width);
        line.text = std::string(TrimWhitespace(text));
      }
    }
    out.push_back(std::move(line));
  }
  return out;
}

std::string FormatDraft(std::span<const DraftLine> lines) {
  CutsFile f;
  for (const DraftLine& l : lines) {
    f.cuts.push_back({l.start_s, l.end_s});
    f.transcripts.push_back(l.text);
  }
  return FormatCutsFile(f);
}

}  // namespace fieldasr
