// src/cli.cc

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

#include "fieldasr/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "fieldasr/acoustic.h"
#include "fieldasr/augment.h"
#include "fieldasr/collect.h"
#include "fieldasr/corpus.h"
#include "fieldasr/ctc.h"
#include "fieldasr/errors.h"
#include "fieldasr/eval.h"
#include "fieldasr/project.h"
#include "fieldasr/text.h"
#include "fieldasr/train.h"
#include "fieldasr/version.h"

namespace fieldasr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
  if (dynamic_cast<const DataError*>(&e) != nullptr) return kExitData;
  return kExitValidation;
}

namespace {

std::string ReadText(const fs::path& p) {
  const std::vector<uint8_t> bytes = ReadFileBytes(p.string());
  return std::string(bytes.begin(), bytes.end());
}

std::string Percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
  return buf;
}

void AppendLine(const fs::path& path, const std::string& line) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to '" + path.string() + "'");
  out << line << '\n';
  if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

ordered_json ReportJson(const EvalReport& r) {
  return ordered_json{{"aggregate_cer", r.aggregate_cer},
                      {"total_edits", r.total_edits},
                      {"total_reference", r.total_reference},
                      {"segments", r.segments.size()}};
}

struct Globals {
  std::string config = "fieldasr.json";
  std::optional<uint64_t> seed;
  bool json = false;
};

// Shared state of one invocation.
class Session {
 public:
  Session(const Globals& g, std::ostream& out, std::ostream& err)
      : globals_(g), out_(out), err_(err) {}

  const ProjectConfig& config() {
    if (!config_) {
      config_ = ProjectConfig::Load(globals_.config);
      if (globals_.seed) {
        config_->train.seed = *globals_.seed;
        if (config_->train.augment) config_->train.augment->seed = *globals_.seed;
        if (config_->augment) config_->augment->seed = *globals_.seed;
      }
    }
    return *config_;
  }
  const Orthography& orth() {
    if (!orth_) orth_ = config().LoadOrthography();
    return *orth_;
  }
  bool json() const { return globals_.json; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  void Emit(const ordered_json& j) { out_ << j.dump(2) << "\n"; }

  Manifest LoadOrCreateManifest() {
    if (fs::exists(config().manifest)) {
      return ReadManifest(config().manifest, &orth());
    }
    Manifest m;
    m.orthography_name = orth().name();
    m.created = m.modified = UtcTimestamp();
    return m;
  }

  AcousticModel LoadModelFile(const std::string& path) {
    const fs::path p = path.empty() ? config().DefaultModelPath() : fs::path(path);
    if (!fs::exists(p)) throw IoError("model '" + p.string() + "' does not exist");
    const Vocab vocab = BuildVocab(orth());
    return LoadModel(ReadFileBytes(p.string()), &vocab);
  }

 private:
  Globals globals_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<ProjectConfig> config_;
  std::optional<Orthography> orth_;
};

// Assigns splits before training: an all-unassigned manifest is split
// 80/20; otherwise unassigned segments join the training split.
bool AssignSplits(Manifest& m, uint64_t seed) {
  const std::size_t unassigned = m.Count(Split::kUnassigned);
  if (unassigned == 0) return false;
  if (unassigned == m.segments.size()) {
    if (m.segments.size() < 2) {
      for (Segment& s : m.segments) s.split = Split::kTrain;
    } else {
      m = SplitManifest(m, 0.8, seed);
    }
    return true;
  }
  for (Segment& s : m.segments) {
    if (s.split == Split::kUnassigned) s.split = Split::kTrain;
  }
  return true;
}

// Stores a normalized 16 kHz copy of the recording under the recordings
// directory and returns the clip exactly as it will be read back.
struct StagedRecording {
  std::string name;
  std::vector<uint8_t> bytes;
  AudioClip clip;
  bool exists = false;
};

StagedRecording StageRecording(const ProjectConfig& config,
                               const fs::path& wav_path,
                               const std::string& prefix) {
  StagedRecording r;
  r.name = prefix + ".wav";
  r.bytes = EncodeWav(IngestWav(ReadFileBytes(wav_path.string())));
  r.clip = IngestWav(r.bytes);
  const fs::path dest = config.recordings_dir / r.name;
  if (fs::exists(dest)) {
    if (ReadFileBytes(dest.string()) != r.bytes) {
      throw ValidationError("a different recording named '" + r.name +
                            "' already exists; choose another --id-prefix");
    }
    r.exists = true;
  }
  return r;
}

void CommitRecording(const ProjectConfig& config, const StagedRecording& r) {
  if (r.exists) return;
  fs::create_directories(config.recordings_dir);
  WriteFileAtomic((config.recordings_dir / r.name).string(), r.bytes);
}

struct SegmentFlags {
  std::string speaker;
  std::string dialect;
  std::string id_prefix;
  std::string split = "unassigned";
};

void AddSegmentFlags(CLI::App* cmd, SegmentFlags& f) {
  cmd->add_option("--speaker", f.speaker, "Speaker id");
  cmd->add_option("--dialect", f.dialect, "Dialect label");
  cmd->add_option("--id-prefix", f.id_prefix,
                  "Segment id prefix (default: the WAV file stem)");
}

std::vector<Segment> AppendSegments(Session& s, Manifest& m,
                                    const StagedRecording& rec,
                                    const CutsFile& cuts,
                                    const SegmentFlags& f, Split split,
                                    const std::string& prefix) {
  SegmentOptions opts;
  opts.source_recording = rec.name;
  opts.speaker_id = f.speaker;
  opts.dialect = f.dialect;
  opts.split = split;
  opts.id_prefix = prefix;
  std::vector<Segment> segs =
      SegmentRecording(rec.clip, cuts.cuts, cuts.transcripts, s.orth(), opts);
  std::set<std::string> ids;
  for (const Segment& seg : m.segments) ids.insert(seg.id);
  for (const Segment& seg : segs) {
    if (!ids.insert(seg.id).second) {
      throw ValidationError("segment id '" + seg.id +
                            "' is already in the manifest");
    }
  }
  m.segments.insert(m.segments.end(), segs.begin(), segs.end());
  return segs;
}

std::string PrefixFor(const SegmentFlags& f, const fs::path& wav) {
  std::string prefix = f.id_prefix.empty() ? wav.stem().string() : f.id_prefix;
  if (prefix.empty() || prefix.find('/') != std::string::npos) {
    throw ValidationError("invalid id prefix '" + prefix + "'");
  }
  return prefix;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string wav;
  std::string cuts;
  SegmentFlags seg;
};

int CmdIngest(Session& s, const IngestArgs& a) {
  const ProjectConfig& c = s.config();
  ProjectLock lock(c.LockPath());
  Manifest m = s.LoadOrCreateManifest();
  const CutsFile cuts = ParseCutsFile(ReadText(a.cuts));
  const std::string prefix = PrefixFor(a.seg, a.wav);
  const StagedRecording rec = StageRecording(c, a.wav, prefix);
  const std::vector<Segment> added =
      AppendSegments(s, m, rec, cuts, a.seg, ParseSplit(a.seg.split), prefix);
  CommitRecording(c, rec);
  WriteManifest(c.manifest, m);
  if (s.json()) {
    ordered_json ids = ordered_json::array();
    for (const Segment& seg : added) ids.push_back(seg.id);
    s.Emit({{"segments_added", added.size()},
            {"ids", ids},
            {"manifest_segments", m.segments.size()}});
  } else {
    s.out() << "ingested " << added.size() << " segments from " << a.wav
            << "; manifest has " << m.segments.size() << " segments\n";
  }
  return kExitOk;
}

// ---- train / sweep ----------------------------------------------------------

struct TrainArgs {
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch_size;
  bool freeze_encoder = false;
  bool freeze_context = false;
  bool no_augment = false;
  std::string init;
  std::string out;
};

TrainConfig ApplyOverrides(TrainConfig t, const TrainArgs& a) {
  if (a.epochs) t.epochs = *a.epochs;
  if (a.lr) t.learning_rate = *a.lr;
  if (a.batch_size) t.batch_size = *a.batch_size;
  t.freeze_encoder = t.freeze_encoder || a.freeze_encoder;
  t.freeze_context = t.freeze_context || a.freeze_context;
  if (a.no_augment) t.augment.reset();
  t.Validate();
  return t;
}

int CmdTrain(Session& s, const TrainArgs& a) {
  const ProjectConfig& c = s.config();
  ProjectLock lock(c.LockPath());
  Manifest m = ReadManifest(c.manifest, &s.orth());
  const TrainConfig config = ApplyOverrides(c.train, a);
  if (AssignSplits(m, config.seed)) WriteManifest(c.manifest, m);
  const std::string dir = c.recordings_dir.string();
  const std::vector<Utterance> train = LoadUtterances(m, Split::kTrain, dir);
  const std::vector<Utterance> test = LoadUtterances(m, Split::kTest, dir);
  if (train.empty()) throw DataError("the training split is empty");

  const Vocab vocab = BuildVocab(s.orth());
  EpochCallback progress;
  if (!s.json()) {
    progress = [&](const EpochStats& e) {
      char line[128];
      std::snprintf(line, sizeof(line), "epoch %d/%d  loss %.4f  train CER %s\n",
                    e.epoch, config.epochs, e.mean_loss,
                    Percent(e.train_cer).c_str());
      s.out() << line << std::flush;
    };
  }
  TrainResult r = a.init.empty()
                      ? Train(train, s.orth(), vocab, config, progress)
                      : TrainFrom(s.LoadModelFile(a.init), train, s.orth(),
                                  config, progress);
  const fs::path out = a.out.empty() ? c.DefaultModelPath() : fs::path(a.out);
  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  WriteFileAtomic(out.string(), SaveModel(r.model));

  std::optional<EvalReport> report;
  if (!test.empty()) {
    report = Evaluate(r.model, test, s.orth());
    fs::path report_path = out;
    report_path.replace_extension(".eval.jsonl");
    WriteFileAtomic(report_path.string(), report->ToJsonl());
  }
  const EpochStats& best = r.history[static_cast<std::size_t>(r.best_epoch - 1)];
  if (s.json()) {
    s.Emit({{"model", out.string()},
            {"train_segments", train.size()},
            {"test_segments", test.size()},
            {"best_epoch", r.best_epoch},
            {"train_loss", best.mean_loss},
            {"train_cer", best.train_cer},
            {"test_cer", report ? ordered_json(report->aggregate_cer)
                                : ordered_json(nullptr)}});
  } else {
    s.out() << "model written to " << out.string() << " (best epoch "
            << r.best_epoch << ", " << train.size() << " training segments)\n";
    if (report) {
      s.out() << "aggregate CER " << Percent(report->aggregate_cer) << " on "
              << test.size() << " test segments\n";
    } else {
      s.out() << "no test segments; evaluation skipped\n";
    }
  }
  return kExitOk;
}

struct SweepArgs {
  std::vector<double> lrs;
  std::vector<int> epochs;
  std::vector<int> batch_sizes;
  bool no_augment = false;
};

int CmdSweep(Session& s, const SweepArgs& a) {
  const ProjectConfig& c = s.config();
  Manifest m = ReadManifest(c.manifest, &s.orth());
  AssignSplits(m, c.train.seed);
  const std::string dir = c.recordings_dir.string();
  const std::vector<Utterance> train = LoadUtterances(m, Split::kTrain, dir);
  const std::vector<Utterance> test = LoadUtterances(m, Split::kTest, dir);
  if (train.empty()) throw DataError("the training split is empty");
  if (test.empty()) throw DataError("the test split is empty");

  std::vector<double> lrs = a.lrs;
  std::vector<int> epochs = a.epochs, batches = a.batch_sizes;
  if (lrs.empty()) lrs = {c.train.learning_rate};
  if (epochs.empty()) epochs = {c.train.epochs};
  if (batches.empty()) batches = {c.train.batch_size};
  std::vector<TrainConfig> configs;
  for (double lr : lrs) {
    for (int e : epochs) {
      for (int b : batches) {
        TrainArgs t;
        t.lr = lr;
        t.epochs = e;
        t.batch_size = b;
        t.no_augment = a.no_augment;
        configs.push_back(ApplyOverrides(c.train, t));
      }
    }
  }
  const std::vector<SweepResult> results =
      Sweep(train, test, s.orth(), BuildVocab(s.orth()), configs);
  if (s.json()) {
    ordered_json rows = ordered_json::array();
    for (const SweepResult& r : results) {
      rows.push_back({{"learning_rate", r.config.learning_rate},
                      {"epochs", r.config.epochs},
                      {"batch_size", r.config.batch_size},
                      {"best_epoch", r.result.best_epoch},
                      {"held_out_cer", r.held_out.aggregate_cer}});
    }
    s.Emit({{"results", rows}});
  } else {
    s.out() << "rank  lr        epochs  batch  held-out CER\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const SweepResult& r = results[i];
      char line[128];
      std::snprintf(line, sizeof(line), "%-5zu %-9g %-7d %-6d %s\n", i + 1,
                    r.config.learning_rate, r.config.epochs, r.config.batch_size,
                    Percent(r.held_out.aggregate_cer).c_str());
      s.out() << line;
    }
  }
  return kExitOk;
}

// ---- augment-preview ----------------------------------------------------------

struct PreviewArgs {
  std::string wav;
  std::string out_dir;
};

int CmdAugmentPreview(Session& s, const PreviewArgs& a) {
  const ProjectConfig& c = s.config();
  AugmentSpec spec = c.augment.value_or(AugmentSpec{});
  if (c.augment == std::nullopt && c.train.seed != 0) spec.seed = c.train.seed;
  const AudioClip clip = IngestWav(ReadFileBytes(a.wav));
  const std::vector<LabeledClip> clips = {{clip, ""}};
  const std::vector<AugmentedItem> items = Expand(clips, spec);
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  const std::string stem = fs::path(a.wav).stem().string();
  ordered_json rows = ordered_json::array();
  for (const AugmentedItem& item : items) {
    const fs::path p = dir / (stem + "." + item.variant + ".wav");
    WriteFileAtomic(p.string(), EncodeWav(item.clip));
    rows.push_back({{"variant", item.variant},
                    {"path", p.string()},
                    {"duration_s", item.clip.duration_s()},
                    {"rms", Rms(item.clip.samples)}});
    if (!s.json()) {
      char line[256];
      std::snprintf(line, sizeof(line), "%-12s %7.3f s  rms %.4f  %s\n",
                    item.variant.c_str(), item.clip.duration_s(),
                    Rms(item.clip.samples), p.string().c_str());
      s.out() << line;
    }
  }
  if (s.json()) s.Emit({{"variants", rows}});
  return kExitOk;
}

// ---- transcribe -------------------------------------------------------------------

struct TranscribeArgs {
  std::string audio;
  std::string model;
  std::string out;
  int beam = 1;
};

int CmdTranscribe(Session& s, const TranscribeArgs& a) {
  const ProjectConfig& c = s.config();
  const AcousticModel model = s.LoadModelFile(a.model);
  const AudioClip clip = IngestWav(ReadFileBytes(a.audio));
  if (clip.samples.empty()) throw ValidationError("'" + a.audio + "' is empty");
  const std::vector<DraftLine> lines = Transcribe(model, clip, c.chunking, a.beam);
  fs::path out = a.out;
  if (out.empty()) {
    out = a.audio;
    out.replace_extension(".draft.tsv");
  }
  WriteFileAtomic(out.string(), FormatDraft(lines));
  if (s.json()) {
    ordered_json chunks = ordered_json::array();
    for (const DraftLine& l : lines) {
      chunks.push_back({{"start_s", l.start_s}, {"end_s", l.end_s}, {"text", l.text}});
    }
    s.Emit({{"draft", out.string()}, {"chunks", chunks}});
  } else {
    s.out() << FormatDraft(lines);
    s.out() << "draft written to " << out.string() << "\n";
  }
  return kExitOk;
}

// ---- accept -------------------------------------------------------------------------

struct AcceptArgs {
  std::string audio;
  std::string cuts;
  std::string draft;
  std::optional<double> minutes_with;
  std::optional<double> minutes_without;
  double cer_with = 0.0;
  double cer_without = 0.0;
  SegmentFlags seg;
};

std::string JoinTranscripts(std::span<const std::string> parts) {
  std::string out;
  for (const std::string& p : parts) {
    const std::string_view t = TrimWhitespace(p);
    if (t.empty()) continue;
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

int CmdAccept(Session& s, const AcceptArgs& a) {
  const ProjectConfig& c = s.config();
  ProjectLock lock(c.LockPath());
  Manifest m = s.LoadOrCreateManifest();
  const CutsFile cuts = ParseCutsFile(ReadText(a.cuts));
  const std::string prefix = PrefixFor(a.seg, a.audio);
  const StagedRecording rec = StageRecording(c, a.audio, prefix);
  const std::vector<Segment> added =
      AppendSegments(s, m, rec, cuts, a.seg, Split::kUnassigned, prefix);

  std::optional<EvalReport> draft_score;
  if (!a.draft.empty()) {
    const CutsFile draft = ParseCutsFile(ReadText(a.draft));
    std::vector<std::string> corrected;
    for (const Segment& seg : added) corrected.push_back(seg.transcript);
    const std::vector<TranscriptPair> pair = {
        {prefix, JoinTranscripts(corrected), JoinTranscripts(draft.transcripts)}};
    draft_score = ScoreTranscripts(pair, s.orth());
  }
  std::optional<SpeedupEntry> timing;
  if (a.minutes_with.has_value() != a.minutes_without.has_value()) {
    throw ValidationError(
        "--minutes-with and --minutes-without must be given together");
  }
  if (a.minutes_with) {
    timing = SpeedupEntry{prefix, rec.clip.duration_s(), *a.minutes_without * 60.0,
                          *a.minutes_with * 60.0, a.cer_without, a.cer_with};
    timing->Validate();
  }

  CommitRecording(c, rec);
  WriteManifest(c.manifest, m);
  ordered_json record{{"recording", rec.name},
                      {"accepted_at", UtcTimestamp()},
                      {"segments", ordered_json::array()}};
  for (const Segment& seg : added) record["segments"].push_back(seg.id);
  if (draft_score) {
    record["draft_cer"] = draft_score->aggregate_cer;
    record["draft_edits"] = draft_score->total_edits;
    record["reference_graphemes"] = draft_score->total_reference;
  }
  AppendLine(c.AcceptLogPath(), record.dump());
  if (timing) AppendLine(c.TimingsPath(), SpeedupEntryToJson(*timing));

  if (s.json()) {
    ordered_json j{{"segments_added", added.size()},
                   {"manifest_segments", m.segments.size()},
                   {"draft_cer", draft_score ? ordered_json(draft_score->aggregate_cer)
                                             : ordered_json(nullptr)}};
    if (timing) {
      j["speedup"] = FormatSpeedup(timing->time_without_s, timing->time_with_s);
    }
    s.Emit(j);
  } else {
    s.out() << "accepted " << added.size() << " segments from " << a.audio << "\n";
    if (draft_score) {
      s.out() << "draft CER " << Percent(draft_score->aggregate_cer) << " ("
              << draft_score->total_edits << " edits over "
              << draft_score->total_reference << " graphemes)\n";
    }
    if (timing) {
      s.out() << "speedup "
              << FormatSpeedup(timing->time_without_s, timing->time_with_s)
              << "\n";
    }
  }
  return kExitOk;
}

// ---- eval / report / export / serve ----------------------------------------------

struct EvalArgs {
  std::string model;
  std::string split = "test";
  std::string out;
  int beam = 1;
};

int CmdEval(Session& s, const EvalArgs& a) {
  const ProjectConfig& c = s.config();
  const Manifest m = ReadManifest(c.manifest, &s.orth());
  const AcousticModel model = s.LoadModelFile(a.model);
  const std::vector<Utterance> utts =
      LoadUtterances(m, ParseSplit(a.split), c.recordings_dir.string());
  if (utts.empty()) throw DataError("split '" + a.split + "' is empty");
  if (a.beam < 1) throw ValidationError("--beam must be >= 1");
  EvalReport report;
  if (a.beam == 1) {
    report = Evaluate(model, utts, s.orth());
  } else {
    std::vector<TranscriptPair> pairs;
    for (const Utterance& u : utts) {
      const std::string hyp = BeamDecode(model.Forward(u.clip), model.vocab(), a.beam);
      pairs.push_back({u.id, u.transcript, std::string(TrimWhitespace(hyp))});
    }
    report = ScoreTranscripts(pairs, s.orth());
  }
  if (!a.out.empty()) WriteFileAtomic(a.out, report.ToJsonl());
  if (s.json()) {
    s.Emit(ReportJson(report));
  } else {
    s.out() << report.ToTable();
  }
  return kExitOk;
}

int CmdReport(Session& s) {
  const ProjectConfig& c = s.config();
  std::vector<SpeedupEntry> entries;
  if (fs::exists(c.TimingsPath())) {
    for (const std::string& line : SplitString(ReadText(c.TimingsPath()), '\n')) {
      if (!TrimWhitespace(line).empty()) entries.push_back(SpeedupEntryFromJson(line));
    }
  }
  std::optional<EvalReport> eval;
  if (fs::exists(c.EvalReportPath())) {
    eval = EvalReport::FromJsonl(ReadText(c.EvalReportPath()));
  }
  std::vector<double> draft_cers;
  if (fs::exists(c.AcceptLogPath())) {
    for (const std::string& line : SplitString(ReadText(c.AcceptLogPath()), '\n')) {
      if (TrimWhitespace(line).empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_object() && j.contains("draft_cer") && j["draft_cer"].is_number()) {
        draft_cers.push_back(j["draft_cer"].get<double>());
      }
    }
  }
  if (s.json()) {
    ordered_json rows = ordered_json::array();
    for (const SpeedupEntry& e : entries) {
      rows.push_back(ordered_json::parse(SpeedupEntryToJson(e)));
      rows.back()["speedup"] = FormatSpeedup(e.time_without_s, e.time_with_s);
    }
    s.Emit({{"speedups", rows},
            {"evaluation", eval ? ReportJson(*eval) : ordered_json(nullptr)},
            {"accepted_drafts", draft_cers.size()}});
    return kExitOk;
  }
  if (entries.empty() && !eval && draft_cers.empty()) {
    s.out() << "no data\n";
    return kExitOk;
  }
  if (!entries.empty()) {
    s.out() << SpeedupReport(entries);
  } else {
    s.out() << "no timing data\n";
  }
  if (eval) {
    s.out() << "latest evaluation: aggregate CER " << Percent(eval->aggregate_cer)
            << " over " << eval->segments.size() << " segments\n";
  }
  if (!draft_cers.empty()) {
    double sum = 0.0;
    for (double d : draft_cers) sum += d;
    s.out() << "accepted drafts: " << draft_cers.size() << ", mean draft CER "
            << Percent(sum / static_cast<double>(draft_cers.size())) << "\n";
  }
  return kExitOk;
}

std::unique_ptr<CollectStore> OpenStore(Session& s) {
  const ProjectConfig& c = s.config();
  std::string seeds;
  if (!c.collect.seed_sentences.empty()) seeds = ReadText(c.collect.seed_sentences);
  return std::make_unique<CollectStore>(c.collect.storage_dir, s.orth(),
                                        c.LoadSchemes(s.orth()), seeds);
}

struct ExportArgs {
  std::string out;
  std::string split;
  bool collect = false;
};

int CmdExport(Session& s, const ExportArgs& a) {
  Manifest m;
  if (a.collect) {
    m = OpenStore(s)->ExportCorpus();
  } else {
    m = ReadManifest(s.config().manifest, &s.orth());
  }
  if (!a.split.empty()) {
    const Split split = ParseSplit(a.split);
    std::erase_if(m.segments, [&](const Segment& seg) { return seg.split != split; });
  }
  const std::string text = ExportManifest(m);
  ImportManifest(text, &s.orth());
  if (a.out.empty()) {
    s.out() << text;
  } else {
    WriteFileAtomic(a.out, text);
    if (s.json()) {
      s.Emit({{"path", a.out}, {"segments", m.segments.size()}});
    } else {
      s.out() << "exported " << m.segments.size() << " segments to " << a.out
              << "\n";
    }
  }
  return kExitOk;
}

struct ServeArgs {
  std::string host;
  int port = -1;
};

int CmdServe(Session& s, const ServeArgs& a) {
  const ProjectConfig& c = s.config();
  const std::unique_ptr<CollectStore> store = OpenStore(s);
  CollectServer server(*store, {c.collect.token, c.collect.reviewer_token});
  const std::string host = a.host.empty() ? c.collect.host : a.host;
  const int port = server.Bind(host, a.port >= 0 ? a.port : c.collect.port);
  s.out() << "serving " << store->storage_dir().string() << " on http://" << host
          << ":" << port << "\n"
          << std::flush;
  server.Run();
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Field recording to speech recognition workflow"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Project config file")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Override every configured seed");
  app.add_flag("--json", g.json, "Machine-readable output");
  app.set_version_flag("--version", kVersion);

  IngestArgs ingest;
  CLI::App* c_ingest = app.add_subcommand("ingest", "Add a segmented recording");
  c_ingest->add_option("wav", ingest.wav, "WAV file")->required();
  c_ingest->add_option("cuts", ingest.cuts, "Cuts file")->required();
  AddSegmentFlags(c_ingest, ingest.seg);
  c_ingest->add_option("--split", ingest.seg.split, "train, test or unassigned")
      ->capture_default_str();

  TrainArgs train;
  CLI::App* c_train = app.add_subcommand("train", "Train and evaluate a model");
  c_train->add_option("--epochs", train.epochs);
  c_train->add_option("--lr", train.lr, "Learning rate");
  c_train->add_option("--batch-size", train.batch_size);
  c_train->add_flag("--freeze-encoder", train.freeze_encoder);
  c_train->add_flag("--freeze-context", train.freeze_context);
  c_train->add_flag("--no-augment", train.no_augment);
  c_train->add_option("--init", train.init, "Continue from this model");
  c_train->add_option("--out", train.out, "Model path");

  SweepArgs sweep;
  CLI::App* c_sweep = app.add_subcommand("sweep", "Rank training configs");
  c_sweep->add_option("--lr", sweep.lrs, "Learning rates")->delimiter(',');
  c_sweep->add_option("--epochs", sweep.epochs)->delimiter(',');
  c_sweep->add_option("--batch-size", sweep.batch_sizes)->delimiter(',');
  c_sweep->add_flag("--no-augment", sweep.no_augment);

  PreviewArgs preview;
  CLI::App* c_preview =
      app.add_subcommand("augment-preview", "Write every augmentation of a clip");
  c_preview->add_option("wav", preview.wav)->required();
  c_preview->add_option("--out-dir", preview.out_dir)->required();

  TranscribeArgs transcribe;
  CLI::App* c_transcribe =
      app.add_subcommand("transcribe", "Draft a transcript of new audio");
  c_transcribe->add_option("audio", transcribe.audio)->required();
  c_transcribe->add_option("--model", transcribe.model);
  c_transcribe->add_option("--out", transcribe.out);
  c_transcribe->add_option("--beam", transcribe.beam)->capture_default_str();

  AcceptArgs accept;
  CLI::App* c_accept =
      app.add_subcommand("accept", "Add a corrected transcript to the corpus");
  c_accept->add_option("audio", accept.audio)->required();
  c_accept->add_option("cuts", accept.cuts, "Corrected cuts file")->required();
  c_accept->add_option("--draft", accept.draft, "Draft produced by transcribe");
  c_accept->add_option("--minutes-with", accept.minutes_with,
                       "Transcription time with the draft");
  c_accept->add_option("--minutes-without", accept.minutes_without,
                       "Transcription time without a draft");
  c_accept->add_option("--cer-with", accept.cer_with);
  c_accept->add_option("--cer-without", accept.cer_without);
  AddSegmentFlags(c_accept, accept.seg);

  EvalArgs eval;
  CLI::App* c_eval = app.add_subcommand("eval", "Score a model on a split");
  c_eval->add_option("--model", eval.model);
  c_eval->add_option("--split", eval.split)->capture_default_str();
  c_eval->add_option("--out", eval.out, "Write the per-segment report here");
  c_eval->add_option("--beam", eval.beam)->capture_default_str();

  CLI::App* c_report =
      app.add_subcommand("report", "Speedup and accuracy summary");

  ServeArgs serve;
  CLI::App* c_serve = app.add_subcommand("serve", "Run the collection service");
  c_serve->add_option("--host", serve.host);
  c_serve->add_option("--port", serve.port);

  ExportArgs exp;
  CLI::App* c_export = app.add_subcommand("export", "Write a manifest");
  c_export->add_option("--out", exp.out);
  c_export->add_option("--split", exp.split);
  c_export->add_flag("--collect", exp.collect,
                     "Export the collection service's submissions instead");

  std::vector<std::string> argv_storage = {"fieldasr"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  Session session(g, out, err);
  try {
    if (c_ingest->parsed()) return CmdIngest(session, ingest);
    if (c_train->parsed()) return CmdTrain(session, train);
    if (c_sweep->parsed()) return CmdSweep(session, sweep);
    if (c_preview->parsed()) return CmdAugmentPreview(session, preview);
    if (c_transcribe->parsed()) return CmdTranscribe(session, transcribe);
    if (c_accept->parsed()) return CmdAccept(session, accept);
    if (c_eval->parsed()) return CmdEval(session, eval);
    if (c_report->parsed()) return CmdReport(session);
    if (c_serve->parsed()) return CmdServe(session, serve);
    if (c_export->parsed()) return CmdExport(session, exp);
  } catch (const std::exception& e) {
    const int code = ExitCodeFor(e);
    if (g.json) {
      const char* kind = code == kExitIo     ? "io"
                         : code == kExitData ? "data"
                                             : "validation";
      err << ordered_json{{"error", {{"code", kind}, {"message", e.what()}}}}.dump()
          << "\n";
    } else {
      err << "error: " << e.what() << "\n";
    }
    return code;
  }
  return kExitValidation;
}

}  // namespace fieldasr
