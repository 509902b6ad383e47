// tests/cli_test.cc

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

#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fieldasr/audio.h"
#include "fieldasr/corpus.h"
#include "fieldasr/project.h"
#include "test_util.h"

namespace fieldasr {
namespace {

namespace fs = std::filesystem;
using fieldasr_test::ReadText;
using fieldasr_test::TempDir;
using fieldasr_test::WriteText;

constexpr const char* kTinyTrain =
    R"({"epochs": 3, "batch_size": 4, "learning_rate": 0.003, "seed": 5,
        "shape": {"encoder_channels": 8, "context_channels": 8}})";

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    config_ = fieldasr_test::WriteSynthProject(dir_, kTinyTrain);
  }

  Result Run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", config_});
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    return {code, out.str(), err.str()};
  }

  // Writes `<name>.wav` and `<name>.cuts` and returns the two paths.
  std::pair<std::string, std::string> Fixture(const std::string& name,
                                              const fieldasr_test::SynthRecording& r) {
    const std::string wav = dir_ / (name + ".wav");
    const std::string cuts = dir_ / (name + ".cuts");
    WriteFileAtomic(wav, EncodeWav(r.clip));
    WriteText(cuts, FormatCutsFile(r.cuts));
    return {wav, cuts};
  }

  Manifest LoadManifest() {
    return ReadManifest(dir_.path() / "manifest.jsonl", nullptr);
  }

  TempDir dir_;
  std::string config_;
};

TEST_F(Cli, IngestAddsSegments) {
  auto rec = fieldasr_test::MakeSynthRecording(2, 11, 6.0, 7.0);
  auto [wav, cuts] = Fixture("rec1", rec);
  const Result r = Run({"ingest", wav, cuts, "--speaker", "sp1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("ingested 2 segments"), std::string::npos);
  const Manifest m = LoadManifest();
  ASSERT_EQ(m.segments.size(), 2u);
  EXPECT_EQ(m.segments[0].id, "rec1-0001");
  EXPECT_EQ(m.segments[1].speaker_id, "sp1");
  EXPECT_EQ(m.segments[0].transcript, rec.cuts.transcripts[0]);
  EXPECT_TRUE(fs::exists(dir_.path() / "recordings" / "rec1.wav"));

  const Result again = Run({"ingest", wav, cuts});
  EXPECT_EQ(again.code, kExitValidation);
  EXPECT_EQ(LoadManifest().segments.size(), 2u);
}

TEST_F(Cli, RejectedIngestLeavesManifestUnchanged) {
  auto rec = fieldasr_test::MakeSynthRecording(2, 12, 2.0, 3.0);
  auto [wav, cuts] = Fixture("ok", rec);
  ASSERT_EQ(Run({"ingest", wav, cuts}).code, kExitOk);
  const std::string before = ReadText(dir_ / "manifest.jsonl");

  auto longer = fieldasr_test::MakeSynthRecording(1, 13, 8.0, 8.0);
  longer.clip.samples.resize(20 * 16000, 0.0f);
  longer.cuts.cuts[0] = {0.0, 16.0};
  auto [wav2, cuts2] = Fixture("long", longer);
  const Result r = Run({"ingest", wav2, cuts2});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("15"), std::string::npos) << r.err;

  WriteText(cuts2, "0\t1\tkaxa\n");
  EXPECT_EQ(Run({"ingest", wav2, cuts2}).code, kExitValidation);
  WriteText(cuts2, "5\t1\tka\n");
  EXPECT_EQ(Run({"ingest", wav2, cuts2}).code, kExitValidation);
  EXPECT_EQ(Run({"ingest", dir_ / "absent.wav", cuts}).code, kExitIo);
  EXPECT_EQ(ReadText(dir_ / "manifest.jsonl"), before);
  EXPECT_FALSE(fs::exists(dir_.path() / "recordings" / "long.wav"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(Run({"train"}).code, kExitIo);
  EXPECT_EQ(Run({"bogus"}).code, kExitValidation);
  EXPECT_EQ(Run({"report"}).code, kExitOk);
  std::ostringstream out, err;
  EXPECT_EQ(RunCli({"--config", dir_ / "none.json", "report"}, out, err), kExitIo);
  EXPECT_EQ(RunCli({"--version"}, out, err), kExitOk);
  EXPECT_NE(out.str().find("0."), std::string::npos);
}

TEST_F(Cli, LockRejectsConcurrentWriter) {
  auto rec = fieldasr_test::MakeSynthRecording(1, 14);
  auto [wav, cuts] = Fixture("r", rec);
  ProjectLock held(dir_.path() / "manifest.jsonl.lock");
  const Result r = Run({"ingest", wav, cuts});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.err.find("lock"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_.path() / "manifest.jsonl"));
}

TEST_F(Cli, TrainIsDeterministicAndEvaluates) {
  auto rec = fieldasr_test::MakeSynthRecording(10, 15);
  auto [wav, cuts] = Fixture("r", rec);
  ASSERT_EQ(Run({"ingest", wav, cuts}).code, kExitOk);
  const Result a = Run({"train", "--out", dir_ / "a.nlr"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("epoch 3/3"), std::string::npos);
  EXPECT_NE(a.out.find("aggregate CER"), std::string::npos);
  const Manifest m = LoadManifest();
  std::size_t train = 0, test = 0;
  for (const Segment& s : m.segments) {
    train += s.split == Split::kTrain;
    test += s.split == Split::kTest;
  }
  EXPECT_EQ(train, 8u);
  EXPECT_EQ(test, 2u);
  EXPECT_TRUE(fs::exists(dir_.path() / "a.eval.jsonl"));

  ASSERT_EQ(Run({"train", "--out", dir_ / "b.nlr"}).code, kExitOk);
  EXPECT_EQ(ReadFileBytes(dir_ / "a.nlr"), ReadFileBytes(dir_ / "b.nlr"));
  ASSERT_EQ(Run({"--seed", "9", "train", "--out", dir_ / "c.nlr"}).code, kExitOk);
  EXPECT_NE(ReadFileBytes(dir_ / "a.nlr"), ReadFileBytes(dir_ / "c.nlr"));

  const Result j = Run({"--json", "train", "--epochs", "1", "--out", dir_ / "d.nlr"});
  ASSERT_EQ(j.code, kExitOk);
  const auto parsed = nlohmann::json::parse(j.out);
  EXPECT_EQ(parsed["train_segments"], 8);
  EXPECT_EQ(parsed["best_epoch"], 1);

  const Result e = Run({"eval", "--model", dir_ / "a.nlr"});
  EXPECT_EQ(e.code, kExitOk) << e.err;
  EXPECT_EQ(Run({"eval", "--model", dir_ / "a.nlr", "--split", "unassigned"}).code,
            kExitData);
}

TEST_F(Cli, TrainWithEmptyTrainSplitIsDataError) {
  auto rec = fieldasr_test::MakeSynthRecording(2, 16);
  auto [wav, cuts] = Fixture("r", rec);
  ASSERT_EQ(Run({"ingest", wav, cuts, "--split", "test"}).code, kExitOk);
  EXPECT_EQ(Run({"train"}).code, kExitData);
}

class CliWithModel : public Cli {
 protected:
  void SetUp() override {
    Cli::SetUp();
    auto rec = fieldasr_test::MakeSynthRecording(4, 17);
    auto [wav, cuts] = Fixture("seed", rec);
    ASSERT_EQ(Run({"ingest", wav, cuts}).code, kExitOk);
    ASSERT_EQ(Run({"train", "--epochs", "1"}).code, kExitOk);
  }

  std::string Audio(const std::string& name, double seconds) {
    AudioClip clip;
    clip.samples = fieldasr_test::Tone(250, seconds, 0.2, 16000);
    const std::string path = dir_ / (name + ".wav");
    WriteFileAtomic(path, EncodeWav(clip));
    return path;
  }
};

TEST_F(CliWithModel, TranscribeChunksLongAudio) {
  const Result ten = Run({"transcribe", Audio("ten", 10.0)});
  ASSERT_EQ(ten.code, kExitOk) << ten.err;
  const CutsFile one = ParseCutsFile(ReadText(dir_ / "ten.draft.tsv"));
  ASSERT_EQ(one.cuts.size(), 1u);
  EXPECT_DOUBLE_EQ(one.cuts[0].end_s, 10.0);

  const Result forty = Run({"--json", "transcribe", Audio("forty", 40.0), "--out",
                            dir_ / "forty.tsv"});
  ASSERT_EQ(forty.code, kExitOk) << forty.err;
  EXPECT_EQ(nlohmann::json::parse(forty.out)["chunks"].size(), 3u);
  const CutsFile three = ParseCutsFile(ReadText(dir_ / "forty.tsv"));
  ASSERT_EQ(three.cuts.size(), 3u);
  EXPECT_DOUBLE_EQ(three.cuts[0].end_s, three.cuts[1].start_s);
  EXPECT_DOUBLE_EQ(three.cuts[2].end_s, 40.0);

  EXPECT_EQ(Run({"transcribe", Audio("empty", 0.0)}).code, kExitValidation);
  EXPECT_EQ(Run({"transcribe", dir_ / "absent.wav"}).code, kExitIo);
}

TEST_F(CliWithModel, AcceptScoresTheDraft) {
  const std::string wav = Audio("new", 4.0);
  WriteText(dir_ / "draft.tsv", "0.000\t4.000\tkatikušuti\n");
  WriteText(dir_ / "same.cuts", "0.000\t4.000\tkatikušuti\n");
  Result r = Run({"--json", "accept", wav, dir_ / "same.cuts", "--draft",
                  dir_ / "draft.tsv", "--id-prefix", "n1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out)["draft_cer"].get<double>(), 0.0);

  WriteText(dir_ / "fixed.cuts", "0.000\t4.000\tkatikušuta\n");
  r = Run({"accept", wav, dir_ / "fixed.cuts", "--draft", dir_ / "draft.tsv",
           "--id-prefix", "n2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("draft CER 10.0%"), std::string::npos) << r.out;

  const std::size_t before = LoadManifest().segments.size();
  WriteText(dir_ / "bad.cuts", "0.000\t4.000\tkatiXa\n");
  EXPECT_EQ(Run({"accept", wav, dir_ / "bad.cuts", "--id-prefix", "n3"}).code,
            kExitValidation);
  EXPECT_EQ(LoadManifest().segments.size(), before);
  for (const Segment& s : LoadManifest().segments) {
    if (s.id.rfind("n", 0) == 0) EXPECT_EQ(s.split, Split::kUnassigned);
  }
}

TEST_F(CliWithModel, ReportSummarizesTimings) {
  fs::remove(dir_.path() / "models" / "model.eval.jsonl");
  Result r = Run({"report"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "no data\n");

  const std::string wav = Audio("five", 5.0);
  WriteText(dir_ / "five.cuts", "0.000\t5.000\tkata\n");
  EXPECT_EQ(Run({"accept", wav, dir_ / "five.cuts", "--minutes-with", "21"}).code,
            kExitValidation);
  r = Run({"accept", wav, dir_ / "five.cuts", "--minutes-with", "21",
           "--minutes-without", "132", "--cer-with", "2.1", "--cer-without", "0.8"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("speedup 6.3"), std::string::npos) << r.out;
  r = Run({"report"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("6.3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("132"), std::string::npos) << r.out;
}

TEST_F(Cli, JsonErrors) {
  const Result r = Run({"--json", "train"});
  EXPECT_EQ(r.code, kExitIo);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"]["code"], "io");
}

TEST_F(Cli, ExportManifestAndCollection) {
  auto rec = fieldasr_test::MakeSynthRecording(2, 18);
  auto [wav, cuts] = Fixture("r", rec);
  ASSERT_EQ(Run({"ingest", wav, cuts, "--split", "test"}).code, kExitOk);
  ASSERT_EQ(Run({"export", "--out", dir_ / "all.jsonl"}).code, kExitOk);
  EXPECT_EQ(ImportManifest(ReadText(dir_ / "all.jsonl")).segments.size(), 2u);
  ASSERT_EQ(Run({"export", "--split", "train", "--out", dir_ / "tr.jsonl"}).code,
            kExitOk);
  EXPECT_TRUE(ImportManifest(ReadText(dir_ / "tr.jsonl")).segments.empty());
  const Result c = Run({"export", "--collect"});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_TRUE(ImportManifest(c.out).segments.empty());
}

TEST_F(Cli, AugmentPreviewWritesVariants) {
  AudioClip clip;
  clip.samples = fieldasr_test::Tone(300, 1.0, 0.3, 16000);
  WriteFileAtomic(dir_ / "clip.wav", EncodeWav(clip));
  const Result r = Run({"augment-preview", dir_ / "clip.wav", "--out-dir",
                        dir_ / "preview"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir_.path() / "preview")) {
    EXPECT_EQ(e.path().extension(), ".wav");
    IngestWav(ReadFileBytes(e.path().string()));
    ++n;
  }
  EXPECT_GE(n, 1u);
}

}  // namespace
}  // namespace fieldasr
