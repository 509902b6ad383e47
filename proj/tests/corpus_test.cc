// tests/corpus_test.cc

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
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fieldasr/errors.h"
#include "test_util.h"

namespace fieldasr {
namespace {

using fieldasr_test::kTestOrthography;

Orthography TestOrth() { return Orthography::Load(kTestOrthography); }

AudioClip Ramp(std::size_t n) {
  AudioClip clip;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    clip.samples[i] = static_cast<float>((static_cast<int>(i % 2001) - 1000) /
                                         1000.0);
  }
  return clip;
}

SegmentOptions Opts() {
  SegmentOptions o;
  o.source_recording = "rec1.wav";
  o.speaker_id = "spk";
  o.dialect = "urmi";
  o.id_prefix = "rec1";
  return o;
}

TEST(SegmentRecording, TwoCutsOn14Seconds) {
  AudioClip clip = Ramp(14 * 16000);
  const std::vector<Cut> cuts = {{0, 10}, {10, 14}};
  const std::vector<std::string> tr = {"ab", "ˈa=b"};
  auto segs = SegmentRecording(clip, cuts, tr, TestOrth(), Opts());
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_DOUBLE_EQ(segs[0].duration_s(), 10.0);
  EXPECT_DOUBLE_EQ(segs[1].duration_s(), 4.0);
  EXPECT_EQ(segs[0].id, "rec1-0001");
  EXPECT_EQ(segs[1].id, "rec1-0002");
  EXPECT_EQ(segs[1].transcript, "a=b");  // stored normalized
  EXPECT_EQ(segs[1].split, Split::kUnassigned);
}

TEST(SegmentRecording, RejectsBadCuts) {
  AudioClip clip = Ramp(20 * 16000);
  Orthography orth = TestOrth();
  auto run = [&](std::vector<Cut> cuts, std::vector<std::string> tr) {
    return SegmentRecording(clip, cuts, tr, orth, Opts());
  };
  EXPECT_THROW(run({{0, 16}}, {"a"}), ValidationError);
  EXPECT_THROW(run({{0, 15.0001}}, {"a"}), ValidationError);
  EXPECT_NO_THROW(run({{0, 15}}, {"a"}));
  EXPECT_THROW(run({{0, 5}, {4, 9}}, {"a", "b"}), ValidationError);
  EXPECT_THROW(run({{5, 4}}, {"a"}), ValidationError);
  EXPECT_THROW(run({{19, 21}}, {"a"}), ValidationError);
  EXPECT_THROW(run({{0, 1}}, {"a", "b"}), ValidationError);
  EXPECT_THROW(run({{0, 1}}, {"ax"}), ValidationError);
}

TEST(SegmentRecording, SampleIndicesRoundHalfUp) {
  EXPECT_EQ(SecondsToSamples(1.0), 16000);
  EXPECT_EQ(SecondsToSamples(0.00003125), 1);  // exactly 0.5 samples
  EXPECT_EQ(SecondsToSamples(0.0000312), 0);
  EXPECT_EQ(SecondsToSamples(2.5), 40000);
}

TEST(SegmentRecording, ContiguousCutsReconstructSourceExactly) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 16000 * 30 + trial * 37;
    AudioClip clip = Ramp(n);
    std::uniform_real_distribution<double> gauss(-1.0, 1.0);
    for (float& s : clip.samples) s = static_cast<float>(gauss(rng));
    std::vector<Cut> cuts;
    std::vector<std::string> tr;
    double t = 0.0;
    std::uniform_real_distribution<double> len(0.5, 14.9);
    while (t < clip.duration_s()) {
      const double end = std::min(clip.duration_s(), t + len(rng));
      cuts.push_back({t, end});
      tr.push_back("a");
      t = end;
    }
    auto segs = SegmentRecording(clip, cuts, tr, TestOrth(), Opts());
    std::vector<float> joined;
    for (const Segment& s : segs) {
      AudioClip part = SliceSegment(clip, s);
      joined.insert(joined.end(), part.samples.begin(), part.samples.end());
    }
    EXPECT_EQ(joined, clip.samples);
  }
}

TEST(SuggestCuts, SingleToneUnderLimit) {
  AudioClip clip = fieldasr_test::ToneClip(300, 5.0);
  auto cuts = SuggestCuts(clip, 15.0, -40.0);
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_DOUBLE_EQ(cuts[0].start_s, 0.0);
  EXPECT_DOUBLE_EQ(cuts[0].end_s, 5.0);
}

TEST(SuggestCuts, TwoBurstsAroundSilence) {
  std::vector<float> s = fieldasr_test::Tone(300, 5.0);
  const std::size_t gap = 2 * 16000;
  // -60 dBFS noise-free silence floor.
  const float floor = static_cast<float>(std::pow(10.0, -60.0 / 20.0));
  for (std::size_t i = 0; i < gap; ++i) s.push_back(i % 2 ? floor : -floor);
  std::vector<float> b = fieldasr_test::Tone(300, 5.0);
  s.insert(s.end(), b.begin(), b.end());
  auto cuts = SuggestCuts(AudioClip{s, 16000}, 15.0, -40.0);
  ASSERT_EQ(cuts.size(), 2u);
  EXPECT_NEAR(cuts[0].start_s, 0.0, 0.05);
  EXPECT_NEAR(cuts[0].end_s, 5.0, 0.05);
  EXPECT_NEAR(cuts[1].start_s, 7.0, 0.05);
  EXPECT_NEAR(cuts[1].end_s, 12.0, 0.05);
}

TEST(SuggestCuts, LongToneIsSplitUnderMax) {
  AudioClip clip = fieldasr_test::ToneClip(300, 20.0);
  auto cuts = SuggestCuts(clip, 10.0, -40.0);
  ASSERT_EQ(cuts.size(), 2u);
  EXPECT_DOUBLE_EQ(cuts.front().start_s, 0.0);
  EXPECT_DOUBLE_EQ(cuts.back().end_s, 20.0);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    EXPECT_LE(cuts[i].end_s - cuts[i].start_s, 10.0);
    if (i > 0) EXPECT_DOUBLE_EQ(cuts[i].start_s, cuts[i - 1].end_s);
  }
}

TEST(SuggestCuts, SplitsAtQuietestFrame) {
  // 12 s of tone with a 0.3 s dip to -30 dB at 7 s; max 10 s.
  std::vector<float> s = fieldasr_test::Tone(300, 12.0);
  for (std::size_t i = 7 * 16000; i < 7 * 16000 + 4800; ++i) s[i] *= 0.03f;
  auto cuts = SuggestCuts(AudioClip{s, 16000}, 10.0, -60.0);
  ASSERT_EQ(cuts.size(), 2u);
  EXPECT_GE(cuts[0].end_s, 7.0);
  EXPECT_LE(cuts[0].end_s, 7.3);
}

TEST(SuggestCuts, Errors) {
  EXPECT_THROW(SuggestCuts(AudioClip{std::vector<float>(399), 16000}, 10, -40),
               ValidationError);
  EXPECT_THROW(SuggestCuts(fieldasr_test::ToneClip(300, 1), 16, -40),
               ValidationError);
  EXPECT_TRUE(SuggestCuts(AudioClip{std::vector<float>(16000), 16000}, 10, -40)
                  .empty());
}

Manifest MakeManifest(std::size_t n) {
  Manifest m;
  m.orthography_name = "test";
  m.created = "2026-01-02T03:04:05Z";
  m.modified = "2026-01-02T03:04:06Z";
  for (std::size_t i = 0; i < n; ++i) {
    Segment s;
    s.id = "seg-" + std::to_string(i);
    s.source_recording = "r" + std::to_string(i % 3) + ".wav";
    s.start_sample = static_cast<int64_t>(i) * 1000;
    s.end_sample = s.start_sample + 16000;
    s.transcript = i % 2 ? "a š=b" : "ba";
    s.speaker_id = "sp\"eaker\t" + std::to_string(i);
    s.dialect = "ūrmi";
    s.split = static_cast<Split>(i % 3);
    m.segments.push_back(s);
  }
  return m;
}

TEST(SplitManifest, CountsAndDeterminism) {
  Manifest m = MakeManifest(10);
  Manifest a = SplitManifest(m, 0.8, 7);
  Manifest b = SplitManifest(m, 0.8, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.Count(Split::kTrain), 8u);
  EXPECT_EQ(a.Count(Split::kTest), 2u);
  EXPECT_EQ(a.segments.size(), m.segments.size());
  for (std::size_t i = 0; i < m.segments.size(); ++i) {
    EXPECT_EQ(a.segments[i].id, m.segments[i].id);  // order kept
  }
  Manifest c = SplitManifest(m, 0.8, 8);
  EXPECT_EQ(c.Count(Split::kTrain), 8u);
  EXPECT_THROW(SplitManifest(m, 1.0, 7), ValidationError);
  EXPECT_THROW(SplitManifest(m, 0.0, 7), ValidationError);
  EXPECT_THROW(SplitManifest(Manifest{}, 0.5, 7), DataError);
}

TEST(ManifestIo, RoundTrips) {
  Manifest empty;
  empty.orthography_name = "x";
  empty.created = empty.modified = "2026-01-01T00:00:00Z";
  EXPECT_EQ(ImportManifest(ExportManifest(empty)), empty);
  Manifest m = MakeManifest(3);
  EXPECT_EQ(ImportManifest(ExportManifest(m), nullptr), m);
  Orthography orth = TestOrth();
  EXPECT_EQ(ImportManifest(ExportManifest(m), &orth), m);
}

TEST(ManifestIo, RandomRoundTrips) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Manifest m = MakeManifest(std::uniform_int_distribution<int>(0, 20)(rng));
    for (Segment& s : m.segments) {
      s.start_sample = std::uniform_int_distribution<int64_t>(0, 1 << 30)(rng);
      s.end_sample = s.start_sample +
                     std::uniform_int_distribution<int64_t>(1, 240000)(rng);
    }
    EXPECT_EQ(ImportManifest(ExportManifest(m)), m);
  }
}

TEST(ManifestIo, ImportRejectsWithLineNumbers) {
  Manifest m = MakeManifest(3);
  m.segments[1].end_sample = m.segments[1].start_sample + 16 * 16000;
  try {
    ImportManifest(ExportManifest(m));
    FAIL() << "16 s segment imported";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::string text = ExportManifest(MakeManifest(2));
  text += "{\"id\":\"x\"}\n";
  try {
    ImportManifest(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  Manifest dup = MakeManifest(2);
  dup.segments[1].id = dup.segments[0].id;
  EXPECT_THROW(ImportManifest(ExportManifest(dup)), ParseError);
  EXPECT_THROW(ImportManifest("not json\n"), ParseError);
  Manifest bad = MakeManifest(1);
  bad.segments[0].transcript = "xyz";
  Orthography orth = TestOrth();
  EXPECT_NO_THROW(ImportManifest(ExportManifest(bad)));
  EXPECT_THROW(ImportManifest(ExportManifest(bad), &orth), ValidationError);
}

TEST(ManifestIo, ValidateRecordings) {
  fieldasr_test::TempDir dir;
  Manifest m;
  m.created = m.modified = UtcTimestamp();
  Segment s;
  s.id = "a";
  s.source_recording = "r.wav";
  s.start_sample = 0;
  s.end_sample = 8000;
  s.transcript = "a";
  m.segments.push_back(s);
  EXPECT_THROW(ValidateRecordings(m, dir.path().string()), ValidationError);
  WriteFileAtomic(dir / "r.wav", EncodeWav(AudioClip{std::vector<float>(8000), 16000}));
  EXPECT_NO_THROW(ValidateRecordings(m, dir.path().string()));
  m.segments[0].end_sample = 8001;
  EXPECT_THROW(ValidateRecordings(m, dir.path().string()), ValidationError);
}

TEST(CutsFile, ParseAndFormat) {
  CutsFile c = ParseCutsFile("# comment\n0\t1.5\tab\n\n1.5\t3\tš a\n");
  ASSERT_EQ(c.cuts.size(), 2u);
  EXPECT_DOUBLE_EQ(c.cuts[1].start_s, 1.5);
  EXPECT_EQ(c.transcripts[1], "š a");
  CutsFile back = ParseCutsFile(FormatCutsFile(c));
  EXPECT_EQ(back.transcripts, c.transcripts);
  EXPECT_DOUBLE_EQ(back.cuts[1].end_s, 3.0);
  EXPECT_THROW(ParseCutsFile("0\t1\n"), ParseError);
  EXPECT_THROW(ParseCutsFile("0\tx\ta\n"), ParseError);
}

TEST(Manifest, TimestampFormat) {
  const std::string t = UtcTimestamp();
  ASSERT_EQ(t.size(), 20u);
  EXPECT_EQ(t[10], 'T');
  EXPECT_EQ(t.back(), 'Z');
}

}  // namespace
}  // namespace fieldasr
