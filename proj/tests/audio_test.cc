// tests/audio_test.cc

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

#include "fieldasr/audio.h"

#include <cmath>
#include <cstring>
#include <numbers>

#include <gtest/gtest.h>

#include "fieldasr/errors.h"
#include "test_util.h"

namespace fieldasr {
namespace {

void Put16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}

void Put32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

// Hand-built RIFF file, independent of EncodeWav.
std::vector<uint8_t> RawWav(uint16_t format, uint16_t channels, uint32_t rate,
                            uint16_t bits, const std::vector<uint8_t>& data) {
  std::vector<uint8_t> b = {'R', 'I', 'F', 'F'};
  Put32(b, 36 + static_cast<uint32_t>(data.size()));
  for (char c : std::string("WAVEfmt ")) b.push_back(c);
  Put32(b, 16);
  Put16(b, format);
  Put16(b, channels);
  Put32(b, rate);
  Put32(b, rate * channels * bits / 8);
  Put16(b, channels * bits / 8);
  Put16(b, bits);
  for (char c : std::string("data")) b.push_back(c);
  Put32(b, static_cast<uint32_t>(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

std::vector<uint8_t> Pcm16Bytes(const std::vector<int16_t>& s) {
  std::vector<uint8_t> out;
  for (int16_t v : s) Put16(out, static_cast<uint16_t>(v));
  return out;
}

TEST(Wav, DecodesHandBuiltFile) {
  const std::vector<int16_t> s = {0, 1, -1, 32767, -32768, 1234};
  WavData w = DecodeWav(RawWav(1, 2, 22050, 16, Pcm16Bytes(s)));
  EXPECT_EQ(w.sample_rate, 22050);
  EXPECT_EQ(w.channels, 2);
  EXPECT_EQ(w.frames(), 3u);
  EXPECT_EQ(w.samples, s);
}

TEST(Wav, EncodeDecodeRoundTrip) {
  WavData w{44100, 1, {5, -5, 100, -32768, 32767}};
  WavData back = DecodeWav(EncodeWav(w));
  EXPECT_EQ(back.sample_rate, 44100);
  EXPECT_EQ(back.channels, 1);
  EXPECT_EQ(back.samples, w.samples);
}

TEST(Wav, SkipsUnknownChunks) {
  std::vector<uint8_t> b = RawWav(1, 1, 16000, 16, Pcm16Bytes({7, 8}));
  // Insert a LIST chunk (odd size, padded) between fmt and data.
  std::vector<uint8_t> list = {'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
  b.insert(b.begin() + 36, list.begin(), list.end());
  WavData w = DecodeWav(b);
  EXPECT_EQ(w.samples, (std::vector<int16_t>{7, 8}));
}

TEST(Wav, RejectsUnsupportedInput) {
  const std::vector<uint8_t> bytes8 = {128, 130, 126, 128};
  EXPECT_THROW(DecodeWav(RawWav(1, 1, 16000, 8, bytes8)), ValidationError);
  EXPECT_THROW(DecodeWav(RawWav(3, 1, 16000, 32, std::vector<uint8_t>(8))),
               ValidationError);
  EXPECT_THROW(DecodeWav(RawWav(1, 3, 16000, 16, std::vector<uint8_t>(12))),
               ValidationError);
  EXPECT_THROW(DecodeWav(RawWav(1, 1, 16000, 16, {})), ValidationError);
  std::vector<uint8_t> junk = {'R', 'I', 'F', 'X', 0, 0, 0, 0};
  EXPECT_THROW(DecodeWav(junk), ValidationError);
  EXPECT_THROW(IngestWav(RawWav(1, 1, 16000, 16, {})), ValidationError);
}

TEST(Ingest, NoOpPathAt16k) {
  const std::vector<int16_t> s = {0, 16384, -16384, 32767, -32768};
  AudioClip clip = IngestWav(RawWav(1, 1, 16000, 16, Pcm16Bytes(s)));
  ASSERT_EQ(clip.samples.size(), s.size());
  EXPECT_EQ(clip.sample_rate, 16000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(clip.samples[i], static_cast<float>(s[i] / 32768.0));
  }
}

TEST(Ingest, StereoIsAveraged) {
  const std::vector<int16_t> s = {1000, 3000, -200, 200, 32767, 32767};
  AudioClip clip = IngestWav(RawWav(1, 2, 16000, 16, Pcm16Bytes(s)));
  ASSERT_EQ(clip.samples.size(), 3u);
  EXPECT_FLOAT_EQ(clip.samples[0], 2000.0f / 32768.0f);
  EXPECT_FLOAT_EQ(clip.samples[1], 0.0f);
  EXPECT_FLOAT_EQ(clip.samples[2], 32767.0f / 32768.0f);
}

// A pure tone below both Nyquist rates resamples to the same tone evaluated
// on the new grid; the analytic sine is the reference resampler.
TEST(Ingest, ResamplesAgainstAnalyticReference) {
  for (int from : {44100, 22050, 8000, 48000}) {
    const double hz = 1000.0;
    const std::size_t n = static_cast<std::size_t>(from);  // 1 s
    std::vector<int16_t> pcm(n);
    for (std::size_t i = 0; i < n; ++i) {
      pcm[i] = static_cast<int16_t>(
          std::lround(16000.0 * std::sin(2 * std::numbers::pi * hz * i / from)));
    }
    AudioClip clip = IngestWav(RawWav(1, 1, from, 16, Pcm16Bytes(pcm)));
    const double expected_len = std::round(n * 16000.0 / from);
    EXPECT_NEAR(static_cast<double>(clip.samples.size()), expected_len, 1.0)
        << from;
    double max_err = 0.0;
    for (std::size_t k = 64; k + 64 < clip.samples.size(); ++k) {
      const double ref =
          16000.0 / 32768.0 * std::sin(2 * std::numbers::pi * hz * k / 16000.0);
      max_err = std::max(max_err, std::abs(clip.samples[k] - ref));
    }
    EXPECT_LT(max_err, 2e-3) << from;
  }
}

TEST(Resample, IdentityAndLength) {
  std::vector<float> x = fieldasr_test::Tone(440, 0.1);
  EXPECT_EQ(Resample(x, 16000, 16000), x);
  EXPECT_EQ(Resample(x, 44100, 16000).size(),
            static_cast<std::size_t>(std::floor(1600 * 16000.0 / 44100 + 0.5)));
  EXPECT_THROW(Resample(x, 0, 16000), ValidationError);
}

TEST(Audio, Rms) {
  EXPECT_EQ(Rms(std::vector<float>{}), 0.0);
  std::vector<float> x = {0.5f, -0.5f, 0.5f, -0.5f};
  EXPECT_DOUBLE_EQ(Rms(x), 0.5);
}

TEST(Audio, FileHelpers) {
  fieldasr_test::TempDir dir;
  const std::string path = dir / "x.bin";
  WriteFileAtomic(path, std::string("hello"));
  std::vector<uint8_t> b = ReadFileBytes(path);
  EXPECT_EQ(std::string(b.begin(), b.end()), "hello");
  EXPECT_THROW(ReadFileBytes(dir / "missing"), IoError);
  EXPECT_THROW(WriteFileAtomic(dir / "no/such/dir/f", std::string("x")),
               IoError);
}

}  // namespace
}  // namespace fieldasr
