// src/audio.cc

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

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>

#include "fieldasr/errors.h"

namespace fieldasr {

namespace {

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatExtensible = 0xFFFE;

// Half-width of the resampling kernel in input samples (64 taps total).
constexpr int kHalfTaps = 32;
constexpr int kTableOversample = 512;
constexpr double kKaiserBeta = 8.0;

// Kaiser window over |x| in [0, 1], tabulated on a uniform grid.
class KaiserTable {
 public:
  KaiserTable() : values_(kHalfTaps * kTableOversample + 2) {
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    const double n = static_cast<double>(kHalfTaps * kTableOversample);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double x = std::min(1.0, static_cast<double>(i) / n);
      values_[i] =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - x * x)) / norm;
    }
  }

  // |d| in input samples, 0 <= |d| <= kHalfTaps.
  double operator()(double d) const {
    double pos = std::abs(d) * kTableOversample;
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values_.size()) return 0.0;
    double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
  }

 private:
  std::vector<double> values_;
};

const KaiserTable& Kaiser() {
  static const KaiserTable table;
  return table;
}

}  // namespace

WavData DecodeWav(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ValidationError("malformed WAV header: missing RIFF/WAVE tags");
  }
  WavData wav;
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  const uint8_t* data_ptr = nullptr;
  std::size_t data_size = 0;
  uint16_t block_align = 0;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Truncated data chunks are common in field recorders; keep what is
      // there. Any other truncated chunk is a malformed file.
      if (std::memcmp(chunk, "data", 4) != 0) {
        throw ValidationError("malformed WAV: truncated chunk");
      }
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw ValidationError("malformed WAV: short fmt chunk");
      uint16_t format = ReadU16(chunk + 8);
      wav.channels = ReadU16(chunk + 10);
      wav.sample_rate = static_cast<int>(ReadU32(chunk + 12));
      block_align = ReadU16(chunk + 20);
      uint16_t bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible && avail >= 26) {
        // Sub-format GUID starts at offset 24 of the fmt body; the first
        // two bytes are the actual format tag.
        format = ReadU16(chunk + 8 + 24);
      }
      if (format != kFormatPcm) {
        throw ValidationError("unsupported WAV codec: format tag " +
                              std::to_string(format) + " (PCM required)");
      }
      if (bits != 16) {
        throw ValidationError("unsupported WAV codec: " +
                              std::to_string(bits) +
                              "-bit PCM (16-bit required)");
      }
      if (wav.channels < 1 || wav.channels > 2) {
        throw ValidationError("unsupported channel count " +
                              std::to_string(wav.channels));
      }
      if (wav.sample_rate <= 0) {
        throw ValidationError("malformed WAV: non-positive sample rate");
      }
      if (block_align != 2 * wav.channels) {
        throw ValidationError("malformed WAV: inconsistent block alignment");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_ptr = chunk + 8;
      data_size = avail;
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw ValidationError("malformed WAV: no fmt chunk");
  if (!have_data) throw ValidationError("malformed WAV: no data chunk");
  const std::size_t frames = data_size / block_align;
  if (frames == 0) throw ValidationError("WAV contains no audio");
  wav.samples.resize(frames * static_cast<std::size_t>(wav.channels));
  for (std::size_t i = 0; i < wav.samples.size(); ++i) {
    wav.samples[i] = static_cast<int16_t>(ReadU16(data_ptr + 2 * i));
  }
  return wav;
}

std::vector<uint8_t> EncodeWav(const WavData& wav) {
  const auto data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, static_cast<uint16_t>(wav.channels));
  PutU32(out, static_cast<uint32_t>(wav.sample_rate));
  PutU32(out, static_cast<uint32_t>(wav.sample_rate * wav.channels * 2));
  PutU16(out, static_cast<uint16_t>(wav.channels * 2));
  PutU16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_bytes);
  for (int16_t s : wav.samples) PutU16(out, static_cast<uint16_t>(s));
  return out;
}

std::vector<uint8_t> EncodeWav(const AudioClip& clip) {
  WavData wav;
  wav.sample_rate = clip.sample_rate;
  wav.channels = 1;
  wav.samples.reserve(clip.samples.size());
  for (float x : clip.samples) {
    double v = std::round(static_cast<double>(x) * 32768.0);
    wav.samples.push_back(static_cast<int16_t>(std::clamp(v, -32768.0, 32767.0)));
  }
  return EncodeWav(wav);
}

AudioClip IngestWav(std::span<const uint8_t> bytes) {
  WavData wav = DecodeWav(bytes);
  const std::size_t frames = wav.frames();
  std::vector<float> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (int c = 0; c < wav.channels; ++c) {
      sum += wav.samples[i * static_cast<std::size_t>(wav.channels) +
                         static_cast<std::size_t>(c)];
    }
    mono[i] = static_cast<float>(sum / wav.channels / 32768.0);
  }
  AudioClip clip;
  clip.sample_rate = kCanonicalRate;
  clip.samples = wav.sample_rate == kCanonicalRate
                     ? std::move(mono)
                     : Resample(mono, wav.sample_rate, kCanonicalRate);
  if (clip.samples.empty()) throw ValidationError("WAV contains no audio");
  return clip;
}

std::vector<float> ResampleByStep(std::span<const float> input, double step,
                                  std::size_t output_length) {
  if (!(step > 0.0)) throw ValidationError("resampling step must be positive");
  std::vector<float> out(output_length);
  const double cutoff = 0.5 * std::min(1.0, 1.0 / step);  // cycles/sample
  const KaiserTable& window = Kaiser();
  const auto n_in = static_cast<long>(input.size());
  for (std::size_t n = 0; n < output_length; ++n) {
    const double t = static_cast<double>(n) * step;
    const auto base = static_cast<long>(std::floor(t));
    double acc = 0.0;
    for (long k = base - kHalfTaps + 1; k <= base + kHalfTaps; ++k) {
      if (k < 0 || k >= n_in) continue;
      const double d = t - static_cast<double>(k);
      if (std::abs(d) >= kHalfTaps) continue;
      const double x = 2.0 * cutoff * d;
      const double sinc =
          x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      acc += input[static_cast<std::size_t>(k)] * 2.0 * cutoff * sinc *
             window(d);
    }
    out[n] = static_cast<float>(acc);
  }
  return out;
}

std::vector<float> Resample(std::span<const float> input, int from_rate,
                            int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) {
    throw ValidationError("sample rates must be positive");
  }
  if (from_rate == to_rate) return {input.begin(), input.end()};
  const double exact = static_cast<double>(input.size()) * to_rate / from_rate;
  const auto length = static_cast<std::size_t>(std::floor(exact + 0.5));
  return ResampleByStep(input, static_cast<double>(from_rate) / to_rate,
                        length);
}

double Rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float x : samples) acc += static_cast<double>(x) * x;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return bytes;
}

void WriteFileAtomic(const std::string& path, std::span<const uint8_t> bytes) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("error writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move '" + tmp + "' to '" + path + "'");
  }
}

void WriteFileAtomic(const std::string& path, const std::string& text) {
  WriteFileAtomic(path,
                  std::span(reinterpret_cast<const uint8_t*>(text.data()),
                            text.size()));
}

}  // namespace fieldasr
