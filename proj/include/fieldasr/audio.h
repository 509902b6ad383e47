// fieldasr/audio.h

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

#ifndef FIELDASR_AUDIO_H_
#define FIELDASR_AUDIO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fieldasr {

inline constexpr int kCanonicalRate = 16000;

/// Mono audio with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kCanonicalRate;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const AudioClip&) const = default;
};

/// Interleaved PCM16 as stored in a RIFF/WAVE file.
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<int16_t> samples;  // interleaved

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels)
                        : 0;
  }
};

/// Parses a RIFF/WAVE byte buffer. Only PCM 16-bit with 1 or 2 channels is
/// accepted; anything else throws ValidationError.
WavData DecodeWav(std::span<const uint8_t> bytes);

/// Serializes PCM16 data as a canonical 44-byte-header WAVE file.
std::vector<uint8_t> EncodeWav(const WavData& wav);

/// Quantizes a clip to PCM16 (x * 32768, rounded, saturated) and encodes it.
std::vector<uint8_t> EncodeWav(const AudioClip& clip);

/// Decodes, downmixes stereo by averaging, scales by 1/32768 and resamples to
/// 16 kHz. Throws ValidationError on malformed, non-PCM16 or empty input.
AudioClip IngestWav(std::span<const uint8_t> bytes);

/// Windowed-sinc resampler (64-tap Kaiser window). Output sample n is the
/// band-limited input evaluated at input position n * step; `step` > 1
/// shortens the signal and the anti-aliasing cutoff drops to 1/step of
/// Nyquist.
std::vector<float> ResampleByStep(std::span<const float> input, double step,
                                  std::size_t output_length);

/// Rate conversion with output length round(N * to_rate / from_rate).
std::vector<float> Resample(std::span<const float> input, int from_rate,
                            int to_rate);

/// Root-mean-square amplitude; 0 for an empty span.
double Rms(std::span<const float> samples);

std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileAtomic(const std::string& path, std::span<const uint8_t> bytes);
void WriteFileAtomic(const std::string& path, const std::string& text);

}  // namespace fieldasr

#endif  // FIELDASR_AUDIO_H_
