// src/augment.cc

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

#include "fieldasr/augment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "fieldasr/errors.h"

namespace fieldasr {

namespace {

std::string FormatValue(const char* key, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s=%g", key, v);
  return buf;
}

std::size_t RoundLength(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

// Normalized cross-correlation of two equal-length windows.
double Similarity(const float* a, const float* b, int n) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int i = 0; i < n; ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb + 1e-30);
}

}  // namespace

void AugmentSpec::Validate() const {
  for (double f : speed_factors) {
    if (!(f >= 0.5 && f <= 2.0)) {
      throw ValidationError(FormatValue("speed factor out of [0.5, 2]:", f));
    }
  }
  for (double s : pitch_semitones) {
    if (!(std::abs(s) <= 12.0)) {
      throw ValidationError(FormatValue("pitch shift beyond 12 semitones:", s));
    }
  }
  for (double snr : noise_snr_db) {
    if (!(snr >= 0.0 && snr <= 60.0)) {
      throw ValidationError(FormatValue("SNR out of [0, 60] dB:", snr));
    }
  }
}

uint64_t MixSeed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

AudioClip SpeedPerturb(const AudioClip& clip, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    throw ValidationError(FormatValue("speed factor out of [0.5, 2]:", factor));
  }
  if (factor == 1.0) return clip;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  const std::size_t length =
      RoundLength(static_cast<double>(clip.samples.size()) / factor);
  out.samples = ResampleByStep(clip.samples, factor, length);
  for (float& x : out.samples) x = std::clamp(x, -1.0f, 1.0f);
  return out;
}

AudioClip StretchToLength(const AudioClip& clip, std::size_t output_length,
                          const WsolaParams& params) {
  const int window = params.window;
  const int hop = params.synthesis_hop;
  const int radius = params.search_radius;
  const auto n_in = static_cast<long>(clip.samples.size());
  if (n_in < window) {
    throw ValidationError("clip is shorter than one analysis window (" +
                          std::to_string(window) + " samples)");
  }
  if (output_length == 0) throw ValidationError("empty stretch target");

  const double rate =
      static_cast<double>(n_in) / static_cast<double>(output_length);
  const auto m = static_cast<long>(output_length);
  const long frames =
      m <= window ? 1 : (m - window + hop - 1) / hop + 1;
  const long buffer = (frames - 1) * hop + window;

  std::vector<double> win(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) {
    win[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / window);
  }
  std::vector<double> acc(static_cast<std::size_t>(buffer), 0.0);
  std::vector<double> weight(static_cast<std::size_t>(buffer), 0.0);
  const float* x = clip.samples.data();
  const long last_start = n_in - window;

  long previous = 0;
  for (long k = 0; k < frames; ++k) {
    long pos = 0;
    if (k > 0) {
      const long natural = std::min(previous + hop, last_start);
      const long target = std::lround(static_cast<double>(k * hop) * rate);
      pos = std::clamp(target, 0L, last_start);
      double best = Similarity(x + pos, x + natural, window);
      // Search outward from the ideal position; ties keep the nearer offset.
      for (int d = 1; d <= radius; ++d) {
        for (long cand : {target - d, target + d}) {
          if (cand < 0 || cand > last_start) continue;
          double s = Similarity(x + cand, x + natural, window);
          if (s > best) {
            best = s;
            pos = cand;
          }
        }
      }
    }
    previous = pos;
    const long out_pos = k * hop;
    for (int i = 0; i < window; ++i) {
      const auto o = static_cast<std::size_t>(out_pos + i);
      acc[o] += win[static_cast<std::size_t>(i)] * x[pos + i];
      weight[o] += win[static_cast<std::size_t>(i)];
    }
  }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(output_length);
  for (long i = 0; i < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double v = weight[u] > 1e-12 ? acc[u] / weight[u] : 0.0;
    out.samples[u] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

AudioClip TimeStretch(const AudioClip& clip, double rate,
                      const WsolaParams& params) {
  if (!(rate >= 0.5 && rate <= 2.0)) {
    throw ValidationError(FormatValue("stretch rate out of [0.5, 2]:", rate));
  }
  const std::size_t length =
      RoundLength(static_cast<double>(clip.samples.size()) / rate);
  return StretchToLength(clip, length, params);
}

AudioClip PitchShift(const AudioClip& clip, double semitones) {
  if (!(std::abs(semitones) <= 12.0)) {
    throw ValidationError(
        FormatValue("pitch shift beyond 12 semitones:", semitones));
  }
  const double factor = std::exp2(semitones / 12.0);
  AudioClip shifted = SpeedPerturb(clip, factor);
  return StretchToLength(shifted, clip.samples.size());
}

AudioClip AddNoise(const AudioClip& clip, double snr_db, uint64_t seed) {
  if (!std::isfinite(snr_db)) throw ValidationError("SNR must be finite");
  const double signal_rms = Rms(clip.samples);
  if (!(signal_rms > 0.0)) {
    throw ValidationError("cannot set an SNR on a silent clip");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(clip.samples.size());
  double power = 0.0;
  for (double& n : noise) {
    n = gauss(rng);
    power += n * n;
  }
  const double noise_rms = std::sqrt(power / static_cast<double>(noise.size()));
  const double scale =
      signal_rms / std::pow(10.0, snr_db / 20.0) / std::max(noise_rms, 1e-30);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  for (std::size_t i = 0; i < noise.size(); ++i) {
    out.samples[i] = static_cast<float>(
        std::clamp(clip.samples[i] + scale * noise[i], -1.0, 1.0));
  }
  return out;
}

std::vector<AugmentedItem> Expand(std::span<const LabeledClip> clips,
                                  const AugmentSpec& spec) {
  spec.Validate();
  std::vector<AugmentedItem> out;
  out.reserve(clips.size() * spec.VariantsPerClip());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const LabeledClip& item = clips[i];
    const uint64_t clip_seed = MixSeed(spec.seed, i);
    uint64_t variant = 0;
    out.push_back({item.clip, item.transcript, "original"});
    for (double f : spec.speed_factors) {
      ++variant;
      out.push_back({SpeedPerturb(item.clip, f), item.transcript,
                     FormatValue("speed", f)});
    }
    for (double s : spec.pitch_semitones) {
      ++variant;
      out.push_back({PitchShift(item.clip, s), item.transcript,
                     FormatValue("pitch", s)});
    }
    for (double snr : spec.noise_snr_db) {
      ++variant;
      out.push_back({AddNoise(item.clip, snr, MixSeed(clip_seed, variant)),
                     item.transcript, FormatValue("snr", snr)});
    }
  }
  return out;
}

}  // namespace fieldasr
