// fieldasr/augment.h

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

#ifndef FIELDASR_AUGMENT_H_
#define FIELDASR_AUGMENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fieldasr/audio.h"

namespace fieldasr {

struct AugmentSpec {
  std::vector<double> speed_factors{0.9, 1.1};
  std::vector<double> pitch_semitones{-2.0, 2.0};
  std::vector<double> noise_snr_db{15.0, 25.0};
  uint64_t seed = 0;

  /// No perturbations: Expand() yields the originals only.
  static AugmentSpec None() { return {{}, {}, {}, 0}; }

  /// Throws ValidationError unless speeds are in [0.5, 2], |semitones| <= 12
  /// and SNRs are in [0, 60] dB.
  void Validate() const;

  std::size_t VariantsPerClip() const {
    return 1 + speed_factors.size() + pitch_semitones.size() +
           noise_snr_db.size();
  }
};

/// WSOLA parameters at 16 kHz: 25 ms window, 10 ms synthesis hop, +-5 ms
/// search.
struct WsolaParams {
  int window = 400;
  int synthesis_hop = 160;
  int search_radius = 80;
};

/// Resampling-based speed change: duration scales by 1/factor and pitch by
/// factor. factor == 1 returns the input unchanged.
AudioClip SpeedPerturb(const AudioClip& clip, double factor);

/// Pitch-preserving WSOLA stretch; output length round(N / rate).
AudioClip TimeStretch(const AudioClip& clip, double rate,
                      const WsolaParams& params = {});

/// WSOLA stretch to an exact output length (no range check on the implied
/// rate beyond positivity).
AudioClip StretchToLength(const AudioClip& clip, std::size_t output_length,
                          const WsolaParams& params = {});

/// Speed perturbation by 2^(semitones/12), then stretched back to the input
/// length.
AudioClip PitchShift(const AudioClip& clip, double semitones);

/// Additive white Gaussian noise at exactly `snr_db` (signal RMS over noise
/// RMS, before clamping to [-1, 1]).
AudioClip AddNoise(const AudioClip& clip, double snr_db, uint64_t seed);

struct AugmentedItem {
  AudioClip clip;
  std::string transcript;
  std::string variant;  // "original", "speed=0.9", "pitch=-2", "snr=15", ...
};

struct LabeledClip {
  AudioClip clip;
  std::string transcript;
};

/// Every clip yields the original plus one item per configured value.
/// Noise seeds are derived from (spec.seed, clip index, variant index), so
/// the result does not depend on processing order.
std::vector<AugmentedItem> Expand(std::span<const LabeledClip> clips,
                                  const AugmentSpec& spec);

/// splitmix64 finalizer, used to derive independent seeds.
uint64_t MixSeed(uint64_t a, uint64_t b);

}  // namespace fieldasr

#endif  // FIELDASR_AUGMENT_H_
