// fieldasr/features.h

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

#ifndef FIELDASR_FEATURES_H_
#define FIELDASR_FEATURES_H_

#include <cstddef>

#include "fieldasr/audio.h"
#include "fieldasr/ctc.h"

namespace fieldasr {

/// Log-mel front end. Filters are triangular on the HTK mel scale
/// (2595 * log10(1 + f / 700)) with centers evenly spaced in mel between
/// kMelLowHz and Nyquist; frames use a symmetric Hamming window.
struct FeatureSpec {
  int window_ms = 25;
  int hop_ms = 10;
  int mel_bins = 40;
  int fft_size = 512;
  double log_floor = 1e-10;

  static constexpr double kMelLowHz = 20.0;

  int window_samples() const { return kCanonicalRate * window_ms / 1000; }
  int hop_samples() const { return kCanonicalRate * hop_ms / 1000; }

  /// Throws ValidationError if window < hop, mel_bins > fft_size / 2 or the
  /// window does not fit in the FFT.
  void Validate() const;

  bool operator==(const FeatureSpec&) const = default;
};

/// 1 + floor((N - window) / hop), or 0 when N < window.
int FeatureFrameCount(std::size_t num_samples, const FeatureSpec& spec);

/// frames x mel_bins matrix of log(mel energy + log_floor). Throws
/// ValidationError when the clip is shorter than one window.
MatrixXdR ExtractFeatures(const AudioClip& clip, const FeatureSpec& spec);

}  // namespace fieldasr

#endif  // FIELDASR_FEATURES_H_
