// src/features.cc

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

#include "fieldasr/features.h"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "fieldasr/errors.h"

namespace fieldasr {

namespace {

// FFTW's planner is not thread-safe; execution on a private plan is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

// (mel_bins x (fft_size/2 + 1)) triangular weights.
MatrixXdR MelFilterbank(const FeatureSpec& spec) {
  const int bins = spec.fft_size / 2 + 1;
  const double nyquist = kCanonicalRate / 2.0;
  const double low = HzToMel(FeatureSpec::kMelLowHz);
  const double high = HzToMel(nyquist);
  const double spacing = (high - low) / (spec.mel_bins + 1);
  MatrixXdR fb = MatrixXdR::Zero(spec.mel_bins, bins);
  for (int m = 0; m < spec.mel_bins; ++m) {
    const double left = low + m * spacing;
    const double center = left + spacing;
    const double right = center + spacing;
    for (int k = 0; k < bins; ++k) {
      const double mel =
          HzToMel(static_cast<double>(k) * kCanonicalRate / spec.fft_size);
      if (mel > left && mel < right) {
        fb(m, k) = mel <= center ? (mel - left) / (center - left)
                                 : (right - mel) / (right - center);
      }
    }
  }
  return fb;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void FeatureSpec::Validate() const {
  if (window_ms <= 0 || hop_ms <= 0 || mel_bins <= 0 || fft_size <= 0) {
    throw ValidationError("feature parameters must be positive");
  }
  if (window_ms < hop_ms) {
    throw ValidationError("feature window must not be shorter than the hop");
  }
  if (mel_bins > fft_size / 2) {
    throw ValidationError("mel_bins must not exceed fft_size / 2");
  }
  if (window_samples() > fft_size) {
    throw ValidationError("analysis window does not fit in the FFT size");
  }
  if (!(log_floor > 0.0)) throw ValidationError("log_floor must be positive");
}

int FeatureFrameCount(std::size_t num_samples, const FeatureSpec& spec) {
  const auto n = static_cast<long>(num_samples);
  const long window = spec.window_samples();
  if (n < window) return 0;
  return static_cast<int>(1 + (n - window) / spec.hop_samples());
}

MatrixXdR ExtractFeatures(const AudioClip& clip, const FeatureSpec& spec) {
  spec.Validate();
  if (clip.sample_rate != kCanonicalRate) {
    throw ValidationError("features expect 16 kHz audio");
  }
  const int frames = FeatureFrameCount(clip.samples.size(), spec);
  if (frames == 0) {
    throw ValidationError("clip is shorter than one analysis window");
  }
  const int window = spec.window_samples();
  const int hop = spec.hop_samples();
  const int n_fft = spec.fft_size;
  const int bins = n_fft / 2 + 1;

  static thread_local FeatureSpec cached_spec{0, 0, 0, 0, 0.0};
  static thread_local MatrixXdR filterbank;
  if (!(cached_spec == spec)) {
    filterbank = MelFilterbank(spec);
    cached_spec = spec;
  }

  std::vector<double> hamming(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) {
    hamming[static_cast<std::size_t>(i)] =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window - 1));
  }

  std::unique_ptr<double, FftwFree> in(
      static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  std::unique_ptr<fftw_complex, FftwFree> out(static_cast<fftw_complex*>(
      fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(bins))));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftw_plan_dft_r2c_1d(n_fft, in.get(), out.get(), FFTW_ESTIMATE);
  }

  MatrixXdR features(frames, spec.mel_bins);
  Eigen::VectorXd power(bins);
  for (int f = 0; f < frames; ++f) {
    const std::size_t offset = static_cast<std::size_t>(f) *
                               static_cast<std::size_t>(hop);
    for (int i = 0; i < n_fft; ++i) {
      in.get()[i] = i < window ? clip.samples[offset + static_cast<std::size_t>(i)] *
                                     hamming[static_cast<std::size_t>(i)]
                               : 0.0;
    }
    fftw_execute(plan);
    for (int k = 0; k < bins; ++k) {
      power(k) = out.get()[k][0] * out.get()[k][0] +
                 out.get()[k][1] * out.get()[k][1];
    }
    Eigen::VectorXd mel = filterbank * power;
    for (int m = 0; m < spec.mel_bins; ++m) {
      features(f, m) = std::log(mel(m) + spec.log_floor);
    }
  }
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan);
  }
  return features;
}

}  // namespace fieldasr
