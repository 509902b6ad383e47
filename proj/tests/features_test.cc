// tests/features_test.cc

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

#include <cmath>

#include <gtest/gtest.h>

#include "fieldasr/errors.h"
#include "test_util.h"

namespace fieldasr {
namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

TEST(Features, FrameCount) {
  FeatureSpec spec;
  EXPECT_EQ(spec.window_samples(), 400);
  EXPECT_EQ(spec.hop_samples(), 160);
  EXPECT_EQ(FeatureFrameCount(16000, spec), 98);
  EXPECT_EQ(FeatureFrameCount(400, spec), 1);
  EXPECT_EQ(FeatureFrameCount(399, spec), 0);
  MatrixXdR f = ExtractFeatures(fieldasr_test::ToneClip(440, 1.0), spec);
  EXPECT_EQ(f.rows(), 98);
  EXPECT_EQ(f.cols(), 40);
}

TEST(Features, SilenceHitsTheFloor) {
  FeatureSpec spec;
  MatrixXdR f = ExtractFeatures(AudioClip{std::vector<float>(8000), 16000}, spec);
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    EXPECT_DOUBLE_EQ(f.data()[i], std::log(spec.log_floor));
  }
}

TEST(Features, ToneLandsInNearestMelBin) {
  FeatureSpec spec;
  // Filter centers evenly spaced in mel between 20 Hz and 8 kHz.
  const double lo = HzToMel(FeatureSpec::kMelLowHz), hi = HzToMel(8000.0);
  for (double hz : {300.0, 1000.0, 2500.0, 5000.0}) {
    int nearest = 0;
    double best = 1e300;
    for (int b = 0; b < spec.mel_bins; ++b) {
      const double center = lo + (hi - lo) * (b + 1) / (spec.mel_bins + 1);
      const double d = std::abs(center - HzToMel(hz));
      if (d < best) {
        best = d;
        nearest = b;
      }
    }
    MatrixXdR f = ExtractFeatures(fieldasr_test::ToneClip(hz, 0.5), spec);
    Eigen::Index arg = 0;
    f.row(f.rows() / 2).maxCoeff(&arg);
    EXPECT_EQ(arg, nearest) << hz;
  }
}

TEST(Features, Deterministic) {
  AudioClip c = fieldasr_test::ToneClip(700, 0.3);
  EXPECT_EQ(ExtractFeatures(c, {}), ExtractFeatures(c, {}));
}

TEST(Features, Errors) {
  FeatureSpec spec;
  EXPECT_THROW(ExtractFeatures(AudioClip{std::vector<float>(399), 16000}, spec),
               ValidationError);
  EXPECT_THROW(ExtractFeatures(AudioClip{std::vector<float>(800), 8000}, spec),
               ValidationError);
  FeatureSpec bad;
  bad.hop_ms = 30;
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = FeatureSpec{};
  bad.mel_bins = 300;
  EXPECT_THROW(bad.Validate(), ValidationError);
}

}  // namespace
}  // namespace fieldasr
