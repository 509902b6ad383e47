// tests/acoustic_test.cc

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

#include "fieldasr/acoustic.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fieldasr/errors.h"
#include "test_util.h"

namespace fieldasr {
namespace {

Vocab SmallVocab() { return Vocab({" ", "a", "b", "c"}); }

ModelShape TinyShape() { return ModelShape{3, 3, 8, 8}; }

AudioClip RandomClip(double seconds, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.1);
  AudioClip c;
  c.samples.resize(static_cast<std::size_t>(seconds * 16000));
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    c.samples[i] = static_cast<float>(
        g(rng) + 0.3 * std::sin(2 * M_PI * (300 + 5 * (i / 1600)) * i / 16000));
  }
  return c;
}

TEST(AcousticModel, ShapesAndNormalization) {
  std::mt19937_64 rng(1);
  AcousticModel m = AcousticModel::Initialize({}, {}, SmallVocab(), 5);
  AudioClip clip = RandomClip(0.7, rng);
  LogProbMatrix lp = m.Forward(clip);
  EXPECT_EQ(lp.frames(), FeatureFrameCount(clip.samples.size(), {}));
  EXPECT_EQ(lp.vocab_size(), 5);
  for (int t = 0; t < lp.frames(); ++t) {
    EXPECT_NEAR(lp.values().row(t).array().exp().sum(), 1.0, 1e-9);
  }
  EXPECT_EQ(m.ParameterCount(),
            static_cast<std::size_t>(5 * 40 * 64 + 64 + 9 * 64 * 64 + 64 +
                                     64 * 5 + 5));
}

TEST(AcousticModel, ZeroHeadGivesUniformRows) {
  std::mt19937_64 rng(2);
  AcousticModel m = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 5);
  m.mutable_params().head_weight.setZero();
  m.mutable_params().head_bias.setZero();
  LogProbMatrix lp = m.Forward(RandomClip(0.3, rng));
  for (int t = 0; t < lp.frames(); ++t) {
    for (int v = 0; v < lp.vocab_size(); ++v) {
      EXPECT_NEAR(lp(t, v), -std::log(5.0), 1e-12);
    }
  }
}

TEST(AcousticModel, InitializationIsSeeded) {
  AcousticModel a = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 5);
  AcousticModel b = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 5);
  AcousticModel c = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 6);
  EXPECT_EQ(a.params().encoder_weight, b.params().encoder_weight);
  EXPECT_NE(a.params().encoder_weight, c.params().encoder_weight);
  EXPECT_TRUE(a.params().encoder_bias.isZero());
  // He-normal: std sqrt(2 / fan_in) for the context layer (fan_in 3 * 8).
  AcousticModel big = AcousticModel::Initialize({}, {}, SmallVocab(), 1);
  const auto& w = big.params().context_weight;
  const double var = w.cast<double>().squaredNorm() / w.size();
  EXPECT_NEAR(var, 2.0 / (9 * 64), 0.1 * 2.0 / (9 * 64));
  EXPECT_THROW((ModelShape{4, 3, 8, 8}.Validate()), ValidationError);
}

// Loss as a function of the float weights, computed in double.
double Loss(const AcousticModel& m, const MatrixXdR& feats,
            const std::vector<int>& target) {
  return CtcNll(m.ForwardFeatures(feats), target);
}

TEST(AcousticModel, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    AcousticModel m =
        AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 100 + trial);
    for (int g = 0; g < kNumParamGroups; ++g) {
      auto [w, b] = m.mutable_params().Group(static_cast<ParamGroup>(g));
      std::normal_distribution<float> nb(0.0f, 0.1f);
      for (Eigen::Index i = 0; i < b->size(); ++i) (*b)(i) = nb(rng);
    }
    const MatrixXdR feats = ExtractFeatures(RandomClip(0.25, rng), {});
    const std::vector<int> target = {2, 3, 2};
    ModelGradients grads = m.Gradients(feats, target);
    ASSERT_FALSE(grads.skipped);
    EXPECT_NEAR(grads.nll, Loss(m, feats, target), 1e-9);
    for (int t = 0; t < grads.logit_grad.rows(); ++t) {
      EXPECT_NEAR(grads.logit_grad.row(t).sum(), 0.0, 1e-8);
    }
    for (int g = 0; g < kNumParamGroups; ++g) {
      const auto group = static_cast<ParamGroup>(g);
      auto [gw, gb] = grads.grads.Group(group);
      double num = 0.0, den = 0.0;
      auto check = [&](float* p, double analytic) {
        const float orig = *p;
        const float plus = orig + 1e-4f, minus = orig - 1e-4f;
        *p = plus;
        const double lp = Loss(m, feats, target);
        *p = minus;
        const double lm = Loss(m, feats, target);
        *p = orig;
        const double fd =
            (lp - lm) / (static_cast<double>(plus) - static_cast<double>(minus));
        num += (fd - analytic) * (fd - analytic);
        den += fd * fd;
      };
      auto [w, b] = m.mutable_params().Group(group);
      for (Eigen::Index i = 0; i < w->size(); ++i) {
        check(w->data() + i, gw->data()[i]);
      }
      for (Eigen::Index i = 0; i < b->size(); ++i) {
        check(b->data() + i, gb->data()[i]);
      }
      EXPECT_LT(std::sqrt(num / std::max(den, 1e-30)), 1e-3)
          << ParamGroupName(group) << " trial " << trial;
    }
  }
}

TEST(AcousticModel, FreezeFlagsAreReported) {
  std::mt19937_64 rng(4);
  AcousticModel m = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 1);
  const MatrixXdR feats = ExtractFeatures(RandomClip(0.3, rng), {});
  ModelGradients g = m.Gradients(feats, std::vector<int>{1}, {true, false});
  EXPECT_TRUE(g.frozen[0]);
  EXPECT_FALSE(g.frozen[1]);
  EXPECT_FALSE(g.frozen[2]);
  EXPECT_GT(g.grads.encoder_weight.norm(), 0.0);  // still computed
}

TEST(AcousticModel, InfeasibleTargetIsSkipped) {
  std::mt19937_64 rng(5);
  AcousticModel m = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 1);
  const MatrixXdR feats = ExtractFeatures(RandomClip(0.05, rng), {});
  std::vector<int> target(10, 1);
  ModelGradients g = m.Gradients(feats, target);
  EXPECT_TRUE(g.skipped);
  EXPECT_TRUE(std::isinf(g.nll));
  EXPECT_TRUE(g.grads.head_weight.isZero());
  EXPECT_TRUE(g.grads.encoder_weight.isZero());
}

TEST(ModelFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(6);
  AcousticModel m = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 9);
  m.mutable_params().head_bias.setConstant(0.25f);
  const std::vector<uint8_t> bytes = SaveModel(m);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NLR1");
  AcousticModel back = LoadModel(bytes);
  EXPECT_EQ(back.vocab(), m.vocab());
  EXPECT_EQ(back.shape(), m.shape());
  EXPECT_EQ(back.feature_spec(), m.feature_spec());
  AudioClip clip = RandomClip(0.4, rng);
  EXPECT_EQ(back.Forward(clip).values(), m.Forward(clip).values());
  EXPECT_EQ(SaveModel(back), bytes);
}

TEST(ModelFile, Corruption) {
  AcousticModel m = AcousticModel::Initialize({}, TinyShape(), SmallVocab(), 9);
  std::vector<uint8_t> bytes = SaveModel(m);
  std::vector<uint8_t> bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(LoadModel(bad), ValidationError);
  bad = bytes;
  bad[3] = '2';
  EXPECT_THROW(LoadModel(bad), ValidationError);
  bad.assign(bytes.begin(), bytes.end() - 3);
  EXPECT_THROW(LoadModel(bad), ValidationError);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(LoadModel(bad), ValidationError);
  Vocab other({"a", "b"});
  EXPECT_THROW(LoadModel(bytes, &other), ValidationError);
  Vocab same = SmallVocab();
  EXPECT_NO_THROW(LoadModel(bytes, &same));
}

TEST(NormalizeFeatures, ZeroMeanPerChannel) {
  std::mt19937_64 rng(7);
  MatrixXdR f = ExtractFeatures(RandomClip(0.5, rng), {});
  MatrixXdR n = NormalizeFeatures(f);
  for (Eigen::Index c = 0; c < n.cols(); ++c) {
    EXPECT_NEAR(n.col(c).mean(), 0.0, 1e-9);
  }
}

}  // namespace
}  // namespace fieldasr
