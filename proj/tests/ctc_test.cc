// tests/ctc_test.cc

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

#include "fieldasr/ctc.h"

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "fieldasr/errors.h"

namespace fieldasr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LogProbMatrix Uniform(int t, int v) {
  return LogProbMatrix::FromLogits(MatrixXdR::Zero(t, v));
}

MatrixXdR RandomLogits(int t, int v, std::mt19937_64& rng, double scale = 2.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXdR m(t, v);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < v; ++j) m(i, j) = g(rng);
  }
  return m;
}

std::vector<int> RandomTarget(int max_len, int v, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> sym(1, v - 1);
  std::vector<int> t(static_cast<std::size_t>(len(rng)));
  for (int& s : t) s = sym(rng);
  return t;
}

// Every label sequence over symbols 1..v-1 of length <= max_len.
std::vector<std::vector<int>> AllLabels(int v, int max_len) {
  std::vector<std::vector<int>> out = {{}};
  std::vector<std::vector<int>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& p : frontier) {
      for (int s = 1; s < v; ++s) {
        auto q = p;
        q.push_back(s);
        next.push_back(q);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

TEST(Collapse, Examples) {
  Vocab vocab({"a", "b"});
  EXPECT_EQ(Collapse(std::vector<int>{1, 1, 0, 2}, vocab), "ab");
  EXPECT_EQ(Collapse(std::vector<int>{0, 0, 0}, vocab), "");
  EXPECT_EQ(Collapse(std::vector<int>{1, 0, 1}, vocab), "aa");
  EXPECT_EQ(CollapseIds(std::vector<int>{2, 2, 1, 1, 0, 1}, 3),
            (std::vector<int>{2, 1, 1}));
  EXPECT_THROW(Collapse(std::vector<int>{3}, vocab), ValidationError);
}

TEST(CtcNll, UniformExamples) {
  const std::vector<int> a = {1}, aa = {1, 1};
  EXPECT_NEAR(CtcNll(Uniform(1, 2), a), std::log(2.0), 1e-12);
  EXPECT_NEAR(CtcNll(Uniform(2, 2), a), -std::log(0.75), 1e-12);
  EXPECT_EQ(CtcNll(Uniform(1, 2), aa), kInf);
  EXPECT_NEAR(CtcNll(Uniform(3, 2), aa), -std::log(1.0 / 8.0), 1e-12);
  EXPECT_EQ(MinFramesForTarget(aa), 3);
  EXPECT_EQ(MinFramesForTarget(std::vector<int>{1, 2, 2, 2}), 6);
}

TEST(CtcNll, EmptyTarget) {
  std::mt19937_64 rng(1);
  LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(2, 3, rng));
  EXPECT_NEAR(CtcNll(lp, std::vector<int>{}), -(lp(0, 0) + lp(1, 0)), 1e-12);
  EXPECT_NEAR(BruteForceNll(lp, std::vector<int>{}), -(lp(0, 0) + lp(1, 0)),
              1e-12);
}

TEST(CtcNll, RejectsBadTargets) {
  EXPECT_THROW(CtcNll(Uniform(3, 3), std::vector<int>{0}), ValidationError);
  EXPECT_THROW(CtcNll(Uniform(3, 3), std::vector<int>{3}), ValidationError);
  EXPECT_THROW(CtcNll(Uniform(3, 3), std::vector<int>{-1}), ValidationError);
}

TEST(CtcNll, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> tdist(1, 4), vdist(2, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int t = tdist(rng), v = vdist(rng);
    LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(t, v, rng));
    const std::vector<int> target = RandomTarget(3, v, rng);
    const double a = CtcNll(lp, target), b = BruteForceNll(lp, target);
    if (std::isinf(b)) {
      EXPECT_TRUE(std::isinf(a));
    } else {
      EXPECT_NEAR(a, b, 1e-9);
    }
  }
}

TEST(CtcNll, LabelPosteriorsSumToOne) {
  std::mt19937_64 rng(7);
  for (int t = 1; t <= 4; ++t) {
    for (int v = 2; v <= 3; ++v) {
      LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(t, v, rng));
      double total = 0.0;
      for (const auto& label : AllLabels(v, t)) {
        total += std::exp(-CtcNll(lp, label));
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(CtcNll, NoNanForTinyProbabilities) {
  MatrixXdR logits = MatrixXdR::Zero(6, 3);
  logits(2, 1) = 69.0;  // other entries near 1e-30
  logits(3, 2) = 69.0;
  LogProbMatrix lp = LogProbMatrix::FromLogits(logits);
  const double nll = CtcNll(lp, std::vector<int>{2, 1});
  EXPECT_TRUE(std::isfinite(nll));
  CtcResult r = CtcLossAndGrad(lp, std::vector<int>{2, 1});
  EXPECT_TRUE(r.grad.allFinite());
}

TEST(CtcGrad, RowsSumToZero) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(8, 4, rng));
    MatrixXdR g = CtcGrad(lp, RandomTarget(3, 4, rng));
    for (int i = 0; i < g.rows(); ++i) EXPECT_NEAR(g.row(i).sum(), 0.0, 1e-8);
  }
}

TEST(CtcGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> tdist(1, 4), vdist(2, 3);
  int checked = 0;
  while (checked < 40) {
    const int t = tdist(rng), v = vdist(rng);
    MatrixXdR logits = RandomLogits(t, v, rng, 1.0);
    const std::vector<int> target = RandomTarget(3, v, rng);
    LogProbMatrix lp = LogProbMatrix::FromLogits(logits);
    if (!std::isfinite(CtcNll(lp, target))) continue;
    MatrixXdR g = CtcGrad(lp, target);
    MatrixXdR fd(t, v);
    const double h = 1e-5;
    for (int i = 0; i < t; ++i) {
      for (int j = 0; j < v; ++j) {
        MatrixXdR p = logits, m = logits;
        p(i, j) += h;
        m(i, j) -= h;
        fd(i, j) = (CtcNll(LogProbMatrix::FromLogits(p), target) -
                    CtcNll(LogProbMatrix::FromLogits(m), target)) /
                   (2 * h);
      }
    }
    const double rel = (g - fd).norm() / std::max(1e-12, fd.norm() + g.norm());
    EXPECT_LT(rel, 1e-4);
    ++checked;
  }
}

TEST(CtcGrad, SignPushesTowardTarget) {
  MatrixXdR g = CtcGrad(Uniform(1, 2), std::vector<int>{1});
  EXPECT_LT(g(0, 1), 0.0);
  EXPECT_GT(g(0, 0), 0.0);
  EXPECT_THROW(CtcGrad(Uniform(1, 2), std::vector<int>{1, 1}), DataError);
  CtcResult r = CtcLossAndGrad(Uniform(1, 2), std::vector<int>{1, 1});
  EXPECT_FALSE(r.feasible());
  EXPECT_EQ(r.nll, kInf);
}

TEST(BruteForce, RefusesLargeInstances) {
  EXPECT_THROW(BruteForceNll(Uniform(13, 3), std::vector<int>{1}),
               ValidationError);
}

TEST(LogProbMatrix, Validation) {
  MatrixXdR bad(1, 2);
  bad << std::log(0.5), std::log(0.6);
  EXPECT_THROW(LogProbMatrix::FromLogProbs(bad), ValidationError);
  MatrixXdR good(1, 2);
  good << std::log(0.25), std::log(0.75);
  EXPECT_NO_THROW(LogProbMatrix::FromLogProbs(good));
  std::mt19937_64 rng(9);
  LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(5, 4, rng, 30.0));
  for (int t = 0; t < lp.frames(); ++t) {
    double s = -kInf;
    for (int v = 0; v < lp.vocab_size(); ++v) s = LogAdd(s, lp(t, v));
    EXPECT_NEAR(s, 0.0, 1e-9);
  }
  EXPECT_EQ(lp.Rows(1, 3).frames(), 2);
  EXPECT_EQ(LogAdd(-kInf, -kInf), -kInf);
}

LogProbMatrix OneHot(const std::vector<int>& path, int v) {
  MatrixXdR m = MatrixXdR::Constant(static_cast<int>(path.size()), v, -20.0);
  for (std::size_t t = 0; t < path.size(); ++t) m(t, path[t]) = 20.0;
  return LogProbMatrix::FromLogits(m);
}

TEST(GreedyDecode, Examples) {
  Vocab vocab({"a", "b"});
  EXPECT_EQ(GreedyDecode(OneHot({1, 1}, 3), vocab), "a");
  EXPECT_EQ(GreedyDecode(OneHot({1, 0, 1}, 3), vocab), "aa");
  EXPECT_EQ(GreedyDecode(OneHot({2, 0, 1}, 3), vocab), "ba");
  // Exact ties resolve to the lowest index (blank here).
  EXPECT_EQ(GreedyDecode(Uniform(3, 3), vocab), "");
  MatrixXdR tie = MatrixXdR::Zero(1, 3);
  tie(0, 0) = -1.0;
  EXPECT_EQ(GreedyDecode(LogProbMatrix::FromLogits(tie), vocab), "a");
}

TEST(BeamDecode, OneHotMatchesGreedy) {
  Vocab vocab({"a", "b"});
  for (const auto& path : std::vector<std::vector<int>>{
           {1, 1, 0, 2}, {2, 0, 2}, {0, 0}, {1, 2, 1, 2}}) {
    LogProbMatrix lp = OneHot(path, 3);
    for (int w : {1, 2, 5}) {
      EXPECT_EQ(BeamDecode(lp, vocab, w), GreedyDecode(lp, vocab));
    }
  }
  EXPECT_THROW(BeamDecode(Uniform(2, 3), vocab, 0), ValidationError);
}

TEST(BeamDecode, WideBeamFindsExactArgmax) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> tdist(1, 4), vdist(2, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int t = tdist(rng), v = vdist(rng);
    LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(t, v, rng));
    double best = kInf;
    std::vector<int> best_label;
    for (const auto& label : AllLabels(v, t)) {
      const double nll = BruteForceNll(lp, label);
      if (nll < best) {
        best = nll;
        best_label = label;
      }
    }
    const int width = static_cast<int>(std::pow(v, t));
    const std::vector<int> got = BeamDecodeIds(lp, width);
    EXPECT_NEAR(CtcNll(lp, got), best, 1e-12);
  }
}

TEST(BeamDecode, WiderBeamNeverScoresWorse) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    LogProbMatrix lp = LogProbMatrix::FromLogits(RandomLogits(12, 4, rng, 1.5));
    double prev = kInf;
    for (int w = 1; w <= 8; ++w) {
      const double nll = CtcNll(lp, BeamDecodeIds(lp, w));
      EXPECT_LE(nll, prev + 1e-12) << "width " << w;
      prev = std::min(prev, nll);
    }
    EXPECT_LE(CtcNll(lp, BeamDecodeIds(lp, 8)),
              CtcNll(lp, BeamDecodeIds(lp, 1)) + 1e-12);
  }
}

}  // namespace
}  // namespace fieldasr
