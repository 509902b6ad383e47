// src/ctc.cc

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fieldasr/errors.h"

namespace fieldasr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckTarget(std::span<const int> target, int vocab_size) {
  for (int id : target) {
    if (id == Vocab::kBlank) {
      throw ValidationError("CTC target contains the blank symbol");
    }
    if (id < 0 || id >= vocab_size) {
      throw ValidationError("CTC target index " + std::to_string(id) +
                            " out of range");
    }
  }
}

// Blank-extended target: blank, l1, blank, l2, ..., blank.
std::vector<int> Extend(std::span<const int> target) {
  std::vector<int> ext(2 * target.size() + 1, Vocab::kBlank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

// Forward variables in log space: alpha(t, s) includes the emission at t.
MatrixXdR Alpha(const LogProbMatrix& lp, const std::vector<int>& ext) {
  const int frames = lp.frames();
  const auto states = static_cast<int>(ext.size());
  MatrixXdR alpha = MatrixXdR::Constant(frames, states, kNegInf);
  alpha(0, 0) = lp(0, ext[0]);
  if (states > 1) alpha(0, 1) = lp(0, ext[1]);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[s] != Vocab::kBlank && ext[s] != ext[s - 2]) {
        a = LogAdd(a, alpha(t - 1, s - 2));
      }
      alpha(t, s) = a == kNegInf ? kNegInf : a + lp(t, ext[s]);
    }
  }
  return alpha;
}

// Backward variables: beta(t, s) also includes the emission at t.
MatrixXdR Beta(const LogProbMatrix& lp, const std::vector<int>& ext) {
  const int frames = lp.frames();
  const auto states = static_cast<int>(ext.size());
  MatrixXdR beta = MatrixXdR::Constant(frames, states, kNegInf);
  beta(frames - 1, states - 1) = lp(frames - 1, ext[states - 1]);
  if (states > 1) beta(frames - 1, states - 2) = lp(frames - 1, ext[states - 2]);
  for (int t = frames - 2; t >= 0; --t) {
    for (int s = 0; s < states; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < states) b = LogAdd(b, beta(t + 1, s + 1));
      if (s + 2 < states && ext[s] != Vocab::kBlank && ext[s + 2] != ext[s]) {
        b = LogAdd(b, beta(t + 1, s + 2));
      }
      beta(t, s) = b == kNegInf ? kNegInf : b + lp(t, ext[s]);
    }
  }
  return beta;
}

double FinalLogLikelihood(const MatrixXdR& alpha) {
  const auto last = alpha.rows() - 1;
  const auto states = alpha.cols();
  double ll = alpha(last, states - 1);
  if (states > 1) ll = LogAdd(ll, alpha(last, states - 2));
  return ll;
}

}  // namespace

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

LogProbMatrix LogProbMatrix::FromLogits(const MatrixXdR& logits) {
  LogProbMatrix lp;
  lp.values_.resize(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    lp.values_.row(t) = logits.row(t).array() - lse;
  }
  return lp;
}

LogProbMatrix LogProbMatrix::FromLogProbs(MatrixXdR values, double tolerance) {
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    double lse = kNegInf;
    for (Eigen::Index v = 0; v < values.cols(); ++v) {
      if (values(t, v) > tolerance) {
        throw ValidationError("log-probability above zero in row " +
                              std::to_string(t));
      }
      lse = LogAdd(lse, values(t, v));
    }
    if (!(std::abs(lse) <= tolerance)) {
      throw ValidationError("row " + std::to_string(t) +
                            " is not normalized (logsumexp " +
                            std::to_string(lse) + ")");
    }
  }
  LogProbMatrix lp;
  lp.values_ = std::move(values);
  return lp;
}

LogProbMatrix LogProbMatrix::Rows(int begin, int end) const {
  LogProbMatrix lp;
  lp.values_ = values_.middleRows(begin, end - begin);
  return lp;
}

std::vector<int> CollapseIds(std::span<const int> path, int vocab_size) {
  std::vector<int> out;
  int previous = -1;
  for (int id : path) {
    if (id < 0 || id >= vocab_size) {
      throw ValidationError("path index " + std::to_string(id) +
                            " out of range");
    }
    if (id != previous && id != Vocab::kBlank) out.push_back(id);
    previous = id;
  }
  return out;
}

std::string Collapse(std::span<const int> path, const Vocab& vocab) {
  return vocab.Render(CollapseIds(path, vocab.size()));
}

int MinFramesForTarget(std::span<const int> target) {
  int frames = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++frames;
  }
  return frames;
}

double CtcNll(const LogProbMatrix& lp, std::span<const int> target) {
  CheckTarget(target, lp.vocab_size());
  if (lp.frames() < MinFramesForTarget(target)) return kInf;
  if (lp.frames() == 0) return 0.0;  // empty target on empty input
  const double ll = FinalLogLikelihood(Alpha(lp, Extend(target)));
  return ll == kNegInf ? kInf : -ll;
}

CtcResult CtcLossAndGrad(const LogProbMatrix& lp,
                         std::span<const int> target) {
  CheckTarget(target, lp.vocab_size());
  CtcResult result;
  if (lp.frames() == 0 || lp.frames() < MinFramesForTarget(target)) {
    result.nll = lp.frames() == 0 && target.empty() ? 0.0 : kInf;
    return result;
  }
  const std::vector<int> ext = Extend(target);
  const MatrixXdR alpha = Alpha(lp, ext);
  const double ll = FinalLogLikelihood(alpha);
  if (ll == kNegInf) {
    result.nll = kInf;
    return result;
  }
  const MatrixXdR beta = Beta(lp, ext);
  const int frames = lp.frames();
  const int vocab = lp.vocab_size();
  result.nll = -ll;
  result.grad = lp.values().array().exp();
  std::vector<double> occupancy(static_cast<std::size_t>(vocab));
  for (int t = 0; t < frames; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kNegInf);
    for (std::size_t s = 0; s < ext.size(); ++s) {
      const int k = ext[s];
      const double a = alpha(t, static_cast<Eigen::Index>(s));
      const double b = beta(t, static_cast<Eigen::Index>(s));
      if (a == kNegInf || b == kNegInf) continue;
      occupancy[static_cast<std::size_t>(k)] =
          LogAdd(occupancy[static_cast<std::size_t>(k)], a + b - lp(t, k));
    }
    for (int k = 0; k < vocab; ++k) {
      const double occ = occupancy[static_cast<std::size_t>(k)];
      if (occ != kNegInf) result.grad(t, k) -= std::exp(occ - ll);
    }
  }
  return result;
}

MatrixXdR CtcGrad(const LogProbMatrix& lp, std::span<const int> target) {
  CtcResult r = CtcLossAndGrad(lp, target);
  if (!r.feasible()) throw DataError("CTC target is infeasible for the input");
  return std::move(r.grad);
}

double BruteForceNll(const LogProbMatrix& lp, std::span<const int> target) {
  CheckTarget(target, lp.vocab_size());
  const int frames = lp.frames();
  const int vocab = lp.vocab_size();
  double paths = 1.0;
  for (int t = 0; t < frames; ++t) paths *= vocab;
  if (paths > 1e6) {
    throw ValidationError("brute-force CTC limited to 10^6 paths");
  }
  const std::vector<int> want(target.begin(), target.end());
  std::vector<int> path(static_cast<std::size_t>(frames), 0);
  double total = 0.0;
  while (true) {
    if (CollapseIds(path, vocab) == want) {
      double p = 1.0;
      for (int t = 0; t < frames; ++t) {
        p *= std::exp(lp(t, path[static_cast<std::size_t>(t)]));
      }
      total += p;
    }
    // Odometer increment over V^T paths.
    int t = frames - 1;
    while (t >= 0 && ++path[static_cast<std::size_t>(t)] == vocab) {
      path[static_cast<std::size_t>(t)] = 0;
      --t;
    }
    if (t < 0) break;
  }
  return total > 0.0 ? -std::log(total) : kInf;
}

std::vector<int> GreedyDecodeIds(const LogProbMatrix& lp) {
  std::vector<int> path(static_cast<std::size_t>(lp.frames()));
  for (int t = 0; t < lp.frames(); ++t) {
    int best = 0;
    for (int v = 1; v < lp.vocab_size(); ++v) {
      if (lp(t, v) > lp(t, best)) best = v;
    }
    path[static_cast<std::size_t>(t)] = best;
  }
  return CollapseIds(path, lp.vocab_size());
}

std::string GreedyDecode(const LogProbMatrix& lp, const Vocab& vocab) {
  return vocab.Render(GreedyDecodeIds(lp));
}

namespace {

// Prefixes surviving a single prefix beam search of the given width.
std::vector<std::vector<int>> PrefixBeam(const LogProbMatrix& lp, int width) {
  struct Score {
    double blank = kNegInf;      // paths ending in blank
    double non_blank = kNegInf;  // paths ending in the prefix's last symbol
    double total() const { return LogAdd(blank, non_blank); }
  };
  using Beam = std::map<std::vector<int>, Score>;

  auto prune = [width](Beam& beam) {
    std::vector<std::pair<std::vector<int>, Score>> items(beam.begin(),
                                                          beam.end());
    // std::map iteration is lexicographic, so a stable sort breaks score
    // ties toward the lexicographically smaller prefix.
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) {
                       return a.second.total() > b.second.total();
                     });
    if (items.size() > static_cast<std::size_t>(width)) {
      items.resize(static_cast<std::size_t>(width));
    }
    beam = Beam(items.begin(), items.end());
  };

  Beam beam;
  beam[{}] = Score{0.0, kNegInf};
  for (int t = 0; t < lp.frames(); ++t) {
    Beam next;
    for (const auto& [prefix, score] : beam) {
      const double total = score.total();
      Score& same = next[prefix];
      same.blank = LogAdd(same.blank, total + lp(t, Vocab::kBlank));
      for (int c = 1; c < lp.vocab_size(); ++c) {
        const double p = lp(t, c);
        std::vector<int> extended = prefix;
        extended.push_back(c);
        if (!prefix.empty() && prefix.back() == c) {
          Score& stay = next[prefix];
          stay.non_blank = LogAdd(stay.non_blank, score.non_blank + p);
          Score& grow = next[extended];
          grow.non_blank = LogAdd(grow.non_blank, score.blank + p);
        } else {
          Score& grow = next[extended];
          grow.non_blank = LogAdd(grow.non_blank, total + p);
        }
      }
    }
    prune(next);
    beam = std::move(next);
  }
  std::vector<std::vector<int>> out;
  for (const auto& entry : beam) out.push_back(entry.first);
  return out;
}

}  // namespace

std::vector<int> BeamDecodeIds(const LogProbMatrix& lp, int width) {
  if (width < 1) throw ValidationError("beam width must be at least 1");
  // A single beam is not monotone in its width: pruning at width k + 1 can
  // discard a prefix that width k kept. Pooling the survivors of widths
  // 1..k makes the candidate set, and so the exact best score, monotone.
  std::map<std::vector<int>, double> scored;
  std::vector<int> best;
  double best_nll = kInf;
  bool first = true;
  for (int w = 1; w <= width; ++w) {
    for (std::vector<int>& prefix : PrefixBeam(lp, w)) {
      if (scored.count(prefix)) continue;
      const double nll = CtcNll(lp, prefix);
      scored.emplace(prefix, nll);
      if (first || nll < best_nll) {
        best = std::move(prefix);
        best_nll = nll;
        first = false;
      }
    }
  }
  return best;
}

std::string BeamDecode(const LogProbMatrix& lp, const Vocab& vocab,
                       int width) {
  return vocab.Render(BeamDecodeIds(lp, width));
}

}  // namespace fieldasr
