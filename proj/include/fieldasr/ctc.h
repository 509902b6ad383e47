// fieldasr/ctc.h

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

#ifndef FIELDASR_CTC_H_
#define FIELDASR_CTC_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fieldasr/vocab.h"

namespace fieldasr {

using MatrixXdR =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// T x V matrix of per-frame log-probabilities; each row log-sums to 0.
class LogProbMatrix {
 public:
  LogProbMatrix() = default;

  /// Row-wise log-softmax of unnormalized scores.
  static LogProbMatrix FromLogits(const MatrixXdR& logits);

  /// Wraps values that are already normalized. Throws ValidationError when a
  /// row's logsumexp differs from 0 by more than `tolerance`.
  static LogProbMatrix FromLogProbs(MatrixXdR values, double tolerance = 1e-6);

  int frames() const { return static_cast<int>(values_.rows()); }
  int vocab_size() const { return static_cast<int>(values_.cols()); }
  double operator()(int t, int v) const { return values_(t, v); }
  const MatrixXdR& values() const { return values_; }

  /// Rows [begin, end) as a new matrix.
  LogProbMatrix Rows(int begin, int end) const;

 private:
  MatrixXdR values_;
};

/// log(exp(a) + exp(b)) with max subtraction; -inf is the additive identity.
double LogAdd(double a, double b);

/// Collapse rule: merge adjacent repeats, then delete blanks.
std::vector<int> CollapseIds(std::span<const int> path, int vocab_size);
std::string Collapse(std::span<const int> path, const Vocab& vocab);

/// Minimum frame count for a target: its length plus one per adjacent
/// repeated pair.
int MinFramesForTarget(std::span<const int> target);

/// Negative log-likelihood of `target` by the log-space alpha recursion over
/// the blank-extended target. Returns +infinity when the target cannot fit
/// in the available frames. Throws ValidationError if the target contains
/// the blank or an out-of-range index.
double CtcNll(const LogProbMatrix& lp, std::span<const int> target);

struct CtcResult {
  double nll = 0.0;
  MatrixXdR grad;  // d nll / d logits, T x V (empty when infeasible)
  bool feasible() const { return grad.size() > 0; }
};

/// Loss and gradient with respect to the pre-softmax logits that produced
/// `lp`: softmax - posterior occupancy. Infeasible targets yield
/// nll = +infinity and an empty gradient.
CtcResult CtcLossAndGrad(const LogProbMatrix& lp, std::span<const int> target);

/// Gradient only; throws DataError for an infeasible target.
MatrixXdR CtcGrad(const LogProbMatrix& lp, std::span<const int> target);

/// Enumerates all V^T frame paths. Throws ValidationError when V^T > 10^6.
double BruteForceNll(const LogProbMatrix& lp, std::span<const int> target);

/// Per-frame argmax (lowest index wins ties), then collapse.
std::vector<int> GreedyDecodeIds(const LogProbMatrix& lp);
std::string GreedyDecode(const LogProbMatrix& lp, const Vocab& vocab);

/// Prefix beam search keeping `width` prefixes, each with separate
/// blank-ending and non-blank-ending probabilities. The survivors of the
/// searches at widths 1..width are pooled, rescored with the exact CTC
/// likelihood, and the best one returned, so the result never scores worse
/// as the width grows. With width >= V^T nothing is pruned and the result is
/// the exact most probable label. width == 1 is not guaranteed to match
/// greedy decoding.
std::vector<int> BeamDecodeIds(const LogProbMatrix& lp, int width);
std::string BeamDecode(const LogProbMatrix& lp, const Vocab& vocab, int width);

}  // namespace fieldasr

#endif  // FIELDASR_CTC_H_
