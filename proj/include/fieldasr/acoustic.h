// fieldasr/acoustic.h

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

#ifndef FIELDASR_ACOUSTIC_H_
#define FIELDASR_ACOUSTIC_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fieldasr/audio.h"
#include "fieldasr/ctc.h"
#include "fieldasr/features.h"
#include "fieldasr/vocab.h"

namespace fieldasr {

/// Receptive fields and widths. Both convolutions use odd kernels with
/// same-padding, so every stage keeps the feature frame count.
struct ModelShape {
  int encoder_width = 5;      // frames seen by the encoder
  int context_width = 9;      // latent frames mixed by the context network
  int encoder_channels = 64;
  int context_channels = 64;

  void Validate() const;
  bool operator==(const ModelShape&) const = default;
};

enum class ParamGroup { kEncoder = 0, kContext = 1, kHead = 2 };
inline constexpr int kNumParamGroups = 3;
std::string_view ParamGroupName(ParamGroup g);

/// Weights of the three stages. Convolution weights are laid out for
/// im2col: rows index (kernel offset, input channel) with the input channel
/// fastest; columns index output channels.
template <typename Scalar>
struct ModelParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix encoder_weight;  // (u * mel_bins) x encoder_channels
  Vector encoder_bias;
  Matrix context_weight;  // (v * encoder_channels) x context_channels
  Vector context_bias;
  Matrix head_weight;     // context_channels x vocab
  Vector head_bias;

  /// Weight and bias of one group.
  std::pair<Matrix*, Vector*> Group(ParamGroup g) {
    switch (g) {
      case ParamGroup::kEncoder: return {&encoder_weight, &encoder_bias};
      case ParamGroup::kContext: return {&context_weight, &context_bias};
      case ParamGroup::kHead: break;
    }
    return {&head_weight, &head_bias};
  }
  std::pair<const Matrix*, const Vector*> Group(ParamGroup g) const {
    return const_cast<ModelParams*>(this)->Group(g);
  }
};

using ParamsF = ModelParams<float>;
using ParamsD = ModelParams<double>;

/// Gradient of the CTC loss for one utterance.
struct ModelGradients {
  double nll = 0.0;
  bool skipped = false;  // infeasible target: nll = +inf, gradients zero
  std::array<bool, kNumParamGroups> frozen{false, false, false};
  ParamsD grads;
  MatrixXdR logit_grad;  // T x V, d nll / d logits
};

struct FreezeFlags {
  bool encoder = false;
  bool context = false;
};

/// Log-mel front end -> conv encoder (ReLU) -> conv context network (ReLU)
/// -> affine head -> log-softmax. Features are mean/variance normalized
/// per utterance before the encoder. Weights are single precision; all
/// arithmetic is carried out in double.
class AcousticModel {
 public:
  /// All parameters zero.
  AcousticModel(const FeatureSpec& features, const ModelShape& shape,
                const Vocab& vocab);

  /// He-normal weights (std sqrt(2 / fan_in)) from `seed`, zero biases.
  static AcousticModel Initialize(const FeatureSpec& features,
                                  const ModelShape& shape, const Vocab& vocab,
                                  uint64_t seed);

  const FeatureSpec& feature_spec() const { return features_; }
  const ModelShape& shape() const { return shape_; }
  const Vocab& vocab() const { return vocab_; }
  const ParamsF& params() const { return params_; }
  ParamsF& mutable_params() { return params_; }

  LogProbMatrix Forward(const AudioClip& clip) const;
  LogProbMatrix ForwardFeatures(const MatrixXdR& features) const;

  /// Analytic gradients for every group. Frozen groups are still computed;
  /// `freeze` only sets the flags.
  ModelGradients Gradients(const MatrixXdR& features,
                           std::span<const int> target,
                           const FreezeFlags& freeze = {}) const;
  ModelGradients Gradients(const AudioClip& clip, std::span<const int> target,
                           const FreezeFlags& freeze = {}) const;

  std::size_t ParameterCount() const;

 private:
  FeatureSpec features_;
  ModelShape shape_;
  Vocab vocab_;
  ParamsF params_;
};

/// Binary model file: "NLR1", header (feature spec, widths, channels,
/// vocabulary), then every parameter array as little-endian float32 in
/// declaration order (column-major).
std::vector<uint8_t> SaveModel(const AcousticModel& model);

/// Throws ValidationError for a bad magic, an unknown version, truncated
/// data, trailing data, or (when `expected_vocab` is given) a vocabulary of
/// a different size.
AcousticModel LoadModel(std::span<const uint8_t> bytes,
                        const Vocab* expected_vocab = nullptr);

/// Per-utterance feature normalization used by the model.
MatrixXdR NormalizeFeatures(const MatrixXdR& features);

}  // namespace fieldasr

#endif  // FIELDASR_ACOUSTIC_H_
