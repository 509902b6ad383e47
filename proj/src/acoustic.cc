// src/acoustic.cc

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

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "fieldasr/errors.h"

namespace fieldasr {

namespace {

// Variance floor of the per-utterance normalization, in squared log units.
constexpr double kVarianceFloor = 1.0;

MatrixXdR Im2Col(const MatrixXdR& x, int width) {
  const auto frames = x.rows();
  const auto channels = x.cols();
  const int half = (width - 1) / 2;
  MatrixXdR col = MatrixXdR::Zero(frames, width * channels);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = 0; j < width; ++j) {
      const Eigen::Index src = t + j - half;
      if (src < 0 || src >= frames) continue;
      col.block(t, j * channels, 1, channels) = x.row(src);
    }
  }
  return col;
}

MatrixXdR Col2Im(const MatrixXdR& col, int width, Eigen::Index channels) {
  const auto frames = col.rows();
  const int half = (width - 1) / 2;
  MatrixXdR x = MatrixXdR::Zero(frames, channels);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = 0; j < width; ++j) {
      const Eigen::Index dst = t + j - half;
      if (dst < 0 || dst >= frames) continue;
      x.row(dst) += col.block(t, j * channels, 1, channels);
    }
  }
  return x;
}

struct Activations {
  MatrixXdR input_col;
  MatrixXdR encoder_pre;
  MatrixXdR latent_col;
  MatrixXdR context_pre;
  MatrixXdR context;
  MatrixXdR logits;
};

Activations RunForward(const ParamsF& p, const ModelShape& shape,
                       const MatrixXdR& features) {
  Activations a;
  const MatrixXdR x = NormalizeFeatures(features);
  a.input_col = Im2Col(x, shape.encoder_width);
  a.encoder_pre = a.input_col * p.encoder_weight.cast<double>();
  a.encoder_pre.rowwise() += p.encoder_bias.cast<double>().transpose();
  const MatrixXdR latent = a.encoder_pre.cwiseMax(0.0);
  a.latent_col = Im2Col(latent, shape.context_width);
  a.context_pre = a.latent_col * p.context_weight.cast<double>();
  a.context_pre.rowwise() += p.context_bias.cast<double>().transpose();
  a.context = a.context_pre.cwiseMax(0.0);
  a.logits = a.context * p.head_weight.cast<double>();
  a.logits.rowwise() += p.head_bias.cast<double>().transpose();
  return a;
}

MatrixXdR ReluMask(const MatrixXdR& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

// Little-endian serialization helpers.
void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<uint8_t>& out, double v) {
  const auto bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
  }
}

template <typename Derived>
void PutFloats(std::vector<uint8_t>& out, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    PutU32(out, std::bit_cast<uint32_t>(m.derived().data()[i]));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double F64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string String(uint32_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  template <typename Derived>
  void Floats(Eigen::PlainObjectBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = std::bit_cast<float>(U32());
    }
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw ValidationError("model file is truncated");
    }
  }
  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'N', 'L', 'R', '1'};
constexpr uint32_t kMaxSymbolBytes = 1 << 16;
constexpr uint32_t kMaxDimension = 1 << 20;

}  // namespace

void ModelShape::Validate() const {
  if (encoder_width < 1 || context_width < 1 || encoder_width % 2 == 0 ||
      context_width % 2 == 0) {
    throw ValidationError("convolution widths must be odd and positive");
  }
  if (encoder_channels < 1 || context_channels < 1) {
    throw ValidationError("channel counts must be positive");
  }
}

std::string_view ParamGroupName(ParamGroup g) {
  switch (g) {
    case ParamGroup::kEncoder: return "encoder";
    case ParamGroup::kContext: return "context";
    case ParamGroup::kHead: return "head";
  }
  return "unknown";
}

MatrixXdR NormalizeFeatures(const MatrixXdR& features) {
  MatrixXdR x = features;
  const auto frames = static_cast<double>(features.rows());
  const Eigen::RowVectorXd mean = features.colwise().sum() / frames;
  x.rowwise() -= mean;
  const Eigen::RowVectorXd var = x.array().square().colwise().sum() / frames;
  const Eigen::RowVectorXd scale =
      (var.array() + kVarianceFloor).rsqrt().matrix();
  x = x.array().rowwise() * scale.array();
  return x;
}

AcousticModel::AcousticModel(const FeatureSpec& features,
                             const ModelShape& shape, const Vocab& vocab)
    : features_(features), shape_(shape), vocab_(vocab) {
  features_.Validate();
  shape_.Validate();
  const int mel = features_.mel_bins;
  params_.encoder_weight =
      ParamsF::Matrix::Zero(shape_.encoder_width * mel, shape_.encoder_channels);
  params_.encoder_bias = ParamsF::Vector::Zero(shape_.encoder_channels);
  params_.context_weight = ParamsF::Matrix::Zero(
      shape_.context_width * shape_.encoder_channels, shape_.context_channels);
  params_.context_bias = ParamsF::Vector::Zero(shape_.context_channels);
  params_.head_weight =
      ParamsF::Matrix::Zero(shape_.context_channels, vocab_.size());
  params_.head_bias = ParamsF::Vector::Zero(vocab_.size());
}

AcousticModel AcousticModel::Initialize(const FeatureSpec& features,
                                        const ModelShape& shape,
                                        const Vocab& vocab, uint64_t seed) {
  AcousticModel model(features, shape, vocab);
  std::mt19937_64 rng(seed);
  for (int g = 0; g < kNumParamGroups; ++g) {
    ParamsF::Matrix& w = *model.params_.Group(static_cast<ParamGroup>(g)).first;
    std::normal_distribution<double> dist(
        0.0, std::sqrt(2.0 / static_cast<double>(w.rows())));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<float>(dist(rng));
    }
  }
  return model;
}

LogProbMatrix AcousticModel::Forward(const AudioClip& clip) const {
  return ForwardFeatures(ExtractFeatures(clip, features_));
}

LogProbMatrix AcousticModel::ForwardFeatures(const MatrixXdR& features) const {
  if (features.cols() != features_.mel_bins) {
    throw ValidationError("feature dimension does not match the model");
  }
  if (features.rows() == 0) throw ValidationError("no feature frames");
  return LogProbMatrix::FromLogits(RunForward(params_, shape_, features).logits);
}

ModelGradients AcousticModel::Gradients(const AudioClip& clip,
                                        std::span<const int> target,
                                        const FreezeFlags& freeze) const {
  return Gradients(ExtractFeatures(clip, features_), target, freeze);
}

ModelGradients AcousticModel::Gradients(const MatrixXdR& features,
                                        std::span<const int> target,
                                        const FreezeFlags& freeze) const {
  if (features.cols() != features_.mel_bins) {
    throw ValidationError("feature dimension does not match the model");
  }
  const Activations a = RunForward(params_, shape_, features);
  const LogProbMatrix lp = LogProbMatrix::FromLogits(a.logits);
  CtcResult ctc = CtcLossAndGrad(lp, target);

  ModelGradients out;
  out.frozen = {freeze.encoder, freeze.context, false};
  out.nll = ctc.nll;
  out.grads.encoder_weight =
      ParamsD::Matrix::Zero(params_.encoder_weight.rows(),
                            params_.encoder_weight.cols());
  out.grads.encoder_bias = ParamsD::Vector::Zero(params_.encoder_bias.size());
  out.grads.context_weight =
      ParamsD::Matrix::Zero(params_.context_weight.rows(),
                            params_.context_weight.cols());
  out.grads.context_bias = ParamsD::Vector::Zero(params_.context_bias.size());
  out.grads.head_weight = ParamsD::Matrix::Zero(params_.head_weight.rows(),
                                                params_.head_weight.cols());
  out.grads.head_bias = ParamsD::Vector::Zero(params_.head_bias.size());
  if (!ctc.feasible()) {
    out.skipped = true;
    return out;
  }

  const MatrixXdR& d_logits = ctc.grad;
  out.grads.head_weight = a.context.transpose() * d_logits;
  out.grads.head_bias = d_logits.colwise().sum().transpose();

  MatrixXdR d_context =
      (d_logits * params_.head_weight.cast<double>().transpose())
          .cwiseProduct(ReluMask(a.context_pre));
  out.grads.context_weight = a.latent_col.transpose() * d_context;
  out.grads.context_bias = d_context.colwise().sum().transpose();

  const MatrixXdR d_latent_col =
      d_context * params_.context_weight.cast<double>().transpose();
  const MatrixXdR d_encoder =
      Col2Im(d_latent_col, shape_.context_width, shape_.encoder_channels)
          .cwiseProduct(ReluMask(a.encoder_pre));
  out.grads.encoder_weight = a.input_col.transpose() * d_encoder;
  out.grads.encoder_bias = d_encoder.colwise().sum().transpose();

  out.logit_grad = std::move(ctc.grad);
  return out;
}

std::size_t AcousticModel::ParameterCount() const {
  std::size_t n = 0;
  for (int g = 0; g < kNumParamGroups; ++g) {
    auto [w, b] = params_.Group(static_cast<ParamGroup>(g));
    n += static_cast<std::size_t>(w->size() + b->size());
  }
  return n;
}

std::vector<uint8_t> SaveModel(const AcousticModel& model) {
  std::vector<uint8_t> out(std::begin(kMagic), std::end(kMagic));
  const FeatureSpec& fs = model.feature_spec();
  PutU32(out, static_cast<uint32_t>(fs.window_ms));
  PutU32(out, static_cast<uint32_t>(fs.hop_ms));
  PutU32(out, static_cast<uint32_t>(fs.mel_bins));
  PutU32(out, static_cast<uint32_t>(fs.fft_size));
  PutF64(out, fs.log_floor);
  const ModelShape& shape = model.shape();
  PutU32(out, static_cast<uint32_t>(shape.encoder_width));
  PutU32(out, static_cast<uint32_t>(shape.context_width));
  PutU32(out, static_cast<uint32_t>(shape.encoder_channels));
  PutU32(out, static_cast<uint32_t>(shape.context_channels));
  const auto& symbols = model.vocab().symbols();
  PutU32(out, static_cast<uint32_t>(symbols.size()));
  for (const std::string& s : symbols) {
    PutU32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
  const ParamsF& p = model.params();
  PutFloats(out, p.encoder_weight);
  PutFloats(out, p.encoder_bias);
  PutFloats(out, p.context_weight);
  PutFloats(out, p.context_bias);
  PutFloats(out, p.head_weight);
  PutFloats(out, p.head_bias);
  return out;
}

AcousticModel LoadModel(std::span<const uint8_t> bytes,
                        const Vocab* expected_vocab) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 3) != 0) {
    throw ValidationError("not a model file (bad magic)");
  }
  if (bytes[3] != static_cast<uint8_t>(kMagic[3])) {
    throw ValidationError("unsupported model file version '" +
                          std::string(1, static_cast<char>(bytes[3])) + "'");
  }
  Reader r(bytes.subspan(4));
  FeatureSpec fs;
  fs.window_ms = static_cast<int>(r.U32());
  fs.hop_ms = static_cast<int>(r.U32());
  fs.mel_bins = static_cast<int>(r.U32());
  fs.fft_size = static_cast<int>(r.U32());
  fs.log_floor = r.F64();
  ModelShape shape;
  shape.encoder_width = static_cast<int>(r.U32());
  shape.context_width = static_cast<int>(r.U32());
  shape.encoder_channels = static_cast<int>(r.U32());
  shape.context_channels = static_cast<int>(r.U32());
  for (int dim : {fs.window_ms, fs.hop_ms, fs.mel_bins, fs.fft_size,
                  shape.encoder_width, shape.context_width,
                  shape.encoder_channels, shape.context_channels}) {
    if (dim <= 0 || static_cast<uint32_t>(dim) > kMaxDimension) {
      throw ValidationError("model header has an invalid dimension");
    }
  }
  const uint32_t n_symbols = r.U32();
  if (n_symbols < 1 || n_symbols > kMaxDimension) {
    throw ValidationError("model header has an invalid vocabulary size");
  }
  std::vector<std::string> symbols;
  for (uint32_t i = 0; i < n_symbols; ++i) {
    const uint32_t len = r.U32();
    if (len > kMaxSymbolBytes) throw ValidationError("model symbol too long");
    symbols.push_back(r.String(len));
  }
  if (symbols.front() != Vocab::kBlankSymbol) {
    throw ValidationError("model vocabulary does not start with the blank");
  }
  if (expected_vocab != nullptr &&
      expected_vocab->size() != static_cast<int>(n_symbols)) {
    throw ValidationError("shape mismatch: model has " +
                          std::to_string(n_symbols) +
                          " output symbols, expected " +
                          std::to_string(expected_vocab->size()));
  }
  Vocab vocab(std::vector<std::string>(symbols.begin() + 1, symbols.end()));
  AcousticModel model(fs, shape, vocab);
  ParamsF& p = model.mutable_params();
  const std::size_t expected_bytes = model.ParameterCount() * 4;
  if (r.remaining() < expected_bytes) {
    throw ValidationError("model file is truncated");
  }
  if (r.remaining() > expected_bytes) {
    throw ValidationError("shape mismatch: model file has trailing data");
  }
  r.Floats(p.encoder_weight);
  r.Floats(p.encoder_bias);
  r.Floats(p.context_weight);
  r.Floats(p.context_bias);
  r.Floats(p.head_weight);
  r.Floats(p.head_bias);
  return model;
}

}  // namespace fieldasr
