// src/train.cc

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

#include "fieldasr/train.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "fieldasr/errors.h"

namespace fieldasr {

namespace {

struct TrainItem {
  MatrixXdR features;
  std::vector<int> target;
  bool feasible = true;
};

std::vector<int> EncodeTranscript(const std::string& transcript,
                                  const Orthography& orth,
                                  const Vocab& vocab) {
  return vocab.Encode(orth.TokenizeSymbols(orth.Normalize(transcript)));
}

ParamsD ZerosLike(const ParamsF& p) {
  ParamsD z;
  z.encoder_weight = ParamsD::Matrix::Zero(p.encoder_weight.rows(),
                                           p.encoder_weight.cols());
  z.encoder_bias = ParamsD::Vector::Zero(p.encoder_bias.size());
  z.context_weight = ParamsD::Matrix::Zero(p.context_weight.rows(),
                                           p.context_weight.cols());
  z.context_bias = ParamsD::Vector::Zero(p.context_bias.size());
  z.head_weight =
      ParamsD::Matrix::Zero(p.head_weight.rows(), p.head_weight.cols());
  z.head_bias = ParamsD::Vector::Zero(p.head_bias.size());
  return z;
}

void Accumulate(ParamsD& acc, const ParamsD& g) {
  for (int i = 0; i < kNumParamGroups; ++i) {
    auto group = static_cast<ParamGroup>(i);
    auto [aw, ab] = acc.Group(group);
    auto [gw, gb] = g.Group(group);
    *aw += *gw;
    *ab += *gb;
  }
}

class Adam {
 public:
  Adam(const ParamsF& shape, const AdamConfig& config)
      : config_(config), m_(ZerosLike(shape)), v_(ZerosLike(shape)) {}

  void Step(ParamsF& params, const ParamsD& grads,
            const std::array<bool, kNumParamGroups>& trainable, double lr) {
    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, step_);
    const double c2 = 1.0 - std::pow(config_.beta2, step_);
    for (int i = 0; i < kNumParamGroups; ++i) {
      if (!trainable[static_cast<std::size_t>(i)]) continue;
      auto group = static_cast<ParamGroup>(i);
      auto [w, b] = params.Group(group);
      auto [gw, gb] = grads.Group(group);
      auto [mw, mb] = m_.Group(group);
      auto [vw, vb] = v_.Group(group);
      Update(w->data(), gw->data(), mw->data(), vw->data(), w->size(), c1, c2,
             lr);
      Update(b->data(), gb->data(), mb->data(), vb->data(), b->size(), c1, c2,
             lr);
    }
  }

 private:
  void Update(float* w, const double* g, double* m, double* v,
              Eigen::Index n, double c1, double c2, double lr) const {
    for (Eigen::Index i = 0; i < n; ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double step =
          lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
      w[i] = static_cast<float>(static_cast<double>(w[i]) - step);
    }
  }

  AdamConfig config_;
  ParamsD m_;
  ParamsD v_;
  int step_ = 0;
};

double TrainCer(const AcousticModel& model,
                const std::vector<TrainItem>& originals,
                std::span<const Utterance> utterances,
                const Orthography& orth) {
  std::vector<TranscriptPair> pairs;
  std::size_t ref_graphemes = 0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const std::string hyp =
        GreedyDecode(model.ForwardFeatures(originals[i].features),
                     model.vocab());
    pairs.push_back({utterances[i].id, orth.Normalize(utterances[i].transcript),
                     hyp});
    ref_graphemes += originals[i].target.size();
  }
  if (ref_graphemes == 0) return 0.0;
  return ScoreTranscripts(pairs, orth).aggregate_cer;
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be finite and non-negative");
  }
  if (epochs < 1) throw ValidationError("epochs must be positive");
  if (batch_size < 1) throw ValidationError("batch size must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    throw ValidationError("invalid Adam parameters");
  }
  if (augment) augment->Validate();
  shape.Validate();
  features.Validate();
}

TrainResult Train(std::span<const Utterance> train, const Orthography& orth,
                  const Vocab& vocab, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.Validate();
  return TrainFrom(AcousticModel::Initialize(config.features, config.shape,
                                             vocab, config.seed),
                   train, orth, config, on_epoch);
}

TrainResult TrainFrom(const AcousticModel& initial,
                      std::span<const Utterance> train,
                      const Orthography& orth, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  config.Validate();
  if (train.empty()) throw DataError("the training split is empty");
  const Vocab& vocab = initial.vocab();
  const FeatureSpec& fs = initial.feature_spec();

  // Un-augmented items first; they double as the train-CER set.
  std::vector<TrainItem> originals;
  std::vector<LabeledClip> labeled;
  for (const Utterance& u : train) {
    TrainItem item;
    item.target = EncodeTranscript(u.transcript, orth, vocab);
    item.features = ExtractFeatures(u.clip, fs);
    item.feasible = item.features.rows() >= MinFramesForTarget(item.target);
    originals.push_back(std::move(item));
    labeled.push_back({u.clip, u.transcript});
  }
  std::vector<TrainItem> items = originals;
  if (config.augment) {
    AugmentSpec spec = *config.augment;
    std::vector<AugmentedItem> expanded = Expand(labeled, spec);
    const std::size_t per_clip = spec.VariantsPerClip();
    for (std::size_t i = 0; i < expanded.size(); ++i) {
      if (i % per_clip == 0) continue;  // original, already present
      TrainItem item;
      item.target = originals[i / per_clip].target;
      item.features = ExtractFeatures(expanded[i].clip, fs);
      item.feasible = item.features.rows() >= MinFramesForTarget(item.target);
      items.push_back(std::move(item));
    }
  }
  const auto feasible = std::count_if(
      items.begin(), items.end(), [](const TrainItem& i) { return i.feasible; });
  if (feasible == 0) {
    throw DataError("every training target is infeasible for its audio");
  }

  AcousticModel model = initial;
  Adam adam(model.params(), config.adam);
  const FreezeFlags freeze{config.freeze_encoder, config.freeze_context};
  const std::array<bool, kNumParamGroups> trainable{
      !config.freeze_encoder, !config.freeze_context, true};
  std::mt19937_64 rng(MixSeed(config.seed, 0x7261696eULL));

  TrainResult result{model, {}, 0};
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int loss_count = 0;
    int skipped = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      ParamsD batch = ZerosLike(model.params());
      int used = 0;
      for (std::size_t k = start; k < end; ++k) {
        const TrainItem& item = items[order[k]];
        if (!item.feasible) {
          ++skipped;
          continue;
        }
        ModelGradients g = model.Gradients(item.features, item.target, freeze);
        if (g.skipped || !std::isfinite(g.nll)) {
          ++skipped;
          continue;
        }
        Accumulate(batch, g.grads);
        loss_sum += g.nll;
        ++loss_count;
        ++used;
      }
      if (used == 0) continue;
      double norm_sq = 0.0;
      for (int i = 0; i < kNumParamGroups; ++i) {
        auto [w, b] = batch.Group(static_cast<ParamGroup>(i));
        *w /= used;
        *b /= used;
        if (trainable[static_cast<std::size_t>(i)]) {
          norm_sq += w->squaredNorm() + b->squaredNorm();
        }
      }
      const double norm = std::sqrt(norm_sq);
      if (config.grad_clip_norm > 0.0 && norm > config.grad_clip_norm) {
        const double scale = config.grad_clip_norm / norm;
        for (int i = 0; i < kNumParamGroups; ++i) {
          auto [w, b] = batch.Group(static_cast<ParamGroup>(i));
          *w *= scale;
          *b *= scale;
        }
      }
      adam.Step(model.mutable_params(), batch, trainable,
                config.learning_rate);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_count > 0 ? loss_sum / loss_count
                                     : std::numeric_limits<double>::infinity();
    stats.skipped = skipped;
    stats.train_cer = TrainCer(model, originals, train, orth);
    result.history.push_back(stats);
    if (stats.mean_loss < best_loss) {
      best_loss = stats.mean_loss;
      result.model = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

std::vector<SweepResult> Sweep(std::span<const Utterance> train,
                               std::span<const Utterance> held_out,
                               const Orthography& orth, const Vocab& vocab,
                               std::span<const TrainConfig> configs) {
  if (configs.empty()) throw ValidationError("sweep needs at least one config");
  if (held_out.empty()) throw DataError("the held-out split is empty");
  std::vector<SweepResult> results;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SweepResult r{i, configs[i], Train(train, orth, vocab, configs[i]), {}};
    r.held_out = Evaluate(r.result.model, held_out, orth);
    results.push_back(std::move(r));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const SweepResult& a, const SweepResult& b) {
                     return a.held_out.aggregate_cer < b.held_out.aggregate_cer;
                   });
  return results;
}

std::vector<Utterance> LoadUtterances(const Manifest& manifest, Split split,
                                      const std::string& recordings_dir) {
  std::map<std::string, AudioClip> sources;
  std::vector<Utterance> out;
  for (const Segment& s : manifest.segments) {
    if (s.split != split) continue;
    auto it = sources.find(s.source_recording);
    if (it == sources.end()) {
      const std::string path =
          (std::filesystem::path(recordings_dir) / s.source_recording).string();
      it = sources.emplace(s.source_recording, IngestWav(ReadFileBytes(path)))
               .first;
    }
    out.push_back({s.id, SliceSegment(it->second, s), s.transcript});
  }
  return out;
}

}  // namespace fieldasr
