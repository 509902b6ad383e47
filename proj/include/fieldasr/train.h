// fieldasr/train.h

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

#ifndef FIELDASR_TRAIN_H_
#define FIELDASR_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldasr/acoustic.h"
#include "fieldasr/augment.h"
#include "fieldasr/corpus.h"
#include "fieldasr/eval.h"
#include "fieldasr/orthography.h"

namespace fieldasr {

/// A segment with its audio loaded.
struct Utterance {
  std::string id;
  AudioClip clip;
  std::string transcript;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 3e-4;  // 0 is allowed: a no-update baseline
  int epochs = 30;
  int batch_size = 8;
  uint64_t seed = 0;
  bool freeze_encoder = false;
  bool freeze_context = false;
  std::optional<AugmentSpec> augment;
  AdamConfig adam;
  double grad_clip_norm = 5.0;  // <= 0 disables clipping
  ModelShape shape;
  FeatureSpec features;

  void Validate() const;
};

struct EpochStats {
  int epoch = 0;            // 1-based
  double mean_loss = 0.0;   // over feasible training items
  double train_cer = 0.0;   // greedy decode of the un-augmented train set
  int skipped = 0;          // infeasible items this epoch
};

struct TrainResult {
  AcousticModel model;  // parameters from the lowest-loss epoch
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

/// Called after each epoch; useful for progress output.
using EpochCallback = std::function<void(const EpochStats&)>;

/// Seeded He-normal init, per-epoch shuffled mini-batches, Adam with global
/// norm clipping over the trainable groups. Batch gradients are the mean of
/// the per-utterance CTC gradients. Throws DataError when `train` is empty
/// or every target is infeasible.
TrainResult Train(std::span<const Utterance> train, const Orthography& orth,
                  const Vocab& vocab, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Continues training an existing model instead of initializing one.
TrainResult TrainFrom(const AcousticModel& initial,
                      std::span<const Utterance> train,
                      const Orthography& orth, const TrainConfig& config,
                      const EpochCallback& on_epoch = {});

struct SweepResult {
  std::size_t config_index = 0;  // position in the input list
  TrainConfig config;
  TrainResult result;
  EvalReport held_out;
};

/// Trains every config and ranks by held-out aggregate CER (stable, so equal
/// CERs keep input order).
std::vector<SweepResult> Sweep(std::span<const Utterance> train,
                               std::span<const Utterance> held_out,
                               const Orthography& orth, const Vocab& vocab,
                               std::span<const TrainConfig> configs);

/// Loads the audio of every segment in `split` from `recordings_dir`.
std::vector<Utterance> LoadUtterances(const Manifest& manifest, Split split,
                                      const std::string& recordings_dir);

}  // namespace fieldasr

#endif  // FIELDASR_TRAIN_H_
