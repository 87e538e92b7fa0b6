/*
 * Copyright 2026 The SSML Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Two-phase training: contrastive pre-training, then fine-tuning on
//   loss = lambda * L_ssl + L_ml,   lambda = alpha / r
// with optional augmentation, optional contrastive term, optional pre-trained
// initialisation and a label rate for the semi-supervised setting.

#ifndef SSML_TRAIN_HPP_
#define SSML_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssml/augment.hpp"
#include "ssml/dataset.hpp"
#include "ssml/losses.hpp"
#include "ssml/model.hpp"
#include "ssml/optim.hpp"

namespace ssml::train {

enum class Phase { kPretrain, kFinetune };

const char* PhaseName(Phase phase);
Phase ParsePhase(const std::string& name);

struct RunConfig {
  Phase phase = Phase::kFinetune;
  bool fine_tune_augment = false;
  bool fine_tune_contrastive = false;
  bool load_pretrain = false;
  double alpha = 1.0;
  // r in lambda = alpha / r.
  double balance_ratio = loss::kRatioMagnaTagATune;
  double label_rate = 1.0;
  std::size_t batch_size = 48;
  double pretrain_lr = 3e-4;
  double finetune_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-6;
  int pretrain_epochs = 200;
  int max_epochs = 200;
  int early_stop_patience = 10;
  int plateau_patience = 5;
  double plateau_factor = 0.1;
  double temperature = loss::kDefaultTemperature;
  // Upper bound on optimizer steps per epoch; 0 means a full pass.
  std::size_t steps_per_epoch = 0;
  std::uint64_t seed = 0;
  model::EncoderConfig model;
  dsp::AugmentSpec augment;

  double lambda() const { return alpha / balance_ratio; }
  void Validate() const;
};

// Fixed random subset of round(rate * n) positions, deterministic per seed.
std::vector<bool> MaskLabels(std::size_t n, double rate, std::uint64_t seed);

// Builds 2B views ordered (track 0 view a, track 0 view b, track 1 view a, ...)
// from two independent random crops per track, each passed through its own
// sampled chain when `augment` is set.
std::vector<AudioBuffer> MakeViews(const data::Dataset& dataset, std::span<const std::size_t> tracks,
                                   std::size_t excerpt_len, bool augment,
                                   const dsp::AugmentSpec& spec, Rng& rng);

struct ObjectiveWeights {
  bool use_ssl = true;
  bool use_ml = true;
  double lambda = 1.0;
  double temperature = loss::kDefaultTemperature;
};

struct Objective {
  diff::Tensor total;  // Undefined when nothing contributes.
  double ssl = 0.0;
  double ml = 0.0;
  std::size_t labeled_tracks = 0;
  bool empty() const { return !total.defined(); }
};

// `tags` and `labeled` have one entry per track, i.e. views.dim(0) / 2.
Objective ComputeObjective(const model::ModelParams& params, const diff::Tensor& views,
                           std::span<const std::vector<float>> tags,
                           const std::vector<bool>& labeled, const ObjectiveWeights& weights);

struct StepStats {
  double loss = 0.0;
  double ssl = 0.0;
  double ml = 0.0;
  std::size_t labeled_tracks = 0;
  bool skipped = false;
};

struct EpochStats {
  int epoch = 0;  // 1-based.
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  std::size_t steps = 0;
  bool stop = false;
};

// Formats "epoch=.. train_loss=.. val_loss=.. lr=..".
std::string FormatEpochLine(const EpochStats& stats);

class Trainer {
 public:
  // Fresh parameters from config.seed unless `init` is given.
  Trainer(const data::Dataset& dataset, RunConfig config,
          std::optional<model::ModelParams> init = std::nullopt);

  const RunConfig& config() const { return config_; }
  const model::ModelParams& params() const { return params_; }
  model::ModelParams& mutable_params() { return params_; }
  const diff::Adam& optimizer() const { return optimizer_; }
  int epoch() const { return epoch_; }
  double lr() const { return optimizer_.lr(); }
  // Effective labelled flags per record after label masking.
  const std::vector<bool>& labeled() const { return labeled_; }
  const std::vector<std::size_t>& train_pool() const { return pool_; }
  ObjectiveWeights weights() const;

  // Batches of the given epoch (0-based), before the steps_per_epoch cap.
  std::vector<data::Batch> EpochBatches(int epoch) const;
  // Training views of a batch; deterministic in (seed, epoch, batch_index).
  diff::Tensor BatchViews(const data::Batch& batch, int epoch, std::size_t batch_index) const;
  // Objective for a batch without touching the parameters.
  Objective BatchObjective(const data::Batch& batch, int epoch, std::size_t batch_index) const;
  // One optimizer step on a batch.
  StepStats Step(const data::Batch& batch, int epoch, std::size_t batch_index);

  EpochStats RunEpoch();
  double ValidationLoss() const;

  // Runs until the epoch budget or early stopping. In fine-tuning the
  // parameters with the lowest validation loss are restored at the end.
  std::vector<EpochStats> Run(std::ostream* log = nullptr,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

  void Save(const std::filesystem::path& path) const;
  static Trainer Load(const data::Dataset& dataset, const std::filesystem::path& path);

 private:
  const data::Dataset* dataset_;
  RunConfig config_;
  model::ModelParams params_;
  diff::Adam optimizer_;
  diff::PlateauSchedule plateau_;
  diff::EarlyStopping early_stop_;
  std::optional<model::ModelParams> best_params_;
  int epoch_ = 0;
  std::vector<bool> labeled_;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> valid_;
};

// RunConfig <-> flat "key=value" text.
void SetConfigValue(RunConfig& config, const std::string& key, const std::string& value);
std::vector<std::pair<std::string, std::string>> ConfigValues(const RunConfig& config);
// Lines "key=value" or "key value"; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> ReadConfigFile(const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> ParseConfigText(const std::string& text,
                                                                 const std::string& origin);

// Named r presets: "magnatagatune" and "mtg-jamendo".
std::optional<double> BalanceRatioPreset(const std::string& name);

}  // namespace ssml::train

#endif  // SSML_TRAIN_HPP_
