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

#include "ssml/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>

#include "ssml/checkpoint.hpp"
#include "ssml/error.hpp"
#include "ssml/ops.hpp"

namespace ssml::train {
namespace {

// Random stream identifiers, mixed with the run seed by DeriveRng.
constexpr std::uint64_t kShuffleStream = 10;
constexpr std::uint64_t kViewStream = 11;
constexpr std::uint64_t kValidStream = 12;
constexpr std::uint64_t kMaskStream = 13;

std::uint64_t PhaseCode(Phase phase) { return phase == Phase::kPretrain ? 1 : 2; }

diff::AdamOptions MakeAdamOptions(const RunConfig& c) {
  diff::AdamOptions o;
  o.lr = c.phase == Phase::kPretrain ? c.pretrain_lr : c.finetune_lr;
  o.beta1 = c.beta1;
  o.beta2 = c.beta2;
  o.eps = c.adam_eps;
  o.weight_decay = c.weight_decay;
  o.store_fp32 = true;
  return o;
}

model::ModelParams InitialParams(const data::Dataset& dataset, const RunConfig& config,
                                 const std::optional<model::ModelParams>& init) {
  config.Validate();
  if (static_cast<std::size_t>(config.model.tag_count) != dataset.tag_count()) {
    Fail(ErrorCode::kData, "model has ", config.model.tag_count, " tags but the dataset has ",
         dataset.tag_count());
  }
  if (!init) return model::ModelParams::Init(config.model, config.seed);
  if (!(init->config() == config.model)) {
    const model::EncoderConfig& m = init->config();
    Fail(ErrorCode::kData, "initial checkpoint does not match the model configuration (levels=",
         m.levels, " base_channels=", m.base_channels, " embed_dim=", m.embed_dim,
         " proj_dim=", m.proj_dim, " tag_count=", m.tag_count, ")");
  }
  return init->Clone();
}

double ParseDouble(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) Fail(ErrorCode::kData, "bad number '", s, "'");
  return v;
}

std::vector<double> ToDouble(const std::vector<float>& v) { return {v.begin(), v.end()}; }

void CopyValues(const model::ModelParams& from, model::ModelParams& to) {
  auto src = from.Named();
  auto dst = to.Named();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto out = dst[i].second.mutable_data();
    std::copy(src[i].second.data().begin(), src[i].second.data().end(), out.begin());
  }
}

}  // namespace

const char* PhaseName(Phase phase) { return phase == Phase::kPretrain ? "pretrain" : "finetune"; }

Phase ParsePhase(const std::string& name) {
  if (name == "pretrain") return Phase::kPretrain;
  if (name == "finetune") return Phase::kFinetune;
  Fail(ErrorCode::kInvalidInput, "unknown phase '", name, "' (pretrain|finetune)");
}

void RunConfig::Validate() const {
  if (!(label_rate > 0.0) || label_rate > 1.0) Fail(ErrorCode::kInvalidInput, "label_rate must be in (0, 1]");
  if (!(alpha > 0.0)) Fail(ErrorCode::kInvalidInput, "alpha must be positive");
  if (!(balance_ratio > 0.0)) Fail(ErrorCode::kInvalidInput, "balance_ratio must be positive");
  if (batch_size < 2) Fail(ErrorCode::kInvalidInput, "batch_size must be at least 2");
  if (!(pretrain_lr > 0.0) || !(finetune_lr > 0.0)) Fail(ErrorCode::kInvalidInput, "learning rates must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    Fail(ErrorCode::kInvalidInput, "betas must be in (0, 1)");
  }
  if (!(adam_eps > 0.0) || !(weight_decay >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "adam_eps must be positive and weight_decay non-negative");
  }
  if (pretrain_epochs < 0 || max_epochs < 0) Fail(ErrorCode::kInvalidInput, "epoch budgets must be >= 0");
  if (early_stop_patience < 1 || plateau_patience < 1) Fail(ErrorCode::kInvalidInput, "patience must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) Fail(ErrorCode::kInvalidInput, "plateau_factor must be in (0, 1)");
  if (!(temperature > 0.0)) Fail(ErrorCode::kInvalidInput, "temperature must be positive");
  model.Validate();
  augment.Validate();
}

std::vector<bool> MaskLabels(std::size_t n, double rate, std::uint64_t seed) {
  if (!(rate > 0.0) || rate > 1.0) Fail(ErrorCode::kInvalidInput, "label rate must be in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = DeriveRng(seed, {kMaskStream});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < keep; ++i) out[order[i]] = true;
  return out;
}

std::vector<AudioBuffer> MakeViews(const data::Dataset& dataset, std::span<const std::size_t> tracks,
                                   std::size_t excerpt_len, bool augment,
                                   const dsp::AugmentSpec& spec, Rng& rng) {
  std::vector<AudioBuffer> views;
  views.reserve(2 * tracks.size());
  for (std::size_t idx : tracks) {
    if (idx >= dataset.records.size()) Fail(ErrorCode::kInvalidInput, "track index out of range");
    const AudioBuffer& audio = dataset.records[idx].audio;
    AudioBuffer a = dsp::RandCrop(audio, excerpt_len, rng);
    AudioBuffer b = dsp::RandCrop(audio, excerpt_len, rng);
    if (augment) {
      const dsp::AugmentChain chain_a = dsp::SampleChain(spec, rng);
      const dsp::AugmentChain chain_b = dsp::SampleChain(spec, rng);
      a = dsp::ApplyChain(a, chain_a);
      b = dsp::ApplyChain(b, chain_b);
    }
    views.push_back(std::move(a));
    views.push_back(std::move(b));
  }
  return views;
}

Objective ComputeObjective(const model::ModelParams& params, const diff::Tensor& views,
                           std::span<const std::vector<float>> tags,
                           const std::vector<bool>& labeled, const ObjectiveWeights& weights) {
  const diff::Tensor h = model::Encode(params, views);
  Objective obj;
  if (weights.use_ssl) {
    const diff::Tensor ssl = loss::SslLoss(model::Project(params, h), weights.temperature);
    obj.ssl = ssl.item();
    obj.total = weights.use_ml ? diff::Scale(ssl, weights.lambda) : ssl;
  }
  if (weights.use_ml) {
    const diff::Tensor probs = model::TagProbs(params, model::Embed(params, h));
    const loss::MlLossResult ml = loss::MlLoss(probs, tags, labeled);
    obj.labeled_tracks = ml.labeled_tracks;
    if (!ml.no_labels) {
      obj.ml = ml.loss.item();
      obj.total = obj.total.defined() ? diff::Add(obj.total, ml.loss) : ml.loss;
    }
  }
  return obj;
}

std::string FormatEpochLine(const EpochStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "epoch=%d train_loss=%.9g val_loss=%.9g lr=%.9g", s.epoch,
                s.train_loss, s.val_loss, s.lr);
  return buf;
}

Trainer::Trainer(const data::Dataset& dataset, RunConfig config,
                 std::optional<model::ModelParams> init)
    : dataset_(&dataset),
      config_(std::move(config)),
      params_(InitialParams(dataset, config_, init)),
      optimizer_(params_.All(), MakeAdamOptions(config_)),
      plateau_(config_.plateau_factor, config_.plateau_patience),
      early_stop_(config_.early_stop_patience) {
  pool_ = dataset.Indices(data::Split::kTrain);
  valid_ = dataset.Indices(data::Split::kValid);
  if (pool_.size() < config_.batch_size) {
    Fail(ErrorCode::kData, "training split has ", pool_.size(), " tracks, fewer than batch_size=",
         config_.batch_size);
  }
  labeled_.resize(dataset.records.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) labeled_[i] = dataset.records[i].labeled;
  const std::vector<bool> keep = MaskLabels(pool_.size(), config_.label_rate, config_.seed);
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    labeled_[pool_[i]] = dataset.records[pool_[i]].labeled && keep[i];
  }
}

ObjectiveWeights Trainer::weights() const {
  ObjectiveWeights w;
  w.temperature = config_.temperature;
  if (config_.phase == Phase::kPretrain) {
    w.use_ssl = true;
    w.use_ml = false;
    w.lambda = 1.0;
  } else {
    w.use_ssl = config_.fine_tune_contrastive;
    w.use_ml = true;
    w.lambda = config_.lambda();
  }
  return w;
}

std::vector<data::Batch> Trainer::EpochBatches(int epoch) const {
  Rng rng = DeriveRng(config_.seed, {PhaseCode(config_.phase), static_cast<std::uint64_t>(epoch),
                                     kShuffleStream});
  return data::MakeBatches(pool_, labeled_, config_.batch_size, rng);
}

diff::Tensor Trainer::BatchViews(const data::Batch& batch, int epoch, std::size_t batch_index) const {
  Rng rng = DeriveRng(config_.seed, {PhaseCode(config_.phase), static_cast<std::uint64_t>(epoch),
                                     kViewStream, batch_index});
  const bool augment = config_.phase == Phase::kPretrain || config_.fine_tune_augment;
  const std::vector<AudioBuffer> views = MakeViews(*dataset_, batch.tracks, config_.model.input_length(),
                                                   augment, config_.augment, rng);
  return model::Stack(views);
}

Objective Trainer::BatchObjective(const data::Batch& batch, int epoch, std::size_t batch_index) const {
  std::vector<std::vector<float>> tags;
  for (std::size_t idx : batch.tracks) tags.push_back(dataset_->records[idx].tags);
  return ComputeObjective(params_, BatchViews(batch, epoch, batch_index), tags, batch.labeled,
                          weights());
}

StepStats Trainer::Step(const data::Batch& batch, int epoch, std::size_t batch_index) {
  Objective obj = BatchObjective(batch, epoch, batch_index);
  StepStats s;
  s.ssl = obj.ssl;
  s.ml = obj.ml;
  s.labeled_tracks = obj.labeled_tracks;
  if (obj.empty()) {
    s.skipped = true;
    return s;
  }
  s.loss = obj.total.item();
  optimizer_.ZeroGrad();
  diff::Backward(obj.total);
  optimizer_.Step();
  return s;
}

double Trainer::ValidationLoss() const {
  if (valid_.empty()) return std::numeric_limits<double>::quiet_NaN();
  diff::NoGradGuard no_grad;
  const ObjectiveWeights w = weights();
  const std::size_t n = valid_.size();
  const std::size_t chunks = (n + config_.batch_size - 1) / config_.batch_size;
  double ssl_sum = 0.0, ml_sum = 0.0;
  std::size_t ssl_tracks = 0, ml_tracks = 0;
  std::size_t start = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    // Near-equal chunks so no chunk degenerates to a single track.
    const std::size_t size = n / chunks + (c < n % chunks ? 1 : 0);
    std::vector<AudioBuffer> views;
    std::vector<std::vector<float>> tags;
    std::vector<bool> labeled;
    for (std::size_t i = start; i < start + size; ++i) {
      const std::size_t idx = valid_[i];
      Rng rng = DeriveRng(config_.seed, {kValidStream, idx});
      const std::size_t one[] = {idx};
      for (AudioBuffer& v : MakeViews(*dataset_, one, config_.model.input_length(), false,
                                      config_.augment, rng)) {
        views.push_back(std::move(v));
      }
      tags.push_back(dataset_->records[idx].tags);
      labeled.push_back(dataset_->records[idx].labeled);
    }
    const Objective obj = ComputeObjective(params_, model::Stack(views), tags, labeled, w);
    ssl_sum += obj.ssl * static_cast<double>(size);
    ssl_tracks += size;
    ml_sum += obj.ml * static_cast<double>(obj.labeled_tracks);
    ml_tracks += obj.labeled_tracks;
    start += size;
  }
  double total = 0.0;
  if (w.use_ssl) total += (w.use_ml ? w.lambda : 1.0) * ssl_sum / static_cast<double>(ssl_tracks);
  if (w.use_ml && ml_tracks > 0) total += ml_sum / static_cast<double>(ml_tracks);
  return total;
}

EpochStats Trainer::RunEpoch() {
  std::vector<data::Batch> batches = EpochBatches(epoch_);
  if (config_.steps_per_epoch > 0 && batches.size() > config_.steps_per_epoch) {
    batches.resize(config_.steps_per_epoch);
  }
  EpochStats stats;
  stats.epoch = epoch_ + 1;
  stats.lr = optimizer_.lr();
  double sum = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const StepStats s = Step(batches[b], epoch_, b);
    if (s.skipped) continue;
    sum += s.loss;
    ++stats.steps;
  }
  stats.train_loss = stats.steps > 0 ? sum / static_cast<double>(stats.steps)
                                     : std::numeric_limits<double>::quiet_NaN();
  stats.val_loss = ValidationLoss();
  ++epoch_;
  if (config_.phase == Phase::kFinetune) {
    if (std::isnan(stats.val_loss)) Fail(ErrorCode::kData, "fine-tuning needs a non-empty validation split");
    if (stats.val_loss < early_stop_.best()) best_params_ = params_.Clone();
    optimizer_.set_lr(plateau_.Update(stats.val_loss, optimizer_.lr()));
    stats.stop = early_stop_.Update(stats.val_loss);
  }
  return stats;
}

std::vector<EpochStats> Trainer::Run(std::ostream* log,
                                     const std::function<void(const EpochStats&)>& on_epoch) {
  const int budget = config_.phase == Phase::kPretrain ? config_.pretrain_epochs : config_.max_epochs;
  std::vector<EpochStats> history;
  while (epoch_ < budget) {
    EpochStats s = RunEpoch();
    history.push_back(s);
    if (log != nullptr) *log << FormatEpochLine(s) << std::endl;
    if (on_epoch) on_epoch(s);
    if (s.stop) break;
  }
  if (config_.phase == Phase::kFinetune && best_params_) CopyValues(*best_params_, params_);
  return history;
}

void Trainer::Save(const std::filesystem::path& path) const {
  diff::Checkpoint ckpt;
  for (const auto& [key, value] : ConfigValues(config_)) ckpt.SetMeta("config." + key, value);
  ckpt.SetMeta("train.epoch", std::to_string(epoch_));
  ckpt.SetMeta("train.lr", diff::ExactDouble(optimizer_.lr()));
  ckpt.SetMeta("train.adam_step", std::to_string(optimizer_.step_count()));
  ckpt.SetMeta("train.plateau_best", diff::ExactDouble(plateau_.best()));
  ckpt.SetMeta("train.plateau_stale", std::to_string(plateau_.stale_epochs()));
  ckpt.SetMeta("train.plateau_reductions", std::to_string(plateau_.reductions()));
  ckpt.SetMeta("train.early_best", diff::ExactDouble(early_stop_.best()));
  ckpt.SetMeta("train.early_stale", std::to_string(early_stop_.stale_epochs()));
  params_.AddTo(ckpt);
  const auto named = params_.Named();
  const auto m = optimizer_.first_moments();
  const auto v = optimizer_.second_moments();
  for (std::size_t i = 0; i < named.size(); ++i) {
    ckpt.AddVector("adam.m/" + named[i].first, m[i]);
    ckpt.AddVector("adam.v/" + named[i].first, v[i]);
  }
  if (best_params_) {
    for (const auto& [name, t] : best_params_->Named()) ckpt.AddTensor("best/" + name, t);
  }
  ckpt.Save(path);
}

Trainer Trainer::Load(const data::Dataset& dataset, const std::filesystem::path& path) {
  const diff::Checkpoint ckpt = diff::Checkpoint::Load(path);
  RunConfig config;
  bool any = false;
  for (const auto& [key, value] : ckpt.meta()) {
    if (key.rfind("config.", 0) == 0) {
      SetConfigValue(config, key.substr(7), value);
      any = true;
    }
  }
  if (!any) Fail(ErrorCode::kData, path.string(), " is a model checkpoint without training state");
  Trainer t(dataset, config, model::ModelParams::FromCheckpoint(ckpt));
  t.epoch_ = std::stoi(ckpt.RequireMeta("train.epoch"));
  t.optimizer_.set_lr(ParseDouble(ckpt.RequireMeta("train.lr")));
  const auto named = t.params_.Named();
  std::vector<std::vector<double>> m, v;
  for (const auto& [name, tensor] : named) {
    const diff::NamedArray& am = ckpt.Require("adam.m/" + name);
    const diff::NamedArray& av = ckpt.Require("adam.v/" + name);
    if (am.values.size() != tensor.size() || av.values.size() != tensor.size()) {
      Fail(ErrorCode::kData, "optimizer state for '", name, "' has the wrong size");
    }
    m.push_back(ToDouble(am.values));
    v.push_back(ToDouble(av.values));
  }
  t.optimizer_.Restore(std::stoll(ckpt.RequireMeta("train.adam_step")), std::move(m), std::move(v));
  t.plateau_.Restore(ParseDouble(ckpt.RequireMeta("train.plateau_best")),
                     std::stoi(ckpt.RequireMeta("train.plateau_stale")),
                     std::stoi(ckpt.RequireMeta("train.plateau_reductions")));
  t.early_stop_.Restore(ParseDouble(ckpt.RequireMeta("train.early_best")),
                        std::stoi(ckpt.RequireMeta("train.early_stale")));
  if (ckpt.Find("best/" + named.front().first) != nullptr) {
    model::ModelParams best = t.params_.Clone();
    for (auto& [name, tensor] : best.Named()) {
      const diff::NamedArray& a = ckpt.Require("best/" + name);
      if (a.values.size() != tensor.size()) Fail(ErrorCode::kData, "best/", name, " has the wrong size");
      auto out = tensor.mutable_data();
      std::copy(a.values.begin(), a.values.end(), out.begin());
    }
    t.best_params_ = std::move(best);
  }
  return t;
}

}  // namespace ssml::train
