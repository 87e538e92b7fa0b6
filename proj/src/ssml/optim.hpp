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

#ifndef SSML_OPTIM_HPP_
#define SSML_OPTIM_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ssml/tensor.hpp"

namespace ssml::diff {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  // Round parameters and moments to float32 after every step, so that the
  // 32-bit checkpoint captures the state exactly.
  bool store_fp32 = true;
};

// Adam with bias correction; weight decay is the coupled L2 form, i.e.
// weight_decay * param is added to the gradient before the moment updates.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  // Applies one update from the current .grad() of every parameter. A
  // parameter without a gradient is treated as having a zero gradient.
  void Step();
  void ZeroGrad();

  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }
  const AdamOptions& options() const { return options_; }
  std::int64_t step_count() const { return step_; }

  std::span<const std::vector<double>> first_moments() const { return m_; }
  std::span<const std::vector<double>> second_moments() const { return v_; }
  // Restores optimizer state captured from a checkpoint.
  void Restore(std::int64_t step, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

// Multiplies the learning rate by `factor` once the monitored loss has not
// strictly improved for `patience` consecutive epochs.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(double factor = 0.1, int patience = 5);

  // Returns the (possibly reduced) learning rate.
  double Update(double val_loss, double lr);

  double factor() const { return factor_; }
  int patience() const { return patience_; }
  double best() const { return best_; }
  int stale_epochs() const { return stale_; }
  int reductions() const { return reductions_; }
  void Restore(double best, int stale, int reductions) {
    best_ = best;
    stale_ = stale;
    reductions_ = reductions;
  }

 private:
  double factor_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
  int reductions_ = 0;
};

// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience = 10);

  // Records one validation loss; returns true when training should stop.
  bool Update(double val_loss);

  double best() const { return best_; }
  int stale_epochs() const { return stale_; }
  int patience() const { return patience_; }
  void Restore(double best, int stale) {
    best_ = best;
    stale_ = stale;
  }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
};

}  // namespace ssml::diff

#endif  // SSML_OPTIM_HPP_
