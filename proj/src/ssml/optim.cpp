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

#include "ssml/optim.hpp"

#include <cmath>
#include <utility>

#include "ssml/error.hpp"

namespace ssml::diff {
namespace {

double RoundFp32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.lr > 0.0) || !(options_.beta1 > 0.0 && options_.beta1 < 1.0) ||
      !(options_.beta2 > 0.0 && options_.beta2 < 1.0) || !(options_.eps > 0.0) ||
      options_.weight_decay < 0.0) {
    Fail(ErrorCode::kInvalidInput, "invalid Adam hyper-parameters");
  }
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::Step() {
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    auto value = p.mutable_data();
    const auto grad = p.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = (grad.empty() ? 0.0 : grad[j]) + options_.weight_decay * value[j];
      m[j] = b1 * m[j] + (1.0 - b1) * g;
      v[j] = b2 * v[j] + (1.0 - b2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      value[j] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
      if (options_.store_fp32) {
        value[j] = RoundFp32(value[j]);
        m[j] = RoundFp32(m[j]);
        v[j] = RoundFp32(v[j]);
      }
    }
  }
}

void Adam::ZeroGrad() {
  for (Tensor& p : params_) p.ZeroGrad();
}

void Adam::Restore(std::int64_t step, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    Fail(ErrorCode::kInvalidShape, "optimizer state does not match parameter count");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].size() != params_[i].size() || v[i].size() != params_[i].size()) {
      Fail(ErrorCode::kInvalidShape, "optimizer moment size mismatch");
    }
  }
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

PlateauSchedule::PlateauSchedule(double factor, int patience)
    : factor_(factor), patience_(patience) {
  if (!(factor > 0.0 && factor < 1.0) || patience < 1) {
    Fail(ErrorCode::kInvalidInput, "plateau schedule needs factor in (0,1), patience >= 1");
  }
}

double PlateauSchedule::Update(double val_loss, double lr) {
  if (!std::isfinite(val_loss)) Fail(ErrorCode::kNumeric, "non-finite validation loss");
  if (val_loss < best_) {
    best_ = val_loss;
    stale_ = 0;
    return lr;
  }
  if (++stale_ >= patience_) {
    stale_ = 0;
    ++reductions_;
    return lr * factor_;
  }
  return lr;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) Fail(ErrorCode::kInvalidInput, "early stopping patience must be >= 1");
}

bool EarlyStopping::Update(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    stale_ = 0;
    return false;
  }
  return ++stale_ >= patience_;
}

}  // namespace ssml::diff
