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

#include "ssml/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssml/error.hpp"
#include "ssml/ops.hpp"

namespace ssml::loss {
namespace {

using diff::Shape;

void RequirePairedRows(const Tensor& x, const char* what) {
  if (x.rank() != 2 || x.dim(0) % 2 != 0) {
    Fail(ErrorCode::kInvalidShape, what, " needs [2B, dim] rows, got ", diff::ShapeString(x.shape()));
  }
}

std::size_t Partner(std::size_t i) { return i ^ 1u; }

}  // namespace

double CosineSim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) Fail(ErrorCode::kInvalidShape, "cosine: length mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) Fail(ErrorCode::kDegenerate, "cosine similarity of a zero vector");
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

double NtXentPair(std::size_t i, std::size_t j, const Tensor& projections, double temperature) {
  if (projections.rank() != 2) Fail(ErrorCode::kInvalidShape, "projections must be 2-D");
  const std::size_t rows = projections.dim(0), dim = projections.dim(1);
  if (i == j || i >= rows || j >= rows) Fail(ErrorCode::kInvalidInput, "invalid pair indices");
  if (!(temperature > 0.0)) Fail(ErrorCode::kInvalidInput, "temperature must be positive");
  auto row = [&](std::size_t r) { return projections.data().subspan(r * dim, dim); };
  std::vector<double> logits(rows);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < rows; ++l) {
    if (l == i) continue;
    logits[l] = CosineSim(row(i), row(l)) / temperature;
    m = std::max(m, logits[l]);
  }
  double total = 0.0;
  for (std::size_t l = 0; l < rows; ++l) {
    if (l != i) total += std::exp(logits[l] - m);
  }
  return std::log(total) - (logits[j] - m);
}

Tensor SslLoss(const Tensor& projections, double temperature) {
  RequirePairedRows(projections, "contrastive loss");
  if (!(temperature > 0.0)) Fail(ErrorCode::kInvalidInput, "temperature must be positive");
  const std::size_t n = projections.dim(0);

  const Tensor unit = diff::L2Normalize(projections);
  const Tensor logits = diff::Scale(diff::MatMul(unit, diff::Transpose(unit)), 1.0 / temperature);

  // Row maxima over l != i are subtracted as constants before exponentiating.
  std::vector<double> row_max(n, -std::numeric_limits<double>::infinity());
  std::vector<double> shift(n * n), off_diag(n * n, 1.0), positive(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      if (l != i) row_max[i] = std::max(row_max[i], logits.data()[i * n + l]);
    }
    for (std::size_t l = 0; l < n; ++l) shift[i * n + l] = row_max[i];
    // The masked diagonal is shifted to exactly zero so it cannot overflow.
    shift[i * n + i] = logits.data()[i * n + i];
    off_diag[i * n + i] = 0.0;
    positive[i * n + Partner(i)] = 1.0;
  }
  const Tensor shifted = diff::Sub(logits, Tensor::FromData({n, n}, std::move(shift)));
  const Tensor masked = diff::Mul(diff::Exp(shifted), Tensor::FromData({n, n}, std::move(off_diag)));
  // The positive logit is taken after the same shift, so the row maximum
  // cancels exactly.
  const Tensor log_denominator = diff::Log(diff::SumLast(masked));
  const Tensor numerator = diff::SumLast(diff::Mul(shifted, Tensor::FromData({n, n}, std::move(positive))));
  return diff::MeanAll(diff::Sub(log_denominator, numerator));
}

MlLossResult MlLoss(const Tensor& probs, std::span<const std::vector<float>> tags,
                    const std::vector<bool>& labeled) {
  RequirePairedRows(probs, "tag loss");
  const std::size_t rows = probs.dim(0), t = probs.dim(1), b = rows / 2;
  if (tags.size() != b || labeled.size() != b) {
    Fail(ErrorCode::kInvalidShape, "tag loss: expected ", b, " tag rows and flags");
  }
  std::vector<double> targets(rows * t, 0.0), row_mask(rows, 0.0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < b; ++k) {
    if (!labeled[k]) continue;
    if (tags[k].size() != t) {
      Fail(ErrorCode::kInvalidShape, "tag vector of track ", k, " has ", tags[k].size(),
           " entries, expected ", t);
    }
    ++count;
    for (std::size_t view = 0; view < 2; ++view) {
      const std::size_t r = 2 * k + view;
      row_mask[r] = 1.0;
      for (std::size_t c = 0; c < t; ++c) {
        const float y = tags[k][c];
        if (y != 0.0f && y != 1.0f) Fail(ErrorCode::kInvalidInput, "tags must be binary");
        targets[r * t + c] = y;
      }
    }
  }
  MlLossResult result;
  result.labeled_tracks = count;
  if (count == 0) {
    result.no_labels = true;
    result.loss = Tensor::Scalar(0.0);
    return result;
  }
  const Tensor p = diff::Clamp(probs, kProbClamp, 1.0 - kProbClamp);
  const Tensor y = Tensor::FromData({rows, t}, targets);
  std::vector<double> inverse(rows * t);
  for (std::size_t i = 0; i < inverse.size(); ++i) inverse[i] = 1.0 - targets[i];
  const Tensor not_y = Tensor::FromData({rows, t}, std::move(inverse));
  const Tensor log_p = diff::Log(p);
  const Tensor log_not_p = diff::Log(diff::AddScalar(diff::Neg(p), 1.0));
  const Tensor bce = diff::Neg(diff::Add(diff::Mul(y, log_p), diff::Mul(not_y, log_not_p)));
  const Tensor per_view = diff::MeanLast(bce);
  const Tensor masked = diff::Mul(per_view, Tensor::FromData({rows}, std::move(row_mask)));
  result.loss = diff::Scale(diff::SumAll(masked), 1.0 / static_cast<double>(count));
  return result;
}

double SsmlLoss(double ssl, double ml, double lambda) { return lambda * ssl + ml; }

Tensor SsmlLoss(const Tensor& ssl, const Tensor& ml, double lambda) {
  return diff::Add(diff::Scale(ssl, lambda), ml);
}

double EstimateBalanceRatio(double converged_ml, double converged_ssl) {
  if (!(converged_ml > 0.0) || !(converged_ssl > 0.0) || !std::isfinite(converged_ml) ||
      !std::isfinite(converged_ssl)) {
    Fail(ErrorCode::kInvalidInput, "converged losses must be positive and finite");
  }
  return converged_ml / converged_ssl;
}

BalanceFactor EstimateBalanceFactor(double converged_ml, double converged_ssl, double alpha) {
  if (!(alpha > 0.0)) Fail(ErrorCode::kInvalidInput, "alpha must be positive");
  return BalanceFactor{EstimateBalanceRatio(converged_ml, converged_ssl), alpha};
}

std::vector<double> LambdaCandidates(double r, std::span<const double> alphas) {
  if (!(r > 0.0)) Fail(ErrorCode::kInvalidInput, "balance ratio must be positive");
  std::vector<double> out;
  for (double a : alphas) out.push_back(a / r);
  return out;
}

}  // namespace ssml::loss
