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

// Training objectives.
//
// Batches hold 2B rows ordered so that rows 2k and 2k+1 (0-based) are the two
// views of track k. The contrastive loss identifies each row's partner among
// the other 2B-1 rows; the tag loss is a per-tag binary cross entropy over
// the views of labelled tracks only.

#ifndef SSML_LOSSES_HPP_
#define SSML_LOSSES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "ssml/tensor.hpp"

namespace ssml::loss {

using diff::Tensor;

inline constexpr double kDefaultTemperature = 0.5;
inline constexpr double kProbClamp = 1e-7;

// Cosine similarity; throws kDegenerate on a zero vector.
double CosineSim(std::span<const double> u, std::span<const double> v);

// -log( exp(sim(o_i,o_j)/t) / sum_{l != i} exp(sim(o_i,o_l)/t) ) evaluated
// directly on the rows of `projections` ([rows, dim], row-major).
double NtXentPair(std::size_t i, std::size_t j, const Tensor& projections,
                  double temperature = kDefaultTemperature);

// Mean of the pair losses over both directions of all B pairs.
Tensor SslLoss(const Tensor& projections, double temperature = kDefaultTemperature);

struct MlLossResult {
  Tensor loss;  // Scalar; exactly 0 when no track in the batch is labelled.
  bool no_labels = false;
  std::size_t labeled_tracks = 0;
};

// probs: [2B, T]. tags: B rows of T binary values (rows of unlabelled tracks
// are ignored and may be empty). labeled: B flags.
MlLossResult MlLoss(const Tensor& probs, std::span<const std::vector<float>> tags,
                    const std::vector<bool>& labeled);

double SsmlLoss(double ssl, double ml, double lambda);
Tensor SsmlLoss(const Tensor& ssl, const Tensor& ml, double lambda);

struct BalanceFactor {
  double r = 1.0;
  double alpha = 1.0;
  double lambda() const { return alpha / r; }
};

// r = converged_ml / converged_ssl; both inputs must be positive.
double EstimateBalanceRatio(double converged_ml, double converged_ssl);
BalanceFactor EstimateBalanceFactor(double converged_ml, double converged_ssl, double alpha);
// {alpha / r : alpha in alphas}
std::vector<double> LambdaCandidates(double r, std::span<const double> alphas);

inline constexpr double kAlphaCandidates[] = {0.05, 0.1, 1.0, 10.0};
// Reference ratios reported for the two public corpora.
inline constexpr double kRatioMagnaTagATune = 22.00;
inline constexpr double kRatioMtgJamendo = 18.95;

}  // namespace ssml::loss

#endif  // SSML_LOSSES_HPP_
