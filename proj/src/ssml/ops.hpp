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

// Differentiable primitives. Each throws Error(kInvalidShape) on incompatible
// inputs and Error(kNumeric) if the forward value is not finite. Reductions
// run sequentially in row-major order, so results are bit-reproducible.

#ifndef SSML_OPS_HPP_
#define SSML_OPS_HPP_

#include <cstddef>

#include "ssml/tensor.hpp"

namespace ssml::diff {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kL2NormalizeEps = 1e-12;

// Elementwise, identical shapes.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);

Tensor Scale(const Tensor& x, double factor);
Tensor AddScalar(const Tensor& x, double offset);
Tensor Neg(const Tensor& x);
Tensor Relu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Exp(const Tensor& x);
Tensor Log(const Tensor& x);
// Gradient passes where lo <= x <= hi.
Tensor Clamp(const Tensor& x, double lo, double hi);

// Reductions and normalisations over the last axis.
Tensor SumLast(const Tensor& x);
Tensor MeanLast(const Tensor& x);
Tensor Softmax(const Tensor& x);
// gain/bias have shape [d]; eps guards zero variance.
Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = kLayerNormEps);
// x / sqrt(sum(x^2) + eps); a zero row maps to zero.
Tensor L2Normalize(const Tensor& x, double eps = kL2NormalizeEps);

Tensor SumAll(const Tensor& x);
Tensor MeanAll(const Tensor& x);

// 2-D linear algebra.
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& x);
// x: [n, in], weight: [out, in], bias: [out] or undefined.
Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

// x: [batch, in_channels, length]; weight: [out_channels, in_channels, k];
// bias: [out_channels] or undefined. Zero padding on both ends.
Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding = 0);
// Non-overlapping windows of width `kernel`; trailing remainder dropped.
Tensor MaxPool1d(const Tensor& x, std::size_t kernel);

Tensor Reshape(const Tensor& x, Shape shape);

}  // namespace ssml::diff

#endif  // SSML_OPS_HPP_
