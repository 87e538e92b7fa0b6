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

// SampleCNN-style excerpt encoder and its three heads.
//
//   x [B, 3^n] --conv k3 s3--> [B, c0, 3^(n-1)]
//              --(n-1) x [conv k3 s1 pad1, relu, maxpool 3]--> [B, D, 1] = h
//   project(h) = W2 relu(W1 h)            (no biases; feeds the contrastive loss)
//   embed(h)   = LN(h) / ||LN(h)||        (retrieval space)
//   tag_probs(z) = sigmoid(W z)           (W is T x D)

#ifndef SSML_MODEL_HPP_
#define SSML_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssml/audio.hpp"
#include "ssml/checkpoint.hpp"
#include "ssml/tensor.hpp"

namespace ssml::model {

using diff::Tensor;

struct EncoderConfig {
  int levels = 7;
  int base_channels = 16;
  int embed_dim = 64;
  int proj_dim = 64;
  int tag_count = 8;

  void Validate() const;
  std::size_t input_length() const;
  // Output channels of conv 0 followed by each of the levels-1 blocks; the
  // last entry is always embed_dim.
  std::vector<int> ChannelPlan() const;
  // Temporal length after conv 0 and after each block.
  std::vector<std::size_t> LengthPlan() const;

  bool operator==(const EncoderConfig&) const = default;
};

class ModelParams {
 public:
  // Fan-in scaled uniform initialisation.
  static ModelParams Init(const EncoderConfig& config, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }

  const Tensor& conv_weight(std::size_t i) const { return conv_weights_[i]; }
  const Tensor& conv_bias(std::size_t i) const { return conv_biases_[i]; }
  std::size_t num_convs() const { return conv_weights_.size(); }
  const Tensor& ln_gain() const { return ln_gain_; }
  const Tensor& ln_bias() const { return ln_bias_; }
  const Tensor& proj1() const { return proj1_; }
  const Tensor& proj2() const { return proj2_; }
  const Tensor& tag_matrix() const { return tag_w_; }

  // Stable name -> tensor listing; tensors share storage with this object.
  std::vector<std::pair<std::string, Tensor>> Named() const;
  std::vector<Tensor> All() const;
  Tensor Find(const std::string& name) const;

  // Deep copy with fresh graph leaves.
  ModelParams Clone() const;
  void ZeroGrad();

  void AddTo(diff::Checkpoint& ckpt) const;
  // Throws kData when the checkpoint shapes disagree with its own config.
  static ModelParams FromCheckpoint(const diff::Checkpoint& ckpt);
  static EncoderConfig ConfigFromCheckpoint(const diff::Checkpoint& ckpt);

 private:
  EncoderConfig config_;
  std::vector<Tensor> conv_weights_;
  std::vector<Tensor> conv_biases_;
  Tensor ln_gain_;
  Tensor ln_bias_;
  Tensor proj1_;
  Tensor proj2_;
  Tensor tag_w_;
};

// x: [batch, input_length] (or [batch, 1, input_length]) -> h: [batch, D].
Tensor Encode(const ModelParams& params, const Tensor& x);
// Packs equally long excerpts into a [batch, length] tensor.
Tensor Stack(std::span<const AudioBuffer> excerpts);

Tensor Project(const ModelParams& params, const Tensor& h);
Tensor Embed(const ModelParams& params, const Tensor& h);
Tensor TagProbs(const ModelParams& params, const Tensor& z);

}  // namespace ssml::model

#endif  // SSML_MODEL_HPP_
