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

#include "ssml/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ssml/error.hpp"
#include "ssml/ops.hpp"

namespace ssml::model {
namespace {

constexpr int kMaxLevels = 12;

Tensor UniformTensor(diff::Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(diff::NumElements(shape));
  for (double& v : data) v = static_cast<double>(static_cast<float>(dist(rng)));
  return Tensor::FromData(std::move(shape), std::move(data), /*requires_grad=*/true);
}

int ParseInt(const diff::Checkpoint& ckpt, const std::string& key) {
  const std::string v = ckpt.RequireMeta(key);
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    Fail(ErrorCode::kData, "checkpoint metadata '", key, "' is not an integer: ", v);
  }
}

Tensor LoadTensor(const diff::Checkpoint& ckpt, const std::string& name,
                  const diff::Shape& expected) {
  const diff::NamedArray& a = ckpt.Require("param/" + name);
  if (a.shape != expected) {
    Fail(ErrorCode::kData, "checkpoint tensor '", name, "' has shape ", diff::ShapeString(a.shape),
         ", model expects ", diff::ShapeString(expected));
  }
  return Tensor::FromData(a.shape, std::vector<double>(a.values.begin(), a.values.end()), true);
}

}  // namespace

void EncoderConfig::Validate() const {
  if (levels < 3 || levels > kMaxLevels) {
    Fail(ErrorCode::kInvalidInput, "encoder levels must be in [3, ", kMaxLevels, "], got ", levels);
  }
  if (base_channels < 1 || embed_dim < 1 || proj_dim < 1 || tag_count < 1) {
    Fail(ErrorCode::kInvalidInput, "encoder widths and tag count must be positive");
  }
}

std::size_t EncoderConfig::input_length() const {
  std::size_t n = 1;
  for (int i = 0; i < levels; ++i) n *= 3;
  return n;
}

std::vector<int> EncoderConfig::ChannelPlan() const {
  const int cap = std::max(base_channels, embed_dim);
  std::vector<int> plan{base_channels};
  for (int b = 1; b < levels; ++b) {
    if (b == levels - 1) {
      plan.push_back(embed_dim);
    } else {
      plan.push_back(std::min(base_channels << (b / 2), cap));
    }
  }
  return plan;
}

std::vector<std::size_t> EncoderConfig::LengthPlan() const {
  std::vector<std::size_t> lengths;
  std::size_t len = input_length() / 3;
  lengths.push_back(len);
  for (int b = 1; b < levels; ++b) {
    len /= 3;
    lengths.push_back(len);
  }
  return lengths;
}

ModelParams ModelParams::Init(const EncoderConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng = DeriveRng(seed, {0x6d6f64656cULL});
  ModelParams p;
  p.config_ = config;
  const std::vector<int> plan = config.ChannelPlan();
  int in_channels = 1;
  for (int out_channels : plan) {
    const double fan_in = static_cast<double>(in_channels * 3);
    p.conv_weights_.push_back(UniformTensor(
        {static_cast<std::size_t>(out_channels), static_cast<std::size_t>(in_channels), 3},
        std::sqrt(6.0 / fan_in), rng));
    p.conv_biases_.push_back(Tensor::Zeros({static_cast<std::size_t>(out_channels)}, true));
    in_channels = out_channels;
  }
  const auto d = static_cast<std::size_t>(config.embed_dim);
  const auto pd = static_cast<std::size_t>(config.proj_dim);
  const auto t = static_cast<std::size_t>(config.tag_count);
  p.ln_gain_ = Tensor::Full({d}, 1.0, true);
  p.ln_bias_ = Tensor::Zeros({d}, true);
  p.proj1_ = UniformTensor({pd, d}, std::sqrt(6.0 / static_cast<double>(d)), rng);
  p.proj2_ = UniformTensor({pd, pd}, 1.0 / std::sqrt(static_cast<double>(pd)), rng);
  p.tag_w_ = UniformTensor({t, d}, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::Named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < conv_weights_.size(); ++i) {
    out.emplace_back("conv" + std::to_string(i) + ".weight", conv_weights_[i]);
    out.emplace_back("conv" + std::to_string(i) + ".bias", conv_biases_[i]);
  }
  out.emplace_back("ln.gain", ln_gain_);
  out.emplace_back("ln.bias", ln_bias_);
  out.emplace_back("proj.linear1", proj1_);
  out.emplace_back("proj.linear2", proj2_);
  out.emplace_back("tag.W", tag_w_);
  return out;
}

std::vector<Tensor> ModelParams::All() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : Named()) out.push_back(t);
  return out;
}

Tensor ModelParams::Find(const std::string& name) const {
  for (auto& [n, t] : Named()) {
    if (n == name) return t;
  }
  Fail(ErrorCode::kInvalidInput, "no parameter named '", name, "'");
}

ModelParams ModelParams::Clone() const {
  ModelParams p;
  p.config_ = config_;
  for (const Tensor& w : conv_weights_) p.conv_weights_.push_back(w.Detach(true));
  for (const Tensor& b : conv_biases_) p.conv_biases_.push_back(b.Detach(true));
  p.ln_gain_ = ln_gain_.Detach(true);
  p.ln_bias_ = ln_bias_.Detach(true);
  p.proj1_ = proj1_.Detach(true);
  p.proj2_ = proj2_.Detach(true);
  p.tag_w_ = tag_w_.Detach(true);
  return p;
}

void ModelParams::ZeroGrad() {
  for (Tensor t : All()) t.ZeroGrad();
}

void ModelParams::AddTo(diff::Checkpoint& ckpt) const {
  ckpt.SetMeta("model.levels", std::to_string(config_.levels));
  ckpt.SetMeta("model.base_channels", std::to_string(config_.base_channels));
  ckpt.SetMeta("model.embed_dim", std::to_string(config_.embed_dim));
  ckpt.SetMeta("model.proj_dim", std::to_string(config_.proj_dim));
  ckpt.SetMeta("model.tag_count", std::to_string(config_.tag_count));
  for (const auto& [name, t] : Named()) ckpt.AddTensor("param/" + name, t);
}

EncoderConfig ModelParams::ConfigFromCheckpoint(const diff::Checkpoint& ckpt) {
  EncoderConfig c;
  c.levels = ParseInt(ckpt, "model.levels");
  c.base_channels = ParseInt(ckpt, "model.base_channels");
  c.embed_dim = ParseInt(ckpt, "model.embed_dim");
  c.proj_dim = ParseInt(ckpt, "model.proj_dim");
  c.tag_count = ParseInt(ckpt, "model.tag_count");
  c.Validate();
  return c;
}

ModelParams ModelParams::FromCheckpoint(const diff::Checkpoint& ckpt) {
  // Build a template with the right shapes, then overwrite every tensor.
  const EncoderConfig config = ConfigFromCheckpoint(ckpt);
  ModelParams shaped = Init(config, 0);
  ModelParams p;
  p.config_ = config;
  for (std::size_t i = 0; i < shaped.conv_weights_.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i);
    p.conv_weights_.push_back(
        LoadTensor(ckpt, prefix + ".weight", shaped.conv_weights_[i].shape()));
    p.conv_biases_.push_back(LoadTensor(ckpt, prefix + ".bias", shaped.conv_biases_[i].shape()));
  }
  p.ln_gain_ = LoadTensor(ckpt, "ln.gain", shaped.ln_gain_.shape());
  p.ln_bias_ = LoadTensor(ckpt, "ln.bias", shaped.ln_bias_.shape());
  p.proj1_ = LoadTensor(ckpt, "proj.linear1", shaped.proj1_.shape());
  p.proj2_ = LoadTensor(ckpt, "proj.linear2", shaped.proj2_.shape());
  p.tag_w_ = LoadTensor(ckpt, "tag.W", shaped.tag_w_.shape());
  return p;
}

Tensor Stack(std::span<const AudioBuffer> excerpts) {
  if (excerpts.empty()) Fail(ErrorCode::kInvalidInput, "no excerpts to stack");
  const std::size_t len = excerpts.front().size();
  std::vector<double> data;
  data.reserve(excerpts.size() * len);
  for (const AudioBuffer& e : excerpts) {
    if (e.size() != len) Fail(ErrorCode::kInvalidShape, "excerpts differ in length");
    data.insert(data.end(), e.samples.begin(), e.samples.end());
  }
  return Tensor::FromData({excerpts.size(), len}, std::move(data));
}

Tensor Encode(const ModelParams& params, const Tensor& x) {
  const EncoderConfig& c = params.config();
  const std::size_t expected = c.input_length();
  Tensor input = x;
  if (x.rank() == 2) {
    input = diff::Reshape(x, {x.dim(0), 1, x.dim(1)});
  } else if (x.rank() != 3 || x.dim(1) != 1) {
    Fail(ErrorCode::kInvalidShape, "encoder input must be [batch, length], got ",
         diff::ShapeString(x.shape()));
  }
  if (input.dim(2) != expected) {
    Fail(ErrorCode::kInvalidShape, "encoder expects excerpts of ", expected, " samples, got ",
         input.dim(2));
  }
  const std::size_t batch = input.dim(0);
  Tensor h = diff::Relu(diff::Conv1d(input, params.conv_weight(0), params.conv_bias(0), 3, 0));
  for (std::size_t i = 1; i < params.num_convs(); ++i) {
    h = diff::Relu(diff::Conv1d(h, params.conv_weight(i), params.conv_bias(i), 1, 1));
    h = diff::MaxPool1d(h, 3);
  }
  return diff::Reshape(h, {batch, static_cast<std::size_t>(c.embed_dim)});
}

Tensor Project(const ModelParams& params, const Tensor& h) {
  return diff::Linear(diff::Relu(diff::Linear(h, params.proj1())), params.proj2());
}

Tensor Embed(const ModelParams& params, const Tensor& h) {
  return diff::L2Normalize(diff::LayerNorm(h, params.ln_gain(), params.ln_bias()));
}

Tensor TagProbs(const ModelParams& params, const Tensor& z) {
  return diff::Sigmoid(diff::Linear(z, params.tag_matrix()));
}

}  // namespace ssml::model
