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

// Checkpoint container.
//
// Layout (all integers little-endian u32):
//   "SSMLCKPT"  8-byte magic
//   version     currently 1
//   meta_count, then meta_count x (key string, value string)
//   tensor_count, then tensor_count x
//       (name string, rank, rank x dim, prod(dims) x float32 LE)
// Strings are a u32 byte length followed by the bytes. Entries keep their
// insertion order, so save(load(file)) reproduces the file byte for byte.

#ifndef SSML_CHECKPOINT_HPP_
#define SSML_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssml/tensor.hpp"

namespace ssml::diff {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void SetMeta(const std::string& key, const std::string& value);
  std::optional<std::string> Meta(const std::string& key) const;
  std::string RequireMeta(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }

  void AddArray(std::string name, Shape shape, std::vector<float> values);
  void AddTensor(const std::string& name, const Tensor& t);
  void AddVector(const std::string& name, const std::vector<double>& values);
  const NamedArray* Find(const std::string& name) const;
  const NamedArray& Require(const std::string& name) const;
  const std::vector<NamedArray>& arrays() const { return arrays_; }

  void Save(const std::filesystem::path& path) const;
  static Checkpoint Load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<NamedArray> arrays_;
};

// Formats a double so that parsing it back yields the same bits.
std::string ExactDouble(double v);

}  // namespace ssml::diff

#endif  // SSML_CHECKPOINT_HPP_
