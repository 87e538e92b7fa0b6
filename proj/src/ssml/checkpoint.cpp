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

#include "ssml/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "ssml/binary_io.hpp"
#include "ssml/error.hpp"

namespace ssml::diff {
namespace {

constexpr char kMagic[8] = {'S', 'S', 'M', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kMaxRank = 8;

}  // namespace

std::string ExactDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void Checkpoint::SetMeta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

std::optional<std::string> Checkpoint::Meta(const std::string& key) const {
  for (const auto& [k, v] : meta_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Checkpoint::RequireMeta(const std::string& key) const {
  auto v = Meta(key);
  if (!v) Fail(ErrorCode::kData, "checkpoint lacks metadata key '", key, "'");
  return *v;
}

void Checkpoint::AddArray(std::string name, Shape shape, std::vector<float> values) {
  if (NumElements(shape) != values.size()) {
    Fail(ErrorCode::kInvalidShape, "checkpoint array '", name, "' shape/value mismatch");
  }
  if (Find(name) != nullptr) Fail(ErrorCode::kInvalidInput, "duplicate checkpoint entry '", name, "'");
  arrays_.push_back({std::move(name), std::move(shape), std::move(values)});
}

void Checkpoint::AddTensor(const std::string& name, const Tensor& t) {
  std::vector<float> values(t.data().begin(), t.data().end());
  AddArray(name, t.shape(), std::move(values));
}

void Checkpoint::AddVector(const std::string& name, const std::vector<double>& values) {
  AddArray(name, {values.size()}, std::vector<float>(values.begin(), values.end()));
}

const NamedArray* Checkpoint::Find(const std::string& name) const {
  for (const auto& a : arrays_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const NamedArray& Checkpoint::Require(const std::string& name) const {
  const NamedArray* a = Find(name);
  if (a == nullptr) Fail(ErrorCode::kData, "checkpoint lacks tensor '", name, "'");
  return *a;
}

void Checkpoint::Save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorCode::kIo, "cannot open '", path.string(), "' for writing");
  os.write(kMagic, sizeof(kMagic));
  io::PutU32(os, kVersion);
  io::PutU32(os, static_cast<std::uint32_t>(meta_.size()));
  for (const auto& [k, v] : meta_) {
    io::PutString(os, k);
    io::PutString(os, v);
  }
  io::PutU32(os, static_cast<std::uint32_t>(arrays_.size()));
  for (const auto& a : arrays_) {
    io::PutString(os, a.name);
    io::PutU32(os, static_cast<std::uint32_t>(a.shape.size()));
    for (std::size_t d : a.shape) io::PutU32(os, static_cast<std::uint32_t>(d));
    for (float v : a.values) io::PutF32(os, v);
  }
  if (!os) Fail(ErrorCode::kIo, "write failed for '", path.string(), "'");
}

Checkpoint Checkpoint::Load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot open checkpoint '", path.string(), "'");
  char magic[8];
  io::ReadExact(is, magic, sizeof(magic), "checkpoint magic");
  if (!std::equal(magic, magic + 8, kMagic)) {
    Fail(ErrorCode::kData, "'", path.string(), "' is not a checkpoint file");
  }
  const std::uint32_t version = io::GetU32(is, "version");
  if (version != kVersion) Fail(ErrorCode::kData, "unsupported checkpoint version ", version);
  Checkpoint ckpt;
  const std::uint32_t meta_count = io::GetU32(is, "meta count");
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string k = io::GetString(is);
    std::string v = io::GetString(is);
    ckpt.meta_.emplace_back(std::move(k), std::move(v));
  }
  const std::uint32_t count = io::GetU32(is, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = io::GetString(is);
    const std::uint32_t rank = io::GetU32(is, "rank");
    if (rank > kMaxRank) Fail(ErrorCode::kData, "tensor '", a.name, "' has rank ", rank);
    for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(io::GetU32(is, "dim"));
    const std::size_t n = NumElements(a.shape);
    if (n > (std::size_t{1} << 32)) Fail(ErrorCode::kData, "tensor '", a.name, "' too large");
    a.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) a.values[j] = io::GetF32(is, "tensor value");
    ckpt.arrays_.push_back(std::move(a));
  }
  return ckpt;
}

}  // namespace ssml::diff
