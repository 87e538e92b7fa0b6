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

#include "ssml/audio.hpp"

#include <cmath>

#include "ssml/error.hpp"

namespace ssml {

void AudioBuffer::Validate() const {
  if (samples.empty()) Fail(ErrorCode::kInvalidInput, "empty audio buffer");
  if (sample_rate_hz <= 0) Fail(ErrorCode::kInvalidInput, "non-positive sample rate");
  for (float s : samples) {
    if (!std::isfinite(s)) Fail(ErrorCode::kInvalidInput, "non-finite audio sample");
  }
}

Rng DeriveRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (std::uint64_t s : stream) {
    words.push_back(static_cast<std::uint32_t>(s));
    words.push_back(static_cast<std::uint32_t>(s >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace ssml
