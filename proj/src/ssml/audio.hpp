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

#ifndef SSML_AUDIO_HPP_
#define SSML_AUDIO_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace ssml {

inline constexpr int kDefaultSampleRate = 22050;

// Random source used by every stochastic operation. Seeded explicitly.
using Rng = std::mt19937_64;

// Mono waveform; amplitudes are expected in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate_hz = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  // Throws kInvalidInput on empty buffers, bad rates or non-finite samples.
  void Validate() const;
};

// Derives an independent generator from a base seed and a tuple of stream
// identifiers (epoch, batch, ...) through std::seed_seq.
Rng DeriveRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

}  // namespace ssml

#endif  // SSML_AUDIO_HPP_
