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

// Synthetic tagged corpus: every tag owns a frequency band, and a track is a
// sum of tones drawn from the bands of its active tags plus white noise.

#ifndef SSML_SYNTHETIC_HPP_
#define SSML_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ssml/dataset.hpp"

namespace ssml::data {

struct SyntheticSpec {
  std::size_t tracks = 512;
  std::size_t track_length = 3 * 2187;
  std::size_t tag_count = 8;
  int sample_rate_hz = kDefaultSampleRate;
  // Tags occupy log-spaced bands between these edges.
  double min_freq_hz = 150.0;
  double max_freq_hz = 6000.0;
  // Tones are drawn from the central fraction of each band (log scale).
  double band_core = 0.5;
  std::size_t min_tags_per_track = 1;
  std::size_t max_tags_per_track = 2;
  std::size_t tones_per_tag = 1;
  // Standard deviation of the additive Gaussian noise before peak scaling.
  double noise_level = 0.05;
  // Depth of a slow random amplitude modulation applied to each tone.
  double modulation_depth = 0.3;
  double peak = 0.8;
  double test_fraction = 0.25;
  // Fraction of the non-test tracks held out for validation.
  double valid_fraction = 0.1;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct Band {
  double lo_hz;
  double hi_hz;
  double core_lo_hz;
  double core_hi_hz;
};

std::vector<Band> TagBands(const SyntheticSpec& spec);
std::string SyntheticTrackId(std::size_t index);
std::string SyntheticTagName(std::size_t tag);

// Samples are already on the 16-bit PCM grid, so writing and re-reading the
// corpus yields the same buffers.
Dataset GenerateSynthetic(const SyntheticSpec& spec);

// Writes <dir>/audio/<id>.wav, <dir>/tags.tsv and <dir>/splits.tsv. A
// non-empty `dir` is rejected unless `overwrite` is set.
void WriteCorpus(const Dataset& dataset, const std::filesystem::path& dir, bool overwrite);

}  // namespace ssml::data

#endif  // SSML_SYNTHETIC_HPP_
