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

#include "ssml/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "ssml/error.hpp"
#include "ssml/wav.hpp"

namespace ssml::data {
namespace {

constexpr std::uint64_t kTrackStream = 1;
constexpr std::uint64_t kSplitStream = 2;

}  // namespace

void SyntheticSpec::Validate() const {
  if (tracks < 1) Fail(ErrorCode::kInvalidInput, "synthetic corpus needs at least one track");
  if (track_length < 1) Fail(ErrorCode::kInvalidInput, "track length must be positive");
  if (tag_count < 2) Fail(ErrorCode::kInvalidInput, "synthetic corpus needs at least 2 tags");
  if (sample_rate_hz <= 0) Fail(ErrorCode::kInvalidInput, "sample rate must be positive");
  if (!(min_freq_hz > 0.0) || !(max_freq_hz > min_freq_hz) || max_freq_hz >= sample_rate_hz / 2.0) {
    Fail(ErrorCode::kInvalidInput, "band edges must satisfy 0 < min < max < Nyquist");
  }
  if (!(band_core > 0.0) || band_core > 1.0) Fail(ErrorCode::kInvalidInput, "band_core must be in (0, 1]");
  if (min_tags_per_track < 1 || max_tags_per_track < min_tags_per_track ||
      max_tags_per_track > tag_count) {
    Fail(ErrorCode::kInvalidInput, "tags per track must satisfy 1 <= min <= max <= tag count");
  }
  if (tones_per_tag < 1) Fail(ErrorCode::kInvalidInput, "tones per tag must be positive");
  if (!(noise_level >= 0.0) || !(modulation_depth >= 0.0) || modulation_depth >= 1.0) {
    Fail(ErrorCode::kInvalidInput, "noise level must be >= 0 and modulation depth in [0, 1)");
  }
  if (!(peak > 0.0) || peak > 1.0) Fail(ErrorCode::kInvalidInput, "peak must be in (0, 1]");
  if (!(test_fraction >= 0.0) || test_fraction >= 1.0 || !(valid_fraction >= 0.0) ||
      valid_fraction >= 1.0) {
    Fail(ErrorCode::kInvalidInput, "split fractions must be in [0, 1)");
  }
}

std::vector<Band> TagBands(const SyntheticSpec& spec) {
  const double log_lo = std::log(spec.min_freq_hz), log_hi = std::log(spec.max_freq_hz);
  const double width = (log_hi - log_lo) / static_cast<double>(spec.tag_count);
  std::vector<Band> bands;
  for (std::size_t t = 0; t < spec.tag_count; ++t) {
    const double a = log_lo + width * static_cast<double>(t);
    const double margin = 0.5 * (1.0 - spec.band_core) * width;
    bands.push_back(Band{std::exp(a), std::exp(a + width), std::exp(a + margin),
                         std::exp(a + width - margin)});
  }
  return bands;
}

std::string SyntheticTrackId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trk%05zu", index);
  return buf;
}

std::string SyntheticTagName(std::size_t tag) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "band%02zu", tag);
  return buf;
}

Dataset GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  const std::vector<Band> bands = TagBands(spec);
  const double sr = spec.sample_rate_hz;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  Dataset ds;
  for (std::size_t t = 0; t < spec.tag_count; ++t) ds.tag_names.push_back(SyntheticTagName(t));

  for (std::size_t n = 0; n < spec.tracks; ++n) {
    Rng rng = DeriveRng(spec.seed, {kTrackStream, n});
    std::uniform_int_distribution<std::size_t> count_dist(spec.min_tags_per_track,
                                                          spec.max_tags_per_track);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::size_t> order(spec.tag_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(count_dist(rng));
    std::sort(order.begin(), order.end());

    std::vector<double> x(spec.track_length, 0.0);
    for (std::size_t tag : order) {
      const Band& band = bands[tag];
      for (std::size_t k = 0; k < spec.tones_per_tag; ++k) {
        const double freq =
            std::exp(std::log(band.core_lo_hz) +
                     unit(rng) * (std::log(band.core_hi_hz) - std::log(band.core_lo_hz)));
        const double amp = 0.5 + 0.5 * unit(rng);
        const double phase = kTwoPi * unit(rng);
        const double mod_freq = 1.0 + 3.0 * unit(rng);
        const double mod_phase = kTwoPi * unit(rng);
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double time = static_cast<double>(i) / sr;
          const double envelope =
              1.0 + spec.modulation_depth * std::sin(kTwoPi * mod_freq * time + mod_phase);
          x[i] += amp * envelope * std::sin(kTwoPi * freq * time + phase);
        }
      }
    }
    if (spec.noise_level > 0.0) {
      for (double& v : x) v += spec.noise_level * gauss(rng);
    }
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::abs(v));
    const double scale = max_abs > 0.0 ? spec.peak / max_abs : 0.0;

    TrackRecord r;
    r.track_id = SyntheticTrackId(n);
    r.audio.sample_rate_hz = spec.sample_rate_hz;
    r.audio.samples.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.audio.samples[i] = QuantizePcm16(static_cast<float>(x[i] * scale));
    }
    r.tags.assign(spec.tag_count, 0.0f);
    for (std::size_t tag : order) r.tags[tag] = 1.0f;
    r.labeled = true;
    ds.records.push_back(std::move(r));
  }

  Rng split_rng = DeriveRng(spec.seed, {kSplitStream});
  std::vector<std::size_t> perm(spec.tracks);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), split_rng);
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * spec.tracks));
  const auto n_valid = static_cast<std::size_t>(
      std::llround(spec.valid_fraction * static_cast<double>(spec.tracks - n_test)));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    Split split = Split::kTrain;
    if (i < n_test) {
      split = Split::kTest;
    } else if (i < n_test + n_valid) {
      split = Split::kValid;
    }
    ds.records[perm[i]].split = split;
  }
  ds.Validate();
  return ds;
}

void WriteCorpus(const Dataset& dataset, const std::filesystem::path& dir, bool overwrite) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !overwrite) {
    Fail(ErrorCode::kInvalidInput, "output directory '", dir.string(),
         "' is not empty (use --force to overwrite)");
  }
  fs::create_directories(dir / "audio", ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create '", (dir / "audio").string(), "': ", ec.message());
  for (const TrackRecord& r : dataset.records) {
    WriteWav(dir / "audio" / (r.track_id + ".wav"), r.audio, WavEncoding::kPcm16);
  }
  WriteTagFile(dir / "tags.tsv", dataset);
  WriteSplitFile(dir / "splits.tsv", dataset);
}

}  // namespace ssml::data
