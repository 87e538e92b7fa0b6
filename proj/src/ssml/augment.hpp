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

// Random cropping and the stochastic waveform augmentation chain used to
// build positive pairs.
//
// A chain is sampled once (SampleChain) and then applied deterministically
// (ApplyChain). Transforms always run in this order: polarity inversion,
// additive noise, gain, low/high-pass filter, delay, pitch shift, reverb.
// Each transform preserves length and sample rate and clips to [-1, 1].

#ifndef SSML_AUGMENT_HPP_
#define SSML_AUGMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ssml/audio.hpp"

namespace ssml::dsp {

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct AugmentSpec {
  double polarity_p = 0.8;

  double noise_p = 0.01;
  Range noise_snr_db{40.0, 80.0};

  double gain_p = 0.3;
  Range gain_db{-6.0, 0.0};

  // Low-pass and high-pass are picked with equal probability.
  double filter_p = 0.8;
  Range lowpass_hz{2200.0, 4000.0};
  Range highpass_hz{200.0, 1200.0};

  double delay_p = 0.3;
  int delay_min_ms = 200;
  int delay_max_ms = 500;
  int delay_step_ms = 50;
  double delay_mix = 0.5;

  double pitch_p = 0.6;
  Range pitch_semitones{-7.0, 7.0};

  double reverb_p = 0.6;
  Range reverb_room{0.0, 100.0};
  Range reverb_reverberance{0.0, 100.0};
  Range reverb_damping{0.0, 100.0};

  void Validate() const;

  static AugmentSpec AllProbabilities(double p);
};

struct PolarityInversion {};
struct AddNoise {
  double snr_db;
  std::uint64_t seed;  // Seeds the noise realisation.
};
struct Gain {
  double db;
};
enum class FilterKind { kLowPass, kHighPass };
struct Filter {
  FilterKind kind;
  double cutoff_hz;
};
struct Delay {
  int delay_ms;
  double mix;
};
struct PitchShift {
  double semitones;
};
struct Reverb {
  double room;          // [0, 100]
  double reverberance;  // [0, 100]
  double damping;       // [0, 100]
};

using Transform =
    std::variant<PolarityInversion, AddNoise, Gain, Filter, Delay, PitchShift, Reverb>;

// Position of a transform within the fixed chain order (0..6).
std::size_t ChainPosition(const Transform& t);
std::string TransformName(const Transform& t);
inline constexpr std::size_t kNumTransforms = 7;

struct AugmentChain {
  std::vector<Transform> transforms;
  bool empty() const { return transforms.empty(); }
};

// Crops `excerpt_len` samples starting at a uniformly drawn position. Tracks
// shorter than the excerpt are right-padded with zeros first. The chosen
// start is written to `start` when non-null.
AudioBuffer RandCrop(const AudioBuffer& track, std::size_t excerpt_len, Rng& rng,
                     std::size_t* start = nullptr);

AugmentChain SampleChain(const AugmentSpec& spec, Rng& rng);
AudioBuffer ApplyChain(const AudioBuffer& excerpt, const AugmentChain& chain);
AudioBuffer ApplyTransform(const AudioBuffer& excerpt, const Transform& transform);

// Time-scale modification (WSOLA) to round(len * factor) samples, pitch kept.
std::vector<double> TimeStretch(const std::vector<double>& x, double factor,
                                int sample_rate_hz);

}  // namespace ssml::dsp

#endif  // SSML_AUGMENT_HPP_
