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

#include <array>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ssml/augment.hpp"
#include "ssml/error.hpp"

using namespace ssml;
using namespace ssml::dsp;

TEST_SUITE("augment") {

TEST_CASE("crop of a track exactly one excerpt long is the track") {
  AudioBuffer track = oracle::Sine(440.0, 0.5, 2187);
  Rng rng(1);
  std::size_t start = 99;
  const AudioBuffer out = RandCrop(track, 2187, rng, &start);
  CHECK(start == 0);
  CHECK(out.samples == track.samples);
}

TEST_CASE("crop start positions are uniform") {
  AudioBuffer track;
  track.samples = {0.1f, 0.2f, 0.3f, 0.4f};
  Rng rng(5);
  std::array<int, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    std::size_t start = 0;
    const AudioBuffer out = RandCrop(track, 2, rng, &start);
    REQUIRE(start < 3);
    CHECK(out.samples[0] == track.samples[start]);
    ++counts[start];
  }
  // Binomial(n, 1/3) per cell.
  const double mean = n / 3.0, sd = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
  for (int c : counts) CHECK(std::abs(c - mean) < 3.0 * sd);
}

TEST_CASE("short tracks are zero padded") {
  AudioBuffer track;
  track.samples = {0.5f, -0.5f};
  Rng rng(1);
  const AudioBuffer out = RandCrop(track, 5, rng);
  CHECK(out.samples == std::vector<float>{0.5f, -0.5f, 0.0f, 0.0f, 0.0f});
}

TEST_CASE("empty track is rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(RandCrop(AudioBuffer{}, 3, rng), Error);
}

TEST_CASE("all-zero probabilities give an empty chain") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(SampleChain(AugmentSpec::AllProbabilities(0.0), rng).empty());
}

TEST_CASE("all-one probabilities give the full chain in order") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const AugmentChain c = SampleChain(AugmentSpec::AllProbabilities(1.0), rng);
    REQUIRE(c.transforms.size() == kNumTransforms);
    for (std::size_t k = 0; k < kNumTransforms; ++k) CHECK(ChainPosition(c.transforms[k]) == k);
  }
}

TEST_CASE("sampled parameters stay inside their ranges") {
  const AugmentSpec spec = AugmentSpec::AllProbabilities(1.0);
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    for (const Transform& t : SampleChain(spec, rng).transforms) {
      if (const auto* n = std::get_if<AddNoise>(&t)) {
        CHECK(n->snr_db >= 40.0);
        CHECK(n->snr_db <= 80.0);
      } else if (const auto* g = std::get_if<Gain>(&t)) {
        CHECK(g->db >= -6.0);
        CHECK(g->db <= 0.0);
      } else if (const auto* f = std::get_if<Filter>(&t)) {
        if (f->kind == FilterKind::kLowPass) {
          CHECK(f->cutoff_hz >= 2200.0);
          CHECK(f->cutoff_hz <= 4000.0);
        } else {
          CHECK(f->cutoff_hz >= 200.0);
          CHECK(f->cutoff_hz <= 1200.0);
        }
      } else if (const auto* d = std::get_if<Delay>(&t)) {
        CHECK(d->delay_ms >= 200);
        CHECK(d->delay_ms <= 500);
        CHECK(d->delay_ms % 50 == 0);
      } else if (const auto* p = std::get_if<PitchShift>(&t)) {
        CHECK(p->semitones >= -7.0);
        CHECK(p->semitones <= 7.0);
      } else if (const auto* r = std::get_if<Reverb>(&t)) {
        CHECK(r->room >= 0.0);
        CHECK(r->room <= 100.0);
      }
    }
  }
}

TEST_CASE("polarity inversion twice is the identity") {
  const AudioBuffer x = oracle::Sine(300.0, 0.7, 1000);
  const AudioBuffer y = ApplyTransform(ApplyTransform(x, PolarityInversion{}), PolarityInversion{});
  CHECK(y.samples == x.samples);
}

TEST_CASE("gain of -6 dB on a unit impulse") {
  AudioBuffer x;
  x.samples.assign(64, 0.0f);
  x.samples[10] = 1.0f;
  const AudioBuffer y = ApplyTransform(x, Gain{-6.0});
  CHECK(std::abs(y.samples[10] - std::pow(10.0, -6.0 / 20.0)) < 1e-6);
  CHECK(std::abs(y.samples[10] - 0.5012) < 1e-3);
}

TEST_CASE("added noise has the requested SNR") {
  const AudioBuffer x = oracle::Sine(500.0, 0.5, 22050);
  for (double snr : {40.0, 60.0, 80.0}) {
    const AudioBuffer y = ApplyTransform(x, AddNoise{snr, 77});
    std::vector<float> noise(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) noise[i] = y.samples[i] - x.samples[i];
    const double measured = 10.0 * std::log10(oracle::Energy(x.samples) / oracle::Energy(noise));
    CAPTURE(snr);
    CHECK(std::abs(measured - snr) < 1.0);
  }
}

TEST_CASE("low-pass keeps low tones and attenuates high ones") {
  const AudioBuffer low = oracle::Sine(200.0, 0.5, 8192), high = oracle::Sine(8000.0, 0.5, 8192);
  const Filter lp{FilterKind::kLowPass, 2200.0};
  const double keep = oracle::Energy(ApplyTransform(low, lp).samples) / oracle::Energy(low.samples);
  const double cut = oracle::Energy(ApplyTransform(high, lp).samples) / oracle::Energy(high.samples);
  CHECK(keep > 0.9);
  CHECK(cut < 0.1);
}

TEST_CASE("high-pass keeps high tones and attenuates low ones") {
  const AudioBuffer low = oracle::Sine(50.0, 0.5, 8192), high = oracle::Sine(5000.0, 0.5, 8192);
  const Filter hp{FilterKind::kHighPass, 1200.0};
  CHECK(oracle::Energy(ApplyTransform(high, hp).samples) / oracle::Energy(high.samples) > 0.9);
  CHECK(oracle::Energy(ApplyTransform(low, hp).samples) / oracle::Energy(low.samples) < 0.01);
}

TEST_CASE("delay adds an attenuated echo") {
  AudioBuffer x;
  x.samples.assign(22050, 0.0f);
  x.samples[0] = 0.8f;
  const AudioBuffer y = ApplyTransform(x, Delay{200, 0.5});
  const std::size_t lag = 22050 * 200 / 1000;
  CHECK(y.samples[0] == 0.8f);
  CHECK(y.samples[lag] == doctest::Approx(0.4));
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (i != lag) CHECK(y.samples[i] == 0.0f);
  }
}

TEST_CASE("pitch shift of +7 semitones moves a 440 Hz tone to 659.3 Hz") {
  const AudioBuffer x = oracle::Sine(440.0, 0.5, 22050);
  const AudioBuffer y = ApplyTransform(x, PitchShift{7.0});
  double bin = 0.0;
  const double peak = oracle::PeakFrequency(y.samples, 22050, 100.0, 2000.0, &bin);
  const double expect = 440.0 * std::pow(2.0, 7.0 / 12.0);
  CHECK(std::abs(peak - expect) <= bin);
}

TEST_CASE("pitch shift down keeps duration") {
  const AudioBuffer x = oracle::Sine(660.0, 0.5, 11025);
  const AudioBuffer y = ApplyTransform(x, PitchShift{-5.0});
  CHECK(y.size() == x.size());
  double bin = 0.0;
  const double peak = oracle::PeakFrequency(y.samples, 22050, 100.0, 2000.0, &bin);
  CHECK(std::abs(peak - 660.0 * std::pow(2.0, -5.0 / 12.0)) <= bin);
}

TEST_CASE("reverb extends an impulse") {
  AudioBuffer x;
  x.samples.assign(22050, 0.0f);
  x.samples[0] = 0.9f;
  const AudioBuffer y = ApplyTransform(x, Reverb{50.0, 80.0, 20.0});
  double tail = 0.0;
  for (std::size_t i = 2000; i < y.size(); ++i) tail += std::abs(y.samples[i]);
  CHECK(tail > 0.0);
}

TEST_CASE("transforms preserve length and rate and stay in range") {
  const AudioBuffer x = oracle::Sine(440.0, 0.99, 4000, 16000);
  Rng rng(21);
  for (int i = 0; i < 30; ++i) {
    const AudioBuffer y = ApplyChain(x, SampleChain(AugmentSpec::AllProbabilities(1.0), rng));
    CHECK(y.size() == x.size());
    CHECK(y.sample_rate_hz == 16000);
    for (float v : y.samples) {
      REQUIRE(std::isfinite(v));
      REQUIRE(std::abs(v) <= 1.0f);
    }
  }
}

TEST_CASE("chains are deterministic in the seed") {
  Rng a(9), b(9);
  const AudioBuffer x = oracle::Sine(440.0, 0.5, 3000);
  for (int i = 0; i < 10; ++i) {
    const AugmentSpec spec;
    CHECK(ApplyChain(x, SampleChain(spec, a)).samples == ApplyChain(x, SampleChain(spec, b)).samples);
  }
}

TEST_CASE("time stretch produces the scaled length") {
  std::vector<double> x(5000, 0.1);
  CHECK(TimeStretch(x, 1.5, 22050).size() == 7500);
  CHECK(TimeStretch(x, 0.5, 22050).size() == 2500);
}

}  // TEST_SUITE
