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

#include "ssml/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "ssml/error.hpp"

namespace ssml::dsp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) Fail(ErrorCode::kInvalidInput, name, " probability outside [0,1]");
}

void CheckRange(const Range& r, const char* name) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.min > r.max) {
    Fail(ErrorCode::kInvalidInput, name, " range must satisfy min <= max");
  }
}

double Uniform(Rng& rng, const Range& r) {
  return std::uniform_real_distribution<double>(r.min, r.max)(rng);
}

bool Bernoulli(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::vector<double> ToDouble(const AudioBuffer& b) {
  return std::vector<double>(b.samples.begin(), b.samples.end());
}

AudioBuffer FromDouble(const std::vector<double>& x, int sample_rate_hz) {
  AudioBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.samples[i] = static_cast<float>(std::clamp(x[i], -1.0, 1.0));
  }
  return out;
}

void ApplyNoise(std::vector<double>& x, const AddNoise& t) {
  double energy = 0.0;
  for (double v : x) energy += v * v;
  const double rms = std::sqrt(energy / static_cast<double>(x.size()));
  const double sigma = rms / std::pow(10.0, t.snr_db / 20.0);
  if (sigma == 0.0) return;
  Rng rng(t.seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : x) v += normal(rng);
}

// Second-order Butterworth section (RBJ cookbook form, Q = 1/sqrt(2)).
void ApplyBiquad(std::vector<double>& x, const Filter& f, int sample_rate_hz) {
  const double nyquist = 0.5 * sample_rate_hz;
  const double fc = std::clamp(f.cutoff_hz, 1.0, 0.999 * nyquist);
  const double w0 = 2.0 * std::numbers::pi * fc / sample_rate_hz;
  const double cosw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
  double b0, b1, b2;
  if (f.kind == FilterKind::kLowPass) {
    b0 = (1.0 - cosw) / 2.0;
    b1 = 1.0 - cosw;
    b2 = b0;
  } else {
    b0 = (1.0 + cosw) / 2.0;
    b1 = -(1.0 + cosw);
    b2 = b0;
  }
  const double a0 = 1.0 + alpha;
  const double a1 = -2.0 * cosw;
  const double a2 = 1.0 - alpha;
  b0 /= a0;
  b1 /= a0;
  b2 /= a0;
  const double na1 = a1 / a0, na2 = a2 / a0;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = b0 * v + b1 * x1 + b2 * x2 - na1 * y1 - na2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

void ApplyDelay(std::vector<double>& x, const Delay& d, int sample_rate_hz) {
  const auto shift = static_cast<std::size_t>(
      std::lround(static_cast<double>(d.delay_ms) * sample_rate_hz / 1000.0));
  if (shift == 0 || shift >= x.size()) return;
  const std::vector<double> dry = x;
  for (std::size_t n = shift; n < x.size(); ++n) x[n] += d.mix * dry[n - shift];
}

double Lerp(const std::vector<double>& x, double pos) {
  if (pos <= 0.0) return x.front();
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= x.size()) return x.back();
  const double frac = pos - static_cast<double>(i);
  return x[i] + frac * (x[i + 1] - x[i]);
}

void ApplyPitchShift(std::vector<double>& x, const PitchShift& p, int sample_rate_hz) {
  if (p.semitones == 0.0) return;
  const double ratio = std::pow(2.0, p.semitones / 12.0);
  // Stretch by the ratio, then resample back to the original length.
  const std::vector<double> stretched = TimeStretch(x, ratio, sample_rate_hz);
  if (stretched.size() < 2) return;
  const double step = static_cast<double>(stretched.size()) / static_cast<double>(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = Lerp(stretched, n * step);
}

// Schroeder/Freeverb-style network: four damped feedback combs in parallel,
// two allpasses in series, mixed with the dry signal.
void ApplyReverb(std::vector<double>& x, const Reverb& r, int sample_rate_hz) {
  constexpr std::array<double, 4> kCombTuning = {1116.0, 1188.0, 1277.0, 1356.0};
  constexpr std::array<double, 2> kAllpassTuning = {556.0, 441.0};
  constexpr double kWet = 0.3;
  const double rate_scale = sample_rate_hz / 44100.0;
  const double room_scale = 0.4 + 0.6 * std::clamp(r.room, 0.0, 100.0) / 100.0;
  const double feedback = 0.97 * std::clamp(r.reverberance, 0.0, 100.0) / 100.0;
  const double damp = 0.7 * std::clamp(r.damping, 0.0, 100.0) / 100.0;

  std::vector<double> wet(x.size(), 0.0);
  for (double tuning : kCombTuning) {
    const auto len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(tuning * rate_scale * room_scale)));
    std::vector<double> buf(len, 0.0);
    std::size_t idx = 0;
    double store = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double out = buf[idx];
      store = out * (1.0 - damp) + store * damp;
      buf[idx] = x[n] + store * feedback;
      wet[n] += out / static_cast<double>(kCombTuning.size());
      idx = (idx + 1) % len;
    }
  }
  for (double tuning : kAllpassTuning) {
    const auto len =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(tuning * rate_scale)));
    std::vector<double> buf(len, 0.0);
    std::size_t idx = 0;
    for (double& v : wet) {
      const double delayed = buf[idx];
      const double out = -v + delayed;
      buf[idx] = v + delayed * 0.5;
      v = out;
      idx = (idx + 1) % len;
    }
  }
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = (1.0 - kWet) * x[n] + kWet * wet[n];
}

}  // namespace

void AugmentSpec::Validate() const {
  CheckProbability(polarity_p, "polarity");
  CheckProbability(noise_p, "noise");
  CheckProbability(gain_p, "gain");
  CheckProbability(filter_p, "filter");
  CheckProbability(delay_p, "delay");
  CheckProbability(pitch_p, "pitch");
  CheckProbability(reverb_p, "reverb");
  CheckRange(noise_snr_db, "noise SNR");
  CheckRange(gain_db, "gain");
  CheckRange(lowpass_hz, "low-pass cutoff");
  CheckRange(highpass_hz, "high-pass cutoff");
  CheckRange(pitch_semitones, "pitch");
  CheckRange(reverb_room, "reverb room");
  CheckRange(reverb_reverberance, "reverb reverberance");
  CheckRange(reverb_damping, "reverb damping");
  if (lowpass_hz.min <= 0.0 || highpass_hz.min <= 0.0) {
    Fail(ErrorCode::kInvalidInput, "filter cutoffs must be positive");
  }
  if (delay_step_ms <= 0 || delay_min_ms < 0 || delay_min_ms > delay_max_ms) {
    Fail(ErrorCode::kInvalidInput, "invalid delay grid");
  }
}

AugmentSpec AugmentSpec::AllProbabilities(double p) {
  AugmentSpec spec;
  spec.polarity_p = spec.noise_p = spec.gain_p = spec.filter_p = spec.delay_p = spec.pitch_p =
      spec.reverb_p = p;
  return spec;
}

std::size_t ChainPosition(const Transform& t) { return t.index(); }

std::string TransformName(const Transform& t) {
  static constexpr std::array<const char*, kNumTransforms> kNames = {
      "polarity", "noise", "gain", "filter", "delay", "pitch_shift", "reverb"};
  return kNames[t.index()];
}

AudioBuffer RandCrop(const AudioBuffer& track, std::size_t excerpt_len, Rng& rng,
                     std::size_t* start) {
  if (track.samples.empty()) Fail(ErrorCode::kInvalidInput, "cannot crop an empty track");
  if (excerpt_len == 0) Fail(ErrorCode::kInvalidInput, "excerpt length must be positive");
  AudioBuffer out;
  out.sample_rate_hz = track.sample_rate_hz;
  std::size_t offset = 0;
  if (track.size() > excerpt_len) {
    offset = std::uniform_int_distribution<std::size_t>(0, track.size() - excerpt_len)(rng);
  }
  out.samples.assign(excerpt_len, 0.0f);
  const std::size_t n = std::min(excerpt_len, track.size() - offset);
  std::copy_n(track.samples.begin() + static_cast<std::ptrdiff_t>(offset), n,
              out.samples.begin());
  if (start != nullptr) *start = offset;
  return out;
}

AugmentChain SampleChain(const AugmentSpec& spec, Rng& rng) {
  spec.Validate();
  AugmentChain chain;
  if (Bernoulli(rng, spec.polarity_p)) chain.transforms.emplace_back(PolarityInversion{});
  if (Bernoulli(rng, spec.noise_p)) {
    const double snr = Uniform(rng, spec.noise_snr_db);
    chain.transforms.emplace_back(AddNoise{snr, rng()});
  }
  if (Bernoulli(rng, spec.gain_p)) chain.transforms.emplace_back(Gain{Uniform(rng, spec.gain_db)});
  if (Bernoulli(rng, spec.filter_p)) {
    if (Bernoulli(rng, 0.5)) {
      chain.transforms.emplace_back(Filter{FilterKind::kLowPass, Uniform(rng, spec.lowpass_hz)});
    } else {
      chain.transforms.emplace_back(Filter{FilterKind::kHighPass, Uniform(rng, spec.highpass_hz)});
    }
  }
  if (Bernoulli(rng, spec.delay_p)) {
    const int steps = (spec.delay_max_ms - spec.delay_min_ms) / spec.delay_step_ms;
    const int k = std::uniform_int_distribution<int>(0, steps)(rng);
    chain.transforms.emplace_back(Delay{spec.delay_min_ms + k * spec.delay_step_ms, spec.delay_mix});
  }
  if (Bernoulli(rng, spec.pitch_p)) {
    chain.transforms.emplace_back(PitchShift{Uniform(rng, spec.pitch_semitones)});
  }
  if (Bernoulli(rng, spec.reverb_p)) {
    const double room = Uniform(rng, spec.reverb_room);
    const double rev = Uniform(rng, spec.reverb_reverberance);
    const double damp = Uniform(rng, spec.reverb_damping);
    chain.transforms.emplace_back(Reverb{room, rev, damp});
  }
  return chain;
}

AudioBuffer ApplyTransform(const AudioBuffer& excerpt, const Transform& transform) {
  if (excerpt.samples.empty()) Fail(ErrorCode::kInvalidInput, "cannot augment an empty excerpt");
  std::vector<double> x = ToDouble(excerpt);
  const int sr = excerpt.sample_rate_hz;
  std::visit(Overloaded{
                 [&](const PolarityInversion&) {
                   for (double& v : x) v = -v;
                 },
                 [&](const AddNoise& t) { ApplyNoise(x, t); },
                 [&](const Gain& t) {
                   const double g = std::pow(10.0, t.db / 20.0);
                   for (double& v : x) v *= g;
                 },
                 [&](const Filter& t) { ApplyBiquad(x, t, sr); },
                 [&](const Delay& t) { ApplyDelay(x, t, sr); },
                 [&](const PitchShift& t) { ApplyPitchShift(x, t, sr); },
                 [&](const Reverb& t) { ApplyReverb(x, t, sr); },
             },
             transform);
  return FromDouble(x, sr);
}

AudioBuffer ApplyChain(const AudioBuffer& excerpt, const AugmentChain& chain) {
  if (excerpt.samples.empty()) Fail(ErrorCode::kInvalidInput, "cannot augment an empty excerpt");
  AudioBuffer out = excerpt;
  for (const Transform& t : chain.transforms) out = ApplyTransform(out, t);
  return out;
}

std::vector<double> TimeStretch(const std::vector<double>& x, double factor,
                                int sample_rate_hz) {
  if (!(factor > 0.0)) Fail(ErrorCode::kInvalidInput, "stretch factor must be positive");
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(std::lround(static_cast<double>(n) * factor));
  if (n == 0 || m == 0) return {};

  std::size_t frame = sample_rate_hz >= 32000 ? 1024 : 512;
  while (frame > 8 && frame > n) frame /= 2;
  if (frame <= 8) {
    // Too short to overlap-add; plain resampling.
    std::vector<double> y(m);
    const double step = static_cast<double>(n) / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = Lerp(x, i * step);
    return y;
  }
  const std::size_t synth_hop = frame / 2;
  const double analysis_hop = static_cast<double>(synth_hop) / factor;
  const auto tolerance = static_cast<long long>(frame / 8);

  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(frame));
  }
  auto sample = [&](long long i) -> double {
    return (i >= 0 && i < static_cast<long long>(n)) ? x[static_cast<std::size_t>(i)] : 0.0;
  };

  std::vector<double> out(m + frame, 0.0);
  std::vector<double> weight(m + frame, 0.0);
  long long prev = 0;
  for (std::size_t j = 0; j * synth_hop < m; ++j) {
    const auto nominal = static_cast<long long>(std::llround(j * analysis_hop));
    long long pos = nominal;
    if (j > 0) {
      // Pick the candidate that best continues the previously copied frame.
      const long long natural = prev + static_cast<long long>(synth_hop);
      double best = -std::numeric_limits<double>::infinity();
      for (long long d = -tolerance; d <= tolerance; ++d) {
        double corr = 0.0;
        for (std::size_t i = 0; i < synth_hop; ++i) {
          corr += sample(nominal + d + static_cast<long long>(i)) *
                  sample(natural + static_cast<long long>(i));
        }
        if (corr > best) {
          best = corr;
          pos = nominal + d;
        }
      }
    }
    const std::size_t base = j * synth_hop;
    for (std::size_t i = 0; i < frame; ++i) {
      out[base + i] += window[i] * sample(pos + static_cast<long long>(i));
      weight[base + i] += window[i];
    }
    prev = pos;
  }
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = weight[i] > 1e-3 ? out[i] / weight[i] : out[i];
  return y;
}

}  // namespace ssml::dsp
