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

// Independent reference implementations used by the tests. They favour the
// most direct formula over speed and share no code with the library beyond
// the data types.

#ifndef SSML_TESTS_ORACLES_HPP_
#define SSML_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ssml/audio.hpp"
#include "ssml/inference.hpp"
#include "ssml/tensor.hpp"

namespace ssml::oracle {

using diff::Tensor;

inline std::vector<double> RandomVector(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Tensor RandomTensor(diff::Shape shape, Rng& rng, bool requires_grad = true) {
  return Tensor::FromData(shape, RandomVector(diff::NumElements(shape), rng), requires_grad);
}

// Values of magnitude in [0.1, 1] with random sign, away from the kinks of
// relu and clamp.
inline Tensor AwayFromZero(diff::Shape shape, Rng& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(diff::NumElements(shape));
  for (double& x : v) x = sign(rng) ? mag(rng) : -mag(rng);
  return Tensor::FromData(shape, std::move(v), true);
}

// ---- finite differences --------------------------------------------------

inline constexpr double kFdStep = 1e-5;
// Below this magnitude the relative error is measured against the floor.
inline constexpr double kFdFloor = 1e-6;

inline double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kFdFloor});
  return std::abs(analytic - numeric) / scale;
}

struct FdReport {
  std::size_t probes = 0;
  double max_rel_error = 0.0;
  std::string worst;
};

// Compares reverse-mode gradients of the scalar `f` with respect to `leaves`
// against central differences at `probes` random coordinates.
inline FdReport CheckGradients(std::vector<Tensor> leaves, const std::function<Tensor()>& f,
                               std::size_t probes, Rng& rng, const std::string& label = "") {
  for (Tensor& t : leaves) t.ZeroGrad();
  diff::Backward(f());
  std::vector<std::vector<double>> analytic;
  std::size_t total = 0;
  for (const Tensor& t : leaves) {
    std::vector<double> g(t.size(), 0.0);
    if (t.has_grad()) g.assign(t.grad().begin(), t.grad().end());
    analytic.push_back(std::move(g));
    total += t.size();
  }
  FdReport report;
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  diff::NoGradGuard no_grad;
  for (std::size_t p = 0; p < probes; ++p) {
    std::size_t flat = pick(rng), leaf = 0;
    while (flat >= leaves[leaf].size()) flat -= leaves[leaf++].size();
    double& x = leaves[leaf].mutable_data()[flat];
    const double x0 = x;
    x = x0 + kFdStep;
    const double up = f().item();
    x = x0 - kFdStep;
    const double down = f().item();
    x = x0;
    const double numeric = (up - down) / (2.0 * kFdStep);
    const double err = RelativeError(analytic[leaf][flat], numeric);
    ++report.probes;
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst = label + " leaf " + std::to_string(leaf) + "[" + std::to_string(flat) +
                     "] analytic " + std::to_string(analytic[leaf][flat]) + " numeric " +
                     std::to_string(numeric);
    }
  }
  return report;
}

// ---- losses ---------------------------------------------------------------

inline double Cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return dot / std::sqrt(uu * vv);
}

// -log(exp(s_ij / t) / sum_{l != i} exp(s_il / t)), evaluated literally.
inline double PairLoss(const std::vector<std::vector<double>>& rows, std::size_t i, std::size_t j,
                       double t) {
  double denominator = 0.0;
  for (std::size_t l = 0; l < rows.size(); ++l) {
    if (l != i) denominator += std::exp(Cosine(rows[i], rows[l]) / t);
  }
  return -std::log(std::exp(Cosine(rows[i], rows[j]) / t) / denominator);
}

// Average over both directions of every pair (2k, 2k+1).
inline double ContrastiveLoss(const std::vector<std::vector<double>>& rows, double t) {
  double total = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < rows.size(); ++k) {
    total += PairLoss(rows, 2 * k, 2 * k + 1, t) + PairLoss(rows, 2 * k + 1, 2 * k, t);
  }
  return total / static_cast<double>(rows.size());
}

inline std::vector<std::vector<double>> Rows(const Tensor& t) {
  std::vector<std::vector<double>> rows(t.dim(0));
  const std::size_t d = t.dim(1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].assign(t.data().begin() + r * d, t.data().begin() + (r + 1) * d);
  }
  return rows;
}

// ---- signals --------------------------------------------------------------

// Frequency of the largest DFT magnitude among bins whose centre lies in
// [lo_hz, hi_hz]; the transform is evaluated directly per bin.
inline double PeakFrequency(const std::vector<float>& x, int sample_rate_hz, double lo_hz,
                            double hi_hz, double* bin_width = nullptr) {
  const std::size_t n = x.size();
  const double width = static_cast<double>(sample_rate_hz) / static_cast<double>(n);
  if (bin_width != nullptr) *bin_width = width;
  const auto first = static_cast<std::size_t>(std::ceil(lo_hz / width));
  const auto last = std::min(n / 2, static_cast<std::size_t>(std::floor(hi_hz / width)));
  double best = -1.0;
  std::size_t best_bin = first;
  for (std::size_t k = first; k <= last; ++k) {
    double re = 0.0, im = 0.0;
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      re += x[i] * std::cos(w * static_cast<double>(i));
      im -= x[i] * std::sin(w * static_cast<double>(i));
    }
    const double mag = re * re + im * im;
    if (mag > best) {
      best = mag;
      best_bin = k;
    }
  }
  return static_cast<double>(best_bin) * width;
}

// Power of the DFT at an exact frequency (need not be a bin centre).
inline double PowerAt(const std::vector<float>& x, int sample_rate_hz, double hz) {
  double re = 0.0, im = 0.0;
  const double w = 2.0 * std::numbers::pi * hz / sample_rate_hz;
  for (std::size_t i = 0; i < x.size(); ++i) {
    re += x[i] * std::cos(w * static_cast<double>(i));
    im -= x[i] * std::sin(w * static_cast<double>(i));
  }
  return (re * re + im * im) / static_cast<double>(x.size() * x.size());
}

inline AudioBuffer Sine(double hz, double amplitude, std::size_t n, int sample_rate_hz = kDefaultSampleRate) {
  AudioBuffer a;
  a.sample_rate_hz = sample_rate_hz;
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.samples[i] = static_cast<float>(
        amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sample_rate_hz));
  }
  return a;
}

inline double Energy(const std::vector<float>& x) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  return e;
}

// ---- metrics --------------------------------------------------------------

inline bool Overlap(const std::vector<float>& a, const std::vector<float>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 1.0f && b[i] == 1.0f) return true;
  }
  return false;
}

// Recall@K by fully sorting every candidate list (score descending, id
// ascending on ties) and scanning it for the first relevant item.
inline std::vector<double> RecallOracle(const std::vector<infer::TrackEmbedding>& db,
                                        const std::vector<std::vector<float>>& tags,
                                        const std::vector<std::size_t>& ks) {
  std::vector<std::size_t> hits(ks.size(), 0);
  std::size_t evaluated = 0;
  for (std::size_t q = 0; q < db.size(); ++q) {
    struct Cand {
      double score;
      std::string id;
      std::size_t index;
    };
    std::vector<Cand> cands;
    bool relevant_exists = false;
    for (std::size_t j = 0; j < db.size(); ++j) {
      if (j == q) continue;
      double dot = 0.0;
      for (std::size_t d = 0; d < db[q].vector.size(); ++d) {
        dot += static_cast<double>(db[q].vector[d]) * static_cast<double>(db[j].vector[d]);
      }
      cands.push_back({dot, db[j].track_id, j});
      relevant_exists = relevant_exists || Overlap(tags[q], tags[j]);
    }
    if (!relevant_exists) continue;
    ++evaluated;
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    std::size_t rank = cands.size();
    for (std::size_t r = 0; r < cands.size(); ++r) {
      if (Overlap(tags[q], tags[cands[r].index])) {
        rank = r;
        break;
      }
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (rank < ks[i]) ++hits[i];
    }
  }
  std::vector<double> out;
  for (std::size_t h : hits) out.push_back(100.0 * static_cast<double>(h) / static_cast<double>(evaluated));
  return out;
}

// Fraction of (positive, negative) pairs ordered correctly; ties count half.
inline double PairwiseAuc(const std::vector<double>& s, const std::vector<float>& y) {
  double good = 0.0;
  std::size_t pairs = 0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (y[p] != 1.0f) continue;
    for (std::size_t n = 0; n < s.size(); ++n) {
      if (y[n] == 1.0f) continue;
      ++pairs;
      if (s[p] > s[n]) good += 1.0;
      else if (s[p] == s[n]) good += 0.5;
    }
  }
  return good / static_cast<double>(pairs);
}

// Average precision: mean over positives of the precision among all items
// scoring at least as high. Exact for tie-free scores.
inline double RankWalkAp(const std::vector<double>& s, const std::vector<float>& y) {
  double total = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1.0f) continue;
    ++positives;
    std::size_t above = 0, above_pos = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= s[i]) {
        ++above;
        if (y[j] == 1.0f) ++above_pos;
      }
    }
    total += static_cast<double>(above_pos) / static_cast<double>(above);
  }
  return total / static_cast<double>(positives);
}

}  // namespace ssml::oracle

#endif  // SSML_TESTS_ORACLES_HPP_
