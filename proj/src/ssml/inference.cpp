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

#include "ssml/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "ssml/binary_io.hpp"
#include "ssml/error.hpp"
#include "ssml/ops.hpp"

namespace ssml::infer {

std::vector<AudioBuffer> SliceTrack(const AudioBuffer& track, std::size_t excerpt_len) {
  if (excerpt_len == 0) Fail(ErrorCode::kInvalidInput, "excerpt length must be positive");
  if (track.samples.empty()) Fail(ErrorCode::kInvalidInput, "cannot slice an empty track");
  std::vector<AudioBuffer> out;
  if (track.size() < excerpt_len) {
    AudioBuffer e{track.samples, track.sample_rate_hz};
    e.samples.resize(excerpt_len, 0.0f);
    out.push_back(std::move(e));
    return out;
  }
  const std::size_t count = track.size() / excerpt_len;
  for (std::size_t i = 0; i < count; ++i) {
    const auto begin = track.samples.begin() + static_cast<std::ptrdiff_t>(i * excerpt_len);
    out.push_back(AudioBuffer{std::vector<float>(begin, begin + static_cast<std::ptrdiff_t>(excerpt_len)),
                              track.sample_rate_hz});
  }
  return out;
}

std::vector<double> AggregateEmbeddings(std::span<const std::vector<double>> excerpts) {
  if (excerpts.empty()) Fail(ErrorCode::kInvalidInput, "no excerpt embeddings to aggregate");
  const std::size_t dim = excerpts.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& z : excerpts) {
    if (z.size() != dim) Fail(ErrorCode::kInvalidShape, "excerpt embeddings differ in length");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += z[d];
  }
  double norm = 0.0;
  for (double& v : mean) {
    v /= static_cast<double>(excerpts.size());
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm < kDegenerateNorm) {
    Fail(ErrorCode::kDegenerate, "excerpt embeddings cancel out; track embedding is undefined");
  }
  for (double& v : mean) v /= norm;
  return mean;
}

TrackTagScores AggregateTags(std::span<const std::vector<double>> excerpts) {
  if (excerpts.empty()) Fail(ErrorCode::kInvalidInput, "no excerpt probabilities to aggregate");
  const std::size_t t = excerpts.front().size();
  if (t == 0) Fail(ErrorCode::kInvalidShape, "empty tag probability vector");
  TrackTagScores out;
  out.mean_probs.assign(t, 0.0);
  for (const auto& p : excerpts) {
    if (p.size() != t) Fail(ErrorCode::kInvalidShape, "excerpt tag vectors differ in length");
    for (std::size_t c = 0; c < t; ++c) out.mean_probs[c] += p[c];
  }
  for (double& v : out.mean_probs) v /= static_cast<double>(excerpts.size());
  const double m = *std::max_element(out.mean_probs.begin(), out.mean_probs.end());
  double total = 0.0;
  out.scores.resize(t);
  for (std::size_t c = 0; c < t; ++c) {
    out.scores[c] = std::exp(out.mean_probs[c] - m);
    total += out.scores[c];
  }
  for (double& v : out.scores) v /= total;
  return out;
}

TrackOutputs InferTrack(const model::ModelParams& params, const std::string& track_id,
                        const AudioBuffer& track, std::size_t chunk) {
  if (chunk == 0) Fail(ErrorCode::kInvalidInput, "chunk size must be positive");
  const std::vector<AudioBuffer> windows = SliceTrack(track, params.config().input_length());
  diff::NoGradGuard no_grad;
  std::vector<std::vector<double>> z_rows, p_rows;
  for (std::size_t start = 0; start < windows.size(); start += chunk) {
    const std::size_t n = std::min(chunk, windows.size() - start);
    const diff::Tensor x = model::Stack(std::span<const AudioBuffer>(windows).subspan(start, n));
    const diff::Tensor z = model::Embed(params, model::Encode(params, x));
    const diff::Tensor p = model::TagProbs(params, z);
    const std::size_t d = z.dim(1), t = p.dim(1);
    for (std::size_t r = 0; r < n; ++r) {
      z_rows.emplace_back(z.data().begin() + static_cast<std::ptrdiff_t>(r * d),
                          z.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
      p_rows.emplace_back(p.data().begin() + static_cast<std::ptrdiff_t>(r * t),
                          p.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * t));
    }
  }
  TrackOutputs out;
  out.embedding.track_id = track_id;
  for (double v : AggregateEmbeddings(z_rows)) out.embedding.vector.push_back(static_cast<float>(v));
  out.tags = AggregateTags(p_rows);
  out.tags.track_id = track_id;
  return out;
}

std::vector<TrackOutputs> InferRecords(const model::ModelParams& params,
                                       const data::Dataset& dataset,
                                       std::span<const std::size_t> indices) {
  std::vector<TrackOutputs> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= dataset.records.size()) Fail(ErrorCode::kInvalidInput, "record index out of range");
    const data::TrackRecord& r = dataset.records[i];
    out.push_back(InferTrack(params, r.track_id, r.audio));
  }
  return out;
}

RetrievalResult Retrieve(std::span<const float> query, std::span<const TrackEmbedding> db,
                         std::size_t k, const std::string& exclude_id) {
  if (k == 0) Fail(ErrorCode::kInvalidInput, "K must be positive");
  RetrievalResult result;
  for (const TrackEmbedding& e : db) {
    if (!exclude_id.empty() && e.track_id == exclude_id) continue;
    if (e.vector.size() != query.size()) {
      Fail(ErrorCode::kInvalidShape, "embedding of '", e.track_id, "' has dimension ",
           e.vector.size(), ", query has ", query.size());
    }
    double dot = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) {
      dot += static_cast<double>(query[d]) * static_cast<double>(e.vector[d]);
    }
    result.hits.push_back(RetrievalHit{e.track_id, dot});
  }
  const auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.track_id < b.track_id;
  };
  if (result.hits.size() <= k) {
    result.truncated = result.hits.size() < k;
    std::sort(result.hits.begin(), result.hits.end(), better);
  } else {
    std::partial_sort(result.hits.begin(), result.hits.begin() + static_cast<std::ptrdiff_t>(k),
                      result.hits.end(), better);
    result.hits.resize(k);
  }
  return result;
}

void WriteEmbeddingStore(const std::filesystem::path& path, std::span<const TrackEmbedding> store) {
  const std::size_t dim = store.empty() ? 0 : store.front().vector.size();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorCode::kIo, "cannot write '", path.string(), "'");
  io::PutU32(os, static_cast<std::uint32_t>(store.size()));
  io::PutU32(os, static_cast<std::uint32_t>(dim));
  for (const TrackEmbedding& e : store) {
    if (e.vector.size() != dim) Fail(ErrorCode::kInvalidShape, "store entries differ in dimension");
    io::PutString(os, e.track_id);
    for (float v : e.vector) io::PutF32(os, v);
  }
  if (!os) Fail(ErrorCode::kIo, "write failed for '", path.string(), "'");
}

std::vector<TrackEmbedding> ReadEmbeddingStore(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot read '", path.string(), "'");
  try {
    const std::uint32_t count = io::GetU32(is, "record count");
    const std::uint32_t dim = io::GetU32(is, "dimension");
    std::vector<TrackEmbedding> out;
    out.reserve(std::min<std::uint32_t>(count, 1u << 20));
    for (std::uint32_t i = 0; i < count; ++i) {
      TrackEmbedding e;
      e.track_id = io::GetString(is);
      e.vector.resize(dim);
      for (float& v : e.vector) {
        v = io::GetF32(is, "embedding value");
        if (!std::isfinite(v)) Fail(ErrorCode::kData, "non-finite embedding value");
      }
      out.push_back(std::move(e));
    }
    if (is.peek() != std::char_traits<char>::eof()) Fail(ErrorCode::kData, "trailing bytes");
    return out;
  } catch (const Error& e) {
    Fail(e.code(), path.string(), ": ", e.what());
  }
}

void WriteRetrievalLines(std::ostream& os, const std::string& query_id,
                         const RetrievalResult& result) {
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < result.hits.size(); ++i) {
    os << query_id << '\t' << (i + 1) << '\t' << result.hits[i].track_id << '\t'
       << result.hits[i].score << '\n';
  }
  os.precision(old_precision);
}

}  // namespace ssml::infer
