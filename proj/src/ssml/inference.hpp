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

// Track-level outputs from excerpt-level ones, and inner-product retrieval.

#ifndef SSML_INFERENCE_HPP_
#define SSML_INFERENCE_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ssml/audio.hpp"
#include "ssml/dataset.hpp"
#include "ssml/model.hpp"

namespace ssml::infer {

inline constexpr double kDegenerateNorm = 1e-12;

struct TrackEmbedding {
  std::string track_id;
  std::vector<float> vector;  // Unit l2 norm.
};

struct TrackTagScores {
  std::string track_id;
  std::vector<double> scores;      // softmax(mean_probs), sums to 1.
  std::vector<double> mean_probs;  // Per-tag mean of excerpt probabilities.
};

// Consecutive non-overlapping windows from offset 0; the remainder is
// dropped. Tracks shorter than one window are zero padded to one window.
std::vector<AudioBuffer> SliceTrack(const AudioBuffer& track, std::size_t excerpt_len);

// Mean of the excerpt embeddings, rescaled to unit length. Throws
// kDegenerate when the mean has norm below kDegenerateNorm.
std::vector<double> AggregateEmbeddings(std::span<const std::vector<double>> excerpts);

// Mean of excerpt probabilities followed by a softmax over tags.
TrackTagScores AggregateTags(std::span<const std::vector<double>> excerpts);

struct TrackOutputs {
  TrackEmbedding embedding;
  TrackTagScores tags;
};

// Runs the network over every window of `track`, `chunk` windows at a time.
TrackOutputs InferTrack(const model::ModelParams& params, const std::string& track_id,
                        const AudioBuffer& track, std::size_t chunk = 16);

std::vector<TrackOutputs> InferRecords(const model::ModelParams& params,
                                       const data::Dataset& dataset,
                                       std::span<const std::size_t> indices);

struct RetrievalHit {
  std::string track_id;
  double score;
};

struct RetrievalResult {
  std::vector<RetrievalHit> hits;
  // Set when fewer than K candidates were available.
  bool truncated = false;
};

// K largest inner products with `query`, excluding entries whose id equals
// `exclude_id` (pass the query's id to drop the self match). Ties are broken
// by ascending track id.
RetrievalResult Retrieve(std::span<const float> query, std::span<const TrackEmbedding> db,
                         std::size_t k, const std::string& exclude_id = "");

// Binary store: u32 count, u32 dim, then per record a u32 id length, the id
// bytes and dim float32 values, all little endian.
void WriteEmbeddingStore(const std::filesystem::path& path, std::span<const TrackEmbedding> store);
std::vector<TrackEmbedding> ReadEmbeddingStore(const std::filesystem::path& path);

// One "query_id<TAB>rank<TAB>result_id<TAB>score" line per hit; rank from 1.
void WriteRetrievalLines(std::ostream& os, const std::string& query_id,
                         const RetrievalResult& result);

}  // namespace ssml::infer

#endif  // SSML_INFERENCE_HPP_
