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

// Retrieval (recall@K) and tagging (tag-wise ROC-AUC and average precision)
// metrics.

#ifndef SSML_EVAL_HPP_
#define SSML_EVAL_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ssml/inference.hpp"

namespace ssml::eval {

inline constexpr std::array<std::size_t, 4> kRecallKs = {1, 2, 4, 8};

struct RecallResult {
  std::vector<std::size_t> ks;
  std::vector<double> percent;  // One entry per K.
  std::size_t evaluated_queries = 0;
  std::size_t excluded_queries = 0;
};

// A retrieved track is relevant when it shares at least one tag with the
// query. Queries with no relevant track in the database are excluded.
// Rankings follow infer::Retrieve (inner product, ties by ascending id).
RecallResult RecallAtK(std::span<const infer::TrackEmbedding> db,
                       std::span<const std::vector<float>> tags,
                       std::span<const std::size_t> ks = kRecallKs);

// Single-tag metrics; `labels` are 0/1. Both need at least one positive and
// one negative and throw kDegenerate otherwise.
double RocAuc(std::span<const double> scores, std::span<const float> labels);
double AveragePrecision(std::span<const double> scores, std::span<const float> labels);

struct TagMetrics {
  double mean = 0.0;
  std::vector<double> per_tag;  // NaN for skipped tags.
  std::vector<std::size_t> skipped;
};

// scores and labels: one row per track, one column per tag. Tags without
// both a positive and a negative track are skipped; throws kData when every
// tag is skipped.
TagMetrics TagwiseRocAuc(std::span<const std::vector<double>> scores,
                         std::span<const std::vector<float>> labels);
TagMetrics TagwisePrAuc(std::span<const std::vector<double>> scores,
                        std::span<const std::vector<float>> labels);

struct MetricReport {
  RecallResult recall;
  TagMetrics roc;
  TagMetrics pr;
  std::vector<std::string> tag_names;
};

MetricReport Evaluate(std::span<const infer::TrackEmbedding> embeddings,
                      std::span<const std::vector<double>> tag_scores,
                      std::span<const std::vector<float>> labels,
                      std::vector<std::string> tag_names);

// Main document: exactly the keys R@1 R@2 R@4 R@8 ROC PR, one "key=value"
// line each. The per-tag breakdown goes to "<path>.tags".
void WriteReport(const std::filesystem::path& path, const MetricReport& report);
std::map<std::string, double> ReadReport(const std::filesystem::path& path);
std::string FormatReport(const MetricReport& report);

}  // namespace ssml::eval

#endif  // SSML_EVAL_HPP_
