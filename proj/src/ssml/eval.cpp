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

#include "ssml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "ssml/error.hpp"

namespace ssml::eval {
namespace {

bool ShareTag(const std::vector<float>& a, const std::vector<float>& b) {
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] != 0.0f && b[t] != 0.0f) return true;
  }
  return false;
}

void CheckBinary(std::span<const double> scores, std::span<const float> labels, std::size_t* pos,
                 std::size_t* neg) {
  if (scores.size() != labels.size()) Fail(ErrorCode::kInvalidShape, "scores/labels length mismatch");
  *pos = 0;
  *neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(scores[i])) Fail(ErrorCode::kNumeric, "non-finite score");
    if (labels[i] == 1.0f) {
      ++*pos;
    } else if (labels[i] == 0.0f) {
      ++*neg;
    } else {
      Fail(ErrorCode::kInvalidInput, "labels must be 0 or 1");
    }
  }
  if (*pos == 0 || *neg == 0) {
    Fail(ErrorCode::kDegenerate, "metric needs at least one positive and one negative");
  }
}

using SingleMetric = double (*)(std::span<const double>, std::span<const float>);

TagMetrics Tagwise(std::span<const std::vector<double>> scores,
                   std::span<const std::vector<float>> labels, SingleMetric metric,
                   const char* name) {
  if (scores.size() != labels.size() || scores.empty()) {
    Fail(ErrorCode::kInvalidShape, name, ": need matching, non-empty score and label rows");
  }
  const std::size_t t = scores.front().size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != t || labels[i].size() != t) {
      Fail(ErrorCode::kInvalidShape, name, ": row ", i, " has the wrong number of tags");
    }
  }
  TagMetrics out;
  std::vector<double> column(scores.size());
  std::vector<float> truth(scores.size());
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < t; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      column[i] = scores[i][c];
      truth[i] = labels[i][c];
      if (truth[i] != 0.0f) ++pos;
    }
    if (pos == 0 || pos == scores.size()) {
      out.per_tag.push_back(std::numeric_limits<double>::quiet_NaN());
      out.skipped.push_back(c);
      continue;
    }
    const double v = metric(column, truth);
    out.per_tag.push_back(v);
    total += v;
    ++used;
  }
  if (used == 0) Fail(ErrorCode::kData, name, ": no tag has both positive and negative tracks");
  out.mean = total / static_cast<double>(used);
  return out;
}

std::string FormatValue(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

RecallResult RecallAtK(std::span<const infer::TrackEmbedding> db,
                       std::span<const std::vector<float>> tags, std::span<const std::size_t> ks) {
  if (db.size() != tags.size()) Fail(ErrorCode::kInvalidShape, "one tag vector per track required");
  if (db.size() < 2) Fail(ErrorCode::kData, "recall@K needs at least two tracks");
  if (ks.empty()) Fail(ErrorCode::kInvalidInput, "no K values given");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (!index.emplace(db[i].track_id, i).second) {
      Fail(ErrorCode::kData, "duplicate track id '", db[i].track_id, "'");
    }
  }
  RecallResult out;
  out.ks.assign(ks.begin(), ks.end());
  std::vector<std::size_t> hits(ks.size(), 0);
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  for (std::size_t q = 0; q < db.size(); ++q) {
    bool answerable = false;
    for (std::size_t j = 0; j < db.size() && !answerable; ++j) {
      answerable = j != q && ShareTag(tags[q], tags[j]);
    }
    if (!answerable) {
      ++out.excluded_queries;
      continue;
    }
    ++out.evaluated_queries;
    const infer::RetrievalResult ranked = infer::Retrieve(db[q].vector, db, max_k, db[q].track_id);
    std::size_t first_relevant = std::numeric_limits<std::size_t>::max();
    for (std::size_t r = 0; r < ranked.hits.size(); ++r) {
      if (ShareTag(tags[q], tags[index.at(ranked.hits[r].track_id)])) {
        first_relevant = r;
        break;
      }
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (first_relevant < ks[i]) ++hits[i];
    }
  }
  if (out.evaluated_queries == 0) {
    Fail(ErrorCode::kData, "recall@K is undefined: no two tracks share a tag");
  }
  for (std::size_t h : hits) {
    out.percent.push_back(100.0 * static_cast<double>(h) / static_cast<double>(out.evaluated_queries));
  }
  return out;
}

double RocAuc(std::span<const double> scores, std::span<const float> labels) {
  std::size_t pos = 0, neg = 0;
  CheckBinary(scores, labels, &pos, &neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U from mid-ranks; a tied positive/negative pair counts 1/2.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1.0f) rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double AveragePrecision(std::span<const double> scores, std::span<const float> labels) {
  std::size_t pos = 0, neg = 0;
  CheckBinary(scores, labels, &pos, &neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double total = 0.0;
  std::size_t seen = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] != 1.0f) continue;
    ++seen;
    total += static_cast<double>(seen) / static_cast<double>(r + 1);
  }
  return total / static_cast<double>(pos);
}

TagMetrics TagwiseRocAuc(std::span<const std::vector<double>> scores,
                         std::span<const std::vector<float>> labels) {
  return Tagwise(scores, labels, &RocAuc, "ROC-AUC");
}

TagMetrics TagwisePrAuc(std::span<const std::vector<double>> scores,
                        std::span<const std::vector<float>> labels) {
  return Tagwise(scores, labels, &AveragePrecision, "PR-AUC");
}

MetricReport Evaluate(std::span<const infer::TrackEmbedding> embeddings,
                      std::span<const std::vector<double>> tag_scores,
                      std::span<const std::vector<float>> labels,
                      std::vector<std::string> tag_names) {
  MetricReport report;
  report.recall = RecallAtK(embeddings, labels);
  report.roc = TagwiseRocAuc(tag_scores, labels);
  report.pr = TagwisePrAuc(tag_scores, labels);
  if (tag_names.size() != report.roc.per_tag.size()) {
    Fail(ErrorCode::kInvalidShape, "expected ", report.roc.per_tag.size(), " tag names");
  }
  report.tag_names = std::move(tag_names);
  return report;
}

std::string FormatReport(const MetricReport& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < report.recall.ks.size(); ++i) {
    os << "R@" << report.recall.ks[i] << '=' << FormatValue(report.recall.percent[i]) << '\n';
  }
  os << "ROC=" << FormatValue(report.roc.mean) << '\n';
  os << "PR=" << FormatValue(report.pr.mean) << '\n';
  return os.str();
}

void WriteReport(const std::filesystem::path& path, const MetricReport& report) {
  {
    std::ofstream os(path, std::ios::trunc);
    if (!os) Fail(ErrorCode::kIo, "cannot write '", path.string(), "'");
    os << FormatReport(report);
  }
  std::filesystem::path tags_path = path;
  tags_path += ".tags";
  std::ofstream os(tags_path, std::ios::trunc);
  if (!os) Fail(ErrorCode::kIo, "cannot write '", tags_path.string(), "'");
  os << "# tag\tROC\tPR\n";
  for (std::size_t t = 0; t < report.tag_names.size(); ++t) {
    os << report.tag_names[t] << '\t' << FormatValue(report.roc.per_tag[t]) << '\t'
       << FormatValue(report.pr.per_tag[t]) << '\n';
  }
  os << "# evaluated_queries=" << report.recall.evaluated_queries
     << " excluded_queries=" << report.recall.excluded_queries
     << " skipped_tags=" << report.roc.skipped.size() << '\n';
}

std::map<std::string, double> ReadReport(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot read '", path.string(), "'");
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kData, path.string(), ": malformed line '", line, "'");
    try {
      out[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      Fail(ErrorCode::kData, path.string(), ": bad value in '", line, "'");
    }
  }
  return out;
}

}  // namespace ssml::eval
