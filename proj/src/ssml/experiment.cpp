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

#include "ssml/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "ssml/error.hpp"
#include "ssml/inference.hpp"

namespace ssml::exp {

std::vector<GridRow> PresetGrid(const std::string& name) {
  if (name == "mtat") {
    return {
        {"A", false, false, false, 1.0},  {"B", true, false, false, 1.0},
        {"C", false, false, true, 1.0},   {"D", true, true, true, 0.1},
        {"E", false, true, true, 0.1},    {"F", true, true, true, 1.0},
        {"G", false, true, true, 1.0},    {"H", true, true, true, 10.0},
        {"I", false, true, true, 10.0},
    };
  }
  if (name == "mtg") {
    return {
        {"J", true, true, true, 0.05}, {"K", false, true, true, 0.05},
        {"L", true, true, true, 0.1},  {"M", false, true, true, 0.1},
        {"N", true, true, true, 1.0},  {"O", false, true, true, 1.0},
    };
  }
  Fail(ErrorCode::kInvalidInput, "unknown grid preset '", name, "' (mtat|mtg)");
}

std::vector<GridRow> ReadGridFile(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot read grid file '", path.string(), "'");
  std::vector<GridRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    GridRow row;
    int augment = 0, contrastive = 0, load = 0;
    if (!(fields >> row.name)) continue;
    if (!(fields >> augment >> contrastive >> load >> row.alpha)) {
      Fail(ErrorCode::kInvalidInput, path.string(), ":", line_no,
           ": expected 'name augment contrastive load alpha'");
    }
    row.fine_tune_augment = augment != 0;
    row.fine_tune_contrastive = contrastive != 0;
    row.load_pretrain = load != 0;
    rows.push_back(row);
  }
  ValidateGrid(rows);
  return rows;
}

void ValidateGrid(const std::vector<GridRow>& rows) {
  if (rows.empty()) Fail(ErrorCode::kInvalidInput, "grid has no rows");
  std::set<std::string> names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!names.insert(rows[i].name).second) {
      Fail(ErrorCode::kInvalidInput, "grid row name '", rows[i].name, "' repeats");
    }
    if (!(rows[i].alpha > 0.0)) Fail(ErrorCode::kInvalidInput, "grid row ", rows[i].name, ": alpha must be > 0");
    for (std::size_t j = 0; j < i; ++j) {
      GridRow a = rows[i], b = rows[j];
      a.name = b.name = "";
      if (a == b) Fail(ErrorCode::kInvalidInput, "grid rows ", rows[j].name, " and ", rows[i].name, " are identical");
    }
  }
}

RunOutput Pretrain(const data::Dataset& dataset, train::RunConfig config, std::ostream* log) {
  config.phase = train::Phase::kPretrain;
  train::Trainer trainer(dataset, config);
  std::vector<train::EpochStats> history = trainer.Run(log);
  return RunOutput{trainer.params(), std::move(history)};
}

RunOutput Finetune(const data::Dataset& dataset, train::RunConfig config,
                   const std::optional<model::ModelParams>& init, std::ostream* log) {
  config.phase = train::Phase::kFinetune;
  if (config.load_pretrain && !init) {
    Fail(ErrorCode::kInvalidInput, "load_pretrain is set but no pre-trained checkpoint was given");
  }
  train::Trainer trainer(dataset, config,
                         config.load_pretrain ? init : std::optional<model::ModelParams>());
  std::vector<train::EpochStats> history = trainer.Run(log);
  return RunOutput{trainer.params(), std::move(history)};
}

eval::MetricReport EvaluateSplit(const model::ModelParams& params, const data::Dataset& dataset,
                                 data::Split split) {
  const std::vector<std::size_t> idx = dataset.Indices(split);
  if (idx.empty()) Fail(ErrorCode::kData, "split '", data::SplitName(split), "' is empty");
  const std::vector<infer::TrackOutputs> outputs = infer::InferRecords(params, dataset, idx);
  std::vector<infer::TrackEmbedding> embeddings;
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<float>> labels;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    embeddings.push_back(outputs[i].embedding);
    scores.push_back(outputs[i].tags.mean_probs);
    labels.push_back(dataset.records[idx[i]].tags);
  }
  return eval::Evaluate(embeddings, scores, labels, dataset.tag_names);
}

std::string GridHeader() {
  return "# row\taugment\tcontrastive\tload\talpha\tR@1\tR@2\tR@4\tR@8\tROC\tPR\tepochs";
}

std::string FormatGridLine(const GridResult& r) {
  char buf[256];
  const auto& p = r.report.recall.percent;
  std::snprintf(buf, sizeof(buf), "%s\t%d\t%d\t%d\t%g\t%.1f\t%.1f\t%.1f\t%.1f\t%.3f\t%.3f\t%d",
                r.row.name.c_str(), r.row.fine_tune_augment ? 1 : 0,
                r.row.fine_tune_contrastive ? 1 : 0, r.row.load_pretrain ? 1 : 0, r.row.alpha,
                p.at(0), p.at(1), p.at(2), p.at(3), r.report.roc.mean, r.report.pr.mean, r.epochs);
  return buf;
}

std::vector<GridResult> RunGrid(const data::Dataset& dataset, const train::RunConfig& base,
                                const std::vector<GridRow>& rows,
                                std::optional<model::ModelParams> pretrained, std::ostream* out,
                                std::ostream* log) {
  ValidateGrid(rows);
  bool needs_pretrain = false;
  for (const GridRow& r : rows) needs_pretrain = needs_pretrain || r.load_pretrain;
  if (needs_pretrain && !pretrained) pretrained = Pretrain(dataset, base, log).params;
  if (out != nullptr) *out << GridHeader() << std::endl;
  std::vector<GridResult> results;
  for (const GridRow& row : rows) {
    train::RunConfig c = base;
    c.fine_tune_augment = row.fine_tune_augment;
    c.fine_tune_contrastive = row.fine_tune_contrastive;
    c.load_pretrain = row.load_pretrain;
    c.alpha = row.alpha;
    if (log != nullptr) *log << "# row " << row.name << std::endl;
    RunOutput run = Finetune(dataset, c, pretrained, log);
    GridResult result{row, EvaluateSplit(run.params, dataset), static_cast<int>(run.history.size())};
    if (out != nullptr) *out << FormatGridLine(result) << std::endl;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace ssml::exp
