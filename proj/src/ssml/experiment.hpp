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

// End-to-end runs: pre-train, fine-tune, evaluate on the test split, and the
// learning-technique grid.

#ifndef SSML_EXPERIMENT_HPP_
#define SSML_EXPERIMENT_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssml/dataset.hpp"
#include "ssml/eval.hpp"
#include "ssml/model.hpp"
#include "ssml/train.hpp"

namespace ssml::exp {

struct GridRow {
  std::string name;
  bool fine_tune_augment = false;
  bool fine_tune_contrastive = false;
  bool load_pretrain = false;
  double alpha = 1.0;

  bool operator==(const GridRow&) const = default;
};

// "mtat": rows A-I; "mtg": rows J-O.
std::vector<GridRow> PresetGrid(const std::string& name);
// One row per line: "name augment contrastive load alpha" (0/1 flags).
std::vector<GridRow> ReadGridFile(const std::filesystem::path& path);
// Throws kInvalidInput on duplicate rows or names.
void ValidateGrid(const std::vector<GridRow>& rows);

struct RunOutput {
  model::ModelParams params;
  std::vector<train::EpochStats> history;
};

RunOutput Pretrain(const data::Dataset& dataset, train::RunConfig config,
                   std::ostream* log = nullptr);
// `init` is required when config.load_pretrain is set and ignored otherwise.
RunOutput Finetune(const data::Dataset& dataset, train::RunConfig config,
                   const std::optional<model::ModelParams>& init, std::ostream* log = nullptr);

eval::MetricReport EvaluateSplit(const model::ModelParams& params, const data::Dataset& dataset,
                                 data::Split split = data::Split::kTest);

struct GridResult {
  GridRow row;
  eval::MetricReport report;
  int epochs = 0;
};

std::string GridHeader();
std::string FormatGridLine(const GridResult& result);

// Pre-trains once when any row loads pre-trained weights (unless `pretrained`
// is supplied), then fine-tunes and evaluates every row. Each result line is
// written to `out` as soon as the row finishes.
std::vector<GridResult> RunGrid(const data::Dataset& dataset, const train::RunConfig& base,
                                const std::vector<GridRow>& rows,
                                std::optional<model::ModelParams> pretrained, std::ostream* out,
                                std::ostream* log = nullptr);

}  // namespace ssml::exp

#endif  // SSML_EXPERIMENT_HPP_
