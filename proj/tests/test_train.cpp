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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "ssml/error.hpp"
#include "ssml/experiment.hpp"
#include "ssml/losses.hpp"
#include "ssml/model.hpp"
#include "ssml/ops.hpp"
#include "ssml/synthetic.hpp"
#include "ssml/train.hpp"

using namespace ssml;
using namespace ssml::diff;
using namespace ssml::train;

namespace {

const data::Dataset& Tiny() {
  static const data::Dataset ds = [] {
    data::SyntheticSpec s;
    s.tracks = 48;
    s.track_length = 243;
    s.tag_count = 4;
    s.seed = 77;
    return data::GenerateSynthetic(s);
  }();
  return ds;
}

RunConfig TinyConfig() {
  RunConfig c;
  c.model.levels = 4;
  c.model.base_channels = 4;
  c.model.embed_dim = 8;
  c.model.proj_dim = 6;
  c.model.tag_count = 4;
  c.batch_size = 8;
  c.max_epochs = 3;
  c.pretrain_epochs = 2;
  c.seed = 5;
  return c;
}

std::vector<double> Grads(const model::ModelParams& p) {
  std::vector<double> g;
  for (const Tensor& t : p.All()) {
    if (t.has_grad()) {
      g.insert(g.end(), t.grad().begin(), t.grad().end());
    } else {
      g.insert(g.end(), t.size(), 0.0);
    }
  }
  return g;
}

std::vector<double> Values(const model::ModelParams& p) {
  std::vector<double> v;
  for (const Tensor& t : p.All()) v.insert(v.end(), t.data().begin(), t.data().end());
  return v;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("label mask: full rate keeps everything") {
  const std::vector<bool> m = MaskLabels(37, 1.0, 3);
  CHECK(std::count(m.begin(), m.end(), true) == 37);
}

TEST_CASE("label mask: rounding") {
  const std::vector<bool> m = MaskLabels(25000, 0.01, 3);
  CHECK(std::count(m.begin(), m.end(), true) == 250);
  const std::vector<bool> h = MaskLabels(7, 0.5, 3);
  CHECK(std::count(h.begin(), h.end(), true) == 4);  // round(3.5)
}

TEST_CASE("label mask: deterministic in the seed") {
  CHECK(MaskLabels(500, 0.1, 9) == MaskLabels(500, 0.1, 9));
  CHECK(MaskLabels(500, 0.1, 9) != MaskLabels(500, 0.1, 10));
  CHECK_THROWS_AS(MaskLabels(10, 0.0, 1), Error);
  CHECK_THROWS_AS(MaskLabels(10, 1.5, 1), Error);
}

TEST_CASE("trainer masks only training tracks") {
  RunConfig c = TinyConfig();
  c.label_rate = 0.25;
  const Trainer t(Tiny(), c);
  std::size_t kept = 0;
  for (std::size_t i : t.train_pool()) kept += t.labeled()[i] ? 1 : 0;
  CHECK(kept == static_cast<std::size_t>(std::llround(0.25 * t.train_pool().size())));
  for (std::size_t i : Tiny().Indices(data::Split::kValid)) CHECK(t.labeled()[i]);
}

TEST_CASE("views: two crops per track, deterministic") {
  const Trainer t(Tiny(), TinyConfig());
  const auto batches = t.EpochBatches(0);
  REQUIRE(!batches.empty());
  const Tensor a = t.BatchViews(batches[0], 0, 0), b = t.BatchViews(batches[0], 0, 0);
  CHECK(a.shape() == diff::Shape{16, 81});
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  const Tensor c = t.BatchViews(batches[0], 0, 1);
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST_CASE("identical seeds give identical first five losses") {
  RunConfig c = TinyConfig();
  c.fine_tune_contrastive = true;
  c.fine_tune_augment = true;
  Trainer a(Tiny(), c), b(Tiny(), c);
  const auto batches = a.EpochBatches(0);
  for (std::size_t s = 0; s < 5; ++s) {
    const auto& batch = batches[s % batches.size()];
    const StepStats x = a.Step(batch, 0, s), y = b.Step(batch, 0, s);
    CHECK(x.loss == y.loss);
  }
}

TEST_CASE("contrastive off gives exactly the supervised gradient") {
  RunConfig c = TinyConfig();
  c.fine_tune_contrastive = false;
  Trainer t(Tiny(), c);
  const auto batches = t.EpochBatches(0);
  const Objective obj = t.BatchObjective(batches[0], 0, 0);
  t.mutable_params().ZeroGrad();
  diff::Backward(obj.total);
  const std::vector<double> g_run = Grads(t.params());

  // Direct supervised objective on the same views.
  model::ModelParams p = t.params().Clone();
  std::vector<std::vector<float>> tags;
  for (std::size_t idx : batches[0].tracks) tags.push_back(Tiny().records[idx].tags);
  const Tensor views = t.BatchViews(batches[0], 0, 0);
  const Tensor probs = model::TagProbs(p, model::Embed(p, model::Encode(p, views)));
  const loss::MlLossResult ml = loss::MlLoss(probs, tags, batches[0].labeled);
  diff::Backward(ml.loss);
  const std::vector<double> g_ref = Grads(p);
  REQUIRE(g_run.size() == g_ref.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < g_run.size(); ++i) worst = std::max(worst, std::abs(g_run[i] - g_ref[i]));
  CHECK(worst <= 1e-12);
  CHECK(obj.total.item() == ml.loss.item());
}

TEST_CASE("full label rate: masked loss equals unmasked") {
  RunConfig c = TinyConfig();
  c.label_rate = 1.0;
  const Trainer t(Tiny(), c);
  for (std::size_t i = 0; i < Tiny().records.size(); ++i) CHECK(t.labeled()[i] == Tiny().records[i].labeled);
  const auto batches = t.EpochBatches(0);
  const Objective masked = t.BatchObjective(batches[0], 0, 0);
  const std::vector<bool> all(batches[0].tracks.size(), true);
  std::vector<std::vector<float>> tags;
  for (std::size_t idx : batches[0].tracks) tags.push_back(Tiny().records[idx].tags);
  const Objective unmasked =
      ComputeObjective(t.params(), t.BatchViews(batches[0], 0, 0), tags, all, t.weights());
  CHECK(masked.total.item() == unmasked.total.item());
}

TEST_CASE("one step from a loaded checkpoint changes every tensor") {
  RunConfig c = TinyConfig();
  c.fine_tune_contrastive = true;
  c.load_pretrain = true;
  const model::ModelParams init = model::ModelParams::Init(c.model, 99);
  Trainer t(Tiny(), c, init);
  const auto before = init.Named();
  t.Step(t.EpochBatches(0)[0], 0, 0);
  const auto after = t.params().Named();
  for (std::size_t i = 0; i < before.size(); ++i) {
    CAPTURE(before[i].first);
    CHECK_FALSE(std::equal(before[i].second.data().begin(), before[i].second.data().end(),
                           after[i].second.data().begin()));
  }
}

TEST_CASE("mismatched initial checkpoint is rejected") {
  RunConfig c = TinyConfig();
  model::EncoderConfig other = c.model;
  other.embed_dim = 10;
  try {
    Trainer t(Tiny(), c, model::ModelParams::Init(other, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kData);
  }
}

TEST_CASE("pre-training objective is the contrastive loss alone") {
  RunConfig c = TinyConfig();
  c.phase = Phase::kPretrain;
  const Trainer t(Tiny(), c);
  const ObjectiveWeights w = t.weights();
  CHECK(w.use_ssl);
  CHECK_FALSE(w.use_ml);
  const Objective o = t.BatchObjective(t.EpochBatches(0)[0], 0, 0);
  CHECK(o.total.item() == o.ssl);
}

TEST_CASE("combined objective weights the contrastive term by lambda") {
  RunConfig c = TinyConfig();
  c.fine_tune_contrastive = true;
  c.alpha = 0.5;
  c.balance_ratio = 4.0;
  const Trainer t(Tiny(), c);
  CHECK(t.weights().lambda == 0.125);
  const Objective o = t.BatchObjective(t.EpochBatches(0)[0], 0, 0);
  CHECK(o.total.item() == doctest::Approx(0.125 * o.ssl + o.ml).epsilon(1e-14));
}

TEST_CASE("checkpoint round trip preserves the next step loss") {
  RunConfig c = TinyConfig();
  c.fine_tune_contrastive = true;
  Trainer a(Tiny(), c);
  a.RunEpoch();
  const auto path = std::filesystem::temp_directory_path() / "ssml_unit_trainer.ckpt";
  a.Save(path);
  Trainer b = Trainer::Load(Tiny(), path);
  CHECK(b.epoch() == a.epoch());
  CHECK(b.lr() == a.lr());
  CHECK(Values(a.params()) == Values(b.params()));
  const auto batches = a.EpochBatches(a.epoch());
  for (std::size_t s = 0; s < 2; ++s) CHECK(a.Step(batches[s], a.epoch(), s).loss == b.Step(batches[s], b.epoch(), s).loss);
}

TEST_CASE("run logs one line per epoch and honours the budget") {
  RunConfig c = TinyConfig();
  c.max_epochs = 2;
  Trainer t(Tiny(), c);
  std::ostringstream log;
  const auto history = t.Run(&log);
  CHECK(history.size() == 2);
  std::istringstream lines(log.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("epoch=" + std::to_string(n + 1) + " train_loss=", 0) == 0);
    CHECK(line.find(" val_loss=") != std::string::npos);
    CHECK(line.find(" lr=") != std::string::npos);
    ++n;
  }
  CHECK(n == 2);
}

TEST_CASE("steps per epoch caps the batches") {
  RunConfig c = TinyConfig();
  c.steps_per_epoch = 1;
  Trainer t(Tiny(), c);
  CHECK(t.RunEpoch().steps == 1);
}

TEST_CASE("fine-tuning restores the best validation parameters") {
  RunConfig c = TinyConfig();
  c.max_epochs = 4;
  c.finetune_lr = 0.05;  // Large enough for validation loss to move around.
  Trainer t(Tiny(), c);
  std::vector<std::vector<double>> snapshots;
  const auto history = t.Run(nullptr, [&](const EpochStats&) { snapshots.push_back(Values(t.params())); });
  std::size_t best = 0;
  for (std::size_t e = 1; e < history.size(); ++e) {
    if (history[e].val_loss < history[best].val_loss) best = e;
  }
  CHECK(Values(t.params()) == snapshots[best]);
}

TEST_CASE("fine-tuning without a validation split is a data error") {
  data::Dataset ds = Tiny();
  for (auto& r : ds.records) {
    if (r.split == data::Split::kValid) r.split = data::Split::kTrain;
  }
  Trainer t(ds, TinyConfig());
  try {
    t.RunEpoch();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kData);
  }
}

TEST_CASE("config keys parse and validate") {
  RunConfig c;
  SetConfigValue(c, "alpha", "0.1");
  SetConfigValue(c, "balance_ratio", "mtg-jamendo");
  SetConfigValue(c, "fine_tune_contrastive", "true");
  SetConfigValue(c, "levels", "7");
  CHECK(c.alpha == 0.1);
  CHECK(c.balance_ratio == 18.95);
  CHECK(c.fine_tune_contrastive);
  CHECK(c.model.levels == 7);
  CHECK(c.lambda() == 0.1 / 18.95);
  CHECK_THROWS_AS(SetConfigValue(c, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(SetConfigValue(c, "alpha", "abc"), Error);
  const auto kv = ParseConfigText("# comment\nalpha = 2\nseed 9\n", "test");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"alpha", "2"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"seed", "9"});
  CHECK(BalanceRatioPreset("magnatagatune") == 22.00);
  CHECK(BalanceRatioPreset("mtg-jamendo") == 18.95);
  CHECK_FALSE(BalanceRatioPreset("other").has_value());
}

TEST_CASE("config values round trip through text") {
  RunConfig c = TinyConfig();
  c.alpha = 0.05;
  c.label_rate = 0.1;
  c.fine_tune_augment = true;
  RunConfig d;
  for (const auto& [k, v] : ConfigValues(c)) SetConfigValue(d, k, v);
  CHECK(ConfigValues(d) == ConfigValues(c));
}

TEST_CASE("grid presets") {
  const auto mtat = exp::PresetGrid("mtat");
  REQUIRE(mtat.size() == 9);
  CHECK(mtat[0].name == "A");
  CHECK_FALSE(mtat[0].load_pretrain);
  CHECK(mtat[6] == exp::GridRow{"G", false, true, true, 1.0});
  const auto mtg = exp::PresetGrid("mtg");
  REQUIRE(mtg.size() == 6);
  CHECK(mtg[3] == exp::GridRow{"M", false, true, true, 0.1});
  CHECK_THROWS_AS(exp::PresetGrid("nope"), Error);
  CHECK_THROWS_AS(exp::ValidateGrid({{"A", false, false, false, 1.0}, {"B", false, false, false, 1.0}}), Error);
}

TEST_CASE("a small grid runs end to end") {
  RunConfig c = TinyConfig();
  c.max_epochs = 1;
  c.pretrain_epochs = 1;
  std::ostringstream out;
  const auto results = exp::RunGrid(Tiny(), c, {{"A", false, false, false, 1.0}, {"G", false, true, true, 1.0}},
                                    std::nullopt, &out);
  REQUIRE(results.size() == 2);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == exp::GridHeader());
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);
  for (const auto& r : results) {
    CHECK(r.report.recall.percent.size() == 4);
    CHECK(r.report.roc.mean >= 0.0);
    CHECK(r.report.roc.mean <= 1.0);
  }
}

}  // TEST_SUITE
