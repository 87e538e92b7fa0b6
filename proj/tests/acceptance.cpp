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

// Acceptance checks. Prints one "criterion N: PASS|FAIL" line per criterion
// and exits non-zero when any fails. Arguments select a subset ("1 4 9").

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "ssml/augment.hpp"
#include "ssml/checkpoint.hpp"
#include "ssml/eval.hpp"
#include "ssml/experiment.hpp"
#include "ssml/inference.hpp"
#include "ssml/losses.hpp"
#include "ssml/model.hpp"
#include "ssml/synthetic.hpp"
#include "ssml/train.hpp"

namespace fs = std::filesystem;
using namespace ssml;
using diff::Tensor;

namespace {

// Collects failed checks of one criterion along with a short summary.
class Verdict {
 public:
  void Check(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void Note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

template <typename... Args>
std::string Cat(const Args&... args) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << args);
  return os.str();
}

// ---- 1: gradients -----------------------------------------------------------

void GradientCorrectness(Verdict& v) {
  constexpr std::size_t kProbes = 100;
  constexpr double kTolerance = 1e-4;
  Rng rng(20260101);
  std::vector<oracle::GradCase> cases = oracle::PrimitiveCases(rng, kProbes);
  cases.push_back(oracle::ObjectiveCase(rng, kProbes));
  double worst = 0.0;
  std::size_t total = 0;
  for (const auto& c : cases) {
    const oracle::FdReport r = oracle::CheckGradients(c.leaves, c.f, c.probes, rng, c.name);
    total += r.probes;
    worst = std::max(worst, r.max_rel_error);
    v.Check(r.probes >= 100, Cat(c.name, ": only ", r.probes, " probes"));
    v.Check(r.max_rel_error < kTolerance, Cat(c.name, ": relative error ", r.max_rel_error, " at ", r.worst));
  }
  v.Note(Cat(cases.size(), " graphs, ", total, " probes, max rel error ", worst));
}

// ---- 2: loss oracles --------------------------------------------------------

void LossOracles(Verdict& v) {
  Rng rng(2);
  double worst = 0.0;
  for (std::size_t b : {1, 2, 4}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Tensor o = oracle::RandomTensor({2 * b, 8}, rng, false);
      const double err = std::abs(loss::SslLoss(o).item() - oracle::ContrastiveLoss(oracle::Rows(o), 0.5));
      worst = std::max(worst, err);
      v.Check(err <= 1e-10, Cat("B=", b, " differs from the double loop by ", err));
      if (b == 1) v.Check(loss::SslLoss(o).item() == 0.0, "B=1 is not exactly 0");
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> row = oracle::RandomVector(6, rng);
    std::vector<double> data;
    for (int r = 0; r < 4; ++r) data.insert(data.end(), row.begin(), row.end());
    const double l = loss::SslLoss(Tensor::FromData({4, 6}, data)).item();
    v.Check(l == std::log(3.0), Cat("identical projections give ", l, " instead of log 3"));
  }
  // B = 2 tracks, T = 2 tags.
  const double p[4][2] = {{0.9, 0.2}, {0.7, 0.4}, {0.3, 0.6}, {0.1, 0.8}};
  const Tensor probs = Tensor::FromData({4, 2}, {p[0][0], p[0][1], p[1][0], p[1][1], p[2][0], p[2][1], p[3][0], p[3][1]});
  const std::vector<std::vector<float>> tags = {{1, 0}, {0, 1}};
  const double v0 = -(std::log(0.9) + std::log(0.8)) / 2.0, v1 = -(std::log(0.7) + std::log(0.6)) / 2.0;
  const double hand = (v0 + v1 + v1 + v0) / 2.0;
  const double ml_err = std::abs(loss::MlLoss(probs, tags, {true, true}).loss.item() - hand);
  v.Check(ml_err <= 1e-12, Cat("tag loss differs from hand arithmetic by ", ml_err));
  v.Note(Cat("max contrastive error ", worst, ", tag loss error ", ml_err));
}

// ---- 3: normalization -------------------------------------------------------

double Norm(std::span<const double> x) {
  double s = 0.0;
  for (double e : x) s += e * e;
  return std::sqrt(s);
}

void NormalizationInvariants(Verdict& v) {
  model::EncoderConfig c;
  c.levels = 3;
  c.base_channels = 4;
  c.embed_dim = 16;
  c.proj_dim = 8;
  c.tag_count = 4;
  const model::ModelParams p = model::ModelParams::Init(c, 3);
  Rng rng(3);
  double worst_row = 0.0, worst_track = 0.0, worst_scale = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double spread = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
    const Tensor h = Tensor::FromData({1, 16}, oracle::RandomVector(16, rng, -spread, spread));
    const Tensor z = model::Embed(p, h);
    worst_row = std::max(worst_row, std::abs(Norm(z.data()) - 1.0));

    AudioBuffer track;
    const std::size_t len = 1 + rng() % 400;
    for (double s : oracle::RandomVector(len, rng)) track.samples.push_back(static_cast<float>(s));
    const infer::TrackOutputs out = infer::InferTrack(p, "q", track);
    double n = 0.0;
    for (float e : out.embedding.vector) n += static_cast<double>(e) * e;
    worst_track = std::max(worst_track, std::abs(std::sqrt(n) - 1.0));

    for (double scale : {0.1, 1.0, 10.0}) {
      std::vector<double> scaled(h.data().begin(), h.data().end());
      for (double& e : scaled) e *= scale;
      const Tensor zs = model::Embed(p, Tensor::FromData({1, 16}, scaled));
      for (std::size_t k = 0; k < 16; ++k) worst_scale = std::max(worst_scale, std::abs(zs.data()[k] - z.data()[k]));
    }
  }
  bool identity_ln = true;
  for (const auto& [name, t] : p.Named()) {
    if (name == "ln.gain") identity_ln = identity_ln && std::all_of(t.data().begin(), t.data().end(), [](double e) { return e == 1.0; });
    if (name == "ln.bias") identity_ln = identity_ln && std::all_of(t.data().begin(), t.data().end(), [](double e) { return e == 0.0; });
  }
  v.Check(identity_ln, "layer norm is not initialised to gain 1 and bias 0");
  v.Check(worst_row <= 1e-6, Cat("embedding row norm off by ", worst_row));
  v.Check(worst_track <= 1e-6, Cat("track embedding norm off by ", worst_track));
  v.Check(worst_scale <= 1e-6, Cat("scale invariance off by ", worst_scale));
  v.Note(Cat("1000 inputs; |norm-1| rows ", worst_row, ", tracks ", worst_track, "; scale drift ", worst_scale));
}

// ---- 4: metric oracles ------------------------------------------------------

void MetricOracles(Verdict& v) {
  Rng rng(4);
  const std::vector<std::size_t> ks = {1, 2, 4, 8};
  double worst_roc = 0.0, worst_ap = 0.0;
  int instances = 0;
  while (instances < 200) {
    const std::size_t n = 2 + rng() % 31;
    const std::size_t dim = 2 + rng() % 7;
    const std::size_t tag_count = 2 + rng() % 5;
    std::vector<infer::TrackEmbedding> db;
    std::vector<std::vector<float>> tags;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> e = oracle::RandomVector(dim, rng);
      // Coarse coordinates on some instances produce tied scores.
      if (instances % 3 == 0) {
        for (double& x : e) x = std::round(x * 2.0);
        if (Norm(e) == 0.0) e[0] = 1.0;
      }
      const double nn = Norm(e);
      infer::TrackEmbedding t;
      t.track_id = Cat("t", 1000 + rng() % 9000, "_", i);
      for (double x : e) t.vector.push_back(static_cast<float>(x / nn));
      db.push_back(std::move(t));
      std::vector<float> y(tag_count, 0.0f);
      y[rng() % tag_count] = 1.0f;
      if (rng() % 4 == 0) y[rng() % tag_count] = 1.0f;
      tags.push_back(std::move(y));
    }
    bool any_pair = false;
    for (std::size_t i = 0; i < n && !any_pair; ++i) {
      for (std::size_t j = i + 1; j < n && !any_pair; ++j) any_pair = oracle::Overlap(tags[i], tags[j]);
    }
    if (!any_pair) continue;
    ++instances;

    const eval::RecallResult r = eval::RecallAtK(db, tags, ks);
    const std::vector<double> expect = oracle::RecallOracle(db, tags, ks);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      v.Check(r.percent[i] == expect[i], Cat("instance ", instances, ": R@", ks[i], " = ", r.percent[i], ", oracle ", expect[i]));
      if (i > 0) v.Check(r.percent[i] >= r.percent[i - 1], Cat("instance ", instances, ": R@K not monotone"));
    }

    std::vector<double> scores = oracle::RandomVector(n + 2, rng);
    std::vector<float> labels(n + 2);
    for (auto& y : labels) y = rng() % 3 == 0 ? 1.0f : 0.0f;
    labels[0] = 1.0f;
    labels[1] = 0.0f;
    const double ap = eval::AveragePrecision(scores, labels);
    worst_ap = std::max(worst_ap, std::abs(ap - oracle::RankWalkAp(scores, labels)));
    if (instances % 2 == 0) {
      for (double& s : scores) s = std::round(s * 3.0);
    }
    const double roc = eval::RocAuc(scores, labels);
    worst_roc = std::max(worst_roc, std::abs(roc - oracle::PairwiseAuc(scores, labels)));
  }
  v.Check(worst_roc <= 1e-12, Cat("ROC-AUC differs from pairwise counting by ", worst_roc));
  v.Check(worst_ap <= 1e-12, Cat("average precision differs from the rank walk by ", worst_ap));
  v.Note(Cat(instances, " instances; ROC error ", worst_roc, ", AP error ", worst_ap));
}

// ---- 5 and 8: training semantics ---------------------------------------------

const data::Dataset& Small() {
  static const data::Dataset ds = [] {
    data::SyntheticSpec s;
    s.tracks = 48;
    s.track_length = 243;
    s.tag_count = 4;
    s.seed = 5;
    return data::GenerateSynthetic(s);
  }();
  return ds;
}

train::RunConfig SmallConfig() {
  train::RunConfig c;
  c.model.levels = 4;
  c.model.base_channels = 4;
  c.model.embed_dim = 8;
  c.model.proj_dim = 6;
  c.model.tag_count = 4;
  c.batch_size = 8;
  c.max_epochs = 2;
  c.seed = 8;
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

void FlagSemantics(Verdict& v) {
  const data::Dataset& ds = Small();
  {
    // Contrastive off: compare each step's gradient with a pure supervised
    // objective built independently from the same views.
    train::RunConfig c = SmallConfig();
    c.fine_tune_contrastive = false;
    c.label_rate = 0.5;
    train::Trainer t(ds, c);
    const auto batches = t.EpochBatches(0);
    double worst = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      const data::Batch& b = batches[s];
      model::ModelParams ref = t.params().Clone();
      const Tensor views = t.BatchViews(b, 0, s);
      std::vector<std::vector<float>> tags;
      for (std::size_t idx : b.tracks) tags.push_back(ds.records[idx].tags);
      const Tensor probs = model::TagProbs(ref, model::Embed(ref, model::Encode(ref, views)));
      diff::Backward(loss::MlLoss(probs, tags, b.labeled).loss);
      const std::vector<double> g_ref = Grads(ref);

      t.mutable_params().ZeroGrad();
      diff::Backward(t.BatchObjective(b, 0, s).total);
      const std::vector<double> g_run = Grads(t.params());
      for (std::size_t i = 0; i < g_ref.size(); ++i) worst = std::max(worst, std::abs(g_run[i] - g_ref[i]));
      t.Step(b, 0, s);
    }
    v.Check(worst <= 1e-12, Cat("contrastive-off gradient differs from supervised by ", worst));
    v.Note(Cat("gradient gap ", worst));
  }
  {
    train::RunConfig c = SmallConfig();
    c.fine_tune_contrastive = true;
    c.label_rate = 1.0;
    const train::Trainer t(ds, c);
    const auto batches = t.EpochBatches(0);
    const std::vector<bool> all(batches[0].tracks.size(), true);
    std::vector<std::vector<float>> tags;
    for (std::size_t idx : batches[0].tracks) tags.push_back(ds.records[idx].tags);
    const double masked = t.BatchObjective(batches[0], 0, 0).total.item();
    const double unmasked =
        train::ComputeObjective(t.params(), t.BatchViews(batches[0], 0, 0), tags, all, t.weights()).total.item();
    v.Check(masked == unmasked, Cat("label rate 1: masked ", masked, " vs unmasked ", unmasked));
  }
  {
    train::RunConfig c = SmallConfig();
    c.fine_tune_contrastive = true;
    c.load_pretrain = true;
    const fs::path path = fs::temp_directory_path() / "ssml_acceptance_init.ckpt";
    diff::Checkpoint ckpt;
    model::ModelParams::Init(c.model, 123).AddTo(ckpt);
    ckpt.Save(path);
    const model::ModelParams init = model::ModelParams::FromCheckpoint(diff::Checkpoint::Load(path));
    train::Trainer t(ds, c, init);
    t.Step(t.EpochBatches(0)[0], 0, 0);
    const auto before = init.Named(), after = t.params().Named();
    std::size_t changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      const bool same = std::equal(before[i].second.data().begin(), before[i].second.data().end(),
                                   after[i].second.data().begin());
      v.Check(!same, Cat("tensor ", before[i].first, " unchanged after one step"));
      changed += !same;
    }
    v.Note(Cat(changed, "/", before.size(), " tensors changed after one step"));
  }
}

void DeterminismAndPersistence(Verdict& v) {
  const data::Dataset& ds = Small();
  train::RunConfig c = SmallConfig();
  c.fine_tune_contrastive = true;
  c.fine_tune_augment = true;
  c.label_rate = 0.5;
  {
    train::Trainer a(ds, c), b(ds, c);
    const auto batches = a.EpochBatches(0);
    for (std::size_t s = 0; s < 5; ++s) {
      const double x = a.Step(batches[s % batches.size()], 0, s).loss;
      const double y = b.Step(batches[s % batches.size()], 0, s).loss;
      v.Check(x == y, Cat("step ", s, ": ", x, " vs ", y));
    }
  }
  {
    train::Trainer a(ds, c);
    a.RunEpoch();
    const fs::path path = fs::temp_directory_path() / "ssml_acceptance_trainer.ckpt";
    a.Save(path);
    train::Trainer b = train::Trainer::Load(ds, path);
    const auto batches = a.EpochBatches(a.epoch());
    const double x = a.Step(batches[0], a.epoch(), 0).loss;
    const double y = b.Step(batches[0], b.epoch(), 0).loss;
    v.Check(x == y, Cat("next-step loss after reload: ", x, " vs ", y));
  }
  {
    const model::ModelParams p = model::ModelParams::Init(c.model, 4);
    std::vector<infer::TrackEmbedding> store;
    for (const auto& o : infer::InferRecords(p, ds, ds.Indices(data::Split::kTest))) store.push_back(o.embedding);
    const fs::path path = fs::temp_directory_path() / "ssml_acceptance_store.bin";
    infer::WriteEmbeddingStore(path, store);
    const auto back = infer::ReadEmbeddingStore(path);
    bool same = back.size() == store.size();
    for (std::size_t i = 0; same && i < store.size(); ++i) {
      same = back[i].track_id == store[i].track_id && back[i].vector.size() == store[i].vector.size() &&
             std::memcmp(back[i].vector.data(), store[i].vector.data(), store[i].vector.size() * sizeof(float)) == 0;
    }
    v.Check(same, "embedding store changed on round trip");
    v.Note(Cat("5 steps bit-identical, reload bit-exact, store of ", store.size(), " tracks bit-exact"));
  }
}

// ---- 6: desk-scale trend ----------------------------------------------------

struct TrendRun {
  double supervised_full = 0.0, supervised_low = 0.0, combined_full = 0.0, combined_low = 0.0;
};

TrendRun RunTrendSeed(std::uint64_t seed) {
  data::SyntheticSpec spec;  // 512 tracks, 8 tags, 22.05 kHz.
  spec.seed = seed;
  const data::Dataset ds = data::GenerateSynthetic(spec);
  train::RunConfig c;
  c.seed = seed;
  c.model.levels = 7;  // 2187-sample excerpts.
  c.model.base_channels = 8;
  c.batch_size = 32;
  c.pretrain_epochs = 40;
  c.max_epochs = 60;
  const exp::RunOutput pre = exp::Pretrain(ds, c);
  const double converged_ssl = pre.history.back().train_loss;

  auto finetune = [&](bool combined, double rate, double ratio, double* r_out) {
    train::RunConfig f = c;
    f.label_rate = rate;
    f.fine_tune_augment = false;
    f.fine_tune_contrastive = combined;
    f.load_pretrain = combined;
    f.alpha = 1.0;
    f.balance_ratio = ratio;
    const exp::RunOutput out = exp::Finetune(ds, f, pre.params);
    if (r_out != nullptr) *r_out = loss::EstimateBalanceRatio(out.history.back().train_loss, converged_ssl);
    return exp::EvaluateSplit(out.params, ds).recall.percent[0];
  };
  TrendRun t;
  double r = 1.0;
  t.supervised_full = finetune(false, 1.0, 1.0, &r);
  t.supervised_low = finetune(false, 0.1, r, nullptr);
  t.combined_full = finetune(true, 1.0, r, nullptr);
  t.combined_low = finetune(true, 0.1, r, nullptr);
  std::cout << "  seed " << seed << ": r=" << r << " R@1 supervised " << t.supervised_full << " / "
            << t.supervised_low << ", combined " << t.combined_full << " / " << t.combined_low
            << " (label rate 1.0 / 0.1)\n"
            << std::flush;
  return t;
}

void DeskTrend(Verdict& v) {
  TrendRun mean;
  for (std::uint64_t seed : {1, 2, 3}) {
    const TrendRun t = RunTrendSeed(seed);
    mean.supervised_full += t.supervised_full / 3.0;
    mean.supervised_low += t.supervised_low / 3.0;
    mean.combined_full += t.combined_full / 3.0;
    mean.combined_low += t.combined_low / 3.0;
  }
  const double gap_full = mean.combined_full - mean.supervised_full;
  const double gap_low = mean.combined_low - mean.supervised_low;
  v.Check(mean.combined_low >= mean.supervised_low,
          Cat("rate 0.1: combined R@1 ", mean.combined_low, " < supervised ", mean.supervised_low));
  v.Check(gap_low >= gap_full, Cat("gap at rate 0.1 (", gap_low, ") < gap at rate 1.0 (", gap_full, ")"));
  v.Note(Cat("mean R@1 gap ", gap_full, " at rate 1.0, ", gap_low, " at rate 0.1"));
}

// ---- 7: balancing factor ----------------------------------------------------

std::string RunCli(const std::string& args, int* code) {
  const std::string cmd = std::string(SSML_CLI_PATH) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) {
    *code = -1;
    return out;
  }
  std::array<char, 1024> buf;
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

double Field(const std::string& text, const std::string& key) {
  const std::size_t at = text.find(key + "=");
  if (at == std::string::npos) return std::nan("");
  return std::stod(text.substr(at + key.size() + 1));
}

void BalancingFactor(Verdict& v) {
  Rng rng(7);
  std::uniform_real_distribution<double> pos(1e-3, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double ml = pos(rng), ssl = pos(rng), alpha = pos(rng);
    const loss::BalanceFactor f = loss::EstimateBalanceFactor(ml, ssl, alpha);
    v.Check(f.r == ml / ssl, Cat("r for ", ml, "/", ssl));
    v.Check(f.lambda() == alpha / (ml / ssl), Cat("lambda for alpha ", alpha));
  }
  struct Preset {
    const char* name;
    double r;
  };
  for (const Preset& p : {Preset{"magnatagatune", 22.00}, Preset{"mtg-jamendo", 18.95}}) {
    train::RunConfig c;
    train::SetConfigValue(c, "balance_ratio", p.name);
    v.Check(c.balance_ratio == p.r, Cat("config preset ", p.name, " gives ", c.balance_ratio));
    for (double alpha : {0.1, 1.0, 10.0}) {
      int code = 0;
      const std::string out = RunCli(Cat("balance --preset ", p.name, " --alpha ", alpha), &code);
      v.Check(code == 0, Cat("balance --preset ", p.name, " exited with ", code));
      v.Check(Field(out, "r") == p.r, Cat("CLI r for ", p.name, ": ", out));
      v.Check(Field(out, "lambda") == alpha / p.r, Cat("CLI lambda for ", p.name, " alpha ", alpha, ": ", out));
    }
  }
  int code = 0;
  const std::string out = RunCli("balance --ml 1.1 --ssl 0.05", &code);
  v.Check(code == 0 && Field(out, "r") == 1.1 / 0.05, Cat("CLI r from converged losses: ", out));
  v.Note("1000 exact ratios; presets 22.00 and 18.95 through config and CLI");
}

// ---- 9: augmentation --------------------------------------------------------

void AugmentationStatistics(Verdict& v) {
  // Published per-transform probabilities, in chain order.
  constexpr std::array<double, 7> kRates = {0.8, 0.01, 0.3, 0.8, 0.3, 0.6, 0.6};
  constexpr int kChains = 100000;
  const dsp::AugmentSpec spec;
  Rng rng(9);
  std::array<int, 7> counts{};
  for (int i = 0; i < kChains; ++i) {
    for (const dsp::Transform& t : dsp::SampleChain(spec, rng).transforms) ++counts[dsp::ChainPosition(t)];
  }
  std::string rates;
  for (std::size_t k = 0; k < kRates.size(); ++k) {
    const double rate = static_cast<double>(counts[k]) / kChains;
    v.Check(std::abs(rate - kRates[k]) <= 0.01, Cat("transform ", k, " rate ", rate, " vs ", kRates[k]));
    rates += Cat(k == 0 ? "" : " ", rate);
  }

  const AudioBuffer tone = oracle::Sine(500.0, 0.5, 22050);
  double worst_snr = 0.0;
  for (double snr : {40.0, 50.0, 60.0, 70.0, 80.0}) {
    const AudioBuffer y = dsp::ApplyTransform(tone, dsp::AddNoise{snr, 1234});
    std::vector<float> noise(tone.size());
    for (std::size_t i = 0; i < tone.size(); ++i) noise[i] = y.samples[i] - tone.samples[i];
    const double measured = 10.0 * std::log10(oracle::Energy(tone.samples) / oracle::Energy(noise));
    worst_snr = std::max(worst_snr, std::abs(measured - snr));
  }
  v.Check(worst_snr <= 1.0, Cat("noise SNR off by ", worst_snr, " dB"));

  AudioBuffer impulse;
  impulse.samples.assign(32, 0.0f);
  impulse.samples[3] = 1.0f;
  const double ratio = dsp::ApplyTransform(impulse, dsp::Gain{-6.0}).samples[3];
  v.Check(std::abs(ratio - 0.5012) <= 1e-3, Cat("-6 dB gain ratio ", ratio));

  const AudioBuffer a4 = oracle::Sine(440.0, 0.5, 22050);
  double bin = 0.0;
  const double peak = oracle::PeakFrequency(dsp::ApplyTransform(a4, dsp::PitchShift{7.0}).samples, 22050, 100.0, 2000.0, &bin);
  v.Check(std::abs(peak - 659.3) <= bin, Cat("pitch +7 peak at ", peak, " Hz, bin ", bin));
  v.Note(Cat("rates ", rates, "; SNR error ", worst_snr, " dB; gain ", ratio, "; pitch peak ", peak, " Hz"));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<void(Verdict&)>>> criteria = {
      {1, GradientCorrectness}, {2, LossOracles},      {3, NormalizationInvariants},
      {4, MetricOracles},       {5, FlagSemantics},    {6, DeskTrend},
      {7, BalancingFactor},     {8, DeterminismAndPersistence}, {9, AugmentationStatistics}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && only.count(id) == 0) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(v);
    } catch (const std::exception& e) {
      v.Check(false, Cat("exception: ", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && v.passed();
    std::cout << "criterion " << id << ": " << (v.passed() ? "PASS" : "FAIL") << "  ("
              << Cat(secs) << " s";
    for (const auto& n : v.notes()) std::cout << "; " << n;
    std::cout << ")\n";
    const std::size_t shown = std::min<std::size_t>(v.failures().size(), 10);
    for (std::size_t i = 0; i < shown; ++i) std::cout << "    " << v.failures()[i] << '\n';
    if (v.failures().size() > shown) std::cout << "    ... " << v.failures().size() - shown << " more\n";
    std::cout << std::flush;
  }
  return all ? 0 : 1;
}
