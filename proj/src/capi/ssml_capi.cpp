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

#include "ssml/ssml.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <ostream>
#include <sstream>
#include <streambuf>
#include <string>
#include <unordered_map>

#include "ssml/dataset.hpp"
#include "ssml/error.hpp"
#include "ssml/eval.hpp"
#include "ssml/experiment.hpp"
#include "ssml/inference.hpp"
#include "ssml/losses.hpp"
#include "ssml/model.hpp"
#include "ssml/synthetic.hpp"
#include "ssml/train.hpp"

struct ssml_config {
  ssml::train::RunConfig config;
};

struct ssml_dataset {
  ssml::data::Dataset dataset;
};

struct ssml_model {
  ssml::model::ModelParams params;
};

namespace {

using ssml::ErrorCode;
using ssml::Fail;

thread_local std::string last_error;

ssml_status StatusOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return SSML_ERR_USAGE;
    case ErrorCode::kNumeric:
    case ErrorCode::kDegenerate:
      return SSML_ERR_NUMERIC;
    case ErrorCode::kInvalidShape:
    case ErrorCode::kData:
    case ErrorCode::kIo:
      return SSML_ERR_DATA;
  }
  return SSML_ERR_DATA;
}

template <typename Fn>
ssml_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return SSML_OK;
  } catch (const ssml::Error& e) {
    last_error = e.what();
    return StatusOf(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SSML_ERR_DATA;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SSML_ERR_DATA;
  } catch (...) {
    last_error = "unknown error";
    return SSML_ERR_DATA;
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) Fail(ErrorCode::kInvalidInput, what, " must not be NULL");
}

// Forwards every completed line written to it to a callback.
class LineBuf : public std::streambuf {
 public:
  LineBuf(ssml_line_fn fn, void* user) : fn_(fn), user_(user) {}
  ~LineBuf() override {
    if (!line_.empty()) Emit();
  }

 protected:
  int_type overflow(int_type c) override {
    if (c == traits_type::eof()) return traits_type::not_eof(c);
    if (c == '\n') {
      Emit();
    } else {
      line_.push_back(static_cast<char>(c));
    }
    return c;
  }

 private:
  void Emit() {
    if (fn_ != nullptr) fn_(line_.c_str(), user_);
    line_.clear();
  }

  ssml_line_fn fn_;
  void* user_;
  std::string line_;
};

void CopyOut(const std::string& s, char* buf, size_t size) {
  Require(buf, "buffer");
  if (s.size() + 1 > size) {
    Fail(ErrorCode::kInvalidInput, "buffer of ", size, " bytes is too small, need ", s.size() + 1);
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

std::vector<std::size_t> SplitIndices(const ssml::data::Dataset& ds, const char* split) {
  const std::string name = split == nullptr ? "test" : split;
  if (name == "all") {
    std::vector<std::size_t> all(ds.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  ssml::data::Split s;
  try {
    s = ssml::data::ParseSplit(name);
  } catch (const ssml::Error&) {
    Fail(ErrorCode::kInvalidInput, "unknown split '", name, "' (train|valid|test|all)");
  }
  return ds.Indices(s);
}

ssml::train::RunConfig ConfigFor(const ssml_config* config, const ssml_dataset* dataset) {
  ssml::train::RunConfig c = config->config;
  c.model.tag_count = static_cast<int>(dataset->dataset.tag_count());
  return c;
}

}  // namespace

extern "C" {

const char* ssml_version(void) { return "0.1.0"; }

const char* ssml_last_error(void) { return last_error.c_str(); }

ssml_status ssml_config_create(ssml_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new ssml_config();
  });
}

void ssml_config_destroy(ssml_config* config) { delete config; }

ssml_status ssml_config_set(ssml_config* config, const char* key, const char* value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    ssml::train::RunConfig c = config->config;
    ssml::train::SetConfigValue(c, key, value);
    config->config = c;
  });
}

ssml_status ssml_config_load_file(ssml_config* config, const char* path) {
  return Guard([&] {
    Require(config, "config");
    Require(path, "path");
    ssml::train::RunConfig c = config->config;
    for (const auto& [k, v] : ssml::train::ReadConfigFile(path)) ssml::train::SetConfigValue(c, k, v);
    config->config = c;
  });
}

ssml_status ssml_config_get(const ssml_config* config, const char* key, char* buf, size_t buf_size) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    for (const auto& [k, v] : ssml::train::ConfigValues(config->config)) {
      if (k == key) return CopyOut(v, buf, buf_size);
    }
    Fail(ErrorCode::kInvalidInput, "unknown config key '", key, "'");
  });
}

ssml_status ssml_config_dump(const ssml_config* config, char* buf, size_t buf_size) {
  return Guard([&] {
    Require(config, "config");
    std::string text;
    for (const auto& [k, v] : ssml::train::ConfigValues(config->config)) text += k + "=" + v + "\n";
    CopyOut(text, buf, buf_size);
  });
}

ssml_status ssml_config_lambda(const ssml_config* config, double* lambda) {
  return Guard([&] {
    Require(config, "config");
    Require(lambda, "lambda");
    *lambda = config->config.lambda();
  });
}

ssml_status ssml_balance_factor(double converged_ml, double converged_ssl, double alpha, double* r,
                                double* lambda) {
  return Guard([&] {
    const ssml::loss::BalanceFactor f =
        ssml::loss::EstimateBalanceFactor(converged_ml, converged_ssl, alpha);
    if (r != nullptr) *r = f.r;
    if (lambda != nullptr) *lambda = f.lambda();
  });
}

ssml_status ssml_balance_preset(const char* name, double* r) {
  return Guard([&] {
    Require(name, "name");
    Require(r, "r");
    const auto preset = ssml::train::BalanceRatioPreset(name);
    if (!preset) Fail(ErrorCode::kInvalidInput, "unknown balance preset '", name, "'");
    *r = *preset;
  });
}

void ssml_synth_spec_default(ssml_synth_spec* spec) {
  if (spec == nullptr) return;
  const ssml::data::SyntheticSpec d;
  spec->tracks = d.tracks;
  spec->track_length = d.track_length;
  spec->tag_count = d.tag_count;
  spec->sample_rate_hz = d.sample_rate_hz;
  spec->noise_level = d.noise_level;
  spec->seed = d.seed;
}

ssml_status ssml_synth_write(const ssml_synth_spec* spec, const char* dir, int overwrite) {
  return Guard([&] {
    Require(spec, "spec");
    Require(dir, "dir");
    ssml::data::SyntheticSpec s;
    s.tracks = spec->tracks;
    s.track_length = spec->track_length;
    s.tag_count = spec->tag_count;
    s.sample_rate_hz = spec->sample_rate_hz;
    s.noise_level = spec->noise_level;
    s.seed = spec->seed;
    s.max_tags_per_track = std::min(s.max_tags_per_track, s.tag_count);
    ssml::data::WriteCorpus(ssml::data::GenerateSynthetic(s), dir, overwrite != 0);
  });
}

ssml_status ssml_dataset_load(const char* audio_dir, const char* tag_file, const char* split_file,
                              size_t tag_count, ssml_dataset** out) {
  return Guard([&] {
    Require(audio_dir, "audio_dir");
    Require(tag_file, "tag_file");
    Require(split_file, "split_file");
    Require(out, "out");
    auto ds = std::make_unique<ssml_dataset>();
    ds->dataset = ssml::data::LoadDataset(audio_dir, tag_file, split_file, tag_count);
    *out = ds.release();
  });
}

ssml_status ssml_dataset_load_dir(const char* dir, size_t tag_count, ssml_dataset** out) {
  return Guard([&] {
    Require(dir, "dir");
    Require(out, "out");
    const std::filesystem::path root(dir);
    auto ds = std::make_unique<ssml_dataset>();
    ds->dataset = ssml::data::LoadDataset(root / "audio", root / "tags.tsv", root / "splits.tsv",
                                          tag_count);
    *out = ds.release();
  });
}

void ssml_dataset_destroy(ssml_dataset* dataset) { delete dataset; }

size_t ssml_dataset_size(const ssml_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.records.size();
}

size_t ssml_dataset_tag_count(const ssml_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.tag_count();
}

size_t ssml_dataset_missing_audio(const ssml_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.missing_audio;
}

ssml_status ssml_model_load(const char* path, ssml_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    const ssml::diff::Checkpoint ckpt = ssml::diff::Checkpoint::Load(path);
    *out = new ssml_model{ssml::model::ModelParams::FromCheckpoint(ckpt)};
  });
}

ssml_status ssml_model_save(const ssml_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    ssml::diff::Checkpoint ckpt;
    model->params.AddTo(ckpt);
    ckpt.Save(path);
  });
}

void ssml_model_destroy(ssml_model* model) { delete model; }

ssml_status ssml_model_dims(const ssml_model* model, size_t* embed_dim, size_t* tag_count,
                            size_t* excerpt_len) {
  return Guard([&] {
    Require(model, "model");
    const auto& c = model->params.config();
    if (embed_dim != nullptr) *embed_dim = static_cast<size_t>(c.embed_dim);
    if (tag_count != nullptr) *tag_count = static_cast<size_t>(c.tag_count);
    if (excerpt_len != nullptr) *excerpt_len = c.input_length();
  });
}

ssml_status ssml_pretrain(const ssml_dataset* dataset, const ssml_config* config, ssml_line_fn log,
                          void* user, ssml_model** out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(config, "config");
    Require(out, "out");
    LineBuf buf(log, user);
    std::ostream os(&buf);
    ssml::exp::RunOutput run = ssml::exp::Pretrain(dataset->dataset, ConfigFor(config, dataset), &os);
    *out = new ssml_model{run.params};
  });
}

ssml_status ssml_finetune(const ssml_dataset* dataset, const ssml_config* config,
                          const ssml_model* init, ssml_line_fn log, void* user, ssml_model** out) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(config, "config");
    Require(out, "out");
    const ssml::train::RunConfig c = ConfigFor(config, dataset);
    if (c.load_pretrain && init == nullptr) {
      Fail(ErrorCode::kInvalidInput, "load_pretrain requires an initial checkpoint");
    }
    std::optional<ssml::model::ModelParams> start;
    if (init != nullptr) start = init->params;
    LineBuf buf(log, user);
    std::ostream os(&buf);
    ssml::exp::RunOutput run = ssml::exp::Finetune(dataset->dataset, c, start, &os);
    *out = new ssml_model{run.params};
  });
}

ssml_status ssml_run_grid(const ssml_dataset* dataset, const ssml_config* config, const char* grid,
                          const ssml_model* pretrained, ssml_line_fn results, ssml_line_fn log,
                          void* user) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(config, "config");
    Require(grid, "grid");
    const std::string name = grid;
    const std::vector<ssml::exp::GridRow> rows = (name == "mtat" || name == "mtg")
                                                     ? ssml::exp::PresetGrid(name)
                                                     : ssml::exp::ReadGridFile(name);
    std::optional<ssml::model::ModelParams> init;
    if (pretrained != nullptr) init = pretrained->params;
    LineBuf out_buf(results, user), log_buf(log, user);
    std::ostream out(&out_buf), log_stream(&log_buf);
    ssml::exp::RunGrid(dataset->dataset, ConfigFor(config, dataset), rows, init, &out, &log_stream);
  });
}

ssml_status ssml_infer_audio(const ssml_model* model, const float* samples, size_t count,
                             int sample_rate_hz, float* embedding, double* tag_scores,
                             double* mean_probs) {
  return Guard([&] {
    Require(model, "model");
    Require(samples, "samples");
    Require(embedding, "embedding");
    ssml::AudioBuffer audio{std::vector<float>(samples, samples + count), sample_rate_hz};
    audio.Validate();
    const ssml::infer::TrackOutputs o = ssml::infer::InferTrack(model->params, "", audio);
    std::copy(o.embedding.vector.begin(), o.embedding.vector.end(), embedding);
    if (tag_scores != nullptr) std::copy(o.tags.scores.begin(), o.tags.scores.end(), tag_scores);
    if (mean_probs != nullptr) std::copy(o.tags.mean_probs.begin(), o.tags.mean_probs.end(), mean_probs);
  });
}

ssml_status ssml_embed(const ssml_model* model, const ssml_dataset* dataset, const char* split,
                       const char* store_path) {
  return Guard([&] {
    Require(model, "model");
    Require(dataset, "dataset");
    Require(store_path, "store_path");
    const std::vector<std::size_t> idx = SplitIndices(dataset->dataset, split);
    if (idx.empty()) Fail(ErrorCode::kData, "no tracks in split '", split, "'");
    std::vector<ssml::infer::TrackEmbedding> store;
    for (auto& o : ssml::infer::InferRecords(model->params, dataset->dataset, idx)) {
      store.push_back(std::move(o.embedding));
    }
    ssml::infer::WriteEmbeddingStore(store_path, store);
  });
}

ssml_status ssml_retrieve(const char* store_path, const char* query_id, size_t k, ssml_line_fn out,
                          void* user) {
  return Guard([&] {
    Require(store_path, "store_path");
    const std::vector<ssml::infer::TrackEmbedding> store = ssml::infer::ReadEmbeddingStore(store_path);
    LineBuf buf(out, user);
    std::ostream os(&buf);
    bool found = false;
    for (const auto& q : store) {
      if (query_id != nullptr && q.track_id != query_id) continue;
      found = true;
      const auto result = ssml::infer::Retrieve(q.vector, store, k, q.track_id);
      if (result.truncated) {
        std::cerr << "warning: only " << result.hits.size() << " candidates for query '"
                  << q.track_id << "' (K=" << k << ")\n";
      }
      ssml::infer::WriteRetrievalLines(os, q.track_id, result);
    }
    if (query_id != nullptr && !found) {
      Fail(ErrorCode::kData, "query '", query_id, "' is not in the store");
    }
  });
}

ssml_status ssml_evaluate(const ssml_model* model, const ssml_dataset* dataset, const char* split,
                          const char* store_path, const char* report_path, double metrics[6]) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(report_path, "report_path");
    if (model == nullptr && store_path == nullptr) {
      Fail(ErrorCode::kInvalidInput, "evaluation needs a model or an embedding store");
    }
    const ssml::data::Dataset& ds = dataset->dataset;
    const std::vector<std::size_t> idx = SplitIndices(ds, split);
    if (idx.empty()) Fail(ErrorCode::kData, "no tracks in the requested split");
    if (model != nullptr &&
        static_cast<std::size_t>(model->params.config().tag_count) != ds.tag_count()) {
      Fail(ErrorCode::kData, "model predicts ", model->params.config().tag_count,
           " tags but the dataset has ", ds.tag_count());
    }

    std::vector<std::vector<float>> labels;
    for (std::size_t i : idx) labels.push_back(ds.records[i].tags);
    std::vector<ssml::infer::TrackOutputs> outputs;
    if (model != nullptr) outputs = ssml::infer::InferRecords(model->params, ds, idx);

    std::vector<ssml::infer::TrackEmbedding> embeddings;
    if (store_path != nullptr) {
      std::unordered_map<std::string, ssml::infer::TrackEmbedding> by_id;
      for (auto& e : ssml::infer::ReadEmbeddingStore(store_path)) by_id.emplace(e.track_id, std::move(e));
      for (std::size_t i : idx) {
        auto it = by_id.find(ds.records[i].track_id);
        if (it == by_id.end()) {
          Fail(ErrorCode::kData, "track '", ds.records[i].track_id, "' is missing from the store");
        }
        embeddings.push_back(it->second);
      }
      if (model != nullptr && !embeddings.empty() &&
          embeddings.front().vector.size() != static_cast<std::size_t>(model->params.config().embed_dim)) {
        Fail(ErrorCode::kData, "store dimension ", embeddings.front().vector.size(),
             " does not match the checkpoint embedding dimension ", model->params.config().embed_dim);
      }
    } else {
      for (const auto& o : outputs) embeddings.push_back(o.embedding);
    }

    ssml::eval::MetricReport report;
    report.recall = ssml::eval::RecallAtK(embeddings, labels);
    report.tag_names = ds.tag_names;
    if (model != nullptr) {
      std::vector<std::vector<double>> scores;
      for (const auto& o : outputs) scores.push_back(o.tags.mean_probs);
      report.roc = ssml::eval::TagwiseRocAuc(scores, labels);
      report.pr = ssml::eval::TagwisePrAuc(scores, labels);
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      report.roc.mean = report.pr.mean = nan;
      report.roc.per_tag.assign(ds.tag_count(), nan);
      report.pr.per_tag.assign(ds.tag_count(), nan);
    }
    ssml::eval::WriteReport(report_path, report);
    if (metrics != nullptr) {
      for (std::size_t i = 0; i < 4; ++i) metrics[i] = report.recall.percent.at(i);
      metrics[4] = report.roc.mean;
      metrics[5] = report.pr.mean;
    }
  });
}

}  // extern "C"
