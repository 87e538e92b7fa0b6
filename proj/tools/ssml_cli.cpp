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

// ssml command-line tool. Settings are applied in this order, later ones
// winning: built-in defaults, --config file, --set key=value pairs, then the
// dedicated flags (--seed, --alpha, ...).

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "ssml/ssml.h"

namespace {

// Carries a failed status out of nested helpers.
struct Failure {
  ssml_status status;
};

void Check(ssml_status s) {
  if (s != SSML_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(ssml_config* c) const { ssml_config_destroy(c); }
};
struct DatasetDeleter {
  void operator()(ssml_dataset* d) const { ssml_dataset_destroy(d); }
};
struct ModelDeleter {
  void operator()(ssml_model* m) const { ssml_model_destroy(m); }
};
using ConfigPtr = std::unique_ptr<ssml_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<ssml_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<ssml_model, ModelDeleter>;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_file;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
};

struct DataArgs {
  std::string dir;
  std::string audio_dir;
  std::string tag_file;
  std::string split_file;
};

struct TrainArgs {
  std::optional<int> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<std::size_t> steps_per_epoch;
  std::optional<int> levels;
  std::optional<int> base_channels;
  std::optional<int> embed_dim;
  std::optional<int> proj_dim;
  std::optional<int> tag_count;
};

struct FinetuneArgs {
  std::optional<bool> augment;
  std::optional<bool> contrastive;
  bool load_pretrain = false;
  std::string init_checkpoint;
  std::optional<double> alpha;
  std::string balance_ratio;
  std::optional<double> label_rate;
};

void Set(ssml_config* c, const std::string& key, const std::string& value) {
  Check(ssml_config_set(c, key.c_str(), value.c_str()));
}

// Shortest text that reads back to the same value.
template <typename T>
std::string Str(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  } else {
    std::ostringstream os;
    os << v;
    return os.str();
  }
}

template <typename T>
void SetIf(ssml_config* c, const std::string& key, const std::optional<T>& v) {
  if (v) Set(c, key, Str(*v));
}

ConfigPtr MakeConfig(const Globals& g) {
  ssml_config* raw = nullptr;
  Check(ssml_config_create(&raw));
  ConfigPtr c(raw);
  if (!g.config_file.empty()) Check(ssml_config_load_file(c.get(), g.config_file.c_str()));
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
      throw Failure{SSML_ERR_USAGE};
    }
    Set(c.get(), kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) Set(c.get(), "seed", std::to_string(*g.seed));
  return c;
}

void ApplyTrainArgs(ssml_config* c, const TrainArgs& t, const char* epochs_key, const char* lr_key) {
  SetIf(c, epochs_key, t.epochs);
  SetIf(c, "batch_size", t.batch_size);
  SetIf(c, lr_key, t.lr);
  SetIf(c, "steps_per_epoch", t.steps_per_epoch);
  SetIf(c, "levels", t.levels);
  SetIf(c, "base_channels", t.base_channels);
  SetIf(c, "embed_dim", t.embed_dim);
  SetIf(c, "proj_dim", t.proj_dim);
  SetIf(c, "tag_count", t.tag_count);
}

std::string GetConfig(const ssml_config* c, const char* key) {
  char buf[256];
  Check(ssml_config_get(c, key, buf, sizeof(buf)));
  return buf;
}

DatasetPtr LoadData(const DataArgs& d, const ssml_config* c) {
  const std::size_t tags = std::stoul(GetConfig(c, "tag_count"));
  ssml_dataset* raw = nullptr;
  if (!d.dir.empty()) {
    Check(ssml_dataset_load_dir(d.dir.c_str(), tags, &raw));
  } else if (!d.audio_dir.empty() && !d.tag_file.empty() && !d.split_file.empty()) {
    Check(ssml_dataset_load(d.audio_dir.c_str(), d.tag_file.c_str(), d.split_file.c_str(), tags, &raw));
  } else {
    std::cerr << "error: give --data DIR or all of --audio-dir, --tag-file and --split-file\n";
    throw Failure{SSML_ERR_USAGE};
  }
  return DatasetPtr(raw);
}

ModelPtr LoadModel(const std::string& path) {
  ssml_model* raw = nullptr;
  Check(ssml_model_load(path.c_str(), &raw));
  return ModelPtr(raw);
}

std::filesystem::path OutPath(const Globals& g, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  std::filesystem::create_directories(g.out_dir);
  return std::filesystem::path(g.out_dir) / name;
}

// Writes each line to stdout and, when open, to a file.
struct LineSink {
  std::ofstream file;
  bool echo = true;
};

void SinkLine(const char* line, void* user) {
  auto* sink = static_cast<LineSink*>(user);
  if (sink->echo) std::cout << line << '\n' << std::flush;
  if (sink->file.is_open()) sink->file << line << '\n' << std::flush;
}

void StderrLine(const char* line, void*) { std::cerr << line << '\n' << std::flush; }

void AddDataOptions(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--data", d.dir, "Corpus directory with audio/, tags.tsv and splits.tsv");
  cmd->add_option("--audio-dir", d.audio_dir, "Directory of <track_id>.wav files");
  cmd->add_option("--tag-file", d.tag_file, "track_id<TAB>tag1,tag2,... file");
  cmd->add_option("--split-file", d.split_file, "track_id<TAB>train|valid|test file");
}

void AddTrainOptions(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--epochs", t.epochs, "Epoch budget");
  cmd->add_option("--batch-size", t.batch_size, "Tracks per batch");
  cmd->add_option("--lr", t.lr, "Learning rate");
  cmd->add_option("--steps-per-epoch", t.steps_per_epoch, "Cap on steps per epoch (0 = full pass)");
  cmd->add_option("--levels", t.levels, "Encoder depth n (excerpt length 3^n)");
  cmd->add_option("--base-channels", t.base_channels, "Channels of the first convolution");
  cmd->add_option("--embed-dim", t.embed_dim, "Embedding dimension D");
  cmd->add_option("--proj-dim", t.proj_dim, "Projection head output dimension");
  cmd->add_option("--tag-count", t.tag_count, "Number of most frequent tags to use");
}

void PrintLambda(const ssml_config* c) {
  double lambda = 0.0;
  Check(ssml_config_lambda(c, &lambda));
  std::cerr << "alpha=" << GetConfig(c, "alpha") << " r=" << GetConfig(c, "balance_ratio")
            << " lambda=" << Str(lambda) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric learning with a self-supervised auxiliary loss for music retrieval and tagging"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--config", g.config_file, "Flat key=value configuration file");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();
  app.add_option("--set", g.overrides, "Configuration override key=value (repeatable)");

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "Write a synthetic tagged corpus");
  ssml_synth_spec spec;
  ssml_synth_spec_default(&spec);
  bool force = false;
  synth->add_option("--tracks", spec.tracks, "Number of tracks")->capture_default_str();
  synth->add_option("--length", spec.track_length, "Samples per track")->capture_default_str();
  synth->add_option("--tags", spec.tag_count, "Number of tags")->capture_default_str();
  synth->add_option("--noise", spec.noise_level, "Noise standard deviation")->capture_default_str();
  synth->add_option("--sample-rate", spec.sample_rate_hz, "Sample rate in Hz")->capture_default_str();
  synth->add_flag("--force", force, "Overwrite a non-empty output directory");

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "Contrastive pre-training");
  DataArgs pre_data;
  TrainArgs pre_train;
  std::string pre_out;
  AddDataOptions(pretrain, pre_data);
  AddTrainOptions(pretrain, pre_train);
  pretrain->add_option("--checkpoint-out", pre_out, "Checkpoint path (default <out-dir>/pretrain.ckpt)");

  // finetune
  auto* finetune = app.add_subcommand("finetune", "Fine-tuning with the combined loss");
  DataArgs ft_data;
  TrainArgs ft_train;
  FinetuneArgs ft;
  std::string ft_out;
  AddDataOptions(finetune, ft_data);
  AddTrainOptions(finetune, ft_train);
  finetune->add_flag("--augment,!--no-augment", ft.augment, "Augment views while fine-tuning");
  finetune->add_flag("--contrastive,!--no-contrastive", ft.contrastive,
                     "Keep the contrastive term while fine-tuning");
  finetune->add_flag("--load-pretrain", ft.load_pretrain, "Start from --init-checkpoint");
  finetune->add_option("--init-checkpoint", ft.init_checkpoint, "Pre-trained checkpoint");
  finetune->add_option("--alpha", ft.alpha, "alpha in lambda = alpha / r");
  finetune->add_option("--balance-ratio", ft.balance_ratio,
                       "r as a number or preset (magnatagatune, mtg-jamendo)");
  finetune->add_option("--label-rate", ft.label_rate, "Fraction of training tracks keeping tags");
  finetune->add_option("--checkpoint-out", ft_out, "Checkpoint path (default <out-dir>/finetune.ckpt)");

  // embed
  auto* embed = app.add_subcommand("embed", "Write track embeddings of a split");
  DataArgs emb_data;
  std::string emb_ckpt, emb_split = "test", emb_store;
  AddDataOptions(embed, emb_data);
  embed->add_option("--checkpoint", emb_ckpt, "Model checkpoint")->required();
  embed->add_option("--split", emb_split, "train, valid, test or all")->capture_default_str();
  embed->add_option("--store", emb_store, "Output store (default <out-dir>/embeddings.bin)");

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Top-K retrieval from an embedding store");
  std::string ret_store, ret_query, ret_output;
  std::size_t ret_k = 8;
  retrieve->add_option("--store", ret_store, "Embedding store")->required();
  retrieve->add_option("--query", ret_query, "Query track id (default: every track)");
  retrieve->add_option("-k,--top-k", ret_k, "Results per query")->capture_default_str();
  retrieve->add_option("--output", ret_output, "Write results here instead of stdout");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Retrieval and tagging metrics");
  DataArgs ev_data;
  std::string ev_ckpt, ev_store, ev_split = "test", ev_report;
  AddDataOptions(evaluate, ev_data);
  evaluate->add_option("--checkpoint", ev_ckpt, "Model checkpoint (needed for ROC/PR)");
  evaluate->add_option("--store", ev_store, "Embedding store (default: embed with --checkpoint)");
  evaluate->add_option("--split", ev_split, "train, valid, test or all")->capture_default_str();
  evaluate->add_option("--report", ev_report, "Report path (default <out-dir>/report.txt)");

  // grid
  auto* grid = app.add_subcommand("grid", "Fine-tune and evaluate a grid of learning techniques");
  DataArgs grid_data;
  TrainArgs grid_train;
  std::string grid_preset, grid_rows, grid_pretrained, grid_output;
  std::optional<double> grid_label_rate;
  std::string grid_ratio;
  AddDataOptions(grid, grid_data);
  AddTrainOptions(grid, grid_train);
  grid->add_option("--preset", grid_preset, "mtat (rows A-I) or mtg (rows J-O)");
  grid->add_option("--rows", grid_rows, "Grid file: name augment contrastive load alpha");
  grid->add_option("--pretrained", grid_pretrained, "Reuse this pre-trained checkpoint");
  grid->add_option("--pretrain-epochs", grid_train.epochs, "Pre-training epoch budget");
  grid->add_option("--label-rate", grid_label_rate, "Fraction of training tracks keeping tags");
  grid->add_option("--balance-ratio", grid_ratio, "r as a number or preset");
  grid->add_option("--output", grid_output, "Result table (default <out-dir>/grid.tsv)");

  // balance
  auto* balance = app.add_subcommand("balance", "Balancing factor lambda = alpha / r");
  std::optional<double> bal_ml, bal_ssl;
  std::string bal_preset;
  double bal_alpha = 1.0;
  balance->add_option("--ml", bal_ml, "Converged metric-learning loss");
  balance->add_option("--ssl", bal_ssl, "Converged contrastive loss");
  balance->add_option("--preset", bal_preset, "magnatagatune or mtg-jamendo");
  balance->add_option("--alpha", bal_alpha, "alpha")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      if (g.seed) spec.seed = *g.seed;
      Check(ssml_synth_write(&spec, g.out_dir.c_str(), force ? 1 : 0));
      std::cerr << "wrote " << spec.tracks << " tracks to " << g.out_dir << '\n';
    } else if (pretrain->parsed()) {
      ConfigPtr c = MakeConfig(g);
      Set(c.get(), "phase", "pretrain");
      ApplyTrainArgs(c.get(), pre_train, "pretrain_epochs", "pretrain_lr");
      DatasetPtr ds = LoadData(pre_data, c.get());
      const auto out = OutPath(g, pre_out, "pretrain.ckpt");
      LineSink sink;
      sink.file.open(std::filesystem::path(out).replace_extension(".log"));
      ssml_model* raw = nullptr;
      Check(ssml_pretrain(ds.get(), c.get(), SinkLine, &sink, &raw));
      ModelPtr model(raw);
      Check(ssml_model_save(model.get(), out.string().c_str()));
      std::cerr << "checkpoint: " << out.string() << '\n';
    } else if (finetune->parsed()) {
      ConfigPtr c = MakeConfig(g);
      Set(c.get(), "phase", "finetune");
      ApplyTrainArgs(c.get(), ft_train, "max_epochs", "finetune_lr");
      if (ft.augment) Set(c.get(), "fine_tune_augment", *ft.augment ? "true" : "false");
      if (ft.contrastive) Set(c.get(), "fine_tune_contrastive", *ft.contrastive ? "true" : "false");
      if (ft.load_pretrain) Set(c.get(), "load_pretrain", "true");
      SetIf(c.get(), "alpha", ft.alpha);
      SetIf(c.get(), "label_rate", ft.label_rate);
      if (!ft.balance_ratio.empty()) Set(c.get(), "balance_ratio", ft.balance_ratio);
      const bool load = GetConfig(c.get(), "load_pretrain") == "true";
      if (load && ft.init_checkpoint.empty()) {
        std::cerr << "error: --load-pretrain requires --init-checkpoint\n";
        return SSML_ERR_USAGE;
      }
      if (GetConfig(c.get(), "fine_tune_contrastive") == "true") PrintLambda(c.get());
      DatasetPtr ds = LoadData(ft_data, c.get());
      ModelPtr init;
      if (load) init = LoadModel(ft.init_checkpoint);
      const auto out = OutPath(g, ft_out, "finetune.ckpt");
      LineSink sink;
      sink.file.open(std::filesystem::path(out).replace_extension(".log"));
      ssml_model* raw = nullptr;
      Check(ssml_finetune(ds.get(), c.get(), init.get(), SinkLine, &sink, &raw));
      ModelPtr model(raw);
      Check(ssml_model_save(model.get(), out.string().c_str()));
      std::cerr << "checkpoint: " << out.string() << '\n';
    } else if (embed->parsed()) {
      ConfigPtr c = MakeConfig(g);
      ModelPtr model = LoadModel(emb_ckpt);
      std::size_t tags = 0;
      Check(ssml_model_dims(model.get(), nullptr, &tags, nullptr));
      Set(c.get(), "tag_count", std::to_string(tags));
      DatasetPtr ds = LoadData(emb_data, c.get());
      const auto out = OutPath(g, emb_store, "embeddings.bin");
      Check(ssml_embed(model.get(), ds.get(), emb_split.c_str(), out.string().c_str()));
      std::cerr << "store: " << out.string() << '\n';
    } else if (retrieve->parsed()) {
      LineSink sink;
      if (!ret_output.empty()) {
        sink.file.open(ret_output, std::ios::trunc);
        sink.echo = false;
      }
      Check(ssml_retrieve(ret_store.c_str(), ret_query.empty() ? nullptr : ret_query.c_str(), ret_k,
                          SinkLine, &sink));
    } else if (evaluate->parsed()) {
      ConfigPtr c = MakeConfig(g);
      ModelPtr model;
      if (!ev_ckpt.empty()) {
        model = LoadModel(ev_ckpt);
        std::size_t tags = 0;
        Check(ssml_model_dims(model.get(), nullptr, &tags, nullptr));
        Set(c.get(), "tag_count", std::to_string(tags));
      } else if (ev_store.empty()) {
        std::cerr << "error: evaluate needs --checkpoint or --store\n";
        return SSML_ERR_USAGE;
      }
      DatasetPtr ds = LoadData(ev_data, c.get());
      const auto report = OutPath(g, ev_report, "report.txt");
      double metrics[6];
      Check(ssml_evaluate(model.get(), ds.get(), ev_split.c_str(),
                          ev_store.empty() ? nullptr : ev_store.c_str(), report.string().c_str(),
                          metrics));
      std::ifstream is(report);
      std::cout << is.rdbuf();
    } else if (grid->parsed()) {
      if (grid_preset.empty() == grid_rows.empty()) {
        std::cerr << "error: give exactly one of --preset and --rows\n";
        return SSML_ERR_USAGE;
      }
      ConfigPtr c = MakeConfig(g);
      Set(c.get(), "phase", "finetune");
      ApplyTrainArgs(c.get(), grid_train, "pretrain_epochs", "finetune_lr");
      SetIf(c.get(), "label_rate", grid_label_rate);
      if (!grid_ratio.empty()) Set(c.get(), "balance_ratio", grid_ratio);
      DatasetPtr ds = LoadData(grid_data, c.get());
      ModelPtr pretrained;
      if (!grid_pretrained.empty()) pretrained = LoadModel(grid_pretrained);
      LineSink sink;
      sink.file.open(OutPath(g, grid_output, "grid.tsv"), std::ios::trunc);
      const std::string which = grid_preset.empty() ? grid_rows : grid_preset;
      Check(ssml_run_grid(ds.get(), c.get(), which.c_str(), pretrained.get(), SinkLine, StderrLine,
                          &sink));
    } else if (balance->parsed()) {
      double r = 0.0, lambda = 0.0;
      if (!bal_preset.empty()) {
        Check(ssml_balance_preset(bal_preset.c_str(), &r));
        lambda = bal_alpha / r;
      } else if (bal_ml && bal_ssl) {
        Check(ssml_balance_factor(*bal_ml, *bal_ssl, bal_alpha, &r, &lambda));
      } else {
        std::cerr << "error: give --preset or both --ml and --ssl\n";
        return SSML_ERR_USAGE;
      }
      std::cout << "r=" << Str(r) << "\nalpha=" << Str(bal_alpha) << "\nlambda=" << Str(lambda) << '\n';
    }
  } catch (const Failure& f) {
    if (*ssml_last_error() != '\0') std::cerr << "error: " << ssml_last_error() << '\n';
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return SSML_ERR_DATA;
  }
  return 0;
}
