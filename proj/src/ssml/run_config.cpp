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

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ssml/checkpoint.hpp"
#include "ssml/error.hpp"
#include "ssml/train.hpp"

namespace ssml::train {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

double ToDouble(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    Fail(ErrorCode::kInvalidInput, "config key '", key, "': '", value, "' is not a finite number");
  }
  return v;
}

template <typename Int>
Int ToInt(const std::string& key, const std::string& value) {
  Int v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    Fail(ErrorCode::kInvalidInput, "config key '", key, "': '", value, "' is not an integer");
  }
  return v;
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  Fail(ErrorCode::kInvalidInput, "config key '", key, "': '", value, "' is not a boolean");
}

std::string FromBool(bool b) { return b ? "true" : "false"; }

}  // namespace

std::optional<double> BalanceRatioPreset(const std::string& name) {
  if (name == "magnatagatune" || name == "mtat") return loss::kRatioMagnaTagATune;
  if (name == "mtg-jamendo" || name == "mtg") return loss::kRatioMtgJamendo;
  return std::nullopt;
}

void SetConfigValue(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = Trim(raw_key);
  const std::string value = Trim(raw_value);
  dsp::AugmentSpec& a = c.augment;
  if (key == "phase") {
    c.phase = ParsePhase(value);
  } else if (key == "fine_tune_augment") {
    c.fine_tune_augment = ToBool(key, value);
  } else if (key == "fine_tune_contrastive") {
    c.fine_tune_contrastive = ToBool(key, value);
  } else if (key == "load_pretrain") {
    c.load_pretrain = ToBool(key, value);
  } else if (key == "alpha") {
    c.alpha = ToDouble(key, value);
  } else if (key == "balance_ratio") {
    if (auto preset = BalanceRatioPreset(value)) {
      c.balance_ratio = *preset;
    } else {
      c.balance_ratio = ToDouble(key, value);
    }
  } else if (key == "label_rate") {
    c.label_rate = ToDouble(key, value);
  } else if (key == "batch_size") {
    c.batch_size = ToInt<std::size_t>(key, value);
  } else if (key == "pretrain_lr") {
    c.pretrain_lr = ToDouble(key, value);
  } else if (key == "finetune_lr") {
    c.finetune_lr = ToDouble(key, value);
  } else if (key == "beta1") {
    c.beta1 = ToDouble(key, value);
  } else if (key == "beta2") {
    c.beta2 = ToDouble(key, value);
  } else if (key == "adam_eps") {
    c.adam_eps = ToDouble(key, value);
  } else if (key == "weight_decay") {
    c.weight_decay = ToDouble(key, value);
  } else if (key == "pretrain_epochs") {
    c.pretrain_epochs = ToInt<int>(key, value);
  } else if (key == "max_epochs") {
    c.max_epochs = ToInt<int>(key, value);
  } else if (key == "early_stop_patience") {
    c.early_stop_patience = ToInt<int>(key, value);
  } else if (key == "plateau_patience") {
    c.plateau_patience = ToInt<int>(key, value);
  } else if (key == "plateau_factor") {
    c.plateau_factor = ToDouble(key, value);
  } else if (key == "temperature") {
    c.temperature = ToDouble(key, value);
  } else if (key == "steps_per_epoch") {
    c.steps_per_epoch = ToInt<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = ToInt<std::uint64_t>(key, value);
  } else if (key == "levels") {
    c.model.levels = ToInt<int>(key, value);
  } else if (key == "base_channels") {
    c.model.base_channels = ToInt<int>(key, value);
  } else if (key == "embed_dim") {
    c.model.embed_dim = ToInt<int>(key, value);
  } else if (key == "proj_dim") {
    c.model.proj_dim = ToInt<int>(key, value);
  } else if (key == "tag_count") {
    c.model.tag_count = ToInt<int>(key, value);
  } else if (key == "polarity_p") {
    a.polarity_p = ToDouble(key, value);
  } else if (key == "noise_p") {
    a.noise_p = ToDouble(key, value);
  } else if (key == "gain_p") {
    a.gain_p = ToDouble(key, value);
  } else if (key == "filter_p") {
    a.filter_p = ToDouble(key, value);
  } else if (key == "delay_p") {
    a.delay_p = ToDouble(key, value);
  } else if (key == "pitch_p") {
    a.pitch_p = ToDouble(key, value);
  } else if (key == "reverb_p") {
    a.reverb_p = ToDouble(key, value);
  } else {
    Fail(ErrorCode::kInvalidInput, "unknown config key '", key, "'");
  }
}

std::vector<std::pair<std::string, std::string>> ConfigValues(const RunConfig& c) {
  using diff::ExactDouble;
  return {
      {"phase", PhaseName(c.phase)},
      {"fine_tune_augment", FromBool(c.fine_tune_augment)},
      {"fine_tune_contrastive", FromBool(c.fine_tune_contrastive)},
      {"load_pretrain", FromBool(c.load_pretrain)},
      {"alpha", ExactDouble(c.alpha)},
      {"balance_ratio", ExactDouble(c.balance_ratio)},
      {"label_rate", ExactDouble(c.label_rate)},
      {"batch_size", std::to_string(c.batch_size)},
      {"pretrain_lr", ExactDouble(c.pretrain_lr)},
      {"finetune_lr", ExactDouble(c.finetune_lr)},
      {"beta1", ExactDouble(c.beta1)},
      {"beta2", ExactDouble(c.beta2)},
      {"adam_eps", ExactDouble(c.adam_eps)},
      {"weight_decay", ExactDouble(c.weight_decay)},
      {"pretrain_epochs", std::to_string(c.pretrain_epochs)},
      {"max_epochs", std::to_string(c.max_epochs)},
      {"early_stop_patience", std::to_string(c.early_stop_patience)},
      {"plateau_patience", std::to_string(c.plateau_patience)},
      {"plateau_factor", ExactDouble(c.plateau_factor)},
      {"temperature", ExactDouble(c.temperature)},
      {"steps_per_epoch", std::to_string(c.steps_per_epoch)},
      {"seed", std::to_string(c.seed)},
      {"levels", std::to_string(c.model.levels)},
      {"base_channels", std::to_string(c.model.base_channels)},
      {"embed_dim", std::to_string(c.model.embed_dim)},
      {"proj_dim", std::to_string(c.model.proj_dim)},
      {"tag_count", std::to_string(c.model.tag_count)},
      {"polarity_p", ExactDouble(c.augment.polarity_p)},
      {"noise_p", ExactDouble(c.augment.noise_p)},
      {"gain_p", ExactDouble(c.augment.gain_p)},
      {"filter_p", ExactDouble(c.augment.filter_p)},
      {"delay_p", ExactDouble(c.augment.delay_p)},
      {"pitch_p", ExactDouble(c.augment.pitch_p)},
      {"reverb_p", ExactDouble(c.augment.reverb_p)},
  };
}

std::vector<std::pair<std::string, std::string>> ParseConfigText(const std::string& text,
                                                                 const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find_first_of(" \t");
    if (sep == std::string::npos) {
      Fail(ErrorCode::kInvalidInput, origin, ":", line_no, ": expected 'key=value'");
    }
    out.emplace_back(Trim(line.substr(0, sep)), Trim(line.substr(sep + 1)));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot read config '", path.string(), "'");
  std::ostringstream text;
  text << is.rdbuf();
  return ParseConfigText(text.str(), path.string());
}

}  // namespace ssml::train
