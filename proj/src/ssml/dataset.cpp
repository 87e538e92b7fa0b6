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

#include "ssml/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ssml/error.hpp"
#include "ssml/wav.hpp"

namespace ssml::data {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Calls `fn(line_number, id, rest)` for each non-blank, non-comment line.
template <typename Fn>
void ForEachRecord(const std::filesystem::path& path, const char* what, Fn fn) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot read ", what, " '", path.string(), "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty() || Trim(line)[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      Fail(ErrorCode::kData, path.string(), ":", line_no, ": expected a TAB-separated record");
    }
    const std::string id = Trim(line.substr(0, tab));
    if (id.empty()) Fail(ErrorCode::kData, path.string(), ":", line_no, ": empty track id");
    fn(line_no, id, line.substr(tab + 1));
  }
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid" || name == "validation") return Split::kValid;
  if (name == "test") return Split::kTest;
  Fail(ErrorCode::kData, "unknown split '", name, "'");
}

std::vector<std::size_t> Dataset::Indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

void Dataset::Validate() const {
  std::unordered_set<std::string> seen;
  for (const TrackRecord& r : records) {
    if (!seen.insert(r.track_id).second) {
      Fail(ErrorCode::kData, "track '", r.track_id, "' appears more than once");
    }
    if (r.tags.size() != tag_count()) {
      Fail(ErrorCode::kData, "track '", r.track_id, "' has ", r.tags.size(), " tag slots, expected ",
           tag_count());
    }
    if (r.labeled && std::none_of(r.tags.begin(), r.tags.end(), [](float v) { return v != 0.0f; })) {
      Fail(ErrorCode::kData, "track '", r.track_id, "' is labelled but has no tags");
    }
    r.audio.Validate();
  }
}

TagTable ReadTagFile(const std::filesystem::path& path) {
  TagTable table;
  ForEachRecord(path, "tag file", [&](std::size_t, const std::string& id, const std::string& rest) {
    auto& tags = table[id];
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const std::string tag =
          Trim(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!tag.empty() && std::find(tags.begin(), tags.end(), tag) == tags.end()) {
        tags.push_back(tag);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  });
  return table;
}

SplitTable ReadSplitFile(const std::filesystem::path& path) {
  SplitTable table;
  std::unordered_map<std::string, Split> seen;
  ForEachRecord(path, "split file",
                [&](std::size_t line_no, const std::string& id, const std::string& rest) {
                  const Split split = ParseSplit(Trim(rest));
                  auto [it, inserted] = seen.emplace(id, split);
                  if (!inserted) {
                    Fail(ErrorCode::kData, path.string(), ":", line_no, ": track '", id,
                         "' assigned twice");
                  }
                  table.emplace_back(id, split);
                });
  return table;
}

void WriteTagFile(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) Fail(ErrorCode::kIo, "cannot write '", path.string(), "'");
  for (const TrackRecord& r : dataset.records) {
    os << r.track_id << '\t';
    bool first = true;
    for (std::size_t t = 0; t < r.tags.size(); ++t) {
      if (r.tags[t] == 0.0f) continue;
      if (!first) os << ',';
      os << dataset.tag_names[t];
      first = false;
    }
    os << '\n';
  }
}

void WriteSplitFile(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) Fail(ErrorCode::kIo, "cannot write '", path.string(), "'");
  for (const TrackRecord& r : dataset.records) os << r.track_id << '\t' << SplitName(r.split) << '\n';
}

std::vector<std::string> SelectTopTags(const TagTable& tags, std::span<const std::string> train_ids,
                                       std::size_t count) {
  std::map<std::string, std::size_t> freq;
  for (const std::string& id : train_ids) {
    auto it = tags.find(id);
    if (it == tags.end()) continue;
    for (const std::string& tag : it->second) ++freq[tag];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < count; ++i) out.push_back(ranked[i].first);
  return out;
}

Dataset LoadDataset(const std::filesystem::path& audio_dir, const std::filesystem::path& tag_file,
                    const std::filesystem::path& split_file, std::size_t tag_count) {
  if (tag_count == 0) Fail(ErrorCode::kInvalidInput, "tag count must be positive");
  const TagTable tags = ReadTagFile(tag_file);
  const SplitTable splits = ReadSplitFile(split_file);

  std::vector<std::string> train_ids;
  for (const auto& [id, split] : splits) {
    if (split == Split::kTrain) train_ids.push_back(id);
  }
  Dataset ds;
  ds.tag_names = SelectTopTags(tags, train_ids, tag_count);
  if (ds.tag_names.empty()) Fail(ErrorCode::kData, "no tags found among training tracks");
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < ds.tag_names.size(); ++i) column[ds.tag_names[i]] = i;

  for (const auto& [id, split] : splits) {
    const std::filesystem::path wav = audio_dir / (id + ".wav");
    if (!std::filesystem::exists(wav)) {
      ++ds.missing_audio;
      continue;
    }
    TrackRecord r;
    r.track_id = id;
    r.split = split;
    r.audio = ReadWav(wav);
    if (r.audio.samples.empty()) {
      ++ds.missing_audio;
      continue;
    }
    r.tags.assign(ds.tag_names.size(), 0.0f);
    if (auto it = tags.find(id); it != tags.end()) {
      for (const std::string& tag : it->second) {
        if (auto c = column.find(tag); c != column.end()) r.tags[c->second] = 1.0f;
      }
    }
    r.labeled = std::any_of(r.tags.begin(), r.tags.end(), [](float v) { return v != 0.0f; });
    ds.records.push_back(std::move(r));
  }
  if (ds.missing_audio > 0) {
    std::cerr << "warning: skipped " << ds.missing_audio << " track(s) with missing audio\n";
  }
  ds.Validate();
  return ds;
}

std::vector<Batch> MakeBatches(std::span<const std::size_t> pool, const std::vector<bool>& labeled,
                               std::size_t batch_size, Rng& rng) {
  if (batch_size < 2) Fail(ErrorCode::kInvalidInput, "batch size must be at least 2");
  if (pool.size() < batch_size) {
    Fail(ErrorCode::kData, "dataset of ", pool.size(), " tracks is smaller than one batch of ",
         batch_size);
  }
  std::vector<std::size_t> order(pool.begin(), pool.end());
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start + batch_size <= order.size(); start += batch_size) {
    Batch b;
    b.tracks.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                    order.begin() + static_cast<std::ptrdiff_t>(start + batch_size));
    for (std::size_t idx : b.tracks) {
      if (idx >= labeled.size()) Fail(ErrorCode::kInvalidInput, "track index out of range");
      b.labeled.push_back(labeled[idx]);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace ssml::data
