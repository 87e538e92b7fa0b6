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

// Track records, tag/split files, top-T tag selection and mini-batching.
//
// File formats (UTF-8 text, one record per line, '#' starts a comment):
//   tag file:   track_id<TAB>tag1,tag2,...
//   split file: track_id<TAB>train|valid|test
// Audio for a track lives at <audio_dir>/<track_id>.wav.

#ifndef SSML_DATASET_HPP_
#define SSML_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ssml/audio.hpp"

namespace ssml::data {

enum class Split { kTrain, kValid, kTest };

const char* SplitName(Split split);
Split ParseSplit(const std::string& name);

struct TrackRecord {
  std::string track_id;
  AudioBuffer audio;
  // Binary vector over the selected tags; all zeros when none of the track's
  // tags survived selection.
  std::vector<float> tags;
  Split split = Split::kTrain;
  // True when the track carries at least one selected tag.
  bool labeled = false;
};

struct Dataset {
  std::vector<std::string> tag_names;
  std::vector<TrackRecord> records;
  std::size_t missing_audio = 0;

  std::size_t tag_count() const { return tag_names.size(); }
  std::vector<std::size_t> Indices(Split split) const;
  void Validate() const;
};

using TagTable = std::map<std::string, std::vector<std::string>>;
using SplitTable = std::vector<std::pair<std::string, Split>>;

TagTable ReadTagFile(const std::filesystem::path& path);
SplitTable ReadSplitFile(const std::filesystem::path& path);
void WriteTagFile(const std::filesystem::path& path, const Dataset& dataset);
void WriteSplitFile(const std::filesystem::path& path, const Dataset& dataset);

// The `count` most frequent tags among `train_ids`; frequency ties are broken
// by ascending tag name. Returns fewer when fewer distinct tags exist.
std::vector<std::string> SelectTopTags(const TagTable& tags, std::span<const std::string> train_ids,
                                       std::size_t count);

// Tracks listed in the split file make up the dataset. Tracks whose audio
// file is missing are skipped and counted in Dataset::missing_audio.
Dataset LoadDataset(const std::filesystem::path& audio_dir, const std::filesystem::path& tag_file,
                    const std::filesystem::path& split_file, std::size_t tag_count);

struct Batch {
  std::vector<std::size_t> tracks;  // Indices into Dataset::records.
  std::vector<bool> labeled;        // Per position in `tracks`.
};

// One shuffled pass over `pool`; the final short batch is dropped.
// `labeled` is indexed by record index.
std::vector<Batch> MakeBatches(std::span<const std::size_t> pool, const std::vector<bool>& labeled,
                               std::size_t batch_size, Rng& rng);

}  // namespace ssml::data

#endif  // SSML_DATASET_HPP_
