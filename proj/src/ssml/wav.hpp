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

// RIFF/WAVE reader and writer for uncompressed audio. Accepts integer PCM
// (8/16/24/32-bit) and IEEE float (32/64-bit), including the extensible
// header; multi-channel input is averaged down to mono.

#ifndef SSML_WAV_HPP_
#define SSML_WAV_HPP_

#include <filesystem>
#include <string>

#include "ssml/audio.hpp"

namespace ssml::data {

enum class WavEncoding { kPcm16, kFloat32 };

AudioBuffer DecodeWav(const std::string& bytes);
std::string EncodeWav(const AudioBuffer& audio, WavEncoding encoding = WavEncoding::kPcm16);

AudioBuffer ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const AudioBuffer& audio,
              WavEncoding encoding = WavEncoding::kPcm16);

// Rounds to the nearest 16-bit PCM level, as a 16-bit file would store it.
float QuantizePcm16(float sample);

}  // namespace ssml::data

#endif  // SSML_WAV_HPP_
