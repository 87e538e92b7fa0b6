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

#include "ssml/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ssml/binary_io.hpp"
#include "ssml/error.hpp"

namespace ssml::data {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t LoadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t LoadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

double DecodeSample(const unsigned char* p, const Format& f) {
  if (f.tag == kFormatFloat) {
    if (f.bits == 32) return std::bit_cast<float>(LoadU32(p));
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return std::bit_cast<double>(v);
  }
  switch (f.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(LoadU16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    case 32:
      return static_cast<std::int32_t>(LoadU32(p)) / 2147483648.0;
    default:
      Fail(ErrorCode::kData, "unsupported PCM bit depth ", f.bits);
  }
}

}  // namespace

float QuantizePcm16(float sample) {
  const double clipped = std::clamp(static_cast<double>(sample), -1.0, 32767.0 / 32768.0);
  return static_cast<float>(std::lround(clipped * 32768.0) / 32768.0);
}

AudioBuffer DecodeWav(const std::string& bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    Fail(ErrorCode::kData, "not a RIFF/WAVE stream");
  }
  Format fmt;
  bool have_fmt = false;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t chunk_size = LoadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = size - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || available < 16) Fail(ErrorCode::kData, "truncated fmt chunk");
      fmt.tag = LoadU16(data + body);
      fmt.channels = LoadU16(data + body + 2);
      fmt.sample_rate = LoadU32(data + body + 4);
      fmt.bits = LoadU16(data + body + 14);
      if (fmt.tag == kFormatExtensible) {
        if (chunk_size < 40 || available < 40) Fail(ErrorCode::kData, "truncated extensible fmt");
        fmt.tag = LoadU16(data + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = data + body;
      // Some writers leave the size field unset for streamed output.
      payload_size = std::min<std::size_t>(chunk_size, available);
      break;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  if (!have_fmt) Fail(ErrorCode::kData, "WAV stream has no fmt chunk");
  if (payload == nullptr) Fail(ErrorCode::kData, "WAV stream has no data chunk");
  if (fmt.tag != kFormatPcm && fmt.tag != kFormatFloat) {
    Fail(ErrorCode::kData, "unsupported WAV format tag ", fmt.tag, " (uncompressed only)");
  }
  if (fmt.tag == kFormatFloat && fmt.bits != 32 && fmt.bits != 64) {
    Fail(ErrorCode::kData, "unsupported float bit depth ", fmt.bits);
  }
  if (fmt.channels == 0 || fmt.sample_rate == 0 || fmt.bits == 0 || fmt.bits % 8 != 0) {
    Fail(ErrorCode::kData, "invalid WAV format fields");
  }
  const std::size_t width = fmt.bits / 8;
  const std::size_t frame = width * fmt.channels;
  const std::size_t frames = payload_size / frame;

  AudioBuffer out;
  out.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      acc += DecodeSample(payload + i * frame + c * width, fmt);
    }
    out.samples[i] = static_cast<float>(acc / fmt.channels);
  }
  return out;
}

std::string EncodeWav(const AudioBuffer& audio, WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.size() * (bits / 8));
  std::ostringstream os(std::ios::binary);
  os.write("RIFF", 4);
  io::PutU32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  io::PutU32(os, 16);
  io::PutU16(os, pcm ? kFormatPcm : kFormatFloat);
  io::PutU16(os, 1);
  io::PutU32(os, static_cast<std::uint32_t>(audio.sample_rate_hz));
  io::PutU32(os, static_cast<std::uint32_t>(audio.sample_rate_hz) * (bits / 8));
  io::PutU16(os, bits / 8);
  io::PutU16(os, bits);
  os.write("data", 4);
  io::PutU32(os, data_bytes);
  for (float s : audio.samples) {
    if (pcm) {
      const double clipped = std::clamp(static_cast<double>(s), -1.0, 32767.0 / 32768.0);
      io::PutU16(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clipped * 32768.0))));
    } else {
      io::PutF32(os, s);
    }
  }
  return os.str();
}

AudioBuffer ReadWav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot open '", path.string(), "'");
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes);
  } catch (const Error& e) {
    Fail(e.code(), path.string(), ": ", e.what());
  }
}

void WriteWav(const std::filesystem::path& path, const AudioBuffer& audio, WavEncoding encoding) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorCode::kIo, "cannot open '", path.string(), "' for writing");
  const std::string bytes = EncodeWav(audio, encoding);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) Fail(ErrorCode::kIo, "write failed for '", path.string(), "'");
}

}  // namespace ssml::data
