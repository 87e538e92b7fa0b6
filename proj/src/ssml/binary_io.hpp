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

// Little-endian scalar encoding shared by the on-disk formats.

#ifndef SSML_BINARY_IO_HPP_
#define SSML_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "ssml/error.hpp"

namespace ssml::io {

inline void PutU32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline void PutU16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

inline void PutF32(std::ostream& os, float v) { PutU32(os, std::bit_cast<std::uint32_t>(v)); }

inline void PutString(std::ostream& os, const std::string& s) {
  PutU32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void ReadExact(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    Fail(ErrorCode::kData, "truncated input while reading ", what);
  }
}

inline std::uint32_t GetU32(std::istream& is, const char* what = "u32") {
  unsigned char b[4];
  ReadExact(is, reinterpret_cast<char*>(b), 4, what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint16_t GetU16(std::istream& is, const char* what = "u16") {
  unsigned char b[2];
  ReadExact(is, reinterpret_cast<char*>(b), 2, what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline float GetF32(std::istream& is, const char* what = "f32") {
  return std::bit_cast<float>(GetU32(is, what));
}

inline std::string GetString(std::istream& is, std::uint32_t max_len = 1u << 20) {
  const std::uint32_t n = GetU32(is, "string length");
  if (n > max_len) Fail(ErrorCode::kData, "string length ", n, " exceeds limit");
  std::string s(n, '\0');
  if (n > 0) ReadExact(is, s.data(), n, "string");
  return s;
}

}  // namespace ssml::io

#endif  // SSML_BINARY_IO_HPP_
