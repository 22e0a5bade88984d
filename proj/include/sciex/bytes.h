// Copyright 2026 The Sciex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte packing and CRC-32 used by the binary containers
// (model checkpoints, precomputed embeddings, review store).

#ifndef SCIEX_BYTES_H_
#define SCIEX_BYTES_H_

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace sciex {

uint32_t Crc32(std::string_view bytes);
uint32_t Crc32(std::span<const unsigned char> bytes);

std::string Crc32Hex(std::string_view bytes);

inline void AppendU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void AppendU64(std::string* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void AppendF32(std::string* out, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  AppendU32(out, bits);
}

inline uint32_t ReadU32(std::string_view in, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

inline uint64_t ReadU64(std::string_view in, size_t pos) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

inline float ReadF32(std::string_view in, size_t pos) {
  const uint32_t bits = ReadU32(in, pos);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

}  // namespace sciex

#endif  // SCIEX_BYTES_H_
