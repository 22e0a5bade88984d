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

#include "sciex/common.h"

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sciex/bytes.h"
#include "sciex/utf8.h"

namespace sciex {

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

uint32_t Crc32(std::string_view bytes) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

uint32_t Crc32(std::span<const unsigned char> bytes) {
  return static_cast<uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::string Crc32Hex(std::string_view bytes) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", Crc32(bytes));
  return buf;
}

namespace utf8 {

namespace {

// Byte length of the sequence starting at text[i], clamped to the buffer.
size_t SequenceLength(std::string_view text, size_t i) {
  const auto c = static_cast<unsigned char>(text[i]);
  size_t len = 1;
  if (c >= 0xF0 && c < 0xF8) {
    len = 4;
  } else if (c >= 0xE0) {
    len = c < 0xF0 ? 3 : 1;
  } else if (c >= 0xC0) {
    len = 2;
  }
  if (i + len > text.size()) return 1;
  for (size_t k = 1; k < len; ++k) {
    if (!IsContinuationByte(static_cast<unsigned char>(text[i + k]))) return 1;
  }
  return len;
}

}  // namespace

size_t Length(std::string_view text) {
  size_t n = 0;
  for (size_t i = 0; i < text.size(); i += SequenceLength(text, i)) ++n;
  return n;
}

std::vector<size_t> CodepointByteOffsets(std::string_view text) {
  std::vector<size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (size_t i = 0; i < text.size(); i += SequenceLength(text, i)) {
    offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

size_t ByteToCodepoint(std::string_view text, size_t byte_offset) {
  size_t n = 0;
  for (size_t i = 0; i < text.size();) {
    const size_t len = SequenceLength(text, i);
    if (byte_offset < i + len) return n;
    i += len;
    ++n;
  }
  return n;
}

}  // namespace utf8
}  // namespace sciex
