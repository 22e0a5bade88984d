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

// Conversions between byte offsets and code point offsets in UTF-8 text.
// Internally all text positions are byte offsets; the pre-annotation
// interchange format counts Unicode code points.

#ifndef SCIEX_UTF8_H_
#define SCIEX_UTF8_H_

#include <cstddef>
#include <string_view>
#include <vector>

namespace sciex::utf8 {

inline bool IsContinuationByte(unsigned char c) { return (c & 0xC0) == 0x80; }

// Number of code points in `text`. Invalid sequences count one per byte.
size_t Length(std::string_view text);

// Maps code point positions to byte positions. The returned table has
// Length(text) + 1 entries; entry i is the byte offset of code point i and
// the last entry equals text.size().
std::vector<size_t> CodepointByteOffsets(std::string_view text);

// Code point index of the code point starting at or containing `byte_offset`.
size_t ByteToCodepoint(std::string_view text, size_t byte_offset);

}  // namespace sciex::utf8

#endif  // SCIEX_UTF8_H_
