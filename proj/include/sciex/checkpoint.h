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

// Model checkpoint container:
//
//   "SCXCKPT1" | u64 LE header length | header JSON | tensor payload
//
// The header carries the format and model versions, model config, schema,
// tagset, tagger overlay, encoder vocabulary, CRC-32 digests of the schema,
// tagset and vocabulary, and a tensor manifest (name, shape, byte offset,
// CRC-32). The payload is every parameter as 32-bit little-endian floats in
// manifest order. Loading verifies every digest and throws IntegrityError on
// any mismatch.

#ifndef SCIEX_CHECKPOINT_H_
#define SCIEX_CHECKPOINT_H_

#include <memory>
#include <string>
#include <string_view>

#include "sciex/extractor.h"

namespace sciex {

inline constexpr int kCheckpointFormatVersion = 1;

std::string SerializeCheckpoint(const SpanRelationModel& model);
std::unique_ptr<SpanRelationModel> ParseCheckpoint(std::string_view bytes,
                                                   const std::string& origin = "<memory>");

void SaveCheckpoint(const SpanRelationModel& model, const std::string& path);
std::unique_ptr<SpanRelationModel> LoadCheckpoint(const std::string& path);

}  // namespace sciex

#endif  // SCIEX_CHECKPOINT_H_
