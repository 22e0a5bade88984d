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

// Error types shared by every module.
//
// DataError and its subclasses mean the input was bad (malformed JSON, an
// out-of-schema label, a corrupt checkpoint). Anything else deriving from
// Error is a runtime failure. The CLI maps the two families onto distinct
// exit codes.

#ifndef SCIEX_COMMON_H_
#define SCIEX_COMMON_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace sciex {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed JSON or a structurally invalid file.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// A value that parses but violates the extraction schema or an index
// invariant. `item` is the offending sentence / record index when known.
class SchemaError : public DataError {
 public:
  explicit SchemaError(const std::string& what,
                       std::optional<size_t> item = std::nullopt)
      : DataError(what), item_(item) {}

  std::optional<size_t> item() const { return item_; }

 private:
  std::optional<size_t> item_;
};

// Checkpoint / embedding container integrity failures.
class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

// Raised when training diverges (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Reads an entire file as bytes. Throws DataError if it cannot be opened.
std::string ReadFileBytes(const std::string& path);

// Writes `bytes` to `path` via a temporary file and rename.
void WriteFileAtomic(const std::string& path, const std::string& bytes);

}  // namespace sciex

#endif  // SCIEX_COMMON_H_
