// Copyright 2026 The wearseg Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace wearseg {

/// Broad failure classes. The CLI prints the category name as the first
/// token of its one-line error message, so these strings are stable.
enum class ErrorCategory {
  kConfig,
  kData,
  kNumeric,
  kIo,
  kVersion,
  kRange,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kData: return "data";
    case ErrorCategory::kNumeric: return "numeric";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kVersion: return "version";
    case ErrorCategory::kRange: return "range";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::kData, what) {}
};

/// Raised when a forward/backward op produces NaN or Inf, or a loss diverges.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::kNumeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& what) : Error(ErrorCategory::kVersion, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorCategory::kRange, what) {}
};

}  // namespace wearseg
