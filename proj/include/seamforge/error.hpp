/*
 * Copyright (C) 2026 The Seamforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seamforge {

enum class ErrorCode {
  ParseError,
  UnsupportedFormat,
  IoError,
  DimensionMismatch,
  InvalidTransform,
  InvalidArgument,
  EmptyCloud,
  TooFewMasks,
  MissingCorrespondence,
  MissingFeatures,
  NoSeamsFound,
  DegenerateGeometry,
  FitRejected,
  InvalidSpec,
  InvalidConfig,
  UnmatchedSeam,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidTransform: return "InvalidTransform";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::TooFewMasks: return "TooFewMasks";
    case ErrorCode::MissingCorrespondence: return "MissingCorrespondence";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::NoSeamsFound: return "NoSeamsFound";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::FitRejected: return "FitRejected";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnmatchedSeam: return "UnmatchedSeam";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seamforge
