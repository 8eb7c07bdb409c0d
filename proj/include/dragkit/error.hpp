// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dragkit {

enum class ErrorCode {
  ConflictingControlPoints,
  EmptySourceRegion,
  InvalidStep,
  InvalidLambda,
  ShapeMismatch,
  MissingPosition,
  NonFiniteInput,
  MalformedSpec,
  MaskSizeMismatch,
  InvalidConfig,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConflictingControlPoints: return "ConflictingControlPoints";
    case ErrorCode::EmptySourceRegion: return "EmptySourceRegion";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::InvalidLambda: return "InvalidLambda";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingPosition: return "MissingPosition";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::MalformedSpec: return "MalformedSpec";
    case ErrorCode::MaskSizeMismatch: return "MaskSizeMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// True for errors caused by caller input (CLI exit 2, HTTP 4xx) rather than
/// by a broken environment.
constexpr bool is_user_error(ErrorCode code) { return code != ErrorCode::IoError; }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace dragkit
