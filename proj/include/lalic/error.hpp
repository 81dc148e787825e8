// Copyright 2026 The LALIC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lalic {

/// Failure categories. The CLI maps each one onto a fixed exit code.
enum class ErrorKind {
  kInvalidArgument,  // shape/dimension/contract violations
  kIo,               // unreadable or unwritable files
  kFormat,           // bad magic, unknown version, malformed image
  kCorruption,       // truncated or inconsistent coded data
  kConfigMismatch,   // weights/config/header disagree
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kCorruption: return "corrupt data";
    case ErrorKind::kConfigMismatch: return "config mismatch";
  }
  return "error";
}

/// Process exit code for an error category (0 is reserved for success).
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return 2;
    case ErrorKind::kFormat: return 3;
    case ErrorKind::kCorruption: return 4;
    case ErrorKind::kConfigMismatch: return 5;
    case ErrorKind::kInvalidArgument: return 1;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void check_arg(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace lalic
