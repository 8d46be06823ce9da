#pragma once

#include <stdexcept>
#include <string>

namespace emoarc {

/// Failure categories; each maps to a CLI exit code.
enum class ErrorKind {
  validation,  // bad input format, bad arguments, bad config (exit 2)
  data,        // coverage gaps, inconsistent corpora (exit 3)
  numeric,     // undefined statistics, degenerate solves (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numeric: return 4;
  }
  return 4;
}

}  // namespace emoarc
