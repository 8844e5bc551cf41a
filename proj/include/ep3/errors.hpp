#pragma once

#include <stdexcept>
#include <string>

namespace ep3 {

// Error taxonomy. The CLI maps each family to an exit code:
// ValidationError/ParseError -> 2, NumericError -> 3, IoError -> 4.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, long line = 0)
      : ValidationError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A parameter loop passes through (or too close to) an exceptional point.
class DegenerateLoop : public NumericError {
 public:
  DegenerateLoop(const std::string& what, double s_lo, double s_hi)
      : NumericError(what + " (s in [" + std::to_string(s_lo) + ", " + std::to_string(s_hi) + "])"),
        s_lo_(s_lo),
        s_hi_(s_hi) {}
  double s_lo() const noexcept { return s_lo_; }
  double s_hi() const noexcept { return s_hi_; }

 private:
  double s_lo_, s_hi_;
};

class AmbiguousCrossing : public NumericError {
 public:
  using NumericError::NumericError;
};

class InstabilityError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateEigenbasis : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace ep3
