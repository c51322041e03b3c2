#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wellcap {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinate or parameter outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input; `position` is 0-based within the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Input file does not follow the documented column layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A single data row could not be parsed; `line` is 1-based and counts the header.
class RowError : public Error {
 public:
  RowError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A preprocessing step could not produce model-ready data.
class PipelineError : public Error {
 public:
  using Error::Error;
};

/// Vector/array sizes disagree with the model layout.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The sampler could not find a finite starting point.
class StartupError : public Error {
 public:
  using Error::Error;
};

}  // namespace wellcap
