#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trieguide {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `line` is 1-based, `offset` is the 0-based byte column.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t offset, const std::string& what)
      : Error("line " + std::to_string(line) + ", offset " + std::to_string(offset) + ": " + what),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

}  // namespace trieguide
