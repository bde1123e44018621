#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmon {

enum class ErrorKind {
  usage,        // bad arguments or configuration
  format,       // input does not follow the expected layout
  parse,        // a token could not be read as a number
  io,           // file system failure
  consistency,  // pipeline artifacts disagree with each other
  degenerate,   // input is valid but the quantity is undefined (single class, zero variance)
  no_anomaly,   // an operation needed at least one anomaly and found none
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::usage, what);
}

}  // namespace cmon
