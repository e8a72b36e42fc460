#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xindex {

// Root of everything this library throws. Data problems, usage problems and
// retrieval problems get distinct subclasses so the CLI can map them onto
// exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
  using Error::Error;
};

class UsageError : public Error {
public:
  using Error::Error;
};

class FetchError : public Error {
public:
  using Error::Error;
};

// Endpoint refused our credentials. Never retried.
class AuthError : public FetchError {
public:
  using FetchError::FetchError;
};

class ParseError : public DataError {
public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// A TY tag opened a new record before the previous one reached ER.
class MalformedRecordError : public ParseError {
public:
  using ParseError::ParseError;
};

class EncodingError : public ParseError {
public:
  using ParseError::ParseError;
};

}  // namespace xindex
