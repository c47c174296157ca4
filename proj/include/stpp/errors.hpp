#pragma once

#include <stdexcept>
#include <string>

namespace stpp {

enum class ErrorCode {
  Config,
  InsufficientData,
  Domain,
  EmptyPattern,
  DegenerateStatistic,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCode::Config, message) {}
};

// Base for problems with the data itself (as opposed to configuration).
class DataError : public Error {
 protected:
  using Error::Error;
};

class InsufficientDataError : public DataError {
 public:
  explicit InsufficientDataError(const std::string& message)
      : DataError(ErrorCode::InsufficientData, message) {}
};

class DomainError : public DataError {
 public:
  explicit DomainError(const std::string& message) : DataError(ErrorCode::Domain, message) {}
};

class EmptyPatternError : public DataError {
 public:
  explicit EmptyPatternError(const std::string& message)
      : DataError(ErrorCode::EmptyPattern, message) {}
};

class DegenerateStatisticError : public Error {
 public:
  explicit DegenerateStatisticError(const std::string& message)
      : Error(ErrorCode::DegenerateStatistic, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCode::Io, message) {}
};

}  // namespace stpp
