#pragma once

#include <stdexcept>
#include <string>

namespace entropy_lab {

enum class ErrorCode {
  InvalidArgument = 1,
  InvalidMetric,
  PoleMismatch,
  InvalidTau,
  UnsupportedBase,
  StepFailure,
  TruncationError,
  UnderResolved,
  LogDomain,
  ConstraintViolated,
  DomainError,
  UnsupportedGrid,
  DegenerateLevel,
  ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// TruncationError carries the series degree that would have met the budget.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, int required_degree)
      : Error(ErrorCode::TruncationError, what), required_degree_(required_degree) {}

  int required_degree() const noexcept { return required_degree_; }

 private:
  int required_degree_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace entropy_lab
