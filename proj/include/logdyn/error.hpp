#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logdyn {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  InvariantViolation,
  Format,
  Io,
  DegenerateDynamics,   // zero velocity
  SingularDynamics,     // EL inversion with u = 0
  UndefinedStatistic,   // CV with zero mean, Pearson on constant input
  LengthOverflow,
  SteeringStalled,
  SteeringSaturated,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace logdyn
