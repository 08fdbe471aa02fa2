#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chiral {

enum class ErrorKind {
  NonFiniteHamiltonian,
  GridTooCoarse,
  SingularTheta,
  ClampViolation,
  QuadratureFailure,
  NoInteriorMinimum,
  InvalidArgument,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries one of the kinds above so that
// callers (CLI, bindings) can map it to a diagnostic without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace chiral
