#include "chiral/error.hpp"

namespace chiral {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonFiniteHamiltonian: return "NonFiniteHamiltonian";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::SingularTheta: return "SingularTheta";
    case ErrorKind::ClampViolation: return "ClampViolation";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NoInteriorMinimum: return "NoInteriorMinimum";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace chiral
