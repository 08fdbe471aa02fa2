#pragma once

// Three-level state algebra, cyclic Hamiltonians and exact time propagation.
//
// Conventions: hbar = 1, levels are labelled 1, 2, 3 in every public API, and
// frequencies are angular frequencies in the same time unit as the grid.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace chiral {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;

enum class Handedness { Left, Right };

/// Sign multiplying Omega_q in the (1,3) element: minus for Left, plus for Right.
constexpr double coupling_sign(Handedness h) noexcept { return h == Handedness::Left ? -1.0 : 1.0; }

std::string_view to_string(Handedness h) noexcept;

class QuantumState {
 public:
  /// Basis state |level>, level in {1, 2, 3}.
  static QuantumState basis(int level);
  /// Normalizes the given amplitudes; throws InvalidArgument for a zero or non-finite vector.
  static QuantumState from_amplitudes(const Vector3c& amplitudes);

  const Vector3c& amplitudes() const noexcept { return amplitudes_; }
  /// Amplitude of |level>, 1-indexed.
  Complex amplitude(int level) const;
  std::array<double, 3> populations() const noexcept;
  double norm_squared() const noexcept { return amplitudes_.squaredNorm(); }

 private:
  explicit QuantumState(const Vector3c& a) : amplitudes_(a) {}
  friend QuantumState apply_unitary(const Matrix3c& u, const QuantumState& s);

  Vector3c amplitudes_;
};

/// Applies a unitary without renormalizing.
QuantumState apply_unitary(const Matrix3c& u, const QuantumState& s);

class HermitianOperator {
 public:
  HermitianOperator() : m_(Matrix3c::Zero()) {}

  /// Builds from the real diagonal and the three upper-triangle entries
  /// (1,2), (1,3), (2,3); the lower triangle is the exact conjugate.
  static HermitianOperator from_upper(const std::array<double, 3>& diagonal, Complex e12, Complex e13,
                                      Complex e23);
  /// Diagonal operator sum_k d_k |k><k|.
  static HermitianOperator diagonal(const std::array<double, 3>& d);

  const Matrix3c& matrix() const noexcept { return m_; }
  /// 1-indexed element access.
  Complex operator()(int row, int col) const;

  bool is_finite() const noexcept { return m_.allFinite(); }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator operator*(double scale) const;

 private:
  Matrix3c m_;
};

/// Hamiltonian samples for the gamma = pi/2, Omega_p = Omega_s = Omega case.
struct RabiSample {
  double omega = 0.0;
  double omega_q = 0.0;
  double gamma = std::numbers::pi / 2;
};

HermitianOperator build_hamiltonian(Handedness h, const RabiSample& s);

/// Full cyclic Hamiltonian with independent Omega_p, Omega_s and the phase gamma
/// on the (1,3) coupling: entry (1,3) = -/+ Omega_q e^{i gamma}.
HermitianOperator build_general_hamiltonian(Handedness h, double omega_p, double omega_s, double omega_q,
                                            double gamma);

struct TimeGrid {
  double duration = 1.0;
  std::size_t steps = 4000;

  double step() const noexcept { return duration / static_cast<double>(steps); }
  double time(std::size_t k) const noexcept;
  double midpoint(std::size_t k) const noexcept { return (static_cast<double>(k) + 0.5) * step(); }
  std::vector<double> nodes() const;
  std::vector<double> midpoints() const;
};

/// Throws InvalidArgument unless duration > 0 (finite) and steps >= 1.
void check_grid(const TimeGrid& grid);

struct Trajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;
  std::vector<std::array<double, 3>> populations;

  const QuantumState& final_state() const { return states.back(); }
  const std::array<double, 3>& final_populations() const { return populations.back(); }
};

using HamiltonianFn = std::function<HermitianOperator(double)>;

struct PropagateOptions {
  /// Keep every record_stride-th grid node (the final node always); 0 keeps only the endpoints.
  std::size_t record_stride = 1;
  /// Re-run with half the step and compare final populations.
  bool convergence_check = false;
  double convergence_tolerance = 1e-8;
};

/// exp(-i H dt) through the Hermitian eigendecomposition, unitary to rounding.
Matrix3c step_propagator(const HermitianOperator& h, double dt);

/// Piecewise-exponential midpoint propagation: step k uses step_hamiltonians[k]
/// (the Hamiltonian sampled at the midpoint of that step).
Trajectory propagate_piecewise(std::span<const HermitianOperator> step_hamiltonians, const QuantumState& initial,
                               const TimeGrid& grid, std::size_t record_stride = 1);

/// Final state only; same integrator as propagate_piecewise.
QuantumState propagate_final(std::span<const HermitianOperator> step_hamiltonians, const QuantumState& initial,
                             const TimeGrid& grid);

Trajectory propagate(const HamiltonianFn& hamiltonian_at, const QuantumState& initial, const TimeGrid& grid,
                     const PropagateOptions& options = {});

/// |<target|actual>|^2
double fidelity(const QuantumState& target, const QuantumState& actual);

}  // namespace chiral
