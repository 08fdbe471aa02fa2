#include "chiral/core.hpp"

#include <cmath>
#include <string>

#include "chiral/error.hpp"

namespace chiral {

namespace {

// e^{i gamma}, exact on the quarter turns so that gamma = pi/2 gives exactly i.
Complex unit_phase(double gamma) {
  constexpr double kQuarter = std::numbers::pi / 2;
  const double turns = gamma / kQuarter;
  const double rounded = std::nearbyint(turns);
  if (rounded == turns) {
    switch (((static_cast<long long>(rounded) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, gamma);
}

void check_level(int level) {
  if (level < 1 || level > 3) {
    throw Error(ErrorKind::InvalidArgument, "level index must be 1, 2 or 3, got " + std::to_string(level));
  }
}

}  // namespace

std::string_view to_string(Handedness h) noexcept { return h == Handedness::Left ? "left" : "right"; }

QuantumState QuantumState::basis(int level) {
  check_level(level);
  Vector3c v = Vector3c::Zero();
  v(level - 1) = 1.0;
  return QuantumState(v);
}

QuantumState QuantumState::from_amplitudes(const Vector3c& amplitudes) {
  const double norm = amplitudes.norm();
  if (!amplitudes.allFinite() || !(norm > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "state amplitudes must be finite and nonzero");
  }
  return QuantumState(amplitudes / norm);
}

Complex QuantumState::amplitude(int level) const {
  check_level(level);
  return amplitudes_(level - 1);
}

std::array<double, 3> QuantumState::populations() const noexcept {
  return {std::norm(amplitudes_(0)), std::norm(amplitudes_(1)), std::norm(amplitudes_(2))};
}

QuantumState apply_unitary(const Matrix3c& u, const QuantumState& s) { return QuantumState(u * s.amplitudes_); }

HermitianOperator HermitianOperator::from_upper(const std::array<double, 3>& diagonal, Complex e12, Complex e13,
                                                Complex e23) {
  HermitianOperator op;
  auto& m = op.m_;
  for (int k = 0; k < 3; ++k) m(k, k) = diagonal[static_cast<std::size_t>(k)];
  m(0, 1) = e12;
  m(1, 0) = std::conj(e12);
  m(0, 2) = e13;
  m(2, 0) = std::conj(e13);
  m(1, 2) = e23;
  m(2, 1) = std::conj(e23);
  return op;
}

HermitianOperator HermitianOperator::diagonal(const std::array<double, 3>& d) {
  return from_upper(d, 0.0, 0.0, 0.0);
}

Complex HermitianOperator::operator()(int row, int col) const {
  check_level(row);
  check_level(col);
  return m_(row - 1, col - 1);
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  HermitianOperator out;
  out.m_ = m_ + other.m_;
  return out;
}

HermitianOperator HermitianOperator::operator*(double scale) const {
  HermitianOperator out;
  out.m_ = m_ * scale;
  return out;
}

HermitianOperator build_hamiltonian(Handedness h, const RabiSample& s) {
  return build_general_hamiltonian(h, s.omega, s.omega, s.omega_q, s.gamma);
}

HermitianOperator build_general_hamiltonian(Handedness h, double omega_p, double omega_s, double omega_q,
                                            double gamma) {
  const Complex e13 = coupling_sign(h) * omega_q * unit_phase(gamma);
  return HermitianOperator::from_upper({0.0, 0.0, 0.0}, omega_p, e13, omega_s);
}

double TimeGrid::time(std::size_t k) const noexcept {
  return k == steps ? duration : static_cast<double>(k) * step();
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = time(k);
  return t;
}

std::vector<double> TimeGrid::midpoints() const {
  std::vector<double> t(steps);
  for (std::size_t k = 0; k < steps; ++k) t[k] = midpoint(k);
  return t;
}

void check_grid(const TimeGrid& grid) {
  if (!std::isfinite(grid.duration) || !(grid.duration > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid duration must be positive and finite");
  }
  if (grid.steps == 0) throw Error(ErrorKind::InvalidArgument, "grid needs at least one step");
}

Matrix3c step_propagator(const HermitianOperator& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix3c> eig(h.matrix());
  const auto& vecs = eig.eigenvectors();
  Vector3c phases;
  for (int k = 0; k < 3; ++k) phases(k) = std::polar(1.0, -eig.eigenvalues()(k) * dt);
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

namespace {

void check_steps(std::span<const HermitianOperator> hs, const TimeGrid& grid) {
  check_grid(grid);
  if (hs.size() != grid.steps) {
    throw Error(ErrorKind::InvalidArgument, "need one Hamiltonian per grid step (" + std::to_string(grid.steps) +
                                                "), got " + std::to_string(hs.size()));
  }
  for (std::size_t k = 0; k < hs.size(); ++k) {
    if (!hs[k].is_finite()) {
      throw Error(ErrorKind::NonFiniteHamiltonian,
                  "non-finite Hamiltonian entry at t = " + std::to_string(grid.midpoint(k)));
    }
  }
}

}  // namespace

Trajectory propagate_piecewise(std::span<const HermitianOperator> step_hamiltonians, const QuantumState& initial,
                               const TimeGrid& grid, std::size_t record_stride) {
  check_steps(step_hamiltonians, grid);
  Trajectory traj;
  auto record = [&](std::size_t k, const QuantumState& s) {
    traj.times.push_back(grid.time(k));
    traj.states.push_back(s);
    traj.populations.push_back(s.populations());
  };
  const double dt = grid.step();
  QuantumState state = initial;
  record(0, state);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    state = apply_unitary(step_propagator(step_hamiltonians[k], dt), state);
    const bool last = k + 1 == grid.steps;
    if (last || (record_stride != 0 && (k + 1) % record_stride == 0)) record(k + 1, state);
  }
  return traj;
}

QuantumState propagate_final(std::span<const HermitianOperator> step_hamiltonians, const QuantumState& initial,
                             const TimeGrid& grid) {
  check_steps(step_hamiltonians, grid);
  const double dt = grid.step();
  QuantumState state = initial;
  for (const auto& h : step_hamiltonians) state = apply_unitary(step_propagator(h, dt), state);
  return state;
}

namespace {

std::vector<HermitianOperator> sample_midpoints(const HamiltonianFn& hamiltonian_at, const TimeGrid& grid) {
  std::vector<HermitianOperator> hs;
  hs.reserve(grid.steps);
  for (std::size_t k = 0; k < grid.steps; ++k) hs.push_back(hamiltonian_at(grid.midpoint(k)));
  return hs;
}

}  // namespace

Trajectory propagate(const HamiltonianFn& hamiltonian_at, const QuantumState& initial, const TimeGrid& grid,
                     const PropagateOptions& options) {
  check_grid(grid);
  const auto hs = sample_midpoints(hamiltonian_at, grid);
  Trajectory traj = propagate_piecewise(hs, initial, grid, options.record_stride);
  if (options.convergence_check) {
    const TimeGrid fine{grid.duration, grid.steps * 2};
    const auto fine_final = propagate_final(sample_midpoints(hamiltonian_at, fine), initial, fine).populations();
    const auto& coarse_final = traj.final_populations();
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(fine_final[i] - coarse_final[i]));
    if (worst > options.convergence_tolerance) {
      throw Error(ErrorKind::GridTooCoarse, "halving the step changed final populations by " +
                                                std::to_string(worst) + " with " + std::to_string(grid.steps) +
                                                " steps");
    }
  }
  return traj;
}

double fidelity(const QuantumState& target, const QuantumState& actual) {
  return std::norm(target.amplitudes().dot(actual.amplitudes()));
}

}  // namespace chiral
