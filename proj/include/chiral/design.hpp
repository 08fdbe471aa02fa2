#pragma once

// Invariant-based inverse engineering for the cyclic three-level system.
//
// A schedule is a pair of angle trajectories (phi(t), theta(t)). The
// Lewis-Riesenfeld invariant of either handedness is fixed by the angles; the
// pulses Omega(t), Omega_q(t) that make it a dynamical invariant are the same
// for both handednesses, and so is the LR phase eta_+(t).

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chiral/core.hpp"
#include "chiral/quadrature.hpp"

namespace chiral {

struct InvariantParams {
  double phi = 0.0;
  double theta = 0.0;
};

enum class SchemeKind { Sps, FourierAnsatz, Custom };

std::string_view to_string(SchemeKind kind) noexcept;

/// Immutable angle trajectories with analytic time derivatives.
class InvariantSchedule {
 public:
  using AngleFn = std::function<double(double)>;

  /// User-supplied trajectories; no boundary condition is assumed.
  static InvariantSchedule custom(double duration, AngleFn phi, AngleFn theta, AngleFn phi_dot, AngleFn theta_dot,
                                  std::string label = "custom");

  SchemeKind kind() const noexcept { return kind_; }
  /// Harmonic weight n of the ansatz family, empty for other kinds.
  std::optional<double> ansatz_n() const noexcept { return n_; }
  double duration() const noexcept { return duration_; }
  const std::string& label() const noexcept { return label_; }

  double phi(double t) const { return fns_->phi(t); }
  double theta(double t) const { return fns_->theta(t); }
  double phi_dot(double t) const { return fns_->phi_dot(t); }
  double theta_dot(double t) const { return fns_->theta_dot(t); }
  InvariantParams params(double t) const { return {phi(t), theta(t)}; }

  /// Closed-form eta_+(t) where the family has one (the ansatz).
  std::optional<double> closed_form_eta_plus(double t) const;

 private:
  struct Functions {
    AngleFn phi, theta, phi_dot, theta_dot;
  };

  InvariantSchedule() = default;
  friend InvariantSchedule sps_schedule(double duration);
  friend InvariantSchedule ansatz_schedule(double n, double duration);

  SchemeKind kind_ = SchemeKind::Custom;
  std::optional<double> n_;
  double duration_ = 1.0;
  std::string label_;
  std::shared_ptr<const Functions> fns_;
};

/// phi = pi t / (2T), theta = pi/2.
InvariantSchedule sps_schedule(double duration);

/// phi = pi t / (2T) with theta chosen so that eta_+ = -[n sin(3 phi) + phi]:
/// theta = arg[(B - 1) + i (B + 1)], B = sin(phi) (3 n cos(3 phi) + 1), lifted
/// continuously to (0, 2 pi). theta(0) = 3 pi/4 and theta(T) = pi/2.
InvariantSchedule ansatz_schedule(double n, double duration);

/// Invariant I^L or I^R; Hermitian, traceless, eigenvalues {0, +1, -1}.
HermitianOperator invariant_matrix(Handedness h, const InvariantParams& p);

/// dI/dt by the chain rule.
Matrix3c invariant_time_derivative(Handedness h, const InvariantParams& p, double phi_dot, double theta_dot);

struct EigenPair {
  double eigenvalue = 0.0;
  Vector3c vector;
};

struct InvariantEigensystem {
  EigenPair zero;   ///< mu_0 = 0
  EigenPair plus;   ///< mu_+ = +1
  EigenPair minus;  ///< mu_- = -1
};

/// Closed-form normalized eigenvectors of invariant_matrix.
InvariantEigensystem invariant_eigensystem(Handedness h, const InvariantParams& p);

/// Default cap on |Omega_q| in units of 1/T.
inline constexpr double kDefaultClampScale = 100.0;
/// Fraction of the duration at each end where clamping is allowed.
inline constexpr double kEndpointWindow = 0.01;

inline double default_clamp(double duration) { return kDefaultClampScale / duration; }

/// Analytic, unclamped pulses at time t. At the singular endpoint t = 0 (or T)
/// the one-sided limit is taken.
RabiSample analytic_pulse(const InvariantSchedule& s, double t);

struct PulseSchedule {
  double duration = 1.0;
  std::vector<double> times;
  std::vector<RabiSample> samples;
  double clamp_value = 0.0;
  std::size_t clamped_count = 0;
};

/// Samples Omega(t), Omega_q(t) at the given times. |Omega_q| is capped at
/// clamp inside the endpoint windows; a cap needed elsewhere raises
/// ClampViolation, a vanishing sin(theta) - cos(theta) raises SingularTheta.
PulseSchedule pulses_from_invariant(const InvariantSchedule& s, std::span<const double> times, double clamp);

/// Pulses at the grid nodes (output) or midpoints (propagation).
PulseSchedule pulses_on_nodes(const InvariantSchedule& s, const TimeGrid& grid, double clamp);
PulseSchedule pulses_on_midpoints(const InvariantSchedule& s, const TimeGrid& grid, double clamp);

/// Step Hamiltonians for propagate_piecewise.
std::vector<HermitianOperator> step_hamiltonians(const PulseSchedule& pulses, Handedness h);

/// d eta_+ / dt = phi_dot csc(phi) (sin theta + cos theta) / (cos theta - sin theta).
double eta_plus_rate(const InvariantSchedule& s, double t);

/// LR phases. eta_0 is identically zero and eta_- = -eta_+. eta_+ is anchored
/// at eta_+(0) = 0 when its rate is integrable at t = 0 and at eta_+(T) = 0
/// otherwise (SPS, where the rate behaves as -1/t).
class LRPhase {
 public:
  enum class Anchor { Start, End };

  double eta_plus(double t) const;
  double eta_minus(double t) const { return -eta_plus(t); }
  static constexpr double eta_zero(double) noexcept { return 0.0; }
  Anchor anchor() const noexcept { return anchor_; }

 private:
  friend LRPhase lr_phase(const InvariantSchedule& s, double tolerance);

  InvariantSchedule schedule_ = sps_schedule(1.0);
  Anchor anchor_ = Anchor::Start;
  std::vector<double> knots_;
  std::vector<double> values_;
  std::size_t first_valid_ = 0;
  double tolerance_ = 1e-10;
};

/// Builds eta_+ by adaptive quadrature of eta_plus_rate, accumulated over
/// knots so that each evaluation is a short integral from the nearest knot.
LRPhase lr_phase(const InvariantSchedule& s, double tolerance = 1e-10);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double worst_residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string to_text() const;
};

struct ValidationOptions {
  std::size_t steps = 4000;
  /// Cap on |Omega_q| in units of 1/T.
  double clamp_scale = kDefaultClampScale;
};

/// Largest entry of |dI/dt + (1/i)[I, H]| at time t for the unclamped pulses.
double invariant_residual(const InvariantSchedule& s, Handedness h, double t);

/// Boundary conditions, theta singularity avoidance, analytic vs finite
/// difference derivatives, and the dynamical-invariant condition on every
/// interior unclamped grid node for both handednesses.
ValidationReport validate_schedule(const InvariantSchedule& s, const ValidationOptions& options = {});

/// Key-value text: kind, n (ansatz only), T, grid_steps, clamp_value.
std::string serialize_schedule(const InvariantSchedule& s, std::size_t grid_steps, double clamp_value);

/// Inverse of serialize_schedule for sps and ansatz kinds.
struct ScheduleDescriptor {
  SchemeKind kind = SchemeKind::Sps;
  std::optional<double> n;
  double duration = 1.0;
  std::size_t grid_steps = 4000;
  double clamp_value = kDefaultClampScale;

  InvariantSchedule make() const;
};

ScheduleDescriptor parse_schedule(const std::string& text);

}  // namespace chiral
