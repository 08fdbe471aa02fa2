#pragma once

// Error models, perturbative and exact fidelities, error sensitivities and
// the one-dimensional optimization of the ansatz weight n.

#include <cstddef>
#include <functional>
#include <vector>

#include "chiral/core.hpp"
#include "chiral/design.hpp"

namespace chiral {

/// H -> H + alpha H + delta (|3><3| - |1><1|). The pure models set one
/// amplitude; the combined model (heatmap) sets both.
struct ErrorModel {
  double alpha = 0.0;  ///< systematic amplitude, dimensionless
  double delta = 0.0;  ///< detuning amplitude, angular frequency

  static ErrorModel none() { return {}; }
  static ErrorModel systematic(double alpha) { return {alpha, 0.0}; }
  static ErrorModel detuning(double delta) { return {0.0, delta}; }
  static ErrorModel combined(double alpha, double delta) { return {alpha, delta}; }

  /// H_e for the given unperturbed Hamiltonian.
  HermitianOperator error_term(const HermitianOperator& h) const;
  HermitianOperator perturbed(const HermitianOperator& h) const { return h + error_term(h); }
};

enum class SensitivityKind { Systematic, Detuning };

std::string_view to_string(SensitivityKind kind) noexcept;

struct RobustnessSettings {
  std::size_t steps = 4000;
  /// Cap on |Omega_q| in units of 1/T.
  double clamp_scale = kDefaultClampScale;
  double quadrature_tolerance = 1e-10;
};

/// int_0^T (theta_dot sin(phi) + i phi_dot) e^{i eta_+} dt
Complex systematic_overlap_integral(const InvariantSchedule& s, double tolerance = 1e-10);
/// int_0^T [cos(2 theta) sin(2 phi) + 2 i sin(2 theta) sin(phi)] e^{i eta_+} dt
Complex detuning_overlap_integral(const InvariantSchedule& s, double tolerance = 1e-10);

double q_alpha(const InvariantSchedule& s, double tolerance = 1e-10);
double q_delta(const InvariantSchedule& s, double tolerance = 1e-10);
double sensitivity(SensitivityKind kind, const InvariantSchedule& s, double tolerance = 1e-10);

/// Second-order fidelity from the invariant eigenbasis; identical for both
/// handednesses. Combined (alpha and delta both nonzero) models are rejected.
double perturbative_fidelity(const InvariantSchedule& s, const ErrorModel& e, double tolerance = 1e-10);

/// The same second-order quantity evaluated directly from matrix elements
/// <phi_0|H_e|phi_+-> of the given handedness, without the closed-form integrands.
double perturbative_fidelity_from_matrix_elements(const InvariantSchedule& s, const ErrorModel& e, Handedness h,
                                                  double tolerance = 1e-10);

/// Target level after the protocol: |3> for Left, |1> for Right.
QuantumState target_state(Handedness h);

/// Pulses sampled once at the grid midpoints, reused across error models.
class ExactFidelityEvaluator {
 public:
  ExactFidelityEvaluator(const InvariantSchedule& s, const RobustnessSettings& settings = {});

  /// Propagates |2> under H + H_e and returns the overlap with target_state(h).
  double fidelity(const ErrorModel& e, Handedness h) const;
  QuantumState final_state(const ErrorModel& e, Handedness h) const;

  const PulseSchedule& pulses() const noexcept { return pulses_; }
  const TimeGrid& grid() const noexcept { return grid_; }

 private:
  TimeGrid grid_;
  PulseSchedule pulses_;
};

double exact_fidelity(const InvariantSchedule& s, const ErrorModel& e, Handedness h,
                      const RobustnessSettings& settings = {});

/// Golden-section minimization of a unimodal function on [lo, hi] until the
/// bracket is narrower than tolerance. Returns the bracket midpoint.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tolerance);

struct OptimizeOptions {
  std::size_t coarse_points = 201;
  double duration = 1.0;
  RobustnessSettings settings{};
  /// Amplitude used for the exact-propagation cross-check at n*.
  double check_alpha = 0.1;
  double check_delta = 0.5;
};

struct OptimizeResult {
  SensitivityKind kind = SensitivityKind::Systematic;
  double n_star = 0.0;
  double q_min = 0.0;
  /// Exact and second-order fidelity at n* for the check amplitude.
  double exact_check = 0.0;
  double perturbative_check = 0.0;
  std::vector<double> coarse_n;
  std::vector<double> coarse_q;
};

/// Coarse scan followed by golden-section refinement on the bracket around
/// the best grid point. Throws NoInteriorMinimum if the best grid point is an
/// endpoint of the range.
OptimizeResult optimize_n(SensitivityKind kind, double n_lo, double n_hi, double tolerance,
                          const OptimizeOptions& options = {});

}  // namespace chiral
