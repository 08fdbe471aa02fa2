#include "chiral/robustness.hpp"

#include <cmath>
#include <string>

#include "chiral/error.hpp"
#include "chiral/quadrature.hpp"

namespace chiral {

namespace {

const HermitianOperator kDetuningOperator = HermitianOperator::diagonal({-1.0, 0.0, 1.0});

// e^{i eta_+}: closed form for the ansatz family, accumulated quadrature otherwise.
std::function<double(double)> eta_plus_of(const InvariantSchedule& s, double tolerance) {
  if (s.kind() == SchemeKind::FourierAnsatz) {
    return [s](double t) { return *s.closed_form_eta_plus(t); };
  }
  auto phase = std::make_shared<const LRPhase>(lr_phase(s, tolerance));
  return [phase](double t) { return phase->eta_plus(t); };
}

template <class Integrand>
Complex overlap_integral(const InvariantSchedule& s, double tolerance, Integrand g) {
  const auto eta = eta_plus_of(s, tolerance);
  auto f = [&](double t) { return g(t) * std::polar(1.0, eta(t)); };
  return integrate(f, 0.0, s.duration(), QuadratureOptions{tolerance, 0.0, 20000}).value;
}

}  // namespace

HermitianOperator ErrorModel::error_term(const HermitianOperator& h) const {
  return h * alpha + kDetuningOperator * delta;
}

std::string_view to_string(SensitivityKind kind) noexcept {
  return kind == SensitivityKind::Systematic ? "systematic" : "detuning";
}

Complex systematic_overlap_integral(const InvariantSchedule& s, double tolerance) {
  return overlap_integral(s, tolerance, [&s](double t) {
    return Complex(s.theta_dot(t) * std::sin(s.phi(t)), s.phi_dot(t));
  });
}

Complex detuning_overlap_integral(const InvariantSchedule& s, double tolerance) {
  return overlap_integral(s, tolerance, [&s](double t) {
    const double p = s.phi(t), th = s.theta(t);
    return Complex(std::cos(2 * th) * std::sin(2 * p), 2 * std::sin(2 * th) * std::sin(p));
  });
}

double q_alpha(const InvariantSchedule& s, double tolerance) {
  return std::norm(systematic_overlap_integral(s, tolerance));
}

double q_delta(const InvariantSchedule& s, double tolerance) {
  return std::norm(detuning_overlap_integral(s, tolerance));
}

double sensitivity(SensitivityKind kind, const InvariantSchedule& s, double tolerance) {
  return kind == SensitivityKind::Systematic ? q_alpha(s, tolerance) : q_delta(s, tolerance);
}

double perturbative_fidelity(const InvariantSchedule& s, const ErrorModel& e, double tolerance) {
  if (e.alpha != 0.0 && e.delta != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "second-order fidelity is defined for one error kind at a time");
  }
  if (e.alpha != 0.0) return 1.0 - e.alpha * e.alpha * q_alpha(s, tolerance);
  if (e.delta != 0.0) return 1.0 - 0.25 * e.delta * e.delta * q_delta(s, tolerance);
  return 1.0;
}

double perturbative_fidelity_from_matrix_elements(const InvariantSchedule& s, const ErrorModel& e, Handedness h,
                                                  double tolerance) {
  if (e.alpha != 0.0 && e.delta != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "second-order fidelity is defined for one error kind at a time");
  }
  const auto eta = eta_plus_of(s, tolerance);
  double loss = 0.0;
  for (const double branch : {1.0, -1.0}) {
    auto f = [&](double t) {
      const auto es = invariant_eigensystem(h, s.params(t));
      const HermitianOperator err = e.error_term(build_hamiltonian(h, analytic_pulse(s, t)));
      const Vector3c& other = branch > 0 ? es.plus.vector : es.minus.vector;
      const Complex element = es.zero.vector.dot(err.matrix() * other);
      return element * std::polar(1.0, branch * eta(t));
    };
    loss += std::norm(integrate(f, 0.0, s.duration(), QuadratureOptions{tolerance, 0.0, 20000}).value);
  }
  return 1.0 - loss;
}

QuantumState target_state(Handedness h) { return QuantumState::basis(h == Handedness::Left ? 3 : 1); }

ExactFidelityEvaluator::ExactFidelityEvaluator(const InvariantSchedule& s, const RobustnessSettings& settings)
    : grid_{s.duration(), settings.steps},
      pulses_(pulses_on_midpoints(s, grid_, settings.clamp_scale / s.duration())) {}

QuantumState ExactFidelityEvaluator::final_state(const ErrorModel& e, Handedness h) const {
  const double dt = grid_.step();
  QuantumState state = QuantumState::basis(2);
  for (std::size_t k = 0; k < pulses_.samples.size(); ++k) {
    const HermitianOperator hk = e.perturbed(build_hamiltonian(h, pulses_.samples[k]));
    if (!hk.is_finite()) {
      throw Error(ErrorKind::NonFiniteHamiltonian, "non-finite Hamiltonian at t = " + std::to_string(grid_.midpoint(k)));
    }
    state = apply_unitary(step_propagator(hk, dt), state);
  }
  return state;
}

double ExactFidelityEvaluator::fidelity(const ErrorModel& e, Handedness h) const {
  return chiral::fidelity(target_state(h), final_state(e, h));
}

double exact_fidelity(const InvariantSchedule& s, const ErrorModel& e, Handedness h,
                      const RobustnessSettings& settings) {
  return ExactFidelityEvaluator(s, settings).fidelity(e, h);
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
  if (!(lo < hi) || !(tolerance > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "golden section needs lo < hi and a positive tolerance");
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

OptimizeResult optimize_n(SensitivityKind kind, double n_lo, double n_hi, double tolerance,
                          const OptimizeOptions& options) {
  if (!std::isfinite(n_lo) || !std::isfinite(n_hi) || !(n_lo < n_hi)) {
    throw Error(ErrorKind::InvalidArgument, "n range must be finite with n_min < n_max");
  }
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "n tolerance must be positive");
  if (options.coarse_points < 3) throw Error(ErrorKind::InvalidArgument, "coarse scan needs at least 3 points");

  const double tol = options.settings.quadrature_tolerance;
  auto q_of = [&](double n) { return sensitivity(kind, ansatz_schedule(n, options.duration), tol); };

  OptimizeResult out;
  out.kind = kind;
  const std::size_t m = options.coarse_points;
  out.coarse_n.resize(m);
  out.coarse_q.resize(m);
  std::size_t best = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double n = i + 1 == m ? n_hi : n_lo + (n_hi - n_lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    out.coarse_n[i] = n;
    out.coarse_q[i] = q_of(n);
    if (out.coarse_q[i] < out.coarse_q[best]) best = i;
  }
  if (best == 0 || best + 1 == m) {
    throw Error(ErrorKind::NoInteriorMinimum, "smallest sensitivity on the scan sits at n = " +
                                                 std::to_string(out.coarse_n[best]) +
                                                 ", the edge of the range; widen the range");
  }
  out.n_star = golden_section_minimize(q_of, out.coarse_n[best - 1], out.coarse_n[best + 1], tolerance);
  out.q_min = q_of(out.n_star);

  const auto schedule = ansatz_schedule(out.n_star, options.duration);
  const ErrorModel check = kind == SensitivityKind::Systematic ? ErrorModel::systematic(options.check_alpha)
                                                               : ErrorModel::detuning(options.check_delta);
  out.exact_check = exact_fidelity(schedule, check, Handedness::Left, options.settings);
  out.perturbative_check = perturbative_fidelity(schedule, check, tol);
  return out;
}

}  // namespace chiral
