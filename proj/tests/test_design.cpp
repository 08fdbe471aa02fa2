#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chiral/design.hpp"
#include "chiral/error.hpp"

using namespace chiral;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Matrix3c& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("invariant matrix entries") {
  const InvariantParams p{0.4, 1.1};
  const double sp = std::sin(p.phi), cp = std::cos(p.phi), st = std::sin(p.theta), ct = std::cos(p.theta);

  const auto l = invariant_matrix(Handedness::Left, p);
  CHECK(std::abs(l(1, 2) - sp * st) < 1e-15);
  CHECK(std::abs(l(1, 3) - Complex(0.0, -cp)) < 1e-15);
  CHECK(std::abs(l(2, 3) - sp * ct) < 1e-15);
  CHECK(std::abs(l(3, 1) - Complex(0.0, cp)) < 1e-15);

  const auto r = invariant_matrix(Handedness::Right, p);
  CHECK(std::abs(r(1, 2) - sp * ct) < 1e-15);
  CHECK(std::abs(r(1, 3) - Complex(0.0, cp)) < 1e-15);
  CHECK(std::abs(r(2, 3) - sp * st) < 1e-15);

  // At phi = theta = pi/2 the left invariant couples only |1> and |2>.
  const auto end = invariant_matrix(Handedness::Left, {kPi / 2, kPi / 2});
  CHECK(std::abs(end(1, 2) - 1.0) < 1e-15);
  CHECK(std::abs(end(1, 3)) < 1e-15);
  CHECK(std::abs(end(2, 3)) < 1e-15);
}

TEST_CASE("closed-form eigenvectors are orthonormal eigenvectors") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2 * kPi, 2 * kPi);
  double worst_eigen = 0.0, worst_ortho = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const InvariantParams p{u(rng), u(rng)};
    for (Handedness h : {Handedness::Left, Handedness::Right}) {
      const Matrix3c inv = invariant_matrix(h, p).matrix();
      const auto es = invariant_eigensystem(h, p);
      Eigen::Matrix3cd v;
      v << es.zero.vector, es.plus.vector, es.minus.vector;
      for (const auto* e : {&es.zero, &es.plus, &es.minus}) {
        worst_eigen = std::max(worst_eigen, (inv * e->vector - e->eigenvalue * e->vector).cwiseAbs().maxCoeff());
      }
      worst_ortho = std::max(worst_ortho, max_abs(v.adjoint() * v - Matrix3c::Identity()));
    }
  }
  CHECK(worst_eigen < 1e-12);
  CHECK(worst_ortho < 1e-12);
}

TEST_CASE("zero eigenvector maps |2> to the target level") {
  const auto start = invariant_eigensystem(Handedness::Left, {0.0, 3 * kPi / 4});
  CHECK(std::abs(std::abs(start.zero.vector(1)) - 1.0) < 1e-15);
  const auto end_l = invariant_eigensystem(Handedness::Left, {kPi / 2, kPi / 2});
  CHECK(std::abs(std::abs(end_l.zero.vector(2)) - 1.0) < 1e-15);
  const auto end_r = invariant_eigensystem(Handedness::Right, {kPi / 2, kPi / 2});
  CHECK(std::abs(std::abs(end_r.zero.vector(0)) - 1.0) < 1e-15);
}

TEST_CASE("designed pulses make I a dynamical invariant for both handednesses") {
  for (double n : {0.0, 0.5, 1.07, 1.12, 2.0}) {
    const auto s = ansatz_schedule(n, 1.0);
    double worst = 0.0;
    for (int k = 1; k < 400; ++k) {
      const double t = k / 400.0;
      worst = std::max(worst, invariant_residual(s, Handedness::Left, t));
      worst = std::max(worst, invariant_residual(s, Handedness::Right, t));
    }
    CHECK(worst < 1e-8);
  }
  const auto sps = sps_schedule(2.0);
  for (double t : {0.1, 0.7, 1.3, 1.9}) {
    CHECK(invariant_residual(sps, Handedness::Left, t) < 1e-10);
    CHECK(invariant_residual(sps, Handedness::Right, t) < 1e-10);
  }
}

TEST_CASE("the state follows the zero eigenvector") {
  auto check_transport = [](const InvariantSchedule& s, double tolerance) {
    const TimeGrid grid{s.duration(), 4000};
    const auto pulses = pulses_on_midpoints(s, grid, default_clamp(s.duration()));
    for (Handedness h : {Handedness::Left, Handedness::Right}) {
      const auto traj = propagate_piecewise(step_hamiltonians(pulses, h), QuantumState::basis(2), grid, 100);
      double worst = 0.0;
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto v = invariant_eigensystem(h, s.params(traj.times[k])).zero.vector;
        const double overlap = std::norm(v.dot(traj.states[k].amplitudes()));
        worst = std::max(worst, 1.0 - overlap);
      }
      CHECK(worst < tolerance);
    }
  };
  check_transport(ansatz_schedule(1.07, 1.0), 1e-6);
  check_transport(ansatz_schedule(1.12, 3.0), 1e-6);
  check_transport(sps_schedule(1.0), 1e-4);
}

TEST_CASE("ansatz boundary conditions hold across the family") {
  for (int k = 0; k <= 20; ++k) {
    const double n = 0.1 * k;
    const auto s = ansatz_schedule(n, 1.0);
    CHECK(std::abs(s.phi(0.0)) < 1e-12);
    CHECK(std::abs(s.phi(1.0) - kPi / 2) < 1e-12);
    CHECK(std::abs(s.theta(1.0) - kPi / 2) < 1e-12);
    CHECK(std::abs(s.theta(0.0) - 3 * kPi / 4) < 1e-12);
    const auto report = validate_schedule(s, {400});
    CHECK_MESSAGE(report.passed(), report.to_text());
  }
}

TEST_CASE("SPS pulses") {
  const auto s = sps_schedule(1.0);
  CHECK(s.kind() == SchemeKind::Sps);
  CHECK(s.label() == "sps");
  for (double t : {0.1, 0.5, 0.9}) CHECK(analytic_pulse(s, t).omega == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(analytic_pulse(s, 0.5).omega_q == doctest::Approx(kPi / 2).epsilon(1e-14));

  const TimeGrid grid{1.0, 4000};
  const auto nodes = pulses_on_nodes(s, grid, default_clamp(1.0));
  CHECK(nodes.samples.front().omega_q == doctest::Approx(100.0));
  CHECK(nodes.clamped_count > 0);
  for (std::size_t k = 0; k < nodes.times.size(); ++k) {
    if (nodes.times[k] > kEndpointWindow) CHECK(std::abs(nodes.samples[k].omega_q) < 100.0);
  }
  // A cap that would bite outside the endpoint windows is refused.
  try {
    (void)pulses_on_nodes(s, grid, 5.0);
    FAIL("expected ClampViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ClampViolation);
  }
}

TEST_CASE("ansatz pulses are finite at the endpoints without clamping") {
  for (double n : {0.8, 1.07, 1.12, 1.5}) {
    const auto s = ansatz_schedule(n, 1.0);
    const auto p = pulses_on_nodes(s, TimeGrid{1.0, 4000}, default_clamp(1.0));
    CHECK(p.clamped_count == 0);
    const auto first = p.samples.front();
    CHECK(std::isfinite(first.omega));
    CHECK(std::isfinite(first.omega_q));
    CHECK(std::abs(first.omega_q) < 100.0);
  }
  CHECK(ansatz_schedule(1.07, 1.0).label() == "ansatz-n1.07");
}

TEST_CASE("pulses scale as 1/T") {
  const auto a = ansatz_schedule(1.1, 1.0);
  const auto b = ansatz_schedule(1.1, 4.0);
  for (double u : {0.2, 0.5, 0.8}) {
    const auto pa = analytic_pulse(a, u);
    const auto pb = analytic_pulse(b, 4.0 * u);
    CHECK(pb.omega * 4.0 == doctest::Approx(pa.omega).epsilon(1e-12));
    CHECK(pb.omega_q * 4.0 == doctest::Approx(pa.omega_q).epsilon(1e-12));
  }
}

TEST_CASE("LR phase") {
  const auto sps = lr_phase(sps_schedule(1.0));
  CHECK(sps.anchor() == LRPhase::Anchor::End);
  CHECK(sps.eta_plus(0.5) == doctest::Approx(0.881373587019543).epsilon(1e-9));
  CHECK(std::abs(sps.eta_plus(1.0)) < 1e-12);
  CHECK(sps.eta_minus(0.5) == -sps.eta_plus(0.5));
  CHECK(LRPhase::eta_zero(0.3) == 0.0);

  for (double n : {0.8, 1.07, 1.12}) {
    const auto s = ansatz_schedule(n, 2.0);
    const auto phase = lr_phase(s);
    CHECK(phase.anchor() == LRPhase::Anchor::Start);
    for (double t : {0.0, 0.3, 1.0, 1.7, 2.0}) CHECK(std::abs(phase.eta_plus(t) - *s.closed_form_eta_plus(t)) < 1e-8);
  }
  CHECK_FALSE(sps_schedule(1.0).closed_form_eta_plus(0.5).has_value());
}

TEST_CASE("validator reports a singular theta") {
  auto flat = InvariantSchedule::custom(
      1.0, [](double t) { return kPi / 2 * t; }, [](double) { return kPi / 4; }, [](double) { return kPi / 2; },
      [](double) { return 0.0; }, "flat");
  const auto report = validate_schedule(flat, {200});
  CHECK_FALSE(report.passed());
  const auto* c = report.find("theta_singularity");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->passed);
  CHECK(c->detail.find("SingularTheta") != std::string::npos);
  CHECK(report.to_text().find("overall=FAIL") != std::string::npos);

  const std::vector<double> times{0.25, 0.5};
  try {
    (void)pulses_from_invariant(flat, times, 100.0);
    FAIL("expected SingularTheta");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularTheta);
  }
}

TEST_CASE("validator catches inconsistent derivatives and wrong boundaries") {
  auto wrong = InvariantSchedule::custom(
      1.0, [](double t) { return kPi / 2 * t; }, [](double) { return kPi / 2; }, [](double) { return 1.0; },
      [](double) { return 0.0; });
  const auto report = validate_schedule(wrong, {200});
  CHECK_FALSE(report.find("derivative_consistency")->passed);
  CHECK(report.find("boundary_conditions")->passed);

  auto short_phi = InvariantSchedule::custom(
      1.0, [](double t) { return t; }, [](double) { return kPi / 2; }, [](double) { return 1.0; },
      [](double) { return 0.0; });
  CHECK_FALSE(validate_schedule(short_phi, {200}).find("boundary_conditions")->passed);
}

TEST_CASE("schedule serialization round trip") {
  const auto s = ansatz_schedule(1.07, 2.5);
  const std::string text = serialize_schedule(s, 4000, 40.0);
  CHECK(text.find("kind=ansatz") != std::string::npos);
  const auto d = parse_schedule(text);
  CHECK(d.kind == SchemeKind::FourierAnsatz);
  REQUIRE(d.n.has_value());
  CHECK(*d.n == 1.07);
  CHECK(d.duration == 2.5);
  CHECK(d.grid_steps == 4000);
  CHECK(d.clamp_value == 40.0);
  const auto rebuilt = d.make();
  for (double t : {0.1, 1.2, 2.4}) {
    CHECK(rebuilt.theta(t) == s.theta(t));
    CHECK(rebuilt.phi(t) == s.phi(t));
  }
  CHECK(serialize_schedule(rebuilt, 4000, 40.0) == text);

  const auto sps = parse_schedule(serialize_schedule(sps_schedule(1.0), 100, 100.0));
  CHECK(sps.kind == SchemeKind::Sps);
  CHECK_FALSE(sps.n.has_value());

  CHECK_THROWS_AS(parse_schedule("kind=banana\nT=1\n"), Error);
  CHECK_THROWS_AS(ansatz_schedule(1.0, -1.0), Error);
}
