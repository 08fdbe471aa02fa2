#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chiral/error.hpp"
#include "chiral/sweep.hpp"

using namespace chiral;

namespace {

SweepSpec small_curve(SensitivityKind kind, SweepMode mode, unsigned workers) {
  SweepSpec spec;
  spec.schemes = {SchemeSpec::sps(), SchemeSpec::parse("oss"), SchemeSpec::parse("osd")};
  spec.axis1 = {kind, kind == SensitivityKind::Systematic ? -0.2 : -1.0, kind == SensitivityKind::Systematic ? 0.2 : 1.0, 9};
  spec.mode = mode;
  spec.settings.steps = 1000;
  spec.settings.workers = workers;
  return spec;
}

std::string curve_text(const SweepResult& r, std::size_t k) {
  std::ostringstream os;
  write_curve_csv(os, r, k);
  return os.str();
}

}  // namespace

TEST_CASE("scheme names parse") {
  CHECK(SchemeSpec::parse("sps").kind == SchemeKind::Sps);
  const auto oss = SchemeSpec::parse("oss");
  CHECK(oss.n == kOssN);
  CHECK(oss.name == "oss");
  CHECK(SchemeSpec::parse("ose").n == kOssN);
  CHECK(SchemeSpec::parse("osd").n == kOsdN);
  CHECK(SchemeSpec::parse("ansatz:1.2").n == 1.2);
  CHECK(SchemeSpec::parse("ansatz-n0.9").name == "ansatz-n0.9");
  CHECK_THROWS_AS(SchemeSpec::parse("ansatz:x"), Error);
  CHECK_THROWS_AS(SchemeSpec::parse("stirap"), Error);
}

TEST_CASE("error axes") {
  const ErrorAxis a{SensitivityKind::Systematic, -0.3, 0.3, 7};
  const auto v = a.values();
  REQUIRE(v.size() == 7);
  CHECK(v.front() == -0.3);
  CHECK(v.back() == 0.3);
  CHECK(std::abs(v[3]) < 1e-16);
  CHECK(a.column() == "alpha");
  CHECK(ErrorAxis{SensitivityKind::Detuning}.column() == "delta_T");
  CHECK_THROWS_AS(check_axis({SensitivityKind::Systematic, 0.1, 0.1, 5}), Error);
  CHECK_THROWS_AS(check_axis({SensitivityKind::Systematic, -1, 1, 1}), Error);
  CHECK(parse_sweep_mode("both") == SweepMode::Both);
  CHECK_THROWS_AS(parse_sweep_mode("fast"), Error);
}

TEST_CASE("fidelity curves are deterministic and independent of the worker count") {
  const auto serial = fidelity_curve(small_curve(SensitivityKind::Systematic, SweepMode::Exact, 1));
  const auto parallel = fidelity_curve(small_curve(SensitivityKind::Systematic, SweepMode::Exact, 3));
  const auto again = fidelity_curve(small_curve(SensitivityKind::Systematic, SweepMode::Exact, 3));
  CHECK(serial.tag == "fig3");
  for (std::size_t k = 0; k < serial.schemes.size(); ++k) {
    CHECK(serial.schemes[k].exact_left == parallel.schemes[k].exact_left);
    CHECK(serial.schemes[k].exact_right == parallel.schemes[k].exact_right);
    CHECK(curve_text(serial, k) == curve_text(again, k));
  }
}

TEST_CASE("robust schemes beat SPS away from the origin") {
  const auto sys = fidelity_curve(small_curve(SensitivityKind::Systematic, SweepMode::Exact, 0));
  const auto det = fidelity_curve(small_curve(SensitivityKind::Detuning, SweepMode::Exact, 0));
  CHECK(det.tag == "fig4");
  for (std::size_t i = 0; i < 9; ++i) {
    if (i == 4) continue;
    CHECK(sys.schemes[1].exact_left[i] > sys.schemes[0].exact_left[i]);
    CHECK(det.schemes[2].exact_left[i] > det.schemes[0].exact_left[i]);
  }
  // Every scheme is ideal at zero error.
  for (const auto& s : sys.schemes) CHECK(s.exact_left[4] > 1 - 1e-4);
}

TEST_CASE("both mode pairs exact and second-order values") {
  const auto r = fidelity_curve(small_curve(SensitivityKind::Systematic, SweepMode::Both, 0));
  const auto& oss = r.schemes[1];
  REQUIRE(oss.perturbative.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    if (std::abs(r.axis1_values[i]) <= 0.1) CHECK(std::abs(oss.exact_left[i] - oss.perturbative[i]) < 2e-3);
  }
  const std::string text = curve_text(r, 1);
  CHECK(text.find("alpha,F_exact_left,F_exact_right,F_perturbative,in_validity_window") != std::string::npos);
  CHECK(text.find("# tag=fig3") != std::string::npos);
  CHECK(text.find("# scheme=oss") != std::string::npos);

  const auto pert = fidelity_curve(small_curve(SensitivityKind::Detuning, SweepMode::Perturbative, 0));
  CHECK(pert.schemes[0].exact_left.empty());
  CHECK(pert.schemes[2].perturbative[0] == doctest::Approx(1.0 - 0.25 * 0.0164160631903223).epsilon(1e-8));
}

TEST_CASE("single handedness sweeps leave the other column empty") {
  auto spec = small_curve(SensitivityKind::Systematic, SweepMode::Exact, 0);
  spec.handedness = Handedness::Right;
  const auto r = fidelity_curve(spec);
  CHECK(r.schemes[0].exact_left.empty());
  CHECK(r.schemes[0].exact_right.size() == 9);
  std::ostringstream os;
  write_combined_curve_csv(os, r);
  CHECK(os.str().find("alpha,sps,oss,osd\n") != std::string::npos);
}

TEST_CASE("heatmap region around the origin") {
  SweepSpec spec;
  spec.schemes = {SchemeSpec::ansatz(kHeatmapN)};
  spec.axis1 = {SensitivityKind::Systematic, -0.1, 0.1, 5};
  spec.axis2 = ErrorAxis{SensitivityKind::Detuning, -0.5, 0.5, 5};
  spec.settings.steps = 1000;
  const auto map = fidelity_heatmap(spec);
  CHECK(map.tag == "fig5");
  REQUIRE(map.schemes[0].exact_left.size() == 25);
  for (Handedness h : {Handedness::Left, Handedness::Right}) {
    const auto region = summarize_region(map, 0, h);
    CHECK(region.origin_above);
    CHECK(region.origin_value > 1 - 1e-4);
    // Two of the four corners dip just below 0.99; the centre cross does not.
    CHECK(region.cells_above == 23);
    CHECK(region.contiguous);
    CHECK(region.area == doctest::Approx(23 * 0.05 * 0.25));
  }
  // Fidelity at alpha = 0, delta T = +-0.5 matches a detuning-only run.
  const double f = exact_fidelity(ansatz_schedule(kHeatmapN, 1.0), ErrorModel::detuning(0.5), Handedness::Left,
                                  {1000});
  CHECK(map.schemes[0].exact_left[2 * 5 + 4] == doctest::Approx(f).epsilon(1e-14));

  std::ostringstream os;
  write_heatmap_csv(os, map, 0);
  CHECK(os.str().find("alpha,delta_T,F_exact_left,F_exact_right") != std::string::npos);

  spec.mode = SweepMode::Both;
  CHECK_THROWS_AS(fidelity_heatmap(spec), Error);
}

TEST_CASE("population trace and CSV writers") {
  SweepSettings settings;
  settings.steps = 400;
  const auto traj = population_trace(sps_schedule(1.0), Handedness::Left, settings, 41);
  CHECK(traj.times.size() == 41);
  std::ostringstream os;
  write_trajectory_csv(os, traj, 1.0, {{"scheme", "sps"}});
  CHECK(os.str().rfind("# scheme=sps\nt,P1,P2,P3\n0,0,1,0\n", 0) == 0);

  const auto pulses = pulses_on_nodes(sps_schedule(2.0), TimeGrid{2.0, 4}, default_clamp(2.0));
  std::ostringstream ps;
  write_pulses_csv(ps, pulses);
  const std::string text = ps.str();
  CHECK(text.rfind("t,omega,omega_q,gamma\n0,", 0) == 0);
  CHECK(text.find("\n0.5,1.5707963267949,1.5707963267949,1.5707963267949\n") != std::string::npos);

  CHECK(output_file_name("fig3", "oss", "exact") == "fig3_oss_exact.csv");
  CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("sensitivity curve and metadata") {
  const auto table = sensitivity_curve(SensitivityKind::Systematic, 0.8, 1.2, 3);
  CHECK(table.q[0] == doctest::Approx(1.10874488880175).epsilon(1e-8));
  std::ostringstream os;
  write_sensitivity_csv(os, table, {});
  CHECK(os.str().rfind("n,q_alpha\n0.8,", 0) == 0);
  CHECK_THROWS_AS(sensitivity_curve(SensitivityKind::Detuning, 1.0, 1.0, 3), Error);

  const auto md = sweep_metadata(small_curve(SensitivityKind::Systematic, SweepMode::Exact, 4), "fig3");
  bool has_version = false;
  for (const auto& [k, v] : md) {
    CHECK(k != "workers");
    if (k == "code_version") has_version = !v.empty();
  }
  CHECK(has_version);
}

TEST_CASE("parallel_for propagates the first error") {
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t i) {
                                 if (i == 37) throw Error(ErrorKind::InvalidArgument, "boom");
                               }),
                  Error);
  std::vector<int> hit(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
}

TEST_CASE("SPS population traces") {
  const auto left = population_trace(sps_schedule(1.0), Handedness::Left);
  CHECK(left.times.size() >= 200);
  double worst_p1 = 0.0;
  for (const auto& p : left.populations) {
    worst_p1 = std::max(worst_p1, p[0]);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-10);
  }
  CHECK(worst_p1 <= 1e-3);
  CHECK(left.populations.front()[1] == 1.0);
  CHECK(std::abs(left.final_populations()[2] - 1.0) < 1e-4);
  const auto right = population_trace(sps_schedule(1.0), Handedness::Right);
  CHECK(std::abs(right.final_populations()[0] - 1.0) < 1e-4);
}

TEST_CASE("sensitivity tables locate the optima") {
  for (SensitivityKind kind : {SensitivityKind::Systematic, SensitivityKind::Detuning}) {
    const auto table = sensitivity_curve(kind, 0.5, 1.5, 201);
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.q.size(); ++i) {
      CHECK(table.n[i] > table.n[i - 1]);
      if (table.q[i] < table.q[best]) best = i;
    }
    if (kind == SensitivityKind::Systematic) {
      CHECK(std::abs(table.n[best] - 1.065) < 0.006);
      CHECK(table.q[best] == doctest::Approx(0.5207).epsilon(1e-3));
    } else {
      CHECK(std::abs(table.n[best] - 1.135) < 0.006);
      CHECK(table.q[best] < 0.02);
    }
  }
}

TEST_CASE("heatmap handedness symmetry") {
  SweepSpec spec;
  spec.schemes = {SchemeSpec::ansatz(kHeatmapN)};
  spec.axis1 = {SensitivityKind::Systematic, -0.3, 0.3, 7};
  spec.axis2 = ErrorAxis{SensitivityKind::Detuning, -1.0, 1.0, 7};
  spec.settings.steps = 800;
  const auto map = fidelity_heatmap(spec);
  for (std::size_t i = 0; i < 49; ++i) {
    CHECK(std::abs(map.schemes[0].exact_left[i] - map.schemes[0].exact_right[i]) < 1e-6);
    CHECK(map.schemes[0].exact_left[i] >= 0.0);
    CHECK(map.schemes[0].exact_left[i] <= 1.0 + 1e-12);
  }
}
