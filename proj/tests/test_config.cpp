#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "chiral/config.hpp"
#include "chiral/error.hpp"

using namespace chiral;

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text("# comment\n\nscheme = ansatz\n n=1.07\nsteps=2000\r\n");
  CHECK(kv.at("scheme") == "ansatz");
  CHECK(kv.at("n") == "1.07");
  CHECK(kv.at("steps") == "2000");
  CHECK_THROWS_AS(parse_config_text("steps 2000\n"), Error);
}

TEST_CASE("settings apply and validate") {
  RunConfig c;
  apply_setting(c, "scheme", "ansatz");
  apply_setting(c, "n", "1.12");
  apply_setting(c, "schemes", "sps, oss,osd");
  apply_setting(c, "quad-tol", "1e-9");
  CHECK(*c.n == 1.12);
  CHECK(c.schemes.size() == 3);
  CHECK(c.quad_tol == 1e-9);
  CHECK_NOTHROW(validate(c));
  CHECK(scheme_from_config(c, "sps", 1.0).n == 1.12);
  CHECK(scheme_from_config(RunConfig{}, "sps", 1.0).kind == SchemeKind::Sps);
  CHECK(handedness_list(c).size() == 2);

  try {
    apply_setting(c, "speed", "3");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
  }
  CHECK_THROWS_AS(apply_setting(c, "steps", "-4"), Error);
  CHECK_THROWS_AS(apply_setting(c, "T", "nan"), Error);
  CHECK_THROWS_AS(apply_setting(c, "T", "1.0x"), Error);
}

TEST_CASE("validation rejects bad values") {
  auto bad = [](const char* key, const char* value) {
    RunConfig c;
    apply_setting(c, key, value);
    CHECK_THROWS_AS(validate(c), Error);
  };
  bad("T", "0");
  bad("T", "-1");
  bad("steps", "0");
  bad("clamp", "0");
  bad("mode", "fast");
  bad("handedness", "up");
  bad("schemes", "sps,foo");
  bad("error", "phase");
  bad("n-min", "2");
  bad("scheme", "stirap");
}

TEST_CASE("config file round trip and metadata") {
  const std::string path = "chiral_lri_test_config.txt";
  {
    std::ofstream out(path);
    out << "T=2\nworkers=3\nmode=both\n";
  }
  RunConfig c;
  for (const auto& [k, v] : read_config_file(path)) apply_setting(c, k, v);
  std::remove(path.c_str());
  CHECK(c.T == 2.0);
  CHECK(c.workers == 3);
  const auto md = config_metadata(c);
  CHECK(md.size() + 2 == config_keys().size());
  for (const auto& [k, v] : md) {
    CHECK(k != "config.workers");
    CHECK(k != "config.out");
  }
  CHECK(sweep_settings(c).duration == 2.0);
  CHECK_THROWS_AS(read_config_file("/nonexistent/dir/file"), Error);
  CHECK(parse_sensitivity_kind("detuning") == SensitivityKind::Detuning);
}
