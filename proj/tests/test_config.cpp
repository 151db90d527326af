#include "helpers.hpp"
#include "skewcrit/acceptance.hpp"
#include "skewcrit/config.hpp"
#include "skewcrit/examples.hpp"
#include "skewcrit/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

using namespace skewcrit;
using testing::error_code;

namespace {

const char* kTrivial = R"({"version": 1, "name": "t", "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
  "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"]})";

std::string with(const std::string& key_value) {
  std::string s = kTrivial;
  s.insert(s.size() - 1, ", " + key_value);
  return s;
}

}  // namespace

TEST_CASE("built-in registry") {
  const auto& reg = builtin_examples();
  CHECK(reg.size() >= 6);
  std::set<std::string> names;
  for (const auto& e : reg) {
    CAPTURE(e.name);
    CHECK_FALSE(e.description.empty());
    CHECK(names.insert(e.name).second);
    ProblemConfig cfg;
    CHECK_NOTHROW(cfg = builtin_config(e.name));
    CHECK_NOTHROW(validate_config(cfg));
    // load, serialize, load again
    const ProblemConfig back = parse_config_text(to_json(cfg).dump());
    CHECK(back == cfg);
    CHECK(config_hash(back) == config_hash(cfg));
  }
  CHECK(builtin_examples()[0].name == "trivial");
  CHECK(error_code([] { builtin_config("nope"); }) == ErrorCode::ConfigError);
  CHECK(resolve_config("builtin:skew3d") == builtin_config("skew3d"));
}

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_config_text(kTrivial));
  CHECK(error_code([] { parse_config_text("{not json"); }) == ErrorCode::ConfigError);
  CHECK(error_code([] { parse_config_text(with(R"("colour": 1)")); }) == ErrorCode::ConfigError);
  CHECK(error_code([] { parse_config_text(with(R"("alpha2": ["x1"])")); }) == ErrorCode::ConfigError);
  CHECK(error_code([] {
          parse_config_text(R"({"version": 1, "name": "t", "chart": {"n": 2, "m": 1, "d": 1},
            "alpha": ["x1", "x3"], "delta": [["0"]], "g": ["x1"]})");
        }) == ErrorCode::ConfigError);
  CHECK(error_code([] {
          parse_config_text(R"({"version": 1, "name": "t", "chart": {"n": 2, "m": 1, "d": 1},
            "alpha": ["x1", "x2 + t"], "delta": [["0"]], "g": ["x1"]})");
        }) == ErrorCode::ConfigError);
  CHECK(error_code([] {
          parse_config_text(R"({"version": 1, "name": "t", "chart": {"n": 2, "m": 1, "d": 1},
            "alpha": ["x1"], "delta": [["0"]], "g": ["x1"]})");
        }) == ErrorCode::ConfigError);
  CHECK(error_code([] { parse_config_text(with(R"("params": [1], "alpha2": ["x1", "x2 + p2*t"])")); }) ==
        ErrorCode::ConfigError);
  CHECK(error_code([] { load_config("/nonexistent/config.json"); }) == ErrorCode::ConfigError);
}

TEST_CASE("config builders") {
  const ProblemConfig cfg = builtin_config("skew3d");
  const AmbientChart c = make_chart(cfg);
  CHECK(c.dist_coords == std::vector<int>{1, 2});
  CHECK(make_h_seq(cfg).size() == 11);
  CHECK(make_settings(cfg).tol_residual == 1e-12);

  const ProblemConfig fam = builtin_config("trivial-alpha-perturbed");
  CHECK(fam.is_family());
  const SkewProblem p = build_problem(fam);
  CHECK(p.alpha.eval(testing::vec({0.3, 0.4}))(1) == 0.4);

  const auto [f1, f2] = build_custom(builtin_config("power-law"));
  CHECK(f2(testing::vec({0.5}), 0.1)(0) - f1(testing::vec({0.5}), 0.1)(0) ==
        doctest::Approx(1e-3 * std::cos(0.5)));
  CHECK(f1.target_h(testing::vec({0.5}), 0.25) == 0.25);

  const GroupAction g = build_group(builtin_config("reflection-symmetric"));
  REQUIRE(g.generators.size() == 1);
  CHECK(g.generators[0].first(0, 0) == -1.0);
  CHECK(build_group(cfg).generators.size() == 1);
}

TEST_CASE("report formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CsvTable t{{"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  CHECK(t.str() == "a,b\n1,2\n3,4\n");
  CHECK_FALSE(report_header("solve", "x", false).contains("timestamp"));
  CHECK(report_header("solve", "x", true).contains("timestamp"));
}

TEST_CASE("acceptance plumbing") {
  CHECK(parse_suite("solver") == Suite::Solver);
  CHECK_FALSE(parse_suite("bogus").has_value());
  CHECK(suite_criteria(Suite::All).size() == 11);
  CHECK(suite_criteria(Suite::Variation) == std::vector<int>{8, 9, 10});

  AcceptanceOptions opts;
  const SuiteReport a = run_acceptance(Suite::Solver, opts);
  const SuiteReport b = run_acceptance(Suite::Solver, opts);
  CHECK(a.all_pass);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(summary_line(a.results[0]).rfind("criterion 1: PASS", 0) == 0);

  opts.config_dir = "/nonexistent";
  CHECK(error_code([&] { run_acceptance(Suite::Solver, opts); }) == ErrorCode::ConfigError);
}
