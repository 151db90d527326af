#include "helpers.hpp"
#include "skewcrit/config.hpp"
#include "skewcrit/examples.hpp"
#include "skewcrit/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace skewcrit;
using testing::error_code;
using testing::inf_norm;
using testing::vec;

namespace {

SkewProblem example(const char* name) { return build_problem(builtin_config(name)); }

double contraction_constant(const std::vector<double>& hist) {
  double c = 0.0;
  for (std::size_t k = 0; k + 1 < hist.size(); ++k) {
    if (hist[k] < 1e-3 && hist[k] > 1e-13) c = std::max(c, hist[k + 1] / (hist[k] * hist[k]));
  }
  return c;
}

}  // namespace

TEST_CASE("newton_step examples") {
  const Vec u = newton_step(example("trivial"), vec({0.5, 0.3}), vec({0.7}));
  CHECK(inf_norm(u - vec({0.2, -0.3})) < 1e-14);
  CHECK(error_code([] { newton_step(example("degenerate"), vec({0.3, 0.2}), vec({0.5})); }) ==
        ErrorCode::DegenerateHessian);
}

TEST_CASE("solve examples") {
  const SolveResult t = solve(example("trivial"), vec({0.7}), vec({0.7, 0.3}));
  CHECK(t.converged);
  CHECK(inf_norm(t.x_c - vec({0.7, 0.0})) <= 1e-10);

  // Oracle: alpha_D = (x3 (x2 + 1), x2 + x3) vanishes on x3 = 0 = x2 for the branch near the start.
  const SolveResult s = solve(example("skew3d"), vec({0.4}), vec({0.4, 0.1, -0.1}));
  CHECK(inf_norm(s.x_c - vec({0.4, 0.0, 0.0})) <= 1e-10);
  CHECK(contraction_constant(s.residual_history) < 10.0);
  CHECK(s.residual_history.size() == static_cast<std::size_t>(s.iterations) + 1);
}

TEST_CASE("far start exhausts the iteration budget") {
  NewtonSettings few;
  few.max_iter = 3;
  CHECK(error_code([&] { solve(example("skew3d"), vec({0.4}), vec({0.4, 5.0, 5.0}), few); }) ==
        ErrorCode::MaxIterExceeded);
  // Oracle run: with a generous budget the same start does converge to a root.
  NewtonSettings many;
  many.max_iter = 200;
  const SolveResult r = solve(example("skew3d"), vec({0.4}), vec({0.4, 5.0, 5.0}), many);
  CHECK(inf_norm(target_residual(example("skew3d"), r.x_c, vec({0.4}))) < 1e-10);
}

TEST_CASE("degenerate problem is reported") {
  CHECK(error_code([] { solve(example("degenerate"), vec({0.5}), vec({0.3, 0.2})); }) ==
        ErrorCode::DegenerateHessian);
}

TEST_CASE("settings are validated") {
  NewtonSettings s;
  s.damping = 0.0;
  CHECK(error_code([&] { s.validate(); }) == ErrorCode::InvalidArgument);
  s = {};
  s.max_iter = 0;
  CHECK(error_code([&] { s.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: quadratic contraction over the example suite") {
  for (double y : {-1.0, 0.0, 0.7, 1.0}) {
    const SolveResult r = solve(example("trivial"), vec({y}), vec({0.7, 0.3}));
    CHECK(contraction_constant(r.residual_history) < 10.0);
  }
  for (double y : {-0.9, -0.2, 0.4, 0.8}) {
    const SolveResult r = solve(example("skew3d"), vec({y}), vec({y, 0.1, -0.1}));
    CHECK(contraction_constant(r.residual_history) < 10.0);
  }
}

TEST_CASE("property: an exact root needs at most one iteration") {
  const SkewProblem p = example("skew3d");
  const Vec xc = vec({0.3, 0.0, 0.0});
  const SolveResult r = solve(p, p.g.eval(xc), xc);
  CHECK(r.iterations <= 1);
}

TEST_CASE("property: seeded starts near a root converge to it") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SkewProblem p = example("skew3d");
  const Vec root = vec({0.4, 0.0, 0.0});
  for (int k = 0; k < 20; ++k) {
    Vec dir = vec({nd(rng), nd(rng), nd(rng)});
    const Vec x0 = root + 0.2 * std::cbrt(u(rng)) * dir / dir.norm();
    CHECK(inf_norm(solve(p, vec({0.4}), x0).x_c - root) <= 1e-8);
  }
}

TEST_CASE("continuation examples") {
  std::vector<Vec> path;
  for (int k = 0; k <= 10; ++k) path.push_back(vec({0.1 * k}));
  const ContinuationResult t = continuation(example("trivial"), path, vec({0.0, 0.1}));
  REQUIRE(t.samples.size() == 11);
  CHECK(t.failures.empty());
  for (const auto& s : t.samples) CHECK(inf_norm(s.x_c - vec({s.y(0), 0.0})) <= 1e-10);

  std::vector<Vec> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(vec({-1.0 + 0.05 * k}));
  for (Predictor pr : {Predictor::Previous, Predictor::Secant}) {
    const ContinuationResult s = continuation(example("skew3d"), grid, vec({-1.0, 0.1, -0.1}), {}, 0.0, pr);
    REQUIRE(s.samples.size() == 41);
    for (const auto& r : s.samples) {
      CHECK(inf_norm(r.x_c - vec({r.y(0), 0.0, 0.0})) <= 1e-10);
      CHECK(r.hessian.nondegenerate);
    }
  }

  // Hessian 1 - y: only the last point is degenerate.
  std::vector<Vec> fold_path;
  for (int k = 0; k <= 4; ++k) fold_path.push_back(vec({0.25 * k}));
  const ContinuationResult f = continuation(example("fold"), fold_path, vec({0.0, 0.1}));
  CHECK(f.samples.size() == 4);
  REQUIRE(f.failures.size() == 1);
  CHECK(f.failures[0].y(0) == 1.0);
  CHECK(f.failures[0].code == ErrorCode::DegenerateHessian);
}

TEST_CASE("continuation flags branch jumps") {
  std::vector<Vec> path = {vec({0.4}), vec({0.45}), vec({0.5})};
  // A tiny explicit cap turns every move into a jump.
  const ContinuationResult r = continuation(example("trivial"), path, vec({0.4, 0.0}), {}, 1e-6);
  CHECK(r.samples.size() == 1);
  REQUIRE(r.failures.size() == 2);
  CHECK(r.failures[0].code == ErrorCode::BranchJump);
}
