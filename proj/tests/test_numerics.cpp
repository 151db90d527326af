#include "helpers.hpp"
#include "skewcrit/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace skewcrit;
using testing::error_code;
using testing::mat;
using testing::vec;

TEST_CASE("fd_jacobian on closed forms") {
  const Mat sq = fd_jacobian([](const Vec& x) { return Vec(x.array().square()); }, vec({3.0}), 1e-5);
  CHECK(sq(0, 0) == doctest::Approx(6.0).epsilon(1e-8));

  const Mat bil = fd_jacobian([](const Vec& x) { return vec({x(0) + x(1), x(0) * x(1)}); }, vec({1.0, 2.0}));
  CHECK((bil - mat({{1, 1}, {2, 1}})).cwiseAbs().maxCoeff() < 1e-8);

  const Mat s = fd_jacobian([](const Vec& x) { return Vec(x.array().sin()); }, vec({0.5}));
  CHECK(std::abs(s(0, 0) - std::cos(0.5)) < 1e-9);
}

TEST_CASE("fd_jacobian rejects non-finite stencils") {
  auto bad = [](const Vec& x) { return Vec(x.array().log()); };
  CHECK(error_code([&] { fd_jacobian(bad, vec({0.0})); }) == ErrorCode::NonFiniteEvaluation);
}

TEST_CASE("default step scales with the coordinate") {
  const double c = std::cbrt(std::numeric_limits<double>::epsilon());
  CHECK(default_fd_step(0.1) == doctest::Approx(c));
  CHECK(default_fd_step(-50.0) == doctest::Approx(50.0 * c));
}

TEST_CASE("kernel_split examples") {
  const KernelSplit a = kernel_split(mat({{1, 0}}));
  CHECK((a.kernel_basis - mat({{0}, {1}})).norm() < 1e-14);
  CHECK((a.complement_basis - mat({{1}, {0}})).norm() < 1e-14);

  const KernelSplit b = kernel_split(mat({{1, 1}}) / std::sqrt(2.0));
  CHECK(std::abs(b.kernel_basis(0, 0) + b.kernel_basis(1, 0)) < 1e-14);
  CHECK(b.kernel_basis.norm() == doctest::Approx(1.0));

  CHECK(error_code([] { kernel_split(mat({{0, 0}})); }) == ErrorCode::RankDeficient);
}

TEST_CASE("kernel_split property: projectors resolve the identity, bases are reproducible") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    const int m = 1 + trial % (n - 1 > 0 ? n - 1 : 1);
    Mat a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
    const KernelSplit s1 = kernel_split(a);
    const KernelSplit s2 = kernel_split(a);
    const Mat p = s1.kernel_basis * s1.kernel_basis.transpose() + s1.complement_basis * s1.complement_basis.transpose();
    CHECK((p - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a * s1.kernel_basis).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s1.kernel_basis == s2.kernel_basis);
    CHECK(s1.complement_basis == s2.complement_basis);
    for (Eigen::Index c = 0; c < s1.kernel_basis.cols(); ++c) {
      for (Eigen::Index r = 0; r < n; ++r) {
        if (s1.kernel_basis(r, c) != 0.0) {
          CHECK(s1.kernel_basis(r, c) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("richardson_limit examples") {
  std::vector<Sample> lin = {{0.1, vec({1.1})}, {0.05, vec({1.05})}};
  CHECK(std::abs(richardson_limit(lin, 1.0)(0) - 1.0) < 1e-12);

  std::vector<Sample> quad;
  for (int k = 2; k <= 6; ++k) {
    const double h = std::ldexp(1.0, -k);
    quad.push_back({h, vec({2.0 + h * h})});
  }
  CHECK(std::abs(richardson_limit(quad, 2.0)(0) - 2.0) < 1e-10);

  std::vector<Sample> sinc;
  for (int k = 3; k <= 8; ++k) {
    const double h = std::ldexp(1.0, -k);
    sinc.push_back({h, vec({std::sin(h) / h})});
  }
  CHECK(std::abs(richardson_limit(sinc, 2.0)(0) - 1.0) < 1e-9);

  std::vector<Sample> one = {{0.1, vec({1.0})}};
  CHECK(error_code([&] { richardson_limit(one, 1.0); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("slope_fit examples") {
  std::vector<std::pair<double, double>> cube;
  std::vector<std::pair<double, double>> near2;
  std::vector<std::pair<double, double>> noise;
  for (int k = 2; k <= 9; ++k) {
    const double h = std::ldexp(1.0, -k);
    cube.emplace_back(h, h * h * h);
    near2.emplace_back(h, h * h * (1.0 + 0.1 * h));
    noise.emplace_back(h, 1e-17);
  }
  const SlopeFit c = slope_fit(cube);
  CHECK(std::abs(c.slope - 3.0) < 1e-6);
  CHECK(c.r2 == doctest::Approx(1.0));
  CHECK(std::abs(slope_fit(near2).slope - 2.0) < 0.05);
  CHECK(error_code([&] { slope_fit(noise); }) == ErrorCode::BelowFloor);
}

TEST_CASE("slope_fit property: recovers power laws over scales") {
  for (int p = 1; p <= 4; ++p) {
    for (double scale : {1e-3, 1.0, 1e3}) {
      std::vector<std::pair<double, double>> pairs;
      for (double h : halving_sequence(0.1, 11)) pairs.emplace_back(h, scale * std::pow(h, p));
      CHECK(std::abs(slope_fit(pairs).slope - p) < 0.01);
    }
  }
}

TEST_CASE("halving sequence, condition numbers, flattening") {
  const auto h = halving_sequence(0.1, 11);
  REQUIRE(h.size() == 11);
  CHECK(h.front() == 0.1);
  CHECK(h.back() == doctest::Approx(0.1 / 1024));

  CHECK(condition_number(mat({{2, 0}, {0, 0.5}})) == doctest::Approx(4.0));
  CHECK(std::isinf(condition_number(mat({{1, 1}, {1, 1}}))));
  CHECK(smallest_singular_value(mat({{3, 0}, {0, 0.25}})) == doctest::Approx(0.25));

  const Mat m = mat({{1, 2, 3}, {4, 5, 6}});
  const Vec f = flatten_rows(m);
  CHECK(f(1) == 2.0);
  CHECK(f(3) == 4.0);
  CHECK(unflatten_rows(f, 2, 3) == m);
  CHECK(error_code([&] { unflatten_rows(f, 4, 2); }) == ErrorCode::DimensionMismatch);
}
