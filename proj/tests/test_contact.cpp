#include "helpers.hpp"
#include "skewcrit/contact.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace skewcrit;
using testing::error_code;
using testing::family;
using testing::inf_norm;
using testing::mat;
using testing::opaque;
using testing::vec;

TEST_CASE("contact_estimate examples") {
  const AdaptedFamily f1 = family(1, {"sin(x1) + t"});
  const AdaptedFamily f2 = family(1, {"sin(x1) + t + t^3*cos(x1)"});
  const ContactEstimate e = contact_estimate(f1, f2, vec({0.5}));
  CHECK(std::abs(e.r_est - 3.0) <= 0.05);
  CHECK(e.status == ContactStatus::Integer);
  CHECK(e.order_exponent == 3);
  CHECK(e.method == ResidualMethod::Analytic);
  CHECK(std::abs(e.residual(0) - std::cos(0.5)) < 1e-12);

  const ContactEstimate same = contact_estimate(f1, f1, vec({0.5}));
  CHECK(same.status == ContactStatus::MachineLimited);
  CHECK(std::isnan(same.r_est));

  // The residual is the Taylor coefficient itself: t^2 x has residual x, not 2x.
  const ContactEstimate q = contact_estimate(family(1, {"x1"}), family(1, {"x1 + t^2*x1 + t^3"}), vec({2.0}));
  CHECK(std::abs(q.r_est - 2.0) <= 0.05);
  CHECK(std::abs(q.residual(0) - 2.0) < 1e-12);
  const ContactEstimate qn =
      contact_estimate(opaque(family(1, {"x1"})), opaque(family(1, {"x1 + t^2*x1 + t^3"})), vec({2.0}));
  CHECK(qn.method == ResidualMethod::SlopeFit);
  CHECK(std::abs(qn.residual(0) - 2.0) < 1e-6);

  CHECK(error_code([&] { contact_estimate(f1, family(1, {"sin(x1) + 1 + t"}), vec({0.5})); }) ==
        ErrorCode::BaseMismatch);
}

TEST_CASE("claimed order fixes the residual exponent") {
  ContactOptions o;
  o.r_claimed = 2;
  const ContactEstimate e = contact_estimate(family(1, {"x1"}), family(1, {"x1 + t^3"}), vec({0.1}), o);
  CHECK(e.r_used == 2);
  CHECK(std::abs(e.residual(0)) < 1e-12);
  CHECK(e.order_exponent == 3);
  CHECK(e.at_least(2));
}

TEST_CASE("property: fitted slope matches the analytic order") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.3, 1.5);
  std::uniform_real_distribution<double> xs(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const int r = 1 + k % 4;
    char buf[200];
    std::snprintf(buf, sizeof buf, "exp(x1)*t + (%.6f)*t^%d*(1 + x1^2) + t^%d*sin(x1)", u(rng), r, r + 1);
    const AdaptedFamily f1 = family(1, {"exp(x1)*t"});
    const AdaptedFamily f2 = family(1, {buf});
    const Vec x = vec({xs(rng)});
    const int analytic = analytic_contact_order(f1, f2, x, 8);
    CHECK(analytic == r);
    CHECK(std::abs(contact_estimate(f1, f2, x).r_est - analytic) <= 0.1);
    CHECK(std::abs(contact_estimate(opaque(f1), opaque(f2), x).r_est - analytic) <= 0.1);
  }
}

TEST_CASE("residual chart transform examples") {
  const AdaptedFamily f1 = family(1, {"0.3 + t*x1"});
  const AdaptedFamily f2 = family(1, {"0.3 + t*x1 + t^2"});
  const Vec x = vec({0.5});

  CodomainMap id{[](const Vec& y) { return y; }, nullptr, std::nullopt};
  const ChartTransformCheck a = residual_chart_transform_check(f1, f2, x, 2, id);
  CHECK(std::abs(a.pushed(0) - 1.0) < 1e-12);
  CHECK(std::abs(a.measured(0) - 1.0) < 1e-6);

  CodomainMap twice{[](const Vec& y) { return Vec(2.0 * y); }, nullptr, std::nullopt};
  const ChartTransformCheck b = residual_chart_transform_check(f1, f2, x, 2, twice);
  CHECK(std::abs(b.measured(0) - 2.0 * a.measured(0)) < 1e-6);

  // Chain rule oracle: (1 + 2 y0) at y0 = 0.3.
  CodomainMap quad{[](const Vec& y) { return Vec(y.array() + y.array().square()); },
                   [](const Vec& y) { return Mat((1.0 + 2.0 * y.array()).matrix().asDiagonal()); }, std::nullopt};
  const ChartTransformCheck c = residual_chart_transform_check(f1, f2, x, 2, quad);
  CHECK(std::abs(c.pushed(0) - 1.6) < 1e-6);
  CHECK(std::abs(c.measured(0) - 1.6) < 1e-6);
}

TEST_CASE("property: residuals push forward under random quadratic charts") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const AdaptedFamily f1 = family(1, {"x1 + t*x1", "sin(x1) + t^2"});
  const AdaptedFamily f2 = family(1, {"x1 + t*x1 + t^2*cos(x1)", "sin(x1) + t^2 + t^2*x1"});
  for (int k = 0; k < 10; ++k) {
    Mat a = Mat::Identity(2, 2);
    a(0, 1) = u(rng);
    a(1, 0) = u(rng);
    const double q0 = u(rng), q1 = u(rng), q2 = u(rng);
    CodomainMap phi{[=](const Vec& y) {
                      Vec out = a * y;
                      out(0) += q0 * y(0) * y(1);
                      out(1) += q1 * y(0) * y(0) + q2 * y(1) * y(1);
                      return out;
                    },
                    nullptr, std::nullopt};
    const ChartTransformCheck c = residual_chart_transform_check(f1, f2, vec({u(rng)}), 2, phi);
    CHECK(c.discrepancy <= 1e-6);
  }
}

TEST_CASE("hat division examples") {
  const Vec x = vec({0.7});
  const AdaptedFamily a = hat_divide(family(1, {"t*x1"}));
  CHECK(a(x, 0.0)(0) == doctest::Approx(0.7));
  CHECK(a(x, 0.3)(0) == doctest::Approx(0.7));

  const AdaptedFamily s = hat_divide(family(1, {"sin(t)"}));
  CHECK(s(x, 0.0)(0) == doctest::Approx(1.0));
  CHECK(s(x, 0.2)(0) == doctest::Approx(std::sin(0.2) / 0.2));

  const AdaptedFamily sq = hat_divide(family(1, {"t^2"}));
  CHECK(std::abs(sq(x, 0.0)(0)) < 1e-15);
  CHECK(sq(x, 0.25)(0) == doctest::Approx(0.25));

  const AdaptedFamily numeric = hat_divide(opaque(family(1, {"sin(t)*x1"})));
  CHECK(std::abs(numeric(x, 0.0)(0) - 0.7) < 1e-9);

  const AdaptedFamily off = hat_divide(family(1, {"1 + t"}));
  CHECK(error_code([&] { off(x, 0.1); }) == ErrorCode::NotInZeroSection);

  const HatContinuity hc = hat_continuity(s, x);
  CHECK(hc.final_gap <= 1e-6);
  CHECK(hc.gaps.size() == hc.h.size());
}

TEST_CASE("hat drop examples") {
  const HatDropCheck a = hat_contact_drop_check(family(1, {"t*x1"}), family(1, {"t*x1 + t^3"}), vec({0.4}), 3);
  CHECK(std::abs(a.original.residual(0) - 1.0) < 1e-12);
  CHECK(std::abs(a.hat.residual(0) - 1.0) < 1e-12);

  const HatDropCheck b =
      hat_contact_drop_check(family(1, {"t*sin(x1)"}), family(1, {"t*sin(x1) + t^4*x1^2"}), vec({1.0}), 4);
  CHECK(std::abs(b.original.residual(0) - 1.0) < 1e-8);
  CHECK(std::abs(b.hat.residual(0) - 1.0) < 1e-8);
  CHECK(b.discrepancy <= 1e-8);

  const AdaptedFamily f = family(1, {"t*x1"});
  const HatDropCheck c = hat_contact_drop_check(f, f, vec({0.4}), 2);
  CHECK(c.original.status == ContactStatus::MachineLimited);
  CHECK(c.hat.status == ContactStatus::MachineLimited);
}

TEST_CASE("fdot examples") {
  CHECK(fdot(family(1, {"x1"}, "t"), vec({0.2})) == 1.0);
  CHECK(fdot(family(1, {"x1"}, "2*t + t^2"), vec({0.2})) == 2.0);
  CHECK(fdot(family(1, {"x1"}, "t*(1 + x1^2)"), vec({1.0})) == doctest::Approx(2.0));
  CHECK(error_code([] { fdot(family(1, {"x1"}), vec({0.2})); }) == ErrorCode::MissingTargetH);
  CHECK(error_code([] { fdot(family(1, {"x1"}, "1 + t"), vec({0.2})); }) == ErrorCode::NotHCompatible);
}

TEST_CASE("composition worked example") {
  // Oracle: g2(f2) - g1(f1) = t^2 (1 + 2x) + O(t^4).
  const CompositionCheck c =
      compose_residual_check(family(1, {"x1"}, "t"), family(1, {"x1 + t^2"}, "t"), family(1, {"x1^2"}),
                             family(1, {"x1^2 + t^2"}), vec({0.5}), 2);
  CHECK(std::abs(c.predicted(0) - 2.0) < 1e-12);
  CHECK(std::abs(c.measured(0) - 2.0) < 1e-12);

  const AdaptedFamily gf = compose(family(1, {"x1^2 + t^2"}), family(1, {"x1 + t^2"}, "t"));
  CHECK(gf(vec({0.5}), 0.1)(0) == doctest::Approx(std::pow(0.5 + 0.01, 2) + 0.01));
  CHECK(gf.symbolic != nullptr);
}

TEST_CASE("inverse families") {
  const AdaptedFamily f = family(1, {"2*x1 + t*x1"}, "t");
  const AdaptedFamily inv = invert_family(f, vec({0.3}));
  const Vec xt = inv(vec({0.9}), 0.1);
  CHECK(std::abs(xt(1) - 0.1) < 1e-12);
  CHECK(std::abs((2.0 + 0.1) * xt(0) - 0.9) < 1e-12);

  const InverseCheck same = inverse_residual_check(f, f, vec({0.3}), 2);
  CHECK(inf_norm(same.predicted) < 1e-14);
  CHECK(inf_norm(same.measured) < 1e-12);

  const InverseCheck lin = inverse_residual_check(family(1, {"x1 + t"}, "t"), family(1, {"x1 + t + t^2"}, "t"),
                                                  vec({0.3}), 2);
  CHECK(std::abs(lin.predicted(0) + 1.0) < 1e-12);
  CHECK(std::abs(lin.measured(0) + 1.0) < 1e-5);
}

TEST_CASE("graph to map examples") {
  const AdaptedFamily a = graph_to_map(family(1, {"x1", "x1 + t*x1"}), {vec({0.5})});
  CHECK(a(vec({0.8}), 0.3)(0) == doctest::Approx(0.8 * 1.3));

  // Hand solve: x + h/2 = m gives x = m - h/2 and f = m + h/2.
  const AdaptedFamily b = graph_to_map(family(1, {"x1 + t/2", "x1 + t"}), {vec({0.5})});
  CHECK(b(vec({0.8}), 0.3)(0) == doctest::Approx(0.95));
  CHECK(b.target_h(vec({0.8}), 0.3) == 0.3);

  CHECK(error_code([] { graph_to_map(family(1, {"x1", "x1 + 1"}), {vec({0.5})}); }) == ErrorCode::NotDiagonal);
}

TEST_CASE("graph bump examples") {
  const AdaptedFamily g1 = family(1, {"x1", "x1 + t"});
  const GraphBumpCheck sym = graph_symmetry_bump_check(
      g1, family(1, {"x1 + t^2*x1^2", "x1 + t + t^2*x1^2 + t^3*x1"}), vec({0.5}), 2);
  CHECK(sym.symmetric);
  CHECK(std::abs(sym.map_contact.r_est - 3.0) < 0.1);
  CHECK(sym.pass);

  const GraphBumpCheck exact =
      graph_symmetry_bump_check(g1, family(1, {"x1 + t^2*x1^2", "x1 + t + t^2*x1^2"}), vec({0.5}), 2);
  CHECK(exact.symmetric);
  CHECK(exact.pass);

  const GraphBumpCheck asym = graph_symmetry_bump_check(g1, family(1, {"x1", "x1 + t + t^2*x1^2"}), vec({0.5}), 2);
  CHECK_FALSE(asym.symmetric);
  CHECK(std::abs(asym.map_contact.r_est - 2.0) < 0.1);
  CHECK(std::abs(asym.map_contact.residual(0) - 0.25) < 1e-6);
  CHECK(asym.pass);

  const GraphBumpCheck same = graph_symmetry_bump_check(g1, g1, vec({0.5}), 2);
  CHECK(same.map_contact.status == ContactStatus::MachineLimited);
}

TEST_CASE("distribution residual examples") {
  auto dist = [](const std::vector<std::string>& entries) {
    return DistributionFamily{1, 2, family(3, entries)};
  };
  const DistributionResidual a = distribution_residual(dist({"x3", "0"}), dist({"x3 + t^2", "0"}), vec({0, 1, 2}), 2);
  CHECK((a.residual - mat({{1, 0}})).cwiseAbs().maxCoeff() < 1e-12);

  const DistributionResidual b = distribution_residual(dist({"x3", "0"}), dist({"x3", "0"}), vec({0, 1, 2}), 2);
  CHECK(b.residual.isZero(0.0));

  const DistributionResidual c =
      distribution_residual(dist({"x3", "0"}), dist({"x3 + t^3*x2", "t^3"}), vec({0, 2, 1}), 3);
  CHECK((c.residual - mat({{2, 1}})).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("family construction checks") {
  const AdaptedFamily f = family(2, {"x1*x2 + t"});
  CHECK(error_code([&] { f(vec({1.0}), 0.0); }) == ErrorCode::DimensionMismatch);
  const AdaptedFamily bad = family(1, {"log(x1) + t"});
  CHECK(error_code([&] { bad(vec({-1.0}), 0.0); }) == ErrorCode::DomainError);
  const Mat j = f.jacobian(vec({2.0, 3.0}), 0.0);
  CHECK((j - mat({{3, 2, 1}})).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((opaque(f).jacobian(vec({2.0, 3.0}), 0.0) - j).cwiseAbs().maxCoeff() < 1e-8);
}
