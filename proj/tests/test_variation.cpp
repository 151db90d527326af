#include "helpers.hpp"
#include "skewcrit/config.hpp"
#include "skewcrit/examples.hpp"
#include "skewcrit/variation.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace skewcrit;
using testing::error_code;
using testing::inf_norm;
using testing::mat;
using testing::vec;

namespace {

ProblemFamily fam(const char* name) { return build_family(builtin_config(name)); }

ContactOptions claim(int r) {
  ContactOptions o;
  o.r_claimed = r;
  return o;
}

ProblemFamily from_text(const std::string& alpha2) {
  return build_family(parse_config_text(
      R"({"version": 1, "name": "tmp", "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
          "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"], "alpha2": )" +
      alpha2 + "}"));
}

}  // namespace

TEST_CASE("solve_family examples") {
  const ProblemFamily f = fam("trivial-alpha-perturbed");
  for (double t : {0.0, 0.1, 0.3}) {
    const SolveResult a = solve_family(f, 1, vec({0.7}), t, vec({0.7, 0.1}));
    CHECK(inf_norm(a.x_c - vec({0.7, 0.0})) < 1e-12);
    const SolveResult b = solve_family(f, 2, vec({0.7}), t, vec({0.7, 0.1}));
    CHECK(inf_norm(b.x_c - vec({0.7, -t * t})) < 1e-12);
  }
  CHECK(solve_family(f, 1, vec({0.7}), 0.0, vec({0.7, 0.1})).x_c ==
        solve_family(f, 2, vec({0.7}), 0.0, vec({0.7, 0.1})).x_c);
  CHECK(error_code([&] { f.member(3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("members must coincide at t = 0") {
  const ProblemFamily bad = from_text(R"(["x1", "x2 + 1 + t"])");
  CHECK(error_code([&] { bad.check_coincide({vec({0.1, 0.2})}); }) == ErrorCode::BaseMismatch);
  CHECK_NOTHROW(fam("trivial-alpha-perturbed").check_coincide({vec({0.1, 0.2}), vec({-1.0, 3.0})}));
}

TEST_CASE("solution families preserve h") {
  const AdaptedFamily g = solution_family(fam("trivial-alpha-perturbed"), 2, vec({0.7, 0.0}));
  for (double t : {0.0, 0.05, 0.2}) CHECK(g.target_h(vec({0.7}), t) == t);
  CHECK(inf_norm(g(vec({0.7}), 0.2) - vec({0.7, -0.04})) < 1e-12);
}

TEST_CASE("verify_gamma_contact examples") {
  const GammaContactReport a = verify_gamma_contact(fam("trivial-alpha-perturbed"), vec({0.7}), vec({0.7, 0.1}), 2, claim(2));
  CHECK(std::abs(a.estimate.r_est - 2.0) < 0.1);
  CHECK(inf_norm(a.estimate.residual - vec({0.0, -1.0})) < 1e-6);
  CHECK(a.pass);

  const GammaContactReport b = verify_gamma_contact(fam("identical"), vec({0.7}), vec({0.7, 0.1}), 2, claim(2));
  CHECK(b.estimate.status == ContactStatus::MachineLimited);
  CHECK(b.pass);

  const GammaContactReport c = verify_gamma_contact(fam("skew3d-alpha-cubic"), vec({0.4}), vec({0.4, 0.1, -0.1}), 3, claim(3));
  CHECK(std::abs(c.estimate.r_est - 3.0) < 0.1);

  const ProblemFamily first_order = from_text(R"(["x1", "x2 + t*x1"])");
  CHECK(error_code([&] { verify_gamma_contact(first_order, vec({0.7}), vec({0.7, 0.1}), 2, claim(2)); }) ==
        ErrorCode::DataContactViolation);
}

TEST_CASE("residual system examples") {
  const ResidualSystem a = assemble_residual_system(fam("trivial-alpha-perturbed"), vec({0.7, 0.0}), vec({0.7}), 2);
  CHECK((a.a - mat({{0, 1}, {1, 0}})).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(inf_norm(a.b - vec({1.0, 0.0})) < 1e-12);
  CHECK(inf_norm(predict_solution_residual(a) - vec({0.0, -1.0})) < 1e-12);

  const ResidualSystem z = assemble_residual_system(fam("identical"), vec({0.7, 0.0}), vec({0.7}), 2);
  CHECK(z.b.isZero(0.0));
  CHECK(inf_norm(predict_solution_residual(z)) == 0.0);

  const ResidualSystem g = assemble_residual_system(fam("trivial-g-perturbed"), vec({0.7, 0.0}), vec({0.7}), 2);
  CHECK(inf_norm(g.b - vec({0.0, 0.5})) < 1e-12);
  CHECK(inf_norm(predict_solution_residual(g) - vec({-0.5, 0.0})) < 1e-12);

  // Oracle: x2 + 0.5 t^2 x1 = 0 gives x2 = -0.35 t^2 at x1 = 0.7.
  const ResidualSystem d = assemble_residual_system(fam("trivial-delta-perturbed"), vec({0.7, 0.0}), vec({0.7}), 2);
  CHECK(inf_norm(predict_solution_residual(d) - vec({0.0, -0.35})) < 1e-12);
  CHECK((d.delta_residual - mat({{0.5}})).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("residual system hypotheses") {
  CHECK(error_code([] {
          assemble_residual_system(fam("trivial-alpha-perturbed"), vec({0.7, 0.3}), vec({0.7}), 2);
        }) == ErrorCode::HypothesisViolated);

  const ProblemFamily deg = build_family(parse_config_text(
      R"({"version": 1, "name": "deg", "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
          "alpha": ["1", "0"], "delta": [["0"]], "g": ["x1"], "alpha2": ["1", "t^2"]})"));
  CHECK(error_code([&] { assemble_residual_system(deg, vec({0.5, 0.0}), vec({0.5}), 2); }) ==
        ErrorCode::DegenerateHessian);

  ResidualSystem broken;
  broken.a = Mat::Zero(2, 2);
  broken.b = Vec::Ones(2);
  CHECK(error_code([&] { predict_solution_residual(broken); }) == ErrorCode::SingularSystem);
}

TEST_CASE("property: predictions match measurements across the registry") {
  for (const auto& e : builtin_examples()) {
    const ProblemConfig cfg = builtin_config(e.name);
    if (!cfg.has_problem() || !cfg.is_family() || !cfg.experiment.r_claimed) continue;
    CAPTURE(e.name);
    const ProblemFamily f = build_family(cfg);
    const int r = *cfg.experiment.r_claimed;
    const Vec y = vec({cfg.experiment.y.at(0).at(0)});
    const Vec x0 = Eigen::Map<const Vec>(cfg.experiment.x0.data(), static_cast<Eigen::Index>(cfg.experiment.x0.size()));
    const GammaContactReport g = verify_gamma_contact(f, y, x0, r, claim(r));
    ResidualSystemOptions so;
    so.contact = claim(r);
    const Vec u1 = predict_solution_residual(assemble_residual_system(f, g.x_base, y, r, so));
    CHECK(inf_norm(u1 - g.estimate.residual) <= 1e-4 * (1.0 + inf_norm(g.estimate.residual)));
    if (r >= 2) {
      so.index = 2;
      const Vec u2 = predict_solution_residual(assemble_residual_system(f, g.x_base, y, r, so));
      CHECK(inf_norm(u2 - u1) <= 1e-6 * inf_norm(u1) + 1e-12);
    }
  }
}

TEST_CASE("gamma dot readings coincide for h-preserving families") {
  const ProblemFamily f = fam("trivial-alpha-perturbed");
  ResidualSystemOptions so;
  const Vec base = predict_solution_residual(assemble_residual_system(f, vec({0.7, 0.0}), vec({0.7}), 2, so));
  for (GammaDotReading r : {GammaDotReading::FactorOnHessian, GammaDotReading::FactorOnDataResidual}) {
    so.reading = r;
    CHECK(inf_norm(predict_solution_residual(assemble_residual_system(f, vec({0.7, 0.0}), vec({0.7}), 2, so)) -
                   base) < 1e-14);
  }
}

TEST_CASE("equivariance") {
  const ProblemConfig sym = builtin_config("reflection-symmetric");
  EquivarianceOptions eo;
  eo.contact = claim(2);
  const EquivarianceReport id =
      equivariance_check(build_family(sym), GroupAction::identity(2, 1), vec({0.7}), vec({0.7, 0.1}), 2, eo);
  CHECK(id.pass);
  CHECK(id.max_discrepancy == 0.0);

  const EquivarianceReport refl =
      equivariance_check(build_family(sym), build_group(sym), vec({0.7}), vec({0.7, 0.1}), 2, eo);
  CHECK(refl.pass);
  CHECK(refl.max_discrepancy < 1e-8);
  CHECK(refl.sample_points == 20);

  const ProblemConfig odd = builtin_config("reflection-odd");
  try {
    equivariance_check(build_family(odd), build_group(odd), vec({0.7}), vec({0.7, 0.1}), 2, eo);
    FAIL("expected a hypothesis violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisViolated);
    CHECK(std::string(e.what()).find("data residual") != std::string::npos);
  }
}

TEST_CASE("group actions are validated") {
  GroupAction singular{{{mat({{1, 0}, {0, 0}}), mat({{1}})}}};
  CHECK(error_code([&] { singular.validate(2, 1); }) == ErrorCode::InvalidArgument);
  GroupAction infinite{{{mat({{2, 0}, {0, 1}}), mat({{2}})}}};
  CHECK(error_code([&] { infinite.validate(2, 1); }) == ErrorCode::InvalidArgument);
  GroupAction refl{{{mat({{-1, 0}, {0, 1}}), mat({{-1}})}}};
  CHECK_NOTHROW(refl.validate(2, 1));
}

TEST_CASE("graph transforms") {
  const AmbientChart c = AmbientChart::make(3, 1, 2, {1, 2});
  const Mat delta = mat({{0.3, -0.2}});
  CHECK((transform_graph(c, Mat::Identity(3, 3), delta) - delta).norm() < 1e-15);

  // The transformed graph spans tau applied to the original fiber.
  Mat tau = mat({{1, 0.2, 0}, {0.1, 1, 0.3}, {0, -0.4, 1}});
  const Mat out = transform_graph(c, tau, delta);
  const Mat spanned = tau * c.graph_basis(delta);
  const Mat rebuilt = c.graph_basis(out);
  const Mat coeffs = rebuilt.colPivHouseholderQr().solve(spanned);
  CHECK((rebuilt * coeffs - spanned).cwiseAbs().maxCoeff() < 1e-12);

  const Mat dir = mat({{1.0, 0.5}});
  const double h = 1e-6;
  const Mat fd = (transform_graph(c, tau, delta + h * dir) - transform_graph(c, tau, delta - h * dir)) / (2 * h);
  CHECK((transform_graph_derivative(c, tau, delta, dir) - fd).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("data contacts") {
  const DataContacts dc = data_contacts(fam("trivial-alpha-perturbed"), vec({0.7, 0.0}), 2, claim(2));
  CHECK(std::abs(dc.alpha.r_est - 2.0) < 0.1);
  CHECK(inf_norm(dc.alpha.residual - vec({0.0, 1.0})) < 1e-12);
  CHECK(dc.g.status == ContactStatus::MachineLimited);
  CHECK(dc.delta.status == ContactStatus::MachineLimited);
}
