#include "skewcrit/variation.hpp"

#include "skewcrit/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace skewcrit {

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double inf_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

struct Blocks {
  Mat dd, df, fd, ff;
};

Blocks split_blocks(const AmbientChart& chart, const Mat& tau) {
  const int d = chart.d;
  const int f = chart.n - chart.d;
  Blocks b{Mat(d, d), Mat(d, f), Mat(f, d), Mat(f, f)};
  for (int j = 0; j < d; ++j) {
    const int rj = chart.dist_coords[static_cast<std::size_t>(j)];
    for (int k = 0; k < d; ++k) b.dd(j, k) = tau(rj, chart.dist_coords[static_cast<std::size_t>(k)]);
    for (int l = 0; l < f; ++l) b.df(j, l) = tau(rj, chart.perp_coords[static_cast<std::size_t>(l)]);
  }
  for (int l = 0; l < f; ++l) {
    const int rl = chart.perp_coords[static_cast<std::size_t>(l)];
    for (int k = 0; k < d; ++k) b.fd(l, k) = tau(rl, chart.dist_coords[static_cast<std::size_t>(k)]);
    for (int k = 0; k < f; ++k) b.ff(l, k) = tau(rl, chart.perp_coords[static_cast<std::size_t>(k)]);
  }
  return b;
}

Mat graph_denominator_inverse(const Blocks& b, const Mat& delta) {
  const Mat den = b.dd + b.df * delta;
  Eigen::FullPivLU<Mat> lu(den);
  if (den.size() > 0 && !lu.isInvertible()) {
    throw Error(ErrorCode::NonGraph, "transformed distribution is not a graph over the chart splitting");
  }
  return den.size() > 0 ? Mat(lu.inverse()) : den;
}

void hypothesis(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::HypothesisViolated, what);
}

}  // namespace

SkewProblem ParametricProblem::at(const AmbientChart& chart, double t) const {
  const int n = chart.n;
  const int d = chart.d;
  if (alpha.in_dim != n || delta.in_dim != n || g.in_dim != n) {
    throw Error(ErrorCode::DimensionMismatch, "parametric problem families must take x in R^n");
  }
  if (alpha.out_dim != n || delta.out_dim != (n - d) * d || g.out_dim != chart.m) {
    throw Error(ErrorCode::DimensionMismatch, "parametric problem family outputs do not match the chart");
  }
  SkewProblem p;
  p.chart = chart;
  p.alpha.n = n;
  p.alpha.eval = [a = alpha, t](const Vec& x) { return a(x, t); };
  if (alpha.jac) p.alpha.jac = [a = alpha, t, n](const Vec& x) { return Mat(a.jac(x, t).leftCols(n)); };
  p.dist.n = n;
  p.dist.d = d;
  p.dist.delta = [dl = delta, t, n, d](const Vec& x) { return unflatten_rows(dl(x, t), n - d, d); };
  if (delta.jac) p.dist.jac = [dl = delta, t, n](const Vec& x) { return Mat(dl.jac(x, t).leftCols(n)); };
  p.g.n = n;
  p.g.m = chart.m;
  p.g.eval = [gg = g, t](const Vec& x) { return gg(x, t); };
  if (g.jac) p.g.jac = [gg = g, t, n](const Vec& x) { return Mat(gg.jac(x, t).leftCols(n)); };
  return p;
}

const ParametricProblem& ProblemFamily::member(int i) const {
  if (i != 1 && i != 2) throw Error(ErrorCode::InvalidArgument, "family member index must be 1 or 2");
  return members[static_cast<std::size_t>(i - 1)];
}

void ProblemFamily::check_coincide(const std::vector<Vec>& points) const {
  for (const Vec& x : points) {
    const auto gap = [&x](const AdaptedFamily& a, const AdaptedFamily& b) { return inf_norm(Vec(a(x, 0.0) - b(x, 0.0))); };
    if (gap(members[0].alpha, members[1].alpha) > 1e-12 || gap(members[0].delta, members[1].delta) > 1e-12 ||
        gap(members[0].g, members[1].g) > 1e-12) {
      throw Error(ErrorCode::BaseMismatch, "family members differ at t = 0");
    }
  }
}

SolveResult solve_family(const ProblemFamily& fam, int i, const Vec& y, double t, const Vec& x0,
                         const NewtonSettings& s) {
  return solve(fam.at(i, t), y, x0, s);
}

NewtonSettings family_newton_settings() {
  NewtonSettings s;
  s.tol_residual = 1e-12;
  s.max_iter = 50;
  s.polish_steps = 2;
  s.require_nondegenerate = false;
  return s;
}

AdaptedFamily solution_family(const ProblemFamily& fam, int i, const Vec& base_x) {
  const NewtonSettings s = family_newton_settings();
  AdaptedFamily f = AdaptedFamily::from_function(
      fam.chart.m, fam.chart.n,
      [fam, i, base_x, s](const Vec& y, double t) { return solve_family(fam, i, y, t, base_x, s).x_c; });
  // Frozen-t solves: h_M o gamma_i = h_N by construction.
  f.target_h = [](const Vec&, double t) { return t; };
  f.target_h_dt = [](const Vec&) { return 1.0; };
  return f;
}

DataContacts data_contacts(const ProblemFamily& fam, const Vec& x, int r, const ContactOptions& opts) {
  ContactOptions o = opts;
  o.r_claimed = r;
  const auto& a = fam.members[0];
  const auto& b = fam.members[1];
  return {contact_estimate(a.alpha, b.alpha, x, o), contact_estimate(a.delta, b.delta, x, o),
          contact_estimate(a.g, b.g, x, o)};
}

GammaContactReport verify_gamma_contact(const ProblemFamily& fam, const Vec& y, const Vec& x0, int r,
                                        const ContactOptions& opts) {
  GammaContactReport rep;
  NewtonSettings base = family_newton_settings();
  base.require_nondegenerate = true;
  rep.x_base = solve_family(fam, 1, y, 0.0, x0, base).x_c;
  fam.check_coincide({rep.x_base});
  rep.data = data_contacts(fam, rep.x_base, r, opts);
  const std::pair<const char*, const ContactEstimate*> parts[] = {
      {"alpha", &rep.data.alpha}, {"delta", &rep.data.delta}, {"g", &rep.data.g}};
  for (const auto& [name, est] : parts) {
    if (!est->at_least(r)) {
      throw Error(ErrorCode::DataContactViolation, std::string(name) + " families have contact slope " +
                                                       std::to_string(est->r_est) + " below " + std::to_string(r));
    }
  }
  ContactOptions o = opts;
  o.r_claimed = r;
  rep.estimate = contact_estimate(solution_family(fam, 1, rep.x_base), solution_family(fam, 2, rep.x_base), y, o);
  rep.pass = rep.estimate.at_least(r);
  return rep;
}

std::string to_string(GammaDotReading r) {
  switch (r) {
    case GammaDotReading::HPreserving: return "h-preserving";
    case GammaDotReading::FactorOnHessian: return "factor-on-hessian";
    case GammaDotReading::FactorOnDataResidual: return "factor-on-data-residual";
  }
  return "?";
}

ResidualSystem assemble_residual_system(const ProblemFamily& fam, const Vec& x_c, const Vec& y_c, int r,
                                        const ResidualSystemOptions& opts) {
  const AmbientChart& chart = fam.chart;
  const int n = chart.n;
  const int d = chart.d;
  const int m = chart.m;
  if (x_c.size() != n || y_c.size() != m) throw Error(ErrorCode::DimensionMismatch, "x_c or y_c has wrong length");
  const SkewProblem p1 = fam.at(1, 0.0);
  const SkewProblem pi = fam.at(opts.index, 0.0);

  const FValue f = f_map(p1, x_c);
  hypothesis(inf_norm(f.alpha_d) <= opts.critical_tol,
             "x_c is not a skew critical point: alpha_D = " + std::to_string(inf_norm(f.alpha_d)));
  hypothesis(inf_norm(Vec(f.g - y_c)) <= opts.critical_tol * std::max(1.0, inf_norm(y_c)), "g(x_c) differs from y_c");

  ResidualSystem sys;
  sys.d = d;
  sys.m = m;
  sys.gamma_dot = opts.gamma_dot;
  const auto& a1 = fam.members[0];
  const auto& a2 = fam.members[1];
  sys.alpha_residual = residual_at(a1.alpha, a2.alpha, x_c, r, opts.contact);
  sys.delta_residual = unflatten_rows(residual_at(a1.delta, a2.delta, x_c, r, opts.contact), n - d, d);
  sys.g_residual = residual_at(a1.g, a2.g, x_c, r, opts.contact);

  const Mat basis = chart.graph_basis(p1.dist.delta(x_c));
  const Vec alpha1 = p1.alpha.eval(x_c);
  Vec b_f = basis.transpose() * sys.alpha_residual;
  for (int l = 0; l < n - d; ++l) {
    b_f += alpha1(chart.perp_coords[static_cast<std::size_t>(l)]) * sys.delta_residual.row(l).transpose();
  }

  const double hess_factor = opts.reading == GammaDotReading::FactorOnHessian ? opts.gamma_dot : 1.0;
  const double data_factor =
      opts.reading == GammaDotReading::FactorOnDataResidual ? std::pow(opts.gamma_dot, r) : 1.0;

  sys.a.resize(d + m, n);
  sys.a << hess_factor * alpha_on_D_jacobian(pi, x_c), constraint_jacobian(pi, x_c);
  sys.b.resize(d + m);
  sys.b << data_factor * b_f, sys.g_residual;
  sys.condition_number = condition_number(sys.a);
  if (!(sys.condition_number < 1e8)) {
    throw Error(ErrorCode::DegenerateHessian,
                "residual system has condition number " + std::to_string(sys.condition_number));
  }
  return sys;
}

Vec predict_solution_residual(const ResidualSystem& sys) {
  if (sys.a.rows() != sys.a.cols() || sys.a.rows() != sys.b.size()) {
    throw Error(ErrorCode::SingularSystem, "residual system is not square");
  }
  Eigen::FullPivLU<Mat> lu(sys.a);
  if (!lu.isInvertible() || !(condition_number(sys.a) < 1e12)) {
    throw Error(ErrorCode::SingularSystem, "residual system matrix is singular");
  }
  return lu.solve(Vec(-sys.b));
}

// ---------------------------------------------------------------- equivariance

GroupAction GroupAction::identity(int n, int m) { return {{{Mat::Identity(n, n), Mat::Identity(m, m)}}}; }

void GroupAction::validate(int n, int m, int cap) const {
  if (generators.empty()) throw Error(ErrorCode::InvalidArgument, "group action has no generators");
  for (const auto& [tm, tn] : generators) {
    if (tm.rows() != n || tm.cols() != n || tn.rows() != m || tn.cols() != m) {
      throw Error(ErrorCode::DimensionMismatch, "generator matrices have the wrong shape");
    }
    if ((n > 0 && !Eigen::FullPivLU<Mat>(tm).isInvertible()) || (m > 0 && !Eigen::FullPivLU<Mat>(tn).isInvertible())) {
      throw Error(ErrorCode::InvalidArgument, "generator is not invertible");
    }
  }
  std::vector<std::pair<Mat, Mat>> elems{{Mat::Identity(n, n), Mat::Identity(m, m)}};
  for (std::size_t k = 0; k < elems.size(); ++k) {
    for (const auto& [tm, tn] : generators) {
      Mat pm = tm * elems[k].first;
      Mat pn = tn * elems[k].second;
      const bool known = std::any_of(elems.begin(), elems.end(), [&](const auto& e) {
        return (e.first - pm).cwiseAbs().maxCoeff() <= 1e-9 && (m == 0 || (e.second - pn).cwiseAbs().maxCoeff() <= 1e-9);
      });
      if (!known) {
        if (static_cast<int>(elems.size()) >= cap) {
          throw Error(ErrorCode::InvalidArgument, "generated group exceeds " + std::to_string(cap) + " elements");
        }
        elems.emplace_back(std::move(pm), std::move(pn));
      }
    }
  }
}

Mat transform_graph(const AmbientChart& chart, const Mat& tau, const Mat& delta) {
  const Blocks b = split_blocks(chart, tau);
  return (b.fd + b.ff * delta) * graph_denominator_inverse(b, delta);
}

Mat transform_graph_derivative(const AmbientChart& chart, const Mat& tau, const Mat& delta, const Mat& dir) {
  const Blocks b = split_blocks(chart, tau);
  const Mat inv = graph_denominator_inverse(b, delta);
  return b.ff * dir * inv - (b.fd + b.ff * delta) * inv * b.df * dir * inv;
}

EquivarianceReport equivariance_check(const ProblemFamily& fam, const GroupAction& action, const Vec& y,
                                      const Vec& x0, int r, const EquivarianceOptions& opts) {
  const AmbientChart& chart = fam.chart;
  const int n = chart.n;
  const int d = chart.d;
  action.validate(n, chart.m);
  NewtonSettings base = family_newton_settings();
  base.require_nondegenerate = true;
  const Vec x_c = solve_family(fam, 1, y, 0.0, x0, base).x_c;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-opts.sample_radius, opts.sample_radius);
  std::vector<Vec> cloud;
  for (int k = 0; k < opts.sample_points; ++k) {
    Vec p = x_c;
    for (int i = 0; i < n; ++i) p(i) += unif(rng);
    cloud.push_back(std::move(p));
  }

  const SkewProblem p0 = fam.at(1, 0.0);
  const auto& a1 = fam.members[0];
  const auto& a2 = fam.members[1];
  const double tol = opts.hypothesis_tol;
  auto close = [tol](const Vec& u, const Vec& v) { return inf_norm(Vec(u - v)) <= tol * std::max(1.0, inf_norm(v)); };
  auto close_m = [tol](const Mat& u, const Mat& v) { return inf_norm(Mat(u - v)) <= tol * std::max(1.0, inf_norm(v)); };

  for (std::size_t gi = 0; gi < action.generators.size(); ++gi) {
    const Mat& tm = action.generators[gi].first;
    const Mat& tn = action.generators[gi].second;
    const std::string tag = " under generator " + std::to_string(gi + 1);
    for (const Vec& x : cloud) {
      const Vec tx = tm * x;
      hypothesis(close(tm.transpose() * p0.alpha.eval(tx), p0.alpha.eval(x)), "alpha is not invariant" + tag);
      hypothesis(close_m(p0.dist.delta(tx), transform_graph(chart, tm, p0.dist.delta(x))),
                 "distribution is not invariant" + tag);
      hypothesis(close(p0.g.eval(tx), tn * p0.g.eval(x)), "constraint is not equivariant" + tag);
    }
    for (const Vec& x : cloud) {
      const Vec tx = tm * x;
      const Vec ra = residual_at(a1.alpha, a2.alpha, x, r, opts.contact);
      const Vec ra_t = residual_at(a1.alpha, a2.alpha, tx, r, opts.contact);
      hypothesis(close(tm.transpose() * ra_t, ra), "data residual of alpha is not equivariant" + tag);
      const Vec rg = residual_at(a1.g, a2.g, x, r, opts.contact);
      const Vec rg_t = residual_at(a1.g, a2.g, tx, r, opts.contact);
      hypothesis(close(rg_t, tn * rg), "data residual of g is not equivariant" + tag);
      const Mat rd = unflatten_rows(residual_at(a1.delta, a2.delta, x, r, opts.contact), n - d, d);
      const Mat rd_t = unflatten_rows(residual_at(a1.delta, a2.delta, tx, r, opts.contact), n - d, d);
      hypothesis(close_m(rd_t, transform_graph_derivative(chart, tm, p0.dist.delta(x), rd)),
                 "data residual of the distribution is not equivariant" + tag);
    }
  }

  EquivarianceReport rep;
  rep.sample_points = static_cast<int>(cloud.size());
  const Vec res_y = verify_gamma_contact(fam, y, x_c, r, opts.contact).estimate.residual;
  for (const auto& [tm, tn] : action.generators) {
    EquivarianceItem item;
    item.residual_at_y = res_y;
    item.residual_at_tau_y = verify_gamma_contact(fam, Vec(tn * y), Vec(tm * x_c), r, opts.contact).estimate.residual;
    item.discrepancy = inf_norm(Vec(tm * res_y - item.residual_at_tau_y));
    rep.max_discrepancy = std::max(rep.max_discrepancy, item.discrepancy);
    rep.items.push_back(std::move(item));
  }
  rep.pass = rep.max_discrepancy < opts.tol;
  return rep;
}

}  // namespace skewcrit
