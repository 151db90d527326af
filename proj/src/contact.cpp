#include "skewcrit/contact.hpp"

#include "skewcrit/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>

namespace skewcrit {

using expr::Expr;
using expr::Var;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double factorial(int r) {
  double f = 1.0;
  for (int k = 2; k <= r; ++k) f *= k;
  return f;
}

Vec checked(const Vec& v, int want, const char* what) {
  if (v.size() != want) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " returned length " + std::to_string(v.size()) +
                                                  ", expected " + std::to_string(want));
  }
  if (!v.allFinite()) throw Error(ErrorCode::NonFiniteEvaluation, std::string(what) + " returned a non-finite value");
  return v;
}

void require_same_shape(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x) {
  if (f1.in_dim != f2.in_dim || f1.out_dim != f2.out_dim) {
    throw Error(ErrorCode::DimensionMismatch, "families have different dimensions");
  }
  if (x.size() != f1.in_dim) throw Error(ErrorCode::DimensionMismatch, "base point has wrong length");
}

void validate_h_seq(const std::vector<double>& h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || (i > 0 && !(h[i] < h[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "h sequence must be positive and strictly decreasing");
    }
  }
}

/// h_N o f as a scalar family, exact when f carries an expression for it.
AdaptedFamily target_h_family(const AdaptedFamily& f) {
  if (!f.target_h) throw Error(ErrorCode::MissingTargetH, "family has no codomain h");
  if (f.symbolic && f.symbolic->target_h()) {
    return AdaptedFamily::from_expressions(f.in_dim, {*f.symbolic->target_h()});
  }
  auto th = f.target_h;
  AdaptedFamily out = AdaptedFamily::from_function(f.in_dim, 1, [th](const Vec& x, double t) {
    Vec v(1);
    v(0) = th(x, t);
    return v;
  });
  return out;
}

}  // namespace

// ---------------------------------------------------------------- SymbolicFamily

struct SymbolicFamily::Cache {
  std::mutex mu;
  std::deque<std::vector<Expr>> derivs;  // push_back keeps references valid
};

SymbolicFamily::SymbolicFamily(int in_dim, std::vector<Expr> components, std::optional<Expr> target_h)
    : in_dim_(in_dim), components_(std::move(components)), target_h_(std::move(target_h)),
      cache_(std::make_shared<Cache>()) {
  cache_->derivs.push_back(components_);
  for (const Expr& c : components_) {
    std::vector<Expr> row;
    for (int i = 0; i < in_dim_; ++i) row.push_back(c.diff(Var::x(i)));
    row.push_back(c.diff(Var::t()));
    gradient_.push_back(std::move(row));
  }
}

Vec SymbolicFamily::eval(const Vec& x, double t) const {
  const expr::Env env{std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), t, {}};
  Vec out(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) out(static_cast<Eigen::Index>(i)) = components_[i].eval(env);
  return out;
}

const std::vector<Expr>& SymbolicFamily::t_derivative(int k) const {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "derivative order must be nonnegative");
  std::lock_guard<std::mutex> lock(cache_->mu);
  while (static_cast<int>(cache_->derivs.size()) <= k) {
    std::vector<Expr> next;
    for (const Expr& e : cache_->derivs.back()) next.push_back(e.diff(Var::t()));
    cache_->derivs.push_back(std::move(next));
  }
  return cache_->derivs[static_cast<std::size_t>(k)];
}

Vec SymbolicFamily::t_derivative_at_zero(const Vec& x, int k) const {
  const std::vector<Expr>& d = t_derivative(k);
  const expr::Env env{std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), 0.0, {}};
  Vec out(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) out(static_cast<Eigen::Index>(i)) = d[i].eval(env);
  return out;
}

Mat SymbolicFamily::jacobian(const Vec& x, double t) const {
  const expr::Env env{std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), t, {}};
  Mat out(static_cast<Eigen::Index>(gradient_.size()), in_dim_ + 1);
  for (std::size_t i = 0; i < gradient_.size(); ++i) {
    for (std::size_t j = 0; j < gradient_[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gradient_[i][j].eval(env);
    }
  }
  return out;
}

// ---------------------------------------------------------------- AdaptedFamily

AdaptedFamily AdaptedFamily::from_expressions(int in_dim, std::vector<Expr> components, std::optional<Expr> target_h) {
  for (const Expr& c : components) {
    for (int p = 0; p < 64; ++p) {
      if (c.depends_on(Var::p(p))) throw Error(ErrorCode::MissingBinding, "family expression has unbound parameters");
    }
  }
  auto sym = std::make_shared<const SymbolicFamily>(in_dim, std::move(components), target_h);
  AdaptedFamily f;
  f.in_dim = in_dim;
  f.out_dim = static_cast<int>(sym->components().size());
  f.symbolic = sym;
  f.eval = [sym](const Vec& x, double t) { return sym->eval(x, t); };
  f.t_deriv = [sym](const Vec& x, int k) { return sym->t_derivative_at_zero(x, k); };
  f.t_deriv_order = std::numeric_limits<int>::max();
  f.jac = [sym](const Vec& x, double t) { return sym->jacobian(x, t); };
  if (target_h) {
    const Expr th = *target_h;
    const Expr th_dt = th.diff(Var::t());
    f.target_h = [th](const Vec& x, double t) {
      return th.eval({std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), t, {}});
    };
    f.target_h_dt = [th_dt](const Vec& x) {
      return th_dt.eval({std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), 0.0, {}});
    };
  }
  return f;
}

AdaptedFamily AdaptedFamily::from_function(int in_dim, int out_dim, std::function<Vec(const Vec&, double)> fn) {
  AdaptedFamily f;
  f.in_dim = in_dim;
  f.out_dim = out_dim;
  f.eval = std::move(fn);
  return f;
}

Vec AdaptedFamily::operator()(const Vec& x, double t) const {
  if (x.size() != in_dim) throw Error(ErrorCode::DimensionMismatch, "family input has wrong length");
  return checked(eval(x, t), out_dim, "family");
}

Mat AdaptedFamily::jacobian(const Vec& x, double t) const {
  if (jac) return jac(x, t);
  Vec z(in_dim + 1);
  z << x, t;
  const int k = in_dim;
  const auto& self = *this;
  return fd_jacobian([&self, k](const Vec& w) { return self(w.head(k), w(k)); }, z);
}

// ---------------------------------------------------------------- estimates

std::string to_string(ContactStatus s) {
  switch (s) {
    case ContactStatus::Integer: return "integer";
    case ContactStatus::Ambiguous: return "ambiguous";
    case ContactStatus::MachineLimited: return "machine-limited";
  }
  return "?";
}

std::string to_string(ResidualMethod m) { return m == ResidualMethod::Analytic ? "analytic" : "slope_fit"; }

bool ContactEstimate::at_least(int r, double slack) const {
  return status == ContactStatus::MachineLimited || r_est >= r - slack;
}

Vec residual_at(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int r, const ContactOptions& opts,
                ResidualMethod* method) {
  require_same_shape(f1, f2, x);
  if (r < 0) throw Error(ErrorCode::InvalidArgument, "residual order must be nonnegative");
  if (opts.prefer_analytic && f1.has_t_derivs(r) && f2.has_t_derivs(r)) {
    if (method) *method = ResidualMethod::Analytic;
    const Vec d2 = checked(f2.t_deriv(x, r), f2.out_dim, "t-derivative");
    const Vec d1 = checked(f1.t_deriv(x, r), f1.out_dim, "t-derivative");
    return (d2 - d1) / factorial(r);
  }
  if (method) *method = ResidualMethod::SlopeFit;
  validate_h_seq(opts.h_seq);
  std::vector<Sample> samples;
  for (double h : opts.h_seq) {
    const Vec a = f1(x, h);
    const Vec b = f2(x, h);
    const double hr = std::pow(h, r);
    Vec q = (b - a) / hr;
    const double noise = kEps * std::max({1.0, inf_norm(a), inf_norm(b)}) / hr;
    const bool quiet = noise <= opts.richardson_noise * std::max(1.0, inf_norm(q));
    if (!quiet && samples.size() >= 2) break;
    samples.push_back({h, std::move(q)});
    if (static_cast<int>(samples.size()) >= opts.richardson_max) break;
  }
  if (samples.size() == 1) return samples.front().value;
  return richardson_limit(samples, 1.0);
}

int analytic_contact_order(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int max_r, double tol) {
  require_same_shape(f1, f2, x);
  for (int k = 0; k < max_r; ++k) {
    if (!f1.has_t_derivs(k) || !f2.has_t_derivs(k)) {
      throw Error(ErrorCode::InvalidArgument, "families lack analytic t-derivatives");
    }
    const Vec d = f2.t_deriv(x, k) - f1.t_deriv(x, k);
    if (inf_norm(d) > tol) return k;
  }
  return max_r;
}

ContactEstimate contact_estimate(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x,
                                 const ContactOptions& opts) {
  require_same_shape(f1, f2, x);
  validate_h_seq(opts.h_seq);
  if (opts.r_claimed && *opts.r_claimed < 0) throw Error(ErrorCode::InvalidArgument, "claimed order is negative");
  const Vec base1 = f1(x, 0.0);
  const Vec base2 = f2(x, 0.0);
  const double base_gap = inf_norm(base2 - base1);
  if (base_gap > opts.base_tol * std::max(1.0, inf_norm(base1))) {
    throw Error(ErrorCode::BaseMismatch, "families differ by " + std::to_string(base_gap) + " at t = 0");
  }

  ContactEstimate est;
  est.r_claimed = opts.r_claimed;
  est.h_seq = opts.h_seq;
  double scale = std::max(1.0, inf_norm(base1));
  for (double h : opts.h_seq) {
    const Vec a = f1(x, h);
    const Vec b = f2(x, h);
    est.errors.push_back(inf_norm(b - a));
    scale = std::max({scale, inf_norm(a), inf_norm(b)});
  }

  std::vector<std::pair<double, double>> pairs;
  const std::size_t skip =
      opts.h_seq.size() >= static_cast<std::size_t>(opts.drop_largest) + 3 ? static_cast<std::size_t>(opts.drop_largest) : 0;
  for (std::size_t i = skip; i < opts.h_seq.size(); ++i) pairs.emplace_back(opts.h_seq[i], est.errors[i]);
  const double floor = std::max(opts.floor, 100.0 * kEps * scale);
  try {
    const SlopeFit fit = slope_fit(pairs, floor);
    est.r_est = fit.slope;
    est.fit_r2 = fit.r2;
    const double rounded = std::round(fit.slope);
    est.status = (std::abs(fit.slope - rounded) < 0.2 && fit.r2 > 0.999) ? ContactStatus::Integer
                                                                          : ContactStatus::Ambiguous;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BelowFloor) throw;
    est.status = ContactStatus::MachineLimited;
    est.r_est = std::numeric_limits<double>::quiet_NaN();
    est.fit_r2 = 0.0;
  }

  if (opts.r_claimed) {
    est.r_used = *opts.r_claimed;
  } else if (est.status == ContactStatus::MachineLimited) {
    est.r_used = 0;
  } else {
    est.r_used = std::max(1, static_cast<int>(std::lround(est.r_est)));
  }
  est.order_exponent = est.status == ContactStatus::Integer ? static_cast<int>(std::lround(est.r_est)) : est.r_used;

  if (est.status == ContactStatus::MachineLimited && !opts.r_claimed) {
    est.residual = Vec::Zero(f1.out_dim);
    est.method = (opts.prefer_analytic && f1.has_t_derivs(0) && f2.has_t_derivs(0)) ? ResidualMethod::Analytic
                                                                                  : ResidualMethod::SlopeFit;
  } else {
    est.residual = residual_at(f1, f2, x, est.r_used, opts, &est.method);
  }
  return est;
}

// ---------------------------------------------------------------- chart transform

namespace {

AdaptedFamily apply_codomain_map(const CodomainMap& phi, const AdaptedFamily& f) {
  if (phi.exprs && f.symbolic) {
    expr::Substitution sub;
    for (const Expr& c : f.symbolic->components()) sub.x.emplace_back(c);
    std::vector<Expr> comps;
    for (const Expr& e : *phi.exprs) comps.push_back(e.substitute(sub));
    return AdaptedFamily::from_expressions(f.in_dim, std::move(comps));
  }
  const int out = static_cast<int>(phi.eval(f(Vec::Zero(f.in_dim), 0.0)).size());
  auto fn = phi.eval;
  return AdaptedFamily::from_function(f.in_dim, out, [fn, f](const Vec& x, double t) { return fn(f(x, t)); });
}

}  // namespace

ChartTransformCheck residual_chart_transform_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x,
                                                   int r, const CodomainMap& phi, const ContactOptions& opts) {
  require_same_shape(f1, f2, x);
  ContactOptions o = opts;
  o.r_claimed = r;
  const Vec res = contact_estimate(f1, f2, x, o).residual;
  const Vec n = f1(x, 0.0);
  const Mat dphi = phi.jac ? phi.jac(n) : fd_jacobian(phi.eval, n);
  ChartTransformCheck out;
  out.pushed = dphi * res;
  const AdaptedFamily g1 = apply_codomain_map(phi, f1);
  const AdaptedFamily g2 = apply_codomain_map(phi, f2);
  out.measured = residual_at(g1, g2, x, r, o);
  out.discrepancy = inf_norm(out.pushed - out.measured);
  return out;
}

// ---------------------------------------------------------------- hat division

AdaptedFamily hat_divide(const AdaptedFamily& f) {
  AdaptedFamily h;
  h.in_dim = f.in_dim;
  h.out_dim = f.out_dim;
  auto zero_section = [f](const Vec& x) {
    const Vec v = f(x, 0.0);
    if (inf_norm(v) > 1e-12) {
      throw Error(ErrorCode::NotInZeroSection, "family is " + std::to_string(inf_norm(v)) + " away from zero at t = 0");
    }
  };
  h.eval = [f, zero_section](const Vec& x, double t) -> Vec {
    zero_section(x);
    if (t != 0.0) return f(x, t) / t;
    if (f.has_t_derivs(1)) return f.t_deriv(x, 1);
    std::vector<Sample> samples;
    for (double s : halving_sequence(1e-2, 6)) samples.push_back({s, f(x, s) / s});
    return richardson_limit(samples, 1.0);
  };
  if (f.t_deriv && f.t_deriv_order >= 1) {
    h.t_deriv = [f](const Vec& x, int k) -> Vec { return f.t_deriv(x, k + 1) / static_cast<double>(k + 1); };
    h.t_deriv_order = f.t_deriv_order == std::numeric_limits<int>::max() ? f.t_deriv_order : f.t_deriv_order - 1;
  }
  return h;
}

HatContinuity hat_continuity(const AdaptedFamily& hat, const Vec& x) {
  HatContinuity out;
  const Vec at0 = hat(x, 0.0);
  for (int k = 1; k <= 8; ++k) {
    const double h = std::pow(10.0, -k);
    out.h.push_back(h);
    out.gaps.push_back(inf_norm(hat(x, h) - at0));
  }
  out.final_gap = out.gaps.back();
  return out;
}

HatDropCheck hat_contact_drop_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int r,
                                    const ContactOptions& opts) {
  if (r < 2) throw Error(ErrorCode::InvalidArgument, "hat drop needs r >= 2");
  HatDropCheck out;
  ContactOptions o = opts;
  o.r_claimed = r;
  out.original = contact_estimate(f1, f2, x, o);
  o.r_claimed = r - 1;
  out.hat = contact_estimate(hat_divide(f1), hat_divide(f2), x, o);
  out.discrepancy = inf_norm(out.hat.residual - out.original.residual);
  return out;
}

double fdot(const AdaptedFamily& f, const Vec& x) {
  if (!f.target_h) throw Error(ErrorCode::MissingTargetH, "family has no codomain h");
  const double h0 = f.target_h(x, 0.0);
  if (std::abs(h0) > 1e-12) {
    throw Error(ErrorCode::NotHCompatible, "h_N o f is " + std::to_string(h0) + " at t = 0");
  }
  if (f.target_h_dt) return f.target_h_dt(x);
  const double s = default_fd_step(0.0);
  return (f.target_h(x, s) - f.target_h(x, -s)) / (2.0 * s);
}

// ---------------------------------------------------------------- composition

AdaptedFamily compose(const AdaptedFamily& g, const AdaptedFamily& f) {
  if (g.in_dim != f.out_dim) throw Error(ErrorCode::DimensionMismatch, "composition dimensions do not chain");
  if (!f.target_h) throw Error(ErrorCode::MissingTargetH, "inner family has no codomain h");
  if (g.symbolic && f.symbolic && f.symbolic->target_h()) {
    expr::Substitution sub;
    for (const Expr& c : f.symbolic->components()) sub.x.emplace_back(c);
    sub.t = *f.symbolic->target_h();
    std::vector<Expr> comps;
    for (const Expr& e : g.symbolic->components()) comps.push_back(e.substitute(sub));
    std::optional<Expr> th;
    if (g.symbolic->target_h()) th = g.symbolic->target_h()->substitute(sub);
    return AdaptedFamily::from_expressions(f.in_dim, std::move(comps), th);
  }
  AdaptedFamily out = AdaptedFamily::from_function(
      f.in_dim, g.out_dim, [g, f](const Vec& x, double t) { return g(f(x, t), f.target_h(x, t)); });
  if (g.target_h) {
    out.target_h = [g, f](const Vec& x, double t) { return g.target_h(f(x, t), f.target_h(x, t)); };
  }
  return out;
}

CompositionCheck compose_residual_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const AdaptedFamily& g1,
                                        const AdaptedFamily& g2, const Vec& x, int r, bool remark_variant,
                                        const ContactOptions& opts) {
  require_same_shape(f1, f2, x);
  if (g1.in_dim != f1.out_dim || g2.in_dim != f1.out_dim || g1.out_dim != g2.out_dim) {
    throw Error(ErrorCode::DimensionMismatch, "composition dimensions do not chain");
  }
  const double fd1 = fdot(f1, x);
  const double fd2 = fdot(f2, x);
  const Vec n = f1(x, 0.0);

  const Vec res_g = residual_at(g1, g2, n, r, opts);
  const Vec res_fy = residual_at(f1, f2, x, r, opts);
  const Vec res_fs = residual_at(target_h_family(f1), target_h_family(f2), x, r, opts);
  Vec res_f(res_fy.size() + 1);
  res_f << res_fy, res_fs;

  const Mat dg = (remark_variant ? g2 : g1).jacobian(n, 0.0);
  const double factor = std::pow(remark_variant ? fd1 : fd2, r);

  CompositionCheck out;
  out.predicted = factor * res_g + dg * res_f;
  out.measured = residual_at(compose(g1, f1), compose(g2, f2), x, r, opts, &out.measured_method);
  out.discrepancy = inf_norm(out.predicted - out.measured);
  return out;
}

// ---------------------------------------------------------------- inverses

namespace {

/// Newton for z with map(z) = target; Jacobian by central differences
/// unless jac is given. Iterates until the step stalls at machine level.
std::optional<Vec> newton_solve(const VecFn& map, const MatFn& jac, const Vec& target, Vec z) {
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    const Vec r = map(z) - target;
    const double rn = inf_norm(r);
    if (!std::isfinite(rn)) return std::nullopt;
    const double tol = 4.0 * kEps * std::max(1.0, inf_norm(target));
    if (rn <= tol || (rn >= prev && rn <= 1e-12 * std::max(1.0, inf_norm(target)))) return z;
    prev = rn;
    const Mat j = jac ? jac(z) : fd_jacobian(map, z);
    Eigen::FullPivLU<Mat> lu(j);
    if (!lu.isInvertible()) return std::nullopt;
    z -= lu.solve(r);
  }
  const Vec r = map(z) - target;
  if (inf_norm(r) <= 1e-12 * std::max(1.0, inf_norm(target))) return z;
  return std::nullopt;
}

}  // namespace

AdaptedFamily invert_family(const AdaptedFamily& f, const Vec& x_guess) {
  if (f.in_dim != f.out_dim) throw Error(ErrorCode::DimensionMismatch, "only square families can be inverted");
  if (!f.target_h) throw Error(ErrorCode::MissingTargetH, "family has no codomain h");
  const int k = f.in_dim;
  auto full = [f, k](const Vec& z) {
    Vec out(k + 1);
    out << f(z.head(k), z(k)), f.target_h(z.head(k), z(k));
    return out;
  };
  AdaptedFamily g = AdaptedFamily::from_function(k, k + 1, [full, x_guess, k](const Vec& y, double s) -> Vec {
    Vec target(k + 1);
    target << y, s;
    Vec z0(k + 1);
    z0 << x_guess, s;
    auto sol = newton_solve(full, nullptr, target, z0);
    if (!sol) throw Error(ErrorCode::InversionFailed, "Newton on the fiber did not converge");
    return *sol;
  });
  g.target_h = [k, g_eval = g.eval](const Vec& y, double s) { return g_eval(y, s)(k); };
  return g;
}

InverseCheck inverse_residual_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int r,
                                    const ContactOptions& opts) {
  require_same_shape(f1, f2, x);
  const int k = f1.in_dim;
  const double fd2 = fdot(f2, x);
  fdot(f1, x);
  if (fd2 == 0.0) throw Error(ErrorCode::InversionFailed, "h is not transversal: fdot vanishes");

  const Vec res_fy = residual_at(f1, f2, x, r, opts);
  const Vec res_fs = residual_at(target_h_family(f1), target_h_family(f2), x, r, opts);
  Vec res_f(k + 1);
  res_f << res_fy, res_fs;

  Mat df(k + 1, k + 1);
  df.topRows(k) = f1.jacobian(x, 0.0);
  {
    const AdaptedFamily hf = target_h_family(f1);
    df.bottomRows(1) = hf.jacobian(x, 0.0);
  }
  Eigen::FullPivLU<Mat> lu(df);
  if (!lu.isInvertible()) throw Error(ErrorCode::InversionFailed, "family is not a local diffeomorphism at x");

  InverseCheck out;
  out.predicted = -lu.solve(std::pow(1.0 / fd2, r) * res_f);

  const Vec n = f1(x, 0.0);
  const AdaptedFamily g1 = invert_family(f1, x);
  const AdaptedFamily g2 = invert_family(f2, x);
  ContactOptions o = opts;
  o.r_claimed = r;
  out.measured_contact = contact_estimate(g1, g2, n, o);
  out.measured = out.measured_contact.residual;
  out.discrepancy = inf_norm(out.predicted - out.measured);
  return out;
}

// ---------------------------------------------------------------- graphs

AdaptedFamily graph_to_map(const AdaptedFamily& gamma, const std::vector<Vec>& check_points) {
  const int k = gamma.in_dim;
  if (gamma.out_dim != 2 * k) throw Error(ErrorCode::DimensionMismatch, "graph family must have out_dim = 2 in_dim");
  for (const Vec& p : check_points) {
    const Vec v = gamma(p, 0.0);
    const double gap = inf_norm(v.head(k) - v.tail(k));
    if (gap > 1e-10 * std::max(1.0, inf_norm(v))) {
      throw Error(ErrorCode::NotDiagonal, "components differ by " + std::to_string(gap) + " at h = 0");
    }
    const Mat j = gamma.jacobian(p, 0.0).topLeftCorner(k, k);
    if (!(smallest_singular_value(j) > 1e-10 * std::max(1.0, j.norm()))) {
      throw Error(ErrorCode::NotDiagonal, "first component is not a local diffeomorphism at h = 0");
    }
  }
  AdaptedFamily out = AdaptedFamily::from_function(k, k, [gamma, k](const Vec& m, double h) -> Vec {
    auto first = [&gamma, k, h](const Vec& n) -> Vec { return gamma(n, h).head(k); };
    auto jac = [&gamma, k, h](const Vec& n) -> Mat { return gamma.jacobian(n, h).topLeftCorner(k, k); };
    auto sol = newton_solve(first, jac, m, m);
    if (!sol) throw Error(ErrorCode::PsiInversionFailed, "could not invert psi at h = " + std::to_string(h));
    return gamma(*sol, h).tail(k);
  });
  out.target_h = [](const Vec&, double t) { return t; };
  out.target_h_dt = [](const Vec&) { return 1.0; };
  return out;
}

GraphBumpCheck graph_symmetry_bump_check(const AdaptedFamily& gamma1, const AdaptedFamily& gamma2, const Vec& x,
                                         int r, const ContactOptions& opts, double sym_tol) {
  require_same_shape(gamma1, gamma2, x);
  const int k = gamma1.in_dim;
  ContactOptions o = opts;
  o.r_claimed = r;
  const Vec res = contact_estimate(gamma1, gamma2, x, o).residual;
  GraphBumpCheck out;
  out.delta_pi1 = res.head(k);
  out.delta_pi2 = res.tail(k);
  out.predicted_residual = out.delta_pi2 - out.delta_pi1;
  out.symmetric = inf_norm(out.predicted_residual) <= sym_tol * std::max(1.0, inf_norm(res));

  const AdaptedFamily f1 = graph_to_map(gamma1, {x});
  const AdaptedFamily f2 = graph_to_map(gamma2, {x});
  const Vec m = gamma1(x, 0.0).head(k);
  ContactOptions fo = opts;
  fo.r_claimed = out.symmetric ? std::nullopt : std::optional<int>(r);
  out.map_contact = contact_estimate(f1, f2, m, fo);
  if (out.symmetric) {
    out.residual_discrepancy = 0.0;
    out.pass = out.map_contact.at_least(r + 1);
  } else {
    out.residual_discrepancy = inf_norm(out.map_contact.residual - out.predicted_residual);
    out.pass = out.map_contact.status != ContactStatus::MachineLimited && std::abs(out.map_contact.r_est - r) <= 0.1 &&
               out.residual_discrepancy <= 1e-6;
  }
  return out;
}

DistributionResidual distribution_residual(const DistributionFamily& d1, const DistributionFamily& d2, const Vec& x,
                                           int r, const ContactOptions& opts) {
  if (d1.rows != d2.rows || d1.cols != d2.cols) throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
  if (d1.entries.out_dim != d1.rows * d1.cols || d2.entries.out_dim != d2.rows * d2.cols) {
    throw Error(ErrorCode::DimensionMismatch, "flattened entry count does not match the shape");
  }
  ContactOptions o = opts;
  o.r_claimed = r;
  DistributionResidual out;
  out.estimate = contact_estimate(d1.entries, d2.entries, x, o);
  out.residual = unflatten_rows(out.estimate.residual, d1.rows, d1.cols);
  return out;
}

}  // namespace skewcrit
