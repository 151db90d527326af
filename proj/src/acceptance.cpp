#include "skewcrit/acceptance.hpp"

#include "skewcrit/config.hpp"
#include "skewcrit/error.hpp"
#include "skewcrit/examples.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

namespace skewcrit {

namespace {

using expr::Dims;
using expr::Expr;

const char* kNames[] = {"",
                        "solver correctness",
                        "solver robustness",
                        "contact order estimation",
                        "composition law",
                        "hat division",
                        "inverse families",
                        "graph symmetry bump",
                        "solution contact",
                        "residual prediction",
                        "equivariance",
                        "determinism"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Coefficient as a parenthesised literal so negative values parse anywhere.
std::string lit(double v) { return "(" + format_double(v) + ")"; }

AdaptedFamily family(int in_dim, const std::vector<std::string>& comps,
                     const std::optional<std::string>& h = std::nullopt) {
  const Dims dims{in_dim, true, 0};
  std::vector<Expr> es;
  for (const auto& c : comps) es.push_back(Expr::parse(c, dims));
  std::optional<Expr> he;
  if (h) he = Expr::parse(*h, dims);
  return AdaptedFamily::from_expressions(in_dim, std::move(es), std::move(he));
}

// Same values, no symbolic backing: exercises the numerical paths.
AdaptedFamily opaque(const AdaptedFamily& f) {
  auto out = AdaptedFamily::from_function(f.in_dim, f.out_dim, f.eval);
  if (f.target_h) {
    out.target_h = f.target_h;
    out.target_h_dt = f.target_h_dt;
  }
  return out;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vec vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Context {
  const AcceptanceOptions& opts;

  ProblemConfig config(const std::string& name) const {
    if (!opts.config_dir) return builtin_config(name);
    return load_config((std::filesystem::path(*opts.config_dir) / (name + ".json")).string());
  }
};

// Newton contraction: once the residual is small, r_{k+1} <= 10 r_k^2 above the noise floor.
bool quadratic(const std::vector<double>& hist) {
  for (std::size_t k = 0; k + 1 < hist.size(); ++k) {
    if (hist[k] < 1e-3 && hist[k + 1] > 10.0 * hist[k] * hist[k] + 1e-14) return false;
  }
  return true;
}

CriterionResult c1_solver(const Context& ctx) {
  CriterionResult res;
  ojson runs = ojson::array();
  bool pass = true;
  double worst = 0.0;

  auto run = [&](const std::string& label, const SkewProblem& p, const Vec& y, const Vec& x0, const Vec& expect) {
    const SolveResult s = solve(p, y, x0);
    const double err = inf_norm(s.x_c - expect);
    const bool ok = s.converged && err <= 1e-10 && quadratic(s.residual_history) && s.hessian.nondegenerate;
    worst = std::max(worst, err);
    pass = pass && ok;
    ojson j;
    j["problem"] = label;
    j["y"] = to_json(y);
    j["x_c"] = to_json(s.x_c);
    j["error"] = err;
    j["iterations"] = s.iterations;
    j["quadratic"] = quadratic(s.residual_history);
    j["pass"] = ok;
    runs.push_back(j);
  };

  const ProblemConfig tcfg = ctx.config("trivial");
  const SkewProblem trivial = build_problem(tcfg);
  for (double y : {-1.0, 0.0, 0.7, 1.0}) run("trivial", trivial, vec({y}), vec({0.7, 0.3}), vec({y, 0.0}));

  const SkewProblem skew = build_problem(ctx.config("skew3d"));
  for (double y : {-0.5, 0.4, 0.9}) run("skew3d", skew, vec({y}), vec({y, 0.1, -0.1}), vec({y, 0.0, 0.0}));

  res.pass = pass;
  res.detail = "max |x_c - x*| = " + fmt(worst) + " over " + std::to_string(runs.size()) + " solves";
  res.data["runs"] = runs;
  return res;
}

CriterionResult c2_robustness(const Context& ctx) {
  CriterionResult res;
  std::mt19937_64 rng(ctx.opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  bool pass = true;
  double worst = 0.0;
  int failures = 0;
  ojson cases = ojson::array();

  auto sweep = [&](const std::string& label, const SkewProblem& p, const Vec& y, const Vec& root) {
    const Eigen::Index n = root.size();
    for (int k = 0; k < 20; ++k) {
      Vec dir(n);
      for (Eigen::Index i = 0; i < n; ++i) dir(i) = normal(rng);
      const double radius = 0.2 * std::pow(unif(rng), 1.0 / static_cast<double>(n));
      const Vec x0 = root + radius * dir / dir.norm();
      try {
        const SolveResult s = solve(p, y, x0);
        const double err = inf_norm(s.x_c - root);
        worst = std::max(worst, err);
        if (err > 1e-8) {
          pass = false;
          ++failures;
        }
      } catch (const Error& e) {
        pass = false;
        ++failures;
      }
    }
    ojson j;
    j["problem"] = label;
    j["root"] = to_json(root);
    j["starts"] = 20;
    cases.push_back(j);
  };

  sweep("trivial", build_problem(ctx.config("trivial")), vec({0.7}), vec({0.7, 0.0}));
  sweep("skew3d", build_problem(ctx.config("skew3d")), vec({0.4}), vec({0.4, 0.0, 0.0}));

  res.pass = pass;
  res.detail = std::to_string(failures) + " of 40 starts failed, max deviation " + fmt(worst);
  res.data["cases"] = cases;
  res.data["max_deviation"] = worst;
  return res;
}

CriterionResult c3_contact(const Context&) {
  CriterionResult res;
  const Vec x = vec({0.5});
  const double c = 1.0 + 0.25;
  const std::string base = "sin(x1) + t*cos(x1)";
  const AdaptedFamily f1 = family(1, {base});
  bool pass = true;
  double worst_slope = 0.0;
  double worst_an = 0.0;
  double worst_num = 0.0;
  ojson rows = ojson::array();

  for (int p = 1; p <= 4; ++p) {
    const AdaptedFamily f2 = family(1, {base + " + t^" + std::to_string(p) + "*(1 + x1^2)"});
    const ContactEstimate an = contact_estimate(f1, f2, x);
    const ContactEstimate num = contact_estimate(opaque(f1), opaque(f2), x);
    const double slope_err = std::max(std::abs(an.r_est - p), std::abs(num.r_est - p));
    const double an_err = std::abs(an.residual(0) - c);
    const double num_err = std::abs(num.residual(0) - c);
    const bool ok = an.status == ContactStatus::Integer && num.status == ContactStatus::Integer &&
                    slope_err <= 0.05 && an.r_used == p && num.r_used == p && an_err <= 1e-8 && num_err <= 1e-6;
    pass = pass && ok;
    worst_slope = std::max(worst_slope, slope_err);
    worst_an = std::max(worst_an, an_err);
    worst_num = std::max(worst_num, num_err);
    ojson j;
    j["p"] = p;
    j["slope_analytic"] = an.r_est;
    j["slope_numeric"] = num.r_est;
    j["residual_analytic"] = an.residual(0);
    j["residual_numeric"] = num.residual(0);
    j["pass"] = ok;
    rows.push_back(j);
  }

  res.pass = pass;
  res.detail = "slope err " + fmt(worst_slope) + ", residual err " + fmt(worst_an) + " (analytic) " +
               fmt(worst_num) + " (Richardson)";
  res.data["cases"] = rows;
  return res;
}

CriterionResult c4_composition(const Context& ctx) {
  CriterionResult res;
  ojson cases = ojson::array();
  bool pass = true;
  double worst = 0.0;

  auto check = [&](const std::string& label, const AdaptedFamily& f1, const AdaptedFamily& f2,
                   const AdaptedFamily& g1, const AdaptedFamily& g2, const Vec& x, int r,
                   std::optional<double> expect) {
    const CompositionCheck cc = compose_residual_check(f1, f2, g1, g2, x, r);
    const double scale = inf_norm(cc.measured);
    const double rel = cc.discrepancy / std::max(scale, 1e-300);
    bool ok = cc.discrepancy <= 1e-6 * scale + 1e-12;
    double remark_disc = 0.0;
    if (r >= 2) {
      const CompositionCheck rv = compose_residual_check(f1, f2, g1, g2, x, r, true);
      remark_disc = inf_norm(rv.predicted - cc.predicted);
      ok = ok && remark_disc <= 1e-6 * scale + 1e-12;
    }
    if (expect) ok = ok && std::abs(cc.measured(0) - *expect) <= 1e-6 * std::abs(*expect);
    worst = std::max(worst, cc.discrepancy <= 1e-12 ? 0.0 : rel);
    pass = pass && ok;
    ojson j;
    j["case"] = label;
    j["r"] = r;
    j["predicted"] = to_json(cc.predicted);
    j["measured"] = to_json(cc.measured);
    j["discrepancy"] = cc.discrepancy;
    j["remark_discrepancy"] = remark_disc;
    j["pass"] = ok;
    cases.push_back(j);
  };

  // Worked example: residual 1 + 2x at x = 0.5.
  check("worked", family(1, {"x1"}, "t"), family(1, {"x1 + t^2"}, "t"), family(1, {"x1^2"}),
        family(1, {"x1^2 + t^2"}), vec({0.5}), 2, 2.0);

  std::mt19937_64 rng(ctx.opts.seed + 4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 25; ++k) {
    const int r = 1 + k % 3;
    const std::string rs = std::to_string(r);
    const std::string rs1 = std::to_string(r + 1);
    const std::string f1s = "x1 + " + lit(u(rng)) + "*t + " + lit(u(rng)) + "*x1*t + " + lit(u(rng)) + "*t^2";
    const std::string h1s = "t*(1 + " + lit(u(rng)) + "*x1) + " + lit(u(rng)) + "*t^2";
    const std::string f2s = f1s + " + t^" + rs + "*(" + lit(u(rng)) + " + " + lit(u(rng)) + "*x1) + " +
                            lit(u(rng)) + "*t^" + rs1;
    const std::string h2s = h1s + " + " + lit(u(rng)) + "*t^" + rs;
    const std::string g1s = "x1^2 + " + lit(u(rng)) + "*x1*t + " + lit(u(rng)) + "*t + " + lit(u(rng)) + "*t^2";
    const std::string g2s = g1s + " + t^" + rs + "*(" + lit(u(rng)) + " + " + lit(u(rng)) + "*x1) + " +
                            lit(u(rng)) + "*t^" + rs1;
    const double x = u(rng);
    check("random-" + std::to_string(k + 1), family(1, {f1s}, h1s), family(1, {f2s}, h2s), family(1, {g1s}),
          family(1, {g2s}), vec({x}), r, std::nullopt);
  }

  res.pass = pass;
  res.detail = std::to_string(cases.size()) + " cases, max relative discrepancy " + fmt(worst);
  res.data["cases"] = cases;
  return res;
}

CriterionResult c5_hat(const Context&) {
  CriterionResult res;
  ojson cases = ojson::array();
  bool pass = true;
  double worst = 0.0;

  struct Case {
    std::string f1, f2;
    double x;
    int r;
  };
  const std::vector<Case> list = {{"t*x1", "t*x1 + t^3", 0.7, 3},
                                  {"t*sin(x1)", "t*sin(x1) + t^4*x1^2", 1.0, 4},
                                  {"t*cos(x1) + t^2*x1", "t*cos(x1) + t^2*x1 + t^2*exp(x1)", 0.3, 2}};
  for (const auto& c : list) {
    const HatDropCheck hd = hat_contact_drop_check(family(1, {c.f1}), family(1, {c.f2}), vec({c.x}), c.r);
    const bool ok = hd.discrepancy <= 1e-8 && hd.hat.at_least(c.r - 1) && hd.original.at_least(c.r);
    worst = std::max(worst, hd.discrepancy);
    pass = pass && ok;
    ojson j;
    j["f1"] = c.f1;
    j["f2"] = c.f2;
    j["r"] = c.r;
    j["slope"] = hd.original.r_est;
    j["hat_slope"] = hd.hat.r_est;
    j["discrepancy"] = hd.discrepancy;
    j["pass"] = ok;
    cases.push_back(j);
  }

  // Identical families stay identical after division.
  {
    const AdaptedFamily f = family(1, {"t*exp(x1)"});
    const HatDropCheck hd = hat_contact_drop_check(f, f, vec({0.4}), 2);
    const bool ok = hd.hat.status == ContactStatus::MachineLimited;
    pass = pass && ok;
    ojson j;
    j["f1"] = "t*exp(x1)";
    j["f2"] = "t*exp(x1)";
    j["hat_status"] = to_string(hd.hat.status);
    j["pass"] = ok;
    cases.push_back(j);
  }

  double worst_gap = 0.0;
  const AdaptedFamily sym = family(1, {"sin(t)*x1", "t^2 + t*x1"});
  for (const AdaptedFamily& f : {sym, opaque(sym)}) {
    const HatContinuity hc = hat_continuity(hat_divide(f), vec({0.8}));
    worst_gap = std::max(worst_gap, hc.final_gap);
  }
  pass = pass && worst_gap <= 1e-6;

  res.pass = pass;
  res.detail = "residual agreement " + fmt(worst) + ", continuity gap " + fmt(worst_gap);
  res.data["cases"] = cases;
  res.data["continuity_gap"] = worst_gap;
  return res;
}

CriterionResult c6_inverse(const Context& ctx) {
  CriterionResult res;
  ojson cases = ojson::array();
  bool pass = true;

  auto record = [&](const std::string& label, const InverseCheck& ic, int r, bool ok) {
    pass = pass && ok;
    ojson j;
    j["case"] = label;
    j["r"] = r;
    j["predicted"] = to_json(ic.predicted);
    j["measured"] = to_json(ic.measured);
    j["slope"] = ic.measured_contact.r_est;
    j["discrepancy"] = ic.discrepancy;
    j["pass"] = ok;
    cases.push_back(j);
  };

  struct Worked {
    std::string f1, f2;
    int r;
    double expect;
  };
  for (const auto& w : {Worked{"x1 + t", "x1 + t + t^2", 2, -1.0}, Worked{"2*x1", "2*x1 + t^3", 3, -0.5}}) {
    const InverseCheck ic = inverse_residual_check(family(1, {w.f1}, "t"), family(1, {w.f2}, "t"), vec({0.3}), w.r);
    const bool ok = std::abs(ic.predicted(0) - w.expect) <= 1e-12 && std::abs(ic.measured(0) - w.expect) <= 1e-5 &&
                    std::abs(ic.measured(1)) <= 1e-5 && ic.measured_contact.at_least(w.r);
    record(w.f1 + " / " + w.f2, ic, w.r, ok);
  }

  std::mt19937_64 rng(ctx.opts.seed + 6);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> a_dist(1.0, 2.0);
  std::uniform_real_distribution<double> b_dist(0.0, 0.3);
  for (int k = 0; k < 10; ++k) {
    const int r = 2 + k % 2;
    const std::string f1 = lit(a_dist(rng)) + "*x1 + " + lit(b_dist(rng)) + "*x1^3 + " + lit(u(rng)) + "*t + " +
                           lit(u(rng)) + "*x1*t";
    const std::string f2 = f1 + " + t^" + std::to_string(r) + "*(" + lit(u(rng)) + " + " + lit(u(rng)) + "*x1)";
    const double x = u(rng);
    const InverseCheck ic = inverse_residual_check(family(1, {f1}, "t"), family(1, {f2}, "t"), vec({x}), r);
    record("random-" + std::to_string(k + 1), ic, r,
           ic.measured_contact.at_least(r) && ic.discrepancy <= 1e-5 * (1.0 + inf_norm(ic.measured)));
  }

  res.pass = pass;
  res.detail = std::to_string(cases.size()) + " inverse pairs";
  res.data["cases"] = cases;
  return res;
}

CriterionResult c7_graph(const Context& ctx) {
  CriterionResult res;
  ojson cases = ojson::array();
  bool pass = true;
  int sym_count = 0;
  int asym_count = 0;

  auto record = [&](const std::string& label, const GraphBumpCheck& gb, int r) {
    pass = pass && gb.pass;
    (gb.symmetric ? sym_count : asym_count)++;
    ojson j;
    j["case"] = label;
    j["r"] = r;
    j["symmetric"] = gb.symmetric;
    j["status"] = to_string(gb.map_contact.status);
    j["slope"] = format_double(gb.map_contact.r_est);
    j["residual_discrepancy"] = gb.residual_discrepancy;
    j["pass"] = gb.pass;
    cases.push_back(j);
  };

  for (const std::string name : {"graph-bump-symmetric", "graph-bump-asymmetric"}) {
    const ProblemConfig cfg = ctx.config(name);
    const auto [g1, g2] = build_custom(cfg);
    const int r = cfg.experiment.r_claimed.value_or(2);
    record(name, graph_symmetry_bump_check(g1, g2, vec(cfg.custom->x), r), r);
  }
  {
    const AdaptedFamily g1 = family(1, {"x1", "x1 + t"});
    const AdaptedFamily g2 = family(1, {"x1 + t^2*x1^2", "x1 + t + t^2*x1^2"});
    record("exact-symmetric", graph_symmetry_bump_check(g1, g2, vec({0.5}), 2), 2);
  }

  std::mt19937_64 rng(ctx.opts.seed + 7);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_real_distribution<double> gap(0.5, 1.0);
  for (int k = 0; k < 12; ++k) {
    const bool symmetric = k < 6;
    const int r = 1 + k % 3;
    const std::string rs = std::to_string(r);
    const std::string p1 = "x1 + " + lit(u(rng)) + "*t*x1";
    const std::string p2 = "x1 + " + lit(u(rng)) + "*t + " + lit(u(rng)) + "*t*x1^2";
    const std::string s1 = lit(u(rng)) + " + " + lit(u(rng)) + "*x1^2";
    std::string q1 = p1 + " + t^" + rs + "*(" + s1 + ")";
    std::string q2;
    if (symmetric) {
      q2 = p2 + " + t^" + rs + "*(" + s1 + ") + t^" + std::to_string(r + 1) + "*(" + lit(0.2 + std::abs(u(rng))) +
           " + " + lit(u(rng)) + "*x1)";
    } else {
      q2 = p2 + " + t^" + rs + "*(" + s1 + " + " + lit(gap(rng)) + ")";
    }
    const double x = u(rng);
    record(std::string(symmetric ? "symmetric-" : "asymmetric-") + std::to_string(k + 1),
           graph_symmetry_bump_check(family(1, {p1, p2}), family(1, {q1, q2}), vec({x}), r), r);
  }

  res.pass = pass;
  res.detail = std::to_string(sym_count) + " symmetric, " + std::to_string(asym_count) + " asymmetric pairs";
  res.data["cases"] = cases;
  return res;
}

ContactOptions claimed(const ProblemConfig& cfg) {
  ContactOptions o;
  o.h_seq = make_h_seq(cfg);
  o.r_claimed = cfg.experiment.r_claimed;
  return o;
}

CriterionResult c8_gamma(const Context& ctx) {
  CriterionResult res;
  ojson cases = ojson::array();
  bool pass = true;
  std::string detail;
  for (const std::string name : {"trivial-alpha-perturbed", "skew3d-alpha-cubic"}) {
    const ProblemConfig cfg = ctx.config(name);
    const int r = cfg.experiment.r_claimed.value_or(2);
    const GammaContactReport g =
        verify_gamma_contact(build_family(cfg), vec(cfg.experiment.y.at(0)), vec(cfg.experiment.x0), r, claimed(cfg));
    const bool ok = g.pass && g.estimate.status == ContactStatus::Integer && std::abs(g.estimate.r_est - r) <= 0.1;
    pass = pass && ok;
    if (!detail.empty()) detail += ", ";
    detail += name + " slope " + fmt(g.estimate.r_est) + " (r = " + std::to_string(r) + ")";
    ojson j;
    j["config"] = name;
    j["r"] = r;
    j["x_base"] = to_json(g.x_base);
    j["contact"] = to_json(g.estimate);
    j["pass"] = ok;
    cases.push_back(j);
  }
  res.pass = pass;
  res.detail = detail;
  res.data["cases"] = cases;
  return res;
}

CriterionResult c9_prediction(const Context& ctx) {
  CriterionResult res;
  ojson cases = ojson::array();
  bool pass = true;
  double worst = 0.0;
  double worst_swap = 0.0;
  for (const std::string name : {"trivial-alpha-perturbed", "trivial-g-perturbed", "trivial-delta-perturbed"}) {
    const ProblemConfig cfg = ctx.config(name);
    const ProblemFamily fam = build_family(cfg);
    const int r = cfg.experiment.r_claimed.value_or(2);
    const Vec y = vec(cfg.experiment.y.at(0));
    const GammaContactReport g = verify_gamma_contact(fam, y, vec(cfg.experiment.x0), r, claimed(cfg));
    ResidualSystemOptions so;
    so.contact = claimed(cfg);
    const Vec pred = predict_solution_residual(assemble_residual_system(fam, g.x_base, y, r, so));
    so.index = 2;
    const Vec pred2 = predict_solution_residual(assemble_residual_system(fam, g.x_base, y, r, so));
    const Vec& meas = g.estimate.residual;
    const double disc = inf_norm(pred - meas);
    const double swap = inf_norm(pred2 - pred);
    const bool ok = g.pass && disc <= 1e-4 * (1.0 + inf_norm(meas)) && swap <= 1e-6 * inf_norm(pred) + 1e-12;
    worst = std::max(worst, disc);
    worst_swap = std::max(worst_swap, swap);
    pass = pass && ok;
    ojson j;
    j["config"] = name;
    j["predicted"] = to_json(pred);
    j["measured"] = to_json(meas);
    j["discrepancy"] = disc;
    j["index_swap_discrepancy"] = swap;
    j["pass"] = ok;
    cases.push_back(j);
  }
  res.pass = pass;
  res.detail = "max |predicted - measured| " + fmt(worst) + ", index swap " + fmt(worst_swap);
  res.data["cases"] = cases;
  return res;
}

CriterionResult c10_equivariance(const Context& ctx) {
  CriterionResult res;
  ojson cases = ojson::array();

  const ProblemConfig sym = ctx.config("reflection-symmetric");
  EquivarianceOptions eo;
  eo.contact = claimed(sym);
  eo.seed = ctx.opts.seed;
  const EquivarianceReport rep = equivariance_check(build_family(sym), build_group(sym), vec(sym.experiment.y.at(0)),
                                                    vec(sym.experiment.x0), sym.experiment.r_claimed.value_or(2), eo);
  const bool sym_ok = rep.pass && rep.max_discrepancy < 1e-8;
  {
    ojson j;
    j["config"] = "reflection-symmetric";
    j["max_discrepancy"] = rep.max_discrepancy;
    j["pass"] = sym_ok;
    cases.push_back(j);
  }

  const ProblemConfig odd = ctx.config("reflection-odd");
  eo.contact = claimed(odd);
  bool odd_ok = false;
  std::string odd_msg;
  try {
    equivariance_check(build_family(odd), build_group(odd), vec(odd.experiment.y.at(0)), vec(odd.experiment.x0),
                       odd.experiment.r_claimed.value_or(2), eo);
    odd_msg = "no violation raised";
  } catch (const Error& e) {
    odd_ok = e.code() == ErrorCode::HypothesisViolated;
    odd_msg = e.what();
  }
  {
    ojson j;
    j["config"] = "reflection-odd";
    j["raised"] = odd_msg;
    j["pass"] = odd_ok;
    cases.push_back(j);
  }

  res.pass = sym_ok && odd_ok;
  res.detail = "symmetric discrepancy " + fmt(rep.max_discrepancy) + "; odd: " + odd_msg;
  res.data["cases"] = cases;
  return res;
}

CriterionResult run_one(int id, const Context& ctx) {
  switch (id) {
    case 1: return c1_solver(ctx);
    case 2: return c2_robustness(ctx);
    case 3: return c3_contact(ctx);
    case 4: return c4_composition(ctx);
    case 5: return c5_hat(ctx);
    case 6: return c6_inverse(ctx);
    case 7: return c7_graph(ctx);
    case 8: return c8_gamma(ctx);
    case 9: return c9_prediction(ctx);
    case 10: return c10_equivariance(ctx);
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "no criterion " + std::to_string(id));
}

std::vector<CriterionResult> run_ids(const std::vector<int>& ids, const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id : ids) {
    if (id != 11) out.push_back(run_criterion(id, opts));
  }
  return out;
}

std::string digest(const std::vector<CriterionResult>& rs) {
  ojson a = ojson::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return fnv1a_hex(a.dump());
}

}  // namespace

std::optional<Suite> parse_suite(const std::string& name) {
  if (name == "all") return Suite::All;
  if (name == "contact") return Suite::Contact;
  if (name == "solver") return Suite::Solver;
  if (name == "variation") return Suite::Variation;
  return std::nullopt;
}

std::string to_string(Suite s) {
  switch (s) {
    case Suite::All: return "all";
    case Suite::Contact: return "contact";
    case Suite::Solver: return "solver";
    case Suite::Variation: return "variation";
  }
  return "all";
}

std::vector<int> suite_criteria(Suite s) {
  switch (s) {
    case Suite::Solver: return {1, 2};
    case Suite::Contact: return {3, 4, 5, 6, 7};
    case Suite::Variation: return {8, 9, 10};
    case Suite::All: break;
  }
  return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  const Context ctx{opts};
  CriterionResult r;
  if (id == 11) {
    const std::vector<int> ids = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::string h1 = digest(run_ids(ids, opts));
    const std::string h2 = digest(run_ids(ids, opts));
    r.pass = h1 == h2;
    r.detail = "report hash " + h1 + (r.pass ? " reproduced" : " differs from " + h2);
    r.data["hash_first"] = h1;
    r.data["hash_second"] = h2;
  } else {
    try {
      r = run_one(id, ctx);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      r.pass = false;
      r.detail = e.what();
    }
  }
  r.id = id;
  r.name = kNames[id];
  return r;
}

SuiteReport run_acceptance(Suite suite, const AcceptanceOptions& opts) {
  SuiteReport rep;
  const std::vector<int> ids = suite_criteria(suite);
  std::vector<CriterionResult> first;
  for (int id : ids) {
    if (id == 11) {
      // Reuse the first pass instead of running it a third time.
      CriterionResult r;
      r.id = 11;
      r.name = kNames[11];
      const std::string h1 = digest(first);
      const std::string h2 = digest(run_ids({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, opts));
      r.pass = h1 == h2;
      r.detail = "report hash " + h1 + (r.pass ? " reproduced" : " differs from " + h2);
      r.data["hash_first"] = h1;
      r.data["hash_second"] = h2;
      rep.results.push_back(r);
    } else {
      rep.results.push_back(run_criterion(id, opts));
      first.push_back(rep.results.back());
    }
  }
  rep.all_pass = std::all_of(rep.results.begin(), rep.results.end(), [](const auto& r) { return r.pass; });
  return rep;
}

ojson to_json(const CriterionResult& r) {
  ojson j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["pass"] = r.pass;
  j["detail"] = r.detail;
  j["data"] = r.data.is_null() ? ojson::object() : r.data;
  return j;
}

ojson to_json(const SuiteReport& r) {
  ojson j;
  ojson a = ojson::array();
  for (const auto& c : r.results) a.push_back(to_json(c));
  j["criteria"] = a;
  j["all_pass"] = r.all_pass;
  return j;
}

std::string summary_line(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " " << r.name << " (" << r.detail << ")";
  return os.str();
}

}  // namespace skewcrit
