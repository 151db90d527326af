// skewcrit command line front end.

#include "skewcrit/acceptance.hpp"
#include "skewcrit/config.hpp"
#include "skewcrit/error.hpp"
#include "skewcrit/examples.hpp"
#include "skewcrit/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace skewcrit;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_config_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::DimensionError:
    case ErrorCode::MissingBinding:
      return true;
    default:
      return false;
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SKEWCRIT_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("SKEWCRIT_SEED must be a non-negative integer");
  }
}

ProblemConfig load(const std::string& spec) {
  ProblemConfig cfg = resolve_config(spec);
  if (auto s = env_seed()) cfg.experiment.seed = *s;
  return cfg;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::string show(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v(i));
  }
  return s + ")";
}

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<Vec> y_values(const ProblemConfig& cfg, const std::vector<double>& flag) {
  const int m = cfg.chart ? cfg.chart->m : 1;
  std::vector<Vec> ys;
  if (!flag.empty()) {
    if (static_cast<int>(flag.size()) != m) throw UsageError("--y needs " + std::to_string(m) + " values");
    ys.push_back(to_vec(flag));
  } else {
    for (const auto& y : cfg.experiment.y) ys.push_back(to_vec(y));
  }
  if (ys.empty()) throw UsageError("no y given and the config has no experiment.y");
  return ys;
}

Vec start_point(const ProblemConfig& cfg, const std::vector<double>& flag) {
  const int n = cfg.chart->n;
  const std::vector<double>& src = flag.empty() ? cfg.experiment.x0 : flag;
  if (src.empty()) return Vec::Zero(n);
  if (static_cast<int>(src.size()) != n) throw UsageError("x0 needs " + std::to_string(n) + " values");
  return to_vec(src);
}

void emit(const std::string& out, const ojson& j) {
  if (!out.empty()) write_file(out, j.dump(2) + "\n");
}

struct Common {
  std::string out;
  bool no_timestamp = false;
};

// solve ---------------------------------------------------------------------

struct SolveArgs {
  std::string config;
  std::vector<double> y;
  std::vector<double> x0;
  Common common;
};

int cmd_solve(const SolveArgs& a) {
  const ProblemConfig cfg = load(a.config);
  if (!cfg.has_problem()) throw Error(ErrorCode::ConfigError, "solve requires a problem config");
  const SkewProblem p = build_problem(cfg);
  const NewtonSettings s = make_settings(cfg);
  const Vec x0 = start_point(cfg, a.x0);

  ojson report;
  report["run"] = report_header("solve", config_hash(cfg), !a.common.no_timestamp);
  ojson results = ojson::array();
  for (const Vec& y : y_values(cfg, a.y)) {
    const SolveResult r = solve(p, y, x0, s);
    std::cout << "y = " << show(y) << "  x_c = " << show(r.x_c) << "  iterations = " << r.iterations
              << "  cond = " << format_double(r.hessian.condition_number) << "\n";
    results.push_back(to_json(r));
  }
  report["results"] = results;
  emit(a.common.out, report);
  return kOk;
}

// continue ------------------------------------------------------------------

struct ContinueArgs {
  std::string config;
  std::vector<double> y_from;
  std::vector<double> y_to;
  int steps = 21;
  std::vector<double> x0;
  std::string predictor = "previous";
  std::string out;
};

int cmd_continue(const ContinueArgs& a) {
  const ProblemConfig cfg = load(a.config);
  if (!cfg.has_problem() || cfg.is_family())
    throw Error(ErrorCode::ConfigError, "continuation requires a single problem");
  const int m = cfg.chart->m;
  const int n = cfg.chart->n;
  if (static_cast<int>(a.y_from.size()) != m || static_cast<int>(a.y_to.size()) != m)
    throw UsageError("--y-from and --y-to need " + std::to_string(m) + " values");
  if (a.steps < 1) throw UsageError("--steps must be at least 1");

  const Vec from = to_vec(a.y_from);
  const Vec to = to_vec(a.y_to);
  std::vector<Vec> path;
  for (int k = 0; k < a.steps; ++k) {
    const double s = a.steps == 1 ? 0.0 : static_cast<double>(k) / (a.steps - 1);
    path.push_back(from + s * (to - from));
  }
  const Predictor pred = a.predictor == "secant" ? Predictor::Secant : Predictor::Previous;
  const ContinuationResult res =
      continuation(build_problem(cfg), path, start_point(cfg, a.x0), make_settings(cfg), 0.0, pred);

  CsvTable table;
  for (int i = 1; i <= m; ++i) table.header.push_back("y" + std::to_string(i));
  for (int i = 1; i <= n; ++i) table.header.push_back("x" + std::to_string(i));
  table.header.push_back("cond");
  table.header.push_back("converged");

  std::size_t si = 0;
  std::size_t fi = 0;
  for (const Vec& y : path) {
    std::vector<std::string> row;
    for (Eigen::Index i = 0; i < y.size(); ++i) row.push_back(format_double(y(i)));
    if (si < res.samples.size() && res.samples[si].y == y) {
      const SolveResult& r = res.samples[si++];
      for (Eigen::Index i = 0; i < r.x_c.size(); ++i) row.push_back(format_double(r.x_c(i)));
      row.push_back(format_double(r.hessian.condition_number));
      row.push_back(r.converged ? "1" : "0");
    } else {
      for (int i = 0; i < n; ++i) row.push_back("nan");
      row.push_back("nan");
      row.push_back("0");
      if (fi < res.failures.size()) {
        std::cerr << "y = " << show(y) << ": " << res.failures[fi].message << "\n";
        ++fi;
      }
    }
    table.rows.push_back(row);
  }
  if (a.out.empty()) {
    std::cout << table.str();
  } else {
    write_file(a.out, table.str());
    std::cout << res.samples.size() << " of " << path.size() << " points converged\n";
  }
  if (res.samples.empty()) {
    std::cerr << "error: every continuation point failed\n";
    return kNumericFailure;
  }
  return kOk;
}

// contact -------------------------------------------------------------------

struct ContactArgs {
  std::string config;
  std::string what = "gamma";
  std::optional<int> r;
  std::vector<double> y;
  std::vector<double> x0;
  Common common;
};

CsvTable h_table(const ContactEstimate& e) {
  CsvTable t;
  t.header = {"h", "error"};
  for (std::size_t i = 0; i < e.h_seq.size(); ++i) t.rows.push_back({format_double(e.h_seq[i]), format_double(e.errors[i])});
  return t;
}

void print_estimate(const std::string& label, const ContactEstimate& e, bool pass) {
  std::cout << label << ": status = " << to_string(e.status) << "  slope = " << format_double(e.r_est)
            << "  residual = " << show(e.residual) << "  " << (pass ? "PASS" : "FAIL") << "\n";
}

int cmd_contact(const ContactArgs& a) {
  const ProblemConfig cfg = load(a.config);
  ContactOptions opts;
  opts.h_seq = make_h_seq(cfg);
  const std::optional<int> r = a.r ? a.r : cfg.experiment.r_claimed;
  if (!r) throw UsageError("--r is required when the config has no experiment.r_claimed");
  if (*r < 1) throw UsageError("--r must be positive");
  opts.r_claimed = *r;

  ojson report;
  report["run"] = report_header("contact", config_hash(cfg), !a.common.no_timestamp);
  report["what"] = a.what;
  report["r"] = *r;
  ojson checks = ojson::array();
  std::optional<ContactEstimate> table_source;
  bool all_pass = true;

  auto record = [&](const std::string& name, const ContactEstimate& e, bool pass) {
    print_estimate(name, e, pass);
    ojson j = check_entry(name, pass, e.r_est, 0.1);
    j["contact"] = to_json(e);
    checks.push_back(j);
    all_pass = all_pass && pass;
    if (!table_source) table_source = e;
  };

  if (a.what == "custom") {
    if (!cfg.custom) throw Error(ErrorCode::ConfigError, "config has no custom block");
    const auto [f1, f2] = build_custom(cfg);
    const Vec x = to_vec(cfg.custom->x);
    if (cfg.custom->kind == "graph") {
      const GraphBumpCheck gb = graph_symmetry_bump_check(f1, f2, x, *r, opts);
      std::cout << (gb.symmetric ? "symmetric" : "asymmetric") << " residual components\n";
      record("graph map contact", gb.map_contact, gb.pass);
      report["predicted_residual"] = to_json(gb.predicted_residual);
      report["residual_discrepancy"] = gb.residual_discrepancy;
    } else {
      const ContactEstimate e = contact_estimate(f1, f2, x, opts);
      record("custom", e, e.at_least(*r));
    }
  } else {
    if (!cfg.has_problem() || !cfg.is_family())
      throw Error(ErrorCode::ConfigError, "contact --what " + a.what + " requires a family config");
    if (a.what != "gamma" && a.what != "alpha" && a.what != "g" && a.what != "delta")
      throw UsageError("--what must be gamma, alpha, g, delta or custom");
    const ProblemFamily fam = build_family(cfg);
    const Vec y = y_values(cfg, a.y).front();
    const Vec x0 = start_point(cfg, a.x0);
    if (a.what == "gamma") {
      try {
        const GammaContactReport g = verify_gamma_contact(fam, y, x0, *r, opts);
        report["x_base"] = to_json(g.x_base);
        record("gamma", g.estimate, g.pass);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DataContactViolation) throw;
        std::cout << "gamma: FAIL (" << e.what() << ")\n";
        ojson j = check_entry("gamma", false, NAN, 0.1);
        j["error"] = e.what();
        checks.push_back(j);
        all_pass = false;
      }
    } else {
      const SolveResult base = solve_family(fam, 1, y, 0.0, x0, family_newton_settings());
      report["x_base"] = to_json(base.x_c);
      const DataContacts dc = data_contacts(fam, base.x_c, *r, opts);
      const ContactEstimate& e = a.what == "alpha" ? dc.alpha : a.what == "g" ? dc.g : dc.delta;
      record(a.what, e, e.at_least(*r));
    }
  }
  report["checks"] = checks;
  report["pass"] = all_pass;

  if (!a.common.out.empty()) {
    if (ends_with(a.common.out, ".json"))
      emit(a.common.out, report);
    else
      write_file(a.common.out, table_source ? h_table(*table_source).str() : CsvTable{{"h", "error"}, {}}.str());
  }
  return kOk;
}

// predict-residual ----------------------------------------------------------

struct PredictArgs {
  std::string config;
  std::vector<double> y;
  std::optional<int> r;
  std::vector<double> x0;
  int index = 1;
  std::string reading = "h-preserving";
  double gamma_dot = 1.0;
  Common common;
};

int cmd_predict(const PredictArgs& a) {
  const ProblemConfig cfg = load(a.config);
  if (!cfg.has_problem() || !cfg.is_family())
    throw Error(ErrorCode::ConfigError, "predict-residual requires a family config");
  const std::optional<int> r = a.r ? a.r : cfg.experiment.r_claimed;
  if (!r) throw UsageError("--r is required when the config has no experiment.r_claimed");

  ResidualSystemOptions so;
  so.index = a.index;
  so.gamma_dot = a.gamma_dot;
  if (a.reading == "h-preserving")
    so.reading = GammaDotReading::HPreserving;
  else if (a.reading == "hessian")
    so.reading = GammaDotReading::FactorOnHessian;
  else if (a.reading == "data-residual")
    so.reading = GammaDotReading::FactorOnDataResidual;
  else
    throw UsageError("--reading must be h-preserving, hessian or data-residual");
  so.contact.h_seq = make_h_seq(cfg);
  so.contact.r_claimed = *r;

  const ProblemFamily fam = build_family(cfg);
  const Vec y = y_values(cfg, a.y).front();
  const GammaContactReport g = verify_gamma_contact(fam, y, start_point(cfg, a.x0), *r, so.contact);
  const ResidualSystem sys = assemble_residual_system(fam, g.x_base, y, *r, so);
  const Vec pred = predict_solution_residual(sys);
  const Vec& meas = g.estimate.residual;
  const double disc = inf_norm(pred - meas);
  const double tol = 1e-4 * (1.0 + inf_norm(meas));
  const bool pass = disc <= tol;

  std::cout << "predicted u = " << show(pred) << "\n"
            << "measured    = " << show(meas) << "\n"
            << "discrepancy = " << format_double(disc) << "  " << (pass ? "PASS" : "FAIL") << "\n";

  ojson report;
  report["run"] = report_header("predict-residual", config_hash(cfg), !a.common.no_timestamp);
  report["y"] = to_json(y);
  report["x_c"] = to_json(g.x_base);
  report["r"] = *r;
  report["reading"] = to_string(so.reading);
  report["system"] = to_json(sys);
  report["predicted"] = to_json(pred);
  report["measured"] = to_json(meas);
  report["gamma_contact"] = to_json(g.estimate);
  report["checks"] = ojson::array({check_entry("predicted vs measured", pass, disc, tol)});
  emit(a.common.out, report);
  return pass ? kOk : kCheckFailed;
}

// verify --------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::string config_dir;
  std::optional<std::uint64_t> seed;
  Common common;
};

int cmd_verify(const VerifyArgs& a) {
  const auto suite = parse_suite(a.suite);
  if (!suite) throw UsageError("--suite must be all, contact, solver or variation");
  AcceptanceOptions opts;
  if (a.seed) opts.seed = *a.seed;
  if (auto s = env_seed()) opts.seed = *s;
  if (!a.config_dir.empty()) {
    if (!std::filesystem::is_directory(a.config_dir))
      throw Error(ErrorCode::ConfigError, "config dir '" + a.config_dir + "' does not exist");
    opts.config_dir = a.config_dir;
  }
  const SuiteReport rep = run_acceptance(*suite, opts);
  for (const auto& c : rep.results) std::cout << summary_line(c) << "\n";
  std::cout << (rep.all_pass ? "all criteria PASS" : "some criteria FAIL") << "\n";

  ojson report;
  report["run"] = report_header("verify", fnv1a_hex(a.suite + ":" + std::to_string(opts.seed)), !a.common.no_timestamp);
  report["suite"] = a.suite;
  report["seed"] = opts.seed;
  const ojson body = to_json(rep);
  for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = it.value();
  emit(a.common.out, report);
  return rep.all_pass ? kOk : kCheckFailed;
}

// list-examples -------------------------------------------------------------

int cmd_list(const std::string& dump_dir) {
  for (const auto& e : builtin_examples()) std::cout << e.name << "  " << e.description << "\n";
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    for (const auto& e : builtin_examples()) {
      const auto path = std::filesystem::path(dump_dir) / (e.name + ".json");
      write_file(path.string(), to_json(builtin_config(e.name)).dump(2) + "\n");
    }
  }
  return kOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "write the report to this file");
  sub->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp from JSON reports");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skew critical problems: solves, contact orders and residual checks"};
  app.require_subcommand(1);

  SolveArgs solve_a;
  auto* solve_cmd = app.add_subcommand("solve", "solve F(x) = (0, y) by Newton");
  solve_cmd->add_option("config", solve_a.config, "config path or builtin:NAME")->required();
  solve_cmd->add_option("--y", solve_a.y, "target value (comma separated)")->delimiter(',');
  solve_cmd->add_option("--x0", solve_a.x0, "initial guess (comma separated)")->delimiter(',');
  add_common(solve_cmd, solve_a.common);

  ContinueArgs cont_a;
  auto* cont_cmd = app.add_subcommand("continue", "warm-started solves along a straight y path");
  cont_cmd->add_option("config", cont_a.config, "config path or builtin:NAME")->required();
  cont_cmd->add_option("--y-from", cont_a.y_from, "path start")->delimiter(',')->required();
  cont_cmd->add_option("--y-to", cont_a.y_to, "path end")->delimiter(',')->required();
  cont_cmd->add_option("--steps", cont_a.steps, "number of points, endpoints included");
  cont_cmd->add_option("--x0", cont_a.x0, "initial guess")->delimiter(',');
  cont_cmd->add_option("--predictor", cont_a.predictor, "previous or secant")
      ->check(CLI::IsMember({"previous", "secant"}));
  cont_cmd->add_option("--out", cont_a.out, "CSV output (stdout when absent)");

  ContactArgs contact_a;
  auto* contact_cmd = app.add_subcommand("contact", "contact order and residual of a family");
  contact_cmd->add_option("config", contact_a.config, "config path or builtin:NAME")->required();
  contact_cmd->add_option("--what", contact_a.what, "gamma, alpha, g, delta or custom")
      ->check(CLI::IsMember({"gamma", "alpha", "g", "delta", "custom"}));
  contact_cmd->add_option("--r", contact_a.r, "claimed order");
  contact_cmd->add_option("--y", contact_a.y, "base value y")->delimiter(',');
  contact_cmd->add_option("--x0", contact_a.x0, "initial guess for the t = 0 solve")->delimiter(',');
  add_common(contact_cmd, contact_a.common);

  PredictArgs pred_a;
  auto* pred_cmd = app.add_subcommand("predict-residual", "predicted vs measured solution residual");
  pred_cmd->add_option("config", pred_a.config, "config path or builtin:NAME")->required();
  pred_cmd->add_option("--y", pred_a.y, "base value y")->delimiter(',');
  pred_cmd->add_option("--r", pred_a.r, "contact order");
  pred_cmd->add_option("--x0", pred_a.x0, "initial guess")->delimiter(',');
  pred_cmd->add_option("--index", pred_a.index, "member supplying the Hessian and Dg")->check(CLI::Range(1, 2));
  pred_cmd->add_option("--reading", pred_a.reading, "h-preserving, hessian or data-residual");
  pred_cmd->add_option("--gamma-dot", pred_a.gamma_dot, "time rescaling factor");
  add_common(pred_cmd, pred_a.common);

  VerifyArgs verify_a;
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  verify_cmd->add_option("--suite", verify_a.suite, "all, contact, solver or variation");
  verify_cmd->add_option("--config-dir", verify_a.config_dir, "load example configs from DIR/NAME.json");
  verify_cmd->add_option("--seed", verify_a.seed, "RNG seed (SKEWCRIT_SEED takes precedence)");
  add_common(verify_cmd, verify_a.common);

  std::string dump_dir;
  auto* list_cmd = app.add_subcommand("list-examples", "list built-in configs");
  list_cmd->add_option("--dump", dump_dir, "write each example as DIR/NAME.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_a);
    if (*cont_cmd) return cmd_continue(cont_a);
    if (*contact_cmd) return cmd_contact(contact_a);
    if (*pred_cmd) return cmd_predict(pred_a);
    if (*verify_cmd) return cmd_verify(verify_a);
    if (*list_cmd) return cmd_list(dump_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_code(e.code()) ? kConfigError : kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  return kOk;
}
