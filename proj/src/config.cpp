#include "skewcrit/config.hpp"

#include "skewcrit/error.hpp"
#include "skewcrit/report.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace skewcrit {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void allowed_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) config_error(where + " must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) config_error("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error(where + " has the wrong type");
  }
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) config_error(where + " must be an integer");
  return j.get<int>();
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where + " must be a number");
  return j.get<double>();
}

std::vector<std::string> get_strings(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) config_error(where + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::vector<std::string>> get_string_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be a list of rows");
  std::vector<std::vector<std::string>> out;
  for (const auto& row : j) out.push_back(get_strings(row, where));
  return out;
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_number(e, where));
  return out;
}

std::vector<std::vector<double>> get_number_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be a list of rows");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(get_numbers(row, where));
  return out;
}

Mat to_mat(const std::vector<std::vector<double>>& rows, int r, int c, const std::string& where) {
  if (static_cast<int>(rows.size()) != r) config_error(where + " must have " + std::to_string(r) + " rows");
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c) {
      config_error(where + " must have " + std::to_string(c) + " columns");
    }
    for (int k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return m;
}

expr::Expr compile(const std::string& src, const expr::Dims& dims, const std::vector<double>& params,
                   const std::string& where) {
  try {
    return expr::Expr::parse(src, dims).bind_params(params);
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
}

std::vector<expr::Expr> compile_list(const std::vector<std::string>& srcs, std::size_t want,
                                     const expr::Dims& dims, const std::vector<double>& params,
                                     const std::string& where) {
  if (srcs.size() != want) {
    config_error(where + " must have " + std::to_string(want) + " entries, got " + std::to_string(srcs.size()));
  }
  std::vector<expr::Expr> out;
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    out.push_back(compile(srcs[i], dims, params, where + "[" + std::to_string(i + 1) + "]"));
  }
  return out;
}

std::vector<std::string> flatten_delta(const std::vector<std::vector<std::string>>& rows, int n, int d,
                                       const std::string& where) {
  const int f = n - d;
  if (d == 0 || f == 0) {
    if (!rows.empty()) {
      for (const auto& r : rows) {
        if (!r.empty()) config_error(where + " must be empty when the distribution matrix has no entries");
      }
    }
    return {};
  }
  if (rows.empty()) return std::vector<std::string>(static_cast<std::size_t>(f * d), "0");
  if (static_cast<int>(rows.size()) != f) config_error(where + " must have n-d = " + std::to_string(f) + " rows");
  std::vector<std::string> flat;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != d) config_error(where + " rows must have d = " + std::to_string(d) + " entries");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return flat;
}

ParametricProblem compile_member(const ProblemConfig& cfg, const std::vector<std::string>& alpha,
                                 const std::vector<std::vector<std::string>>& delta,
                                 const std::vector<std::string>& g, const std::string& suffix) {
  const auto& c = *cfg.chart;
  const expr::Dims dims{c.n, cfg.is_family(), static_cast<int>(cfg.params.size())};
  ParametricProblem p;
  p.alpha = AdaptedFamily::from_expressions(
      c.n, compile_list(alpha, static_cast<std::size_t>(c.n), dims, cfg.params, "alpha" + suffix));
  p.delta = AdaptedFamily::from_expressions(
      c.n, compile_list(flatten_delta(delta, c.n, c.d, "delta" + suffix), static_cast<std::size_t>((c.n - c.d) * c.d),
                        dims, cfg.params, "delta" + suffix));
  p.g = AdaptedFamily::from_expressions(c.n,
                                        compile_list(g, static_cast<std::size_t>(c.m), dims, cfg.params, "g" + suffix));
  return p;
}

}  // namespace

ProblemConfig parse_config(const json& j) {
  allowed_keys(j, "config",
               {"version", "name", "description", "chart", "params", "alpha", "delta", "g", "alpha2", "delta2", "g2",
                "solver", "experiment", "group", "custom"});
  ProblemConfig cfg;
  if (!j.contains("version")) config_error("missing 'version'");
  cfg.version = get_int(j["version"], "version");
  if (cfg.version != 1) config_error("unsupported config version " + std::to_string(cfg.version));
  if (j.contains("name")) cfg.name = get_as<std::string>(j["name"], "name");
  if (j.contains("description")) cfg.description = get_as<std::string>(j["description"], "description");
  if (j.contains("params")) cfg.params = get_numbers(j["params"], "params");

  if (j.contains("chart")) {
    const json& c = j["chart"];
    allowed_keys(c, "chart", {"n", "m", "d", "dist_coords"});
    ProblemConfig::Chart ch;
    for (const char* k : {"n", "m", "d"}) {
      if (!c.contains(k)) config_error(std::string("chart is missing '") + k + "'");
    }
    ch.n = get_int(c["n"], "chart.n");
    ch.m = get_int(c["m"], "chart.m");
    ch.d = get_int(c["d"], "chart.d");
    if (c.contains("dist_coords")) {
      for (double v : get_numbers(c["dist_coords"], "chart.dist_coords")) ch.dist_coords.push_back(static_cast<int>(v));
    }
    cfg.chart = ch;
    if (!j.contains("alpha") || !j.contains("g")) config_error("a problem needs 'alpha' and 'g'");
    cfg.alpha = get_strings(j["alpha"], "alpha");
    if (j.contains("delta")) cfg.delta = get_string_matrix(j["delta"], "delta");
    cfg.g = get_strings(j["g"], "g");
    if (j.contains("alpha2")) cfg.alpha2 = get_strings(j["alpha2"], "alpha2");
    if (j.contains("delta2")) cfg.delta2 = get_string_matrix(j["delta2"], "delta2");
    if (j.contains("g2")) cfg.g2 = get_strings(j["g2"], "g2");
  } else {
    for (const char* k : {"alpha", "delta", "g", "alpha2", "delta2", "g2", "group"}) {
      if (j.contains(k)) config_error(std::string("'") + k + "' requires a 'chart'");
    }
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    allowed_keys(s, "solver", {"tol_residual", "max_iter", "damping", "armijo", "hessian_cond_cap"});
    if (s.contains("tol_residual")) cfg.solver.tol_residual = get_number(s["tol_residual"], "solver.tol_residual");
    if (s.contains("max_iter")) cfg.solver.max_iter = get_int(s["max_iter"], "solver.max_iter");
    if (s.contains("damping")) cfg.solver.damping = get_number(s["damping"], "solver.damping");
    if (s.contains("armijo")) {
      if (!s["armijo"].is_boolean()) config_error("solver.armijo must be a boolean");
      cfg.solver.armijo = s["armijo"].get<bool>();
    }
    if (s.contains("hessian_cond_cap")) {
      cfg.solver.hessian_cond_cap = get_number(s["hessian_cond_cap"], "solver.hessian_cond_cap");
    }
  }
  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    allowed_keys(e, "experiment", {"h0", "h_count", "r_claimed", "y", "x0", "seed"});
    if (e.contains("h0")) cfg.experiment.h0 = get_number(e["h0"], "experiment.h0");
    if (e.contains("h_count")) cfg.experiment.h_count = get_int(e["h_count"], "experiment.h_count");
    if (e.contains("r_claimed")) cfg.experiment.r_claimed = get_int(e["r_claimed"], "experiment.r_claimed");
    if (e.contains("y")) cfg.experiment.y = get_number_matrix(e["y"], "experiment.y");
    if (e.contains("x0")) cfg.experiment.x0 = get_numbers(e["x0"], "experiment.x0");
    if (e.contains("seed")) {
      if (!e["seed"].is_number_unsigned()) config_error("experiment.seed must be a nonnegative integer");
      cfg.experiment.seed = e["seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("group")) {
    if (!j["group"].is_array()) config_error("group must be a list");
    for (const auto& gj : j["group"]) {
      allowed_keys(gj, "group entry", {"tau_m", "tau_n"});
      if (!gj.contains("tau_m") || !gj.contains("tau_n")) config_error("group entries need tau_m and tau_n");
      cfg.group.push_back({get_number_matrix(gj["tau_m"], "tau_m"), get_number_matrix(gj["tau_n"], "tau_n")});
    }
  }
  if (j.contains("custom")) {
    const json& c = j["custom"];
    allowed_keys(c, "custom", {"kind", "in_dim", "f1", "f2", "x"});
    ProblemConfig::Custom cu;
    if (c.contains("kind")) cu.kind = get_as<std::string>(c["kind"], "custom.kind");
    if (c.contains("in_dim")) cu.in_dim = get_int(c["in_dim"], "custom.in_dim");
    if (!c.contains("f1") || !c.contains("f2") || !c.contains("x")) config_error("custom needs f1, f2 and x");
    cu.f1 = get_strings(c["f1"], "custom.f1");
    cu.f2 = get_strings(c["f2"], "custom.f2");
    cu.x = get_numbers(c["x"], "custom.x");
    cfg.custom = cu;
  }
  validate_config(cfg);
  return cfg;
}

ProblemConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

nlohmann::ordered_json to_json(const ProblemConfig& cfg) {
  nlohmann::ordered_json j;
  j["version"] = cfg.version;
  j["name"] = cfg.name;
  j["description"] = cfg.description;
  if (cfg.chart) {
    j["chart"] = {{"n", cfg.chart->n}, {"m", cfg.chart->m}, {"d", cfg.chart->d}};
    if (!cfg.chart->dist_coords.empty()) j["chart"]["dist_coords"] = cfg.chart->dist_coords;
  }
  if (!cfg.params.empty()) j["params"] = cfg.params;
  if (cfg.chart) {
    j["alpha"] = cfg.alpha;
    j["delta"] = cfg.delta;
    j["g"] = cfg.g;
    if (cfg.alpha2) j["alpha2"] = *cfg.alpha2;
    if (cfg.delta2) j["delta2"] = *cfg.delta2;
    if (cfg.g2) j["g2"] = *cfg.g2;
  }
  j["solver"] = {{"tol_residual", cfg.solver.tol_residual},
                 {"max_iter", cfg.solver.max_iter},
                 {"damping", cfg.solver.damping},
                 {"armijo", cfg.solver.armijo},
                 {"hessian_cond_cap", cfg.solver.hessian_cond_cap}};
  nlohmann::ordered_json e;
  e["h0"] = cfg.experiment.h0;
  e["h_count"] = cfg.experiment.h_count;
  if (cfg.experiment.r_claimed) e["r_claimed"] = *cfg.experiment.r_claimed;
  e["y"] = cfg.experiment.y;
  e["x0"] = cfg.experiment.x0;
  e["seed"] = cfg.experiment.seed;
  j["experiment"] = e;
  if (!cfg.group.empty()) {
    j["group"] = nlohmann::ordered_json::array();
    for (const auto& g : cfg.group) j["group"].push_back({{"tau_m", g.tau_m}, {"tau_n", g.tau_n}});
  }
  if (cfg.custom) {
    j["custom"] = {{"kind", cfg.custom->kind},
                   {"in_dim", cfg.custom->in_dim},
                   {"f1", cfg.custom->f1},
                   {"f2", cfg.custom->f2},
                   {"x", cfg.custom->x}};
  }
  return j;
}

std::string config_hash(const ProblemConfig& cfg) {
  return fnv1a_hex(to_json(cfg).dump());
}

AmbientChart make_chart(const ProblemConfig& cfg) {
  if (!cfg.chart) config_error("config defines no problem (missing 'chart')");
  std::vector<int> dist;
  for (int c : cfg.chart->dist_coords) dist.push_back(c - 1);
  try {
    return AmbientChart::make(cfg.chart->n, cfg.chart->m, cfg.chart->d, dist);
  } catch (const Error& e) {
    config_error(std::string("chart: ") + e.what());
  }
}

NewtonSettings make_settings(const ProblemConfig& cfg) {
  NewtonSettings s;
  s.tol_residual = cfg.solver.tol_residual;
  s.max_iter = cfg.solver.max_iter;
  s.damping = cfg.solver.damping;
  s.armijo = cfg.solver.armijo;
  s.hessian_cond_cap = cfg.solver.hessian_cond_cap;
  try {
    s.validate();
  } catch (const Error& e) {
    config_error(std::string("solver: ") + e.what());
  }
  return s;
}

std::vector<double> make_h_seq(const ProblemConfig& cfg) {
  if (!(cfg.experiment.h0 > 0.0) || cfg.experiment.h_count < 3) {
    config_error("experiment needs h0 > 0 and h_count >= 3");
  }
  return halving_sequence(cfg.experiment.h0, cfg.experiment.h_count);
}

ProblemFamily build_family(const ProblemConfig& cfg) {
  if (!cfg.is_family()) config_error("config defines a single problem, not a family");
  ProblemFamily fam;
  fam.chart = make_chart(cfg);
  fam.members[0] = compile_member(cfg, cfg.alpha, cfg.delta, cfg.g, "");
  fam.members[1] = compile_member(cfg, cfg.alpha2.value_or(cfg.alpha), cfg.delta2.value_or(cfg.delta),
                                  cfg.g2.value_or(cfg.g), "2");
  return fam;
}

SkewProblem build_problem(const ProblemConfig& cfg) {
  const AmbientChart chart = make_chart(cfg);
  return compile_member(cfg, cfg.alpha, cfg.delta, cfg.g, "").at(chart, 0.0);
}

GroupAction build_group(const ProblemConfig& cfg) {
  const AmbientChart chart = make_chart(cfg);
  if (cfg.group.empty()) return GroupAction::identity(chart.n, chart.m);
  GroupAction a;
  for (const auto& g : cfg.group) {
    a.generators.emplace_back(to_mat(g.tau_m, chart.n, chart.n, "tau_m"), to_mat(g.tau_n, chart.m, chart.m, "tau_n"));
  }
  return a;
}

std::pair<AdaptedFamily, AdaptedFamily> build_custom(const ProblemConfig& cfg) {
  if (!cfg.custom) config_error("config has no 'custom' section");
  const auto& c = *cfg.custom;
  if (c.kind != "plain" && c.kind != "graph") config_error("custom.kind must be 'plain' or 'graph'");
  if (c.in_dim < 1) config_error("custom.in_dim must be positive");
  if (static_cast<int>(c.x.size()) != c.in_dim) config_error("custom.x must have in_dim entries");
  if (c.f1.empty() || c.f1.size() != c.f2.size()) config_error("custom.f1 and custom.f2 must have equal length");
  if (c.kind == "graph" && static_cast<int>(c.f1.size()) != 2 * c.in_dim) {
    config_error("graph families need 2*in_dim components");
  }
  const expr::Dims dims{c.in_dim, true, static_cast<int>(cfg.params.size())};
  const expr::Expr t = expr::Expr::variable(expr::Var::t());
  auto a = AdaptedFamily::from_expressions(c.in_dim, compile_list(c.f1, c.f1.size(), dims, cfg.params, "custom.f1"), t);
  auto b = AdaptedFamily::from_expressions(c.in_dim, compile_list(c.f2, c.f2.size(), dims, cfg.params, "custom.f2"), t);
  return {a, b};
}

void validate_config(const ProblemConfig& cfg) {
  if (cfg.chart) {
    const AmbientChart chart = make_chart(cfg);
    if (cfg.is_family()) {
      build_family(cfg);
    } else {
      build_problem(cfg);
    }
    for (const auto& y : cfg.experiment.y) {
      if (static_cast<int>(y.size()) != chart.m) config_error("experiment.y entries must have m components");
    }
    if (!cfg.experiment.x0.empty() && static_cast<int>(cfg.experiment.x0.size()) != chart.n) {
      config_error("experiment.x0 must have n components");
    }
    if (!cfg.group.empty()) {
      const GroupAction a = build_group(cfg);
      try {
        a.validate(chart.n, chart.m);
      } catch (const Error& e) {
        config_error(std::string("group: ") + e.what());
      }
    }
  }
  if (cfg.custom) build_custom(cfg);
  if (!cfg.chart && !cfg.custom) config_error("config defines neither a problem nor custom families");
  make_settings(cfg);
  make_h_seq(cfg);
  if (cfg.experiment.r_claimed && *cfg.experiment.r_claimed < 1) config_error("experiment.r_claimed must be >= 1");
}

}  // namespace skewcrit
