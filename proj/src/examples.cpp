#include "skewcrit/examples.hpp"

#include "skewcrit/error.hpp"

namespace skewcrit {

namespace {

std::vector<BuiltinExample> make_registry() {
  return {
      {"trivial", "constrained minimum of |x|^2/2 on the line x1 = y",
       R"j({"version": 1, "name": "trivial",
           "description": "constrained minimum of |x|^2/2 on the line x1 = y",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "experiment": {"y": [[-1], [0], [0.7], [1]], "x0": [0.7, 0.3]}})j"},
      {"skew3d", "skew problem on R^3 with a non-integrable graph distribution",
       R"j({"version": 1, "name": "skew3d",
           "description": "skew problem on R^3 with a non-integrable graph distribution",
           "chart": {"n": 3, "m": 1, "d": 2, "dist_coords": [2, 3]},
           "alpha": ["x2", "x3", "x2 + x3"], "delta": [["x3", "0"]], "g": ["x1"],
           "experiment": {"y": [[0.4]], "x0": [0.4, 0.1, -0.1]}})j"},
      {"degenerate", "constant one-form: the skew Hessian vanishes",
       R"j({"version": 1, "name": "degenerate",
           "description": "constant one-form: the skew Hessian vanishes",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "alpha": ["1", "0"], "delta": [["0"]], "g": ["x1"],
           "experiment": {"y": [[0.5]], "x0": [0.3, 0.2]}})j"},
      {"fold", "skew Hessian 1 - y, degenerate at y = 1",
       R"j({"version": 1, "name": "fold",
           "description": "skew Hessian 1 - y, degenerate at y = 1",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "alpha": ["x1", "(1 - x1)*x2"], "delta": [["0"]], "g": ["x1"],
           "experiment": {"y": [[0], [0.25], [0.5], [0.75], [1]], "x0": [0, 0.1]}})j"},
      {"trivial-alpha-perturbed", "trivial problem with alpha2 = alpha + c t^2 dx2",
       R"j({"version": 1, "name": "trivial-alpha-perturbed",
           "description": "trivial problem with alpha2 = alpha + c t^2 dx2",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "params": [1],
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "alpha2": ["x1", "x2 + p1*t^2"],
           "experiment": {"r_claimed": 2, "y": [[0.7]], "x0": [0.7, 0.1]}})j"},
      {"trivial-g-perturbed", "trivial problem with g2 = x1 + t^2/2",
       R"j({"version": 1, "name": "trivial-g-perturbed",
           "description": "trivial problem with g2 = x1 + t^2/2",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "g2": ["x1 + 0.5*t^2"],
           "experiment": {"r_claimed": 2, "y": [[0.7]], "x0": [0.7, 0.1]}})j"},
      {"trivial-delta-perturbed", "trivial problem with the distribution tilted by k t^2",
       R"j({"version": 1, "name": "trivial-delta-perturbed",
           "description": "trivial problem with the distribution tilted by k t^2",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "params": [0.5],
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "delta2": [["p1*t^2"]],
           "experiment": {"r_claimed": 2, "y": [[0.7]], "x0": [0.7, 0.1]}})j"},
      {"skew3d-alpha-cubic", "skew3d with alpha2 = alpha + t^3 x1 dx2",
       R"j({"version": 1, "name": "skew3d-alpha-cubic",
           "description": "skew3d with alpha2 = alpha + t^3 x1 dx2",
           "chart": {"n": 3, "m": 1, "d": 2, "dist_coords": [2, 3]},
           "alpha": ["x2", "x3", "x2 + x3"], "delta": [["x3", "0"]], "g": ["x1"],
           "alpha2": ["x2", "x3 + t^3*x1", "x2 + x3"],
           "experiment": {"r_claimed": 3, "y": [[0.4]], "x0": [0.4, 0.1, -0.1]}})j"},
      {"reflection-symmetric", "alpha-perturbed trivial family with the reflection x1 -> -x1",
       R"j({"version": 1, "name": "reflection-symmetric",
           "description": "alpha-perturbed trivial family with the reflection x1 -> -x1",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "params": [1],
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "alpha2": ["x1", "x2 + p1*t^2"],
           "experiment": {"r_claimed": 2, "y": [[0.7]], "x0": [0.7, 0.1]},
           "group": [{"tau_m": [[-1, 0], [0, 1]], "tau_n": [[-1]]}]})j"},
      {"reflection-odd", "perturbation t^2 x1 dx2, odd under the reflection",
       R"j({"version": 1, "name": "reflection-odd",
           "description": "perturbation t^2 x1 dx2, odd under the reflection",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "alpha2": ["x1", "x2 + t^2*x1"],
           "experiment": {"r_claimed": 2, "y": [[0.7]], "x0": [0.7, 0.1]},
           "group": [{"tau_m": [[-1, 0], [0, 1]], "tau_n": [[-1]]}]})j"},
      {"identical", "family of two identical trivial problems",
       R"j({"version": 1, "name": "identical",
           "description": "family of two identical trivial problems",
           "chart": {"n": 2, "m": 1, "d": 1, "dist_coords": [2]},
           "alpha": ["x1", "x2"], "delta": [["0"]], "g": ["x1"],
           "alpha2": ["x1", "x2"],
           "experiment": {"r_claimed": 2, "y": [[0.7]], "x0": [0.7, 0.1]}})j"},
      {"graph-bump-symmetric", "graph families with equal residual components plus a t^3 tail",
       R"j({"version": 1, "name": "graph-bump-symmetric",
           "description": "graph families with equal residual components plus a t^3 tail",
           "experiment": {"r_claimed": 2},
           "custom": {"kind": "graph", "in_dim": 1,
                      "f1": ["x1", "x1 + t"],
                      "f2": ["x1 + t^2*x1^2", "x1 + t + t^2*x1^2 + t^3*x1"],
                      "x": [0.5]}})j"},
      {"graph-bump-asymmetric", "graph families whose residual sits in the second component",
       R"j({"version": 1, "name": "graph-bump-asymmetric",
           "description": "graph families whose residual sits in the second component",
           "experiment": {"r_claimed": 2},
           "custom": {"kind": "graph", "in_dim": 1,
                      "f1": ["x1", "x1 + t"],
                      "f2": ["x1", "x1 + t + t^2*x1^2"],
                      "x": [0.5]}})j"},
      {"power-law", "map families differing by t^3 cos(x1)",
       R"j({"version": 1, "name": "power-law",
           "description": "map families differing by t^3 cos(x1)",
           "experiment": {"r_claimed": 3},
           "custom": {"kind": "plain", "in_dim": 1,
                      "f1": ["sin(x1) + t"],
                      "f2": ["sin(x1) + t + t^3*cos(x1)"],
                      "x": [0.5]}})j"},
  };
}

}  // namespace

const std::vector<BuiltinExample>& builtin_examples() {
  static const std::vector<BuiltinExample> registry = make_registry();
  return registry;
}

ProblemConfig builtin_config(const std::string& name) {
  for (const auto& e : builtin_examples()) {
    if (e.name == name) return parse_config_text(e.json_text);
  }
  throw Error(ErrorCode::ConfigError, "no built-in example named '" + name + "'");
}

ProblemConfig resolve_config(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return builtin_config(spec.substr(prefix.size()));
  return load_config(spec);
}

}  // namespace skewcrit
