#pragma once

#include "skewcrit/solver.hpp"
#include "skewcrit/variation.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skewcrit {

/// Text form of a problem or family. Expressions use x1..xn, p1..pk and,
/// in families only, t. Every parse failure raises ConfigError.
struct ProblemConfig {
  struct Chart {
    int n = 0;
    int m = 0;
    int d = 0;
    std::vector<int> dist_coords;  // 1-based; empty means 1..d
    bool operator==(const Chart&) const = default;
  };
  struct Solver {
    double tol_residual = 1e-12;
    int max_iter = 50;
    double damping = 1.0;
    bool armijo = true;
    double hessian_cond_cap = 1e8;
    bool operator==(const Solver&) const = default;
  };
  struct Experiment {
    double h0 = 0.1;
    int h_count = 11;
    std::optional<int> r_claimed;
    std::vector<std::vector<double>> y;
    std::vector<double> x0;
    std::uint64_t seed = 7;
    bool operator==(const Experiment&) const = default;
  };
  struct Group {
    std::vector<std::vector<double>> tau_m;
    std::vector<std::vector<double>> tau_n;
    bool operator==(const Group&) const = default;
  };
  struct Custom {
    std::string kind = "plain";  // plain | graph
    int in_dim = 1;
    std::vector<std::string> f1;
    std::vector<std::string> f2;
    std::vector<double> x;
    bool operator==(const Custom&) const = default;
  };

  int version = 1;
  std::string name;
  std::string description;
  std::optional<Chart> chart;  // absent for custom-only configs
  std::vector<double> params;
  std::vector<std::string> alpha;
  std::vector<std::vector<std::string>> delta;
  std::vector<std::string> g;
  std::optional<std::vector<std::string>> alpha2;
  std::optional<std::vector<std::vector<std::string>>> delta2;
  std::optional<std::vector<std::string>> g2;
  Solver solver;
  Experiment experiment;
  std::vector<Group> group;
  std::optional<Custom> custom;

  bool has_problem() const { return chart.has_value(); }
  bool is_family() const { return alpha2 || delta2 || g2; }
  bool operator==(const ProblemConfig&) const = default;
};

ProblemConfig parse_config(const nlohmann::json& j);
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig load_config(const std::string& path);
nlohmann::ordered_json to_json(const ProblemConfig& cfg);

/// Hex FNV-1a 64 of the canonical JSON dump.
std::string config_hash(const ProblemConfig& cfg);

AmbientChart make_chart(const ProblemConfig& cfg);
NewtonSettings make_settings(const ProblemConfig& cfg);
std::vector<double> make_h_seq(const ProblemConfig& cfg);

/// Single problem; for families, member 1 frozen at t = 0.
SkewProblem build_problem(const ProblemConfig& cfg);
ProblemFamily build_family(const ProblemConfig& cfg);
GroupAction build_group(const ProblemConfig& cfg);

/// The custom families (f1, f2) as expression-backed adapted families.
std::pair<AdaptedFamily, AdaptedFamily> build_custom(const ProblemConfig& cfg);

/// Compiles every expression of cfg; raises ConfigError on the first failure.
void validate_config(const ProblemConfig& cfg);

}  // namespace skewcrit
