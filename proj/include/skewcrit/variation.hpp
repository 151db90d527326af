#pragma once

#include "skewcrit/contact.hpp"
#include "skewcrit/geometry.hpp"
#include "skewcrit/solver.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace skewcrit {

/// A skew problem depending on t: alpha (n), delta ((n-d)*d, row-major)
/// and g (m) as families over x in R^n.
struct ParametricProblem {
  AdaptedFamily alpha;
  AdaptedFamily delta;
  AdaptedFamily g;

  /// The problem frozen at t, with analytic Jacobians where available.
  SkewProblem at(const AmbientChart& chart, double t) const;
};

/// Two parametric problems on one chart that coincide at t = 0. The
/// solution families live over N x R with h_N(y, t) = t.
struct ProblemFamily {
  AmbientChart chart;
  std::array<ParametricProblem, 2> members;

  const ParametricProblem& member(int i) const;  // i in {1, 2}
  SkewProblem at(int i, double t) const { return member(i).at(chart, t); }
  /// Throws BaseMismatch when the members differ at t = 0 at any of points.
  void check_coincide(const std::vector<Vec>& points) const;
};

SolveResult solve_family(const ProblemFamily& fam, int i, const Vec& y, double t, const Vec& x0,
                         const NewtonSettings& s = {});

/// Settings for the frozen-t solves that build solution families.
NewtonSettings family_newton_settings();

/// gamma_i(y, t) as a family over y, warm-started at base_x for every t.
AdaptedFamily solution_family(const ProblemFamily& fam, int i, const Vec& base_x);

struct DataContacts {
  ContactEstimate alpha;
  ContactEstimate delta;
  ContactEstimate g;
};

/// Data contacts of the members at x (orders claimed r).
DataContacts data_contacts(const ProblemFamily& fam, const Vec& x, int r, const ContactOptions& opts = {});

struct GammaContactReport {
  Vec x_base;  // gamma(y) at t = 0
  DataContacts data;
  ContactEstimate estimate;
  bool pass = false;  // slope >= r - 0.1 (or machine-limited)
};

/// Solution contact of the two members at y. x0 seeds the t = 0 solve.
/// Raises DataContactViolation when a data family has contact below r.
GammaContactReport verify_gamma_contact(const ProblemFamily& fam, const Vec& y, const Vec& x0, int r,
                                        const ContactOptions& opts = {});

enum class GammaDotReading {
  HPreserving,         // gamma_dot = 1 throughout
  FactorOnHessian,     // gamma_dot multiplies the d_D alpha rows
  FactorOnDataResidual // gamma_dot^r multiplies the alpha residual term
};

std::string to_string(GammaDotReading r);

struct ResidualSystemOptions {
  int index = 1;  // which member supplies d_D alpha and Dg
  GammaDotReading reading = GammaDotReading::HPreserving;
  double gamma_dot = 1.0;
  double critical_tol = 1e-8;
  ContactOptions contact;
};

struct ResidualSystem {
  Mat a;  // (d + m) x n
  Vec b;
  int d = 0;
  int m = 0;
  double gamma_dot = 1.0;
  double condition_number = 0.0;
  Vec alpha_residual;   // res^r(alpha^2, alpha^1)(x_c), length n
  Mat delta_residual;   // (n-d) x d
  Vec g_residual;       // length m
};

ResidualSystem assemble_residual_system(const ProblemFamily& fam, const Vec& x_c, const Vec& y_c, int r,
                                        const ResidualSystemOptions& opts = {});

/// Solves A u = -b.
Vec predict_solution_residual(const ResidualSystem& sys);

/// Finite group generated by pairs (tau_M, tau_N).
struct GroupAction {
  std::vector<std::pair<Mat, Mat>> generators;

  /// Checks invertibility and finiteness (closure within cap elements).
  void validate(int n, int m, int cap = 64) const;
  static GroupAction identity(int n, int m);
};

struct EquivarianceItem {
  double discrepancy = 0.0;  // |tau_M res(y) - res(tau_N y)|_inf
  Vec residual_at_y;
  Vec residual_at_tau_y;
};

struct EquivarianceReport {
  std::vector<EquivarianceItem> items;
  double max_discrepancy = 0.0;
  bool pass = false;
  int sample_points = 0;
};

struct EquivarianceOptions {
  double tol = 1e-8;
  double hypothesis_tol = 1e-8;
  int sample_points = 20;
  double sample_radius = 0.5;
  unsigned long long seed = 12345;
  ContactOptions contact;
};

/// Checks the hypotheses at seeded sample points around the t = 0 solution
/// (HypothesisViolated names the failing one), then compares the measured
/// solution residuals at y and tau_N y.
EquivarianceReport equivariance_check(const ProblemFamily& fam, const GroupAction& action, const Vec& y,
                                      const Vec& x0, int r, const EquivarianceOptions& opts = {});

/// Graph map of tau: Delta -> (tau_FD + tau_FF Delta)(tau_DD + tau_DF Delta)^-1.
Mat transform_graph(const AmbientChart& chart, const Mat& tau, const Mat& delta);
/// Its derivative at delta in direction dir.
Mat transform_graph_derivative(const AmbientChart& chart, const Mat& tau, const Mat& delta, const Mat& dir);

}  // namespace skewcrit
