#pragma once

#include "skewcrit/numerics.hpp"

#include <functional>
#include <vector>

namespace skewcrit {

/// Global chart R^n with m constraints and a rank-d distribution. The model
/// fiber D is spanned by the coordinates listed in dist_coords (0-based);
/// the remaining coordinates, in increasing order, span its complement.
struct AmbientChart {
  int n = 0;
  int m = 0;
  int d = 0;
  std::vector<int> dist_coords;
  std::vector<int> perp_coords;

  /// dist_coords empty means the first d coordinates.
  static AmbientChart make(int n, int m, int d, std::vector<int> dist_coords = {});

  /// n x d matrix whose column j is e_{dist_j} + sum_l delta(l, j) e_{perp_l}.
  Mat graph_basis(const Mat& delta) const;
};

/// Components of alpha against the coordinate basis. jac(j, i) = d alpha_j / d x_i.
struct OneForm {
  int n = 0;
  VecFn eval;
  MatFn jac;  // optional
};

/// Rank-d distribution as the graph of delta(x): (n-d) x d.
/// jac, when given, is ((n-d)*d) x n with row l*d + j holding the gradient
/// of delta(l, j).
struct GraphDistribution {
  int n = 0;
  int d = 0;
  MatFn delta;
  MatFn jac;  // optional

  /// Converts a basis field (n x d, columns spanning the fiber) to graph
  /// form. Raises NonGraph at evaluation when the D-block is singular, and
  /// eagerly at each of check_points.
  static GraphDistribution from_basis(const AmbientChart& chart, MatFn basis,
                                      const std::vector<Vec>& check_points = {});
};

struct Constraint {
  int n = 0;
  int m = 0;
  VecFn eval;
  MatFn jac;  // optional, m x n
};

struct SkewProblem {
  AmbientChart chart;
  OneForm alpha;
  GraphDistribution dist;
  Constraint g;

  /// Throws DimensionMismatch on inconsistent sizes.
  void validate() const;
};

struct SkewHessianReport {
  Mat matrix;
  double condition_number = 0.0;
  bool nondegenerate = false;
  double tolerance = 1e8;
  double critical_residual = 0.0;   // |alpha_D(x_c)|_inf
  bool at_critical_point = false;   // critical_residual <= 1e-8
};

Vec alpha_on_D(const SkewProblem& p, const Vec& x);

struct FValue {
  Vec alpha_d;  // length d
  Vec g;        // length m
};
FValue f_map(const SkewProblem& p, const Vec& x);

Mat constraint_jacobian(const SkewProblem& p, const Vec& x);

/// D alpha_D at x (d x n), analytic when both alpha and the distribution
/// carry Jacobians, otherwise by central differences.
Mat alpha_on_D_jacobian(const SkewProblem& p, const Vec& x);

/// Full Jacobian of x -> (alpha_D(x), g(x)), (d+m) x n.
Mat f_map_jacobian(const SkewProblem& p, const Vec& x);

/// Restricted Hessian H = D alpha_D(x) * kernel_basis(Dg(x)); d x (n-m).
/// Its condition number counts as infinite once sigma_min drops below
/// 1e-12 * max(1, |D alpha_D|).
Mat restricted_hessian(const Mat& jac_alpha_d, const Mat& kernel_basis);
double hessian_condition(const Mat& hessian, const Mat& jac_alpha_d);

SkewHessianReport skew_hessian(const SkewProblem& p, const Vec& x_c, double tol = 1e8);

/// The same Hessian computed from the extension
///   v_j(x) = b_j(x) + B(x) * corrections[j] * (x - x_c),
/// where each correction is d x n. At a critical point the result agrees
/// with skew_hessian.
SkewHessianReport skew_hessian_extended(const SkewProblem& p, const Vec& x_c, const std::vector<Mat>& corrections,
                                        double tol = 1e8);

}  // namespace skewcrit
