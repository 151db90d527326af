#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace skewcrit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// Per-coordinate central-difference step: cbrt(eps) * max(1, |x_i|).
double default_fd_step(double xi);

/// Central-difference Jacobian of f at x. Row i is output i, column j is
/// the derivative along e_j. A fixed `step` overrides the per-coordinate
/// default. Throws NonFiniteEvaluation if any stencil value is NaN/Inf.
Mat fd_jacobian(const VecFn& f, const Vec& x, std::optional<double> step = std::nullopt);

/// Orthonormal splitting of R^n into ker A and a complement on which A is
/// invertible, from the right singular vectors of A.
struct KernelSplit {
  Mat kernel_basis;      // n x (n - m)
  Mat complement_basis;  // n x m
  Mat source_matrix;     // m x n
  Vec singular_values;   // descending, length min(m, n)
};

/// Splits A (m x n, full row rank) by SVD. The first nonzero entry of every
/// returned basis vector is positive, so repeated calls agree bitwise.
/// tol_kernel defaults to 1e-10 times the largest singular value; the m-th
/// singular value at or below it raises RankDeficient.
KernelSplit kernel_split(const Mat& a, std::optional<double> tol_kernel = std::nullopt);

struct Sample {
  double h;
  Vec value;
};

/// Extrapolates value(h) to h -> 0 assuming an error expansion in powers
/// h^order_gap, h^(2 order_gap), ... (Neville tableau in s = h^order_gap).
/// Samples must have distinct h > 0, sorted decreasing.
Vec richardson_limit(std::span<const Sample> samples, double order_gap);

struct SlopeFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(err) against log(h). Pairs with err <= floor
/// are discarded; fewer than three survivors raise BelowFloor.
SlopeFit slope_fit(std::span<const std::pair<double, double>> pairs, double floor = 1e-14);

/// h0 * 2^-k for k = 0..count-1.
std::vector<double> halving_sequence(double h0, int count);

/// sigma_max / sigma_min (2-norm); +inf for singular or empty matrices.
double condition_number(const Mat& a);

double smallest_singular_value(const Mat& a);

/// Row-major flattening helpers for matrix-valued families.
Vec flatten_rows(const Mat& m);
Mat unflatten_rows(const Vec& v, Eigen::Index rows, Eigen::Index cols);

}  // namespace skewcrit
