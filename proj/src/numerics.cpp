#include "skewcrit/numerics.hpp"

#include "skewcrit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace skewcrit {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

double default_fd_step(double xi) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(xi));
}

Mat fd_jacobian(const VecFn& f, const Vec& x, std::optional<double> step) {
  if (step && !(*step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  }
  const Eigen::Index n = x.size();
  Mat jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = step ? *step : default_fd_step(x(j));
    Vec xp = x;
    Vec xm = x;
    xp(j) += s;
    xm(j) -= s;
    // Use the actually representable spacing.
    const double span = xp(j) - xm(j);
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    if (!fp.allFinite() || !fm.allFinite()) {
      throw Error(ErrorCode::NonFiniteEvaluation,
                  "non-finite value on the difference stencil along coordinate " + std::to_string(j));
    }
    if (j == 0) jac.resize(fp.size(), n);
    if (fp.size() != jac.rows() || fm.size() != jac.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "function output size changed between evaluations");
    }
    jac.col(j) = (fp - fm) / span;
  }
  if (n == 0) jac.resize(f(x).size(), 0);
  return jac;
}

namespace {

void fix_sign(Eigen::Ref<Vec> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace

KernelSplit kernel_split(const Mat& a, std::optional<double> tol_kernel) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (!a.allFinite()) throw Error(ErrorCode::NonFiniteEvaluation, "kernel_split on a non-finite matrix");
  if (m > n) {
    throw Error(ErrorCode::RankDeficient,
                "more constraint rows (" + std::to_string(m) + ") than unknowns (" + std::to_string(n) + ")");
  }
  KernelSplit out;
  out.source_matrix = a;
  if (m == 0) {
    out.kernel_basis = Mat::Identity(n, n);
    out.complement_basis = Mat(n, 0);
    out.singular_values = Vec(0);
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double tol = tol_kernel ? *tol_kernel : 1e-10 * sv(0);
  if (!(sv(m - 1) > tol)) {
    throw Error(ErrorCode::RankDeficient, "smallest retained singular value " + std::to_string(sv(m - 1)) +
                                              " is not above tolerance " + std::to_string(tol));
  }
  Mat v = svd.matrixV();
  for (Eigen::Index j = 0; j < n; ++j) fix_sign(v.col(j));
  out.complement_basis = v.leftCols(m);
  out.kernel_basis = v.rightCols(n - m);
  out.singular_values = sv;
  return out;
}

Vec richardson_limit(std::span<const Sample> samples, double order_gap) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples, "Richardson extrapolation needs at least two samples");
  }
  if (!(order_gap > 0.0)) throw Error(ErrorCode::InvalidArgument, "order gap must be positive");
  const std::size_t count = samples.size();
  std::vector<double> s(count);
  std::vector<Vec> table(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(samples[i].h > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample spacing must be positive");
    if (i > 0 && !(samples[i].h < samples[i - 1].h)) {
      throw Error(ErrorCode::InvalidArgument, "samples must have distinct h sorted decreasing");
    }
    if (samples[i].value.size() != samples[0].value.size()) {
      throw Error(ErrorCode::DimensionMismatch, "sample values differ in length");
    }
    s[i] = std::pow(samples[i].h, order_gap);
    table[i] = samples[i].value;
  }
  for (std::size_t k = 1; k < count; ++k) {
    for (std::size_t i = count - 1; i >= k; --i) {
      table[i] = table[i] + (table[i] - table[i - 1]) * (s[i] / (s[i - k] - s[i]));
    }
  }
  return table[count - 1];
}

SlopeFit slope_fit(std::span<const std::pair<double, double>> pairs, double floor) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [h, err] : pairs) {
    if (h > 0.0 && std::isfinite(err) && err > floor) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(err));
    }
  }
  if (lx.size() < 3) {
    throw Error(ErrorCode::BelowFloor,
                "only " + std::to_string(lx.size()) + " points above the noise floor; objects are numerically identical");
  }
  const double count = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::InvalidArgument, "slope fit needs distinct h values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.points = lx.size();
  const double intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::vector<double> halving_sequence(double h0, int count) {
  if (!(h0 > 0.0) || count < 1) throw Error(ErrorCode::InvalidArgument, "h0 must be positive and count >= 1");
  std::vector<double> h(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) h[static_cast<std::size_t>(k)] = std::ldexp(h0, -k);
  return h;
}

double condition_number(const Mat& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (a.rows() != a.cols() || smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

double smallest_singular_value(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

Vec flatten_rows(const Mat& m) {
  Vec v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(r * m.cols() + c) = m(r, c);
  return v;
}

Mat unflatten_rows(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw Error(ErrorCode::DimensionMismatch, "flattened matrix has wrong length");
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v(r * cols + c);
  return m;
}

}  // namespace skewcrit
