#include "skewcrit/geometry.hpp"

#include "skewcrit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace skewcrit {

namespace {

void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has size " + std::to_string(got) + ", expected " + std::to_string(want));
  }
}

Mat eval_delta(const SkewProblem& p, const Vec& x) {
  Mat delta = p.dist.delta(x);
  if (delta.rows() != p.chart.n - p.chart.d || delta.cols() != p.chart.d) {
    throw Error(ErrorCode::DimensionMismatch, "distribution matrix has shape " + std::to_string(delta.rows()) + "x" +
                                                  std::to_string(delta.cols()));
  }
  if (!delta.allFinite()) throw Error(ErrorCode::NonFiniteEvaluation, "distribution matrix is not finite");
  return delta;
}

Vec eval_alpha(const SkewProblem& p, const Vec& x) {
  Vec a = p.alpha.eval(x);
  require_size(a.size(), p.chart.n, "one-form value");
  if (!a.allFinite()) throw Error(ErrorCode::NonFiniteEvaluation, "one-form value is not finite");
  return a;
}

}  // namespace

AmbientChart AmbientChart::make(int n, int m, int d, std::vector<int> dist_coords) {
  if (n < 1 || m < 0 || d < 0 || d > n || m > n) {
    throw Error(ErrorCode::DimensionMismatch, "invalid chart dimensions n=" + std::to_string(n) +
                                                  " m=" + std::to_string(m) + " d=" + std::to_string(d));
  }
  AmbientChart c;
  c.n = n;
  c.m = m;
  c.d = d;
  if (dist_coords.empty()) {
    for (int i = 0; i < d; ++i) dist_coords.push_back(i);
  }
  if (static_cast<int>(dist_coords.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch, "dist_coords must list exactly d coordinates");
  }
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int i : dist_coords) {
    if (i < 0 || i >= n || used[static_cast<std::size_t>(i)]) {
      throw Error(ErrorCode::DimensionMismatch, "dist_coords must be distinct indices below n");
    }
    used[static_cast<std::size_t>(i)] = true;
  }
  c.dist_coords = std::move(dist_coords);
  for (int i = 0; i < n; ++i) {
    if (!used[static_cast<std::size_t>(i)]) c.perp_coords.push_back(i);
  }
  return c;
}

Mat AmbientChart::graph_basis(const Mat& delta) const {
  Mat b = Mat::Zero(n, d);
  for (int j = 0; j < d; ++j) {
    b(dist_coords[static_cast<std::size_t>(j)], j) = 1.0;
    for (int l = 0; l < n - d; ++l) b(perp_coords[static_cast<std::size_t>(l)], j) = delta(l, j);
  }
  return b;
}

GraphDistribution GraphDistribution::from_basis(const AmbientChart& chart, MatFn basis,
                                                const std::vector<Vec>& check_points) {
  const int d = chart.d;
  const int n = chart.n;
  auto to_graph = [chart, basis, d, n](const Vec& x) -> Mat {
    const Mat b = basis(x);
    if (b.rows() != n || b.cols() != d) throw Error(ErrorCode::DimensionMismatch, "basis field has wrong shape");
    Mat top(d, d);
    Mat bottom(n - d, d);
    for (int j = 0; j < d; ++j) top.row(j) = b.row(chart.dist_coords[static_cast<std::size_t>(j)]);
    for (int l = 0; l < n - d; ++l) bottom.row(l) = b.row(chart.perp_coords[static_cast<std::size_t>(l)]);
    if (d > 0) {
      Eigen::JacobiSVD<Mat> svd(top);
      const Vec& sv = svd.singularValues();
      if (!(sv(d - 1) > 1e-12 * std::max(1.0, sv(0)))) {
        throw Error(ErrorCode::NonGraph, "distribution block of the basis is singular");
      }
    }
    return d > 0 ? Mat(bottom * top.inverse()) : Mat(n, 0);
  };
  for (const Vec& x : check_points) to_graph(x);
  GraphDistribution g;
  g.n = n;
  g.d = d;
  g.delta = to_graph;
  return g;
}

void SkewProblem::validate() const {
  if (alpha.n != chart.n || dist.n != chart.n || g.n != chart.n) {
    throw Error(ErrorCode::DimensionMismatch, "problem components disagree on the ambient dimension");
  }
  if (dist.d != chart.d) throw Error(ErrorCode::DimensionMismatch, "distribution rank differs from chart d");
  if (g.m != chart.m) throw Error(ErrorCode::DimensionMismatch, "constraint dimension differs from chart m");
  if (!alpha.eval || !dist.delta || !g.eval) throw Error(ErrorCode::InvalidArgument, "problem has empty callbacks");
}

Vec alpha_on_D(const SkewProblem& p, const Vec& x) {
  require_size(x.size(), p.chart.n, "point");
  const Vec a = eval_alpha(p, x);
  return p.chart.graph_basis(eval_delta(p, x)).transpose() * a;
}

FValue f_map(const SkewProblem& p, const Vec& x) {
  FValue out;
  out.alpha_d = alpha_on_D(p, x);
  out.g = p.g.eval(x);
  require_size(out.g.size(), p.chart.m, "constraint value");
  if (!out.g.allFinite()) throw Error(ErrorCode::NonFiniteEvaluation, "constraint value is not finite");
  return out;
}

Mat constraint_jacobian(const SkewProblem& p, const Vec& x) {
  Mat jac = p.g.jac ? p.g.jac(x) : fd_jacobian(p.g.eval, x);
  if (jac.rows() != p.chart.m || jac.cols() != p.chart.n) {
    throw Error(ErrorCode::DimensionMismatch, "constraint Jacobian has wrong shape");
  }
  return jac;
}

Mat alpha_on_D_jacobian(const SkewProblem& p, const Vec& x) {
  const int n = p.chart.n;
  const int d = p.chart.d;
  if (p.alpha.jac && p.dist.jac) {
    const Vec a = eval_alpha(p, x);
    const Mat delta = eval_delta(p, x);
    const Mat ja = p.alpha.jac(x);
    const Mat jd = p.dist.jac(x);
    if (ja.rows() != n || ja.cols() != n) throw Error(ErrorCode::DimensionMismatch, "one-form Jacobian shape");
    if (jd.rows() != (n - d) * d || jd.cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, "distribution Jacobian shape");
    }
    Mat out = p.chart.graph_basis(delta).transpose() * ja;
    for (int l = 0; l < n - d; ++l) {
      const double ap = a(p.chart.perp_coords[static_cast<std::size_t>(l)]);
      for (int j = 0; j < d; ++j) out.row(j) += ap * jd.row(l * d + j);
    }
    return out;
  }
  return fd_jacobian([&p](const Vec& z) { return alpha_on_D(p, z); }, x);
}

Mat f_map_jacobian(const SkewProblem& p, const Vec& x) {
  const Mat ja = alpha_on_D_jacobian(p, x);
  const Mat jg = constraint_jacobian(p, x);
  Mat out(ja.rows() + jg.rows(), p.chart.n);
  out << ja, jg;
  return out;
}

Mat restricted_hessian(const Mat& jac_alpha_d, const Mat& kernel_basis) { return jac_alpha_d * kernel_basis; }

double hessian_condition(const Mat& hessian, const Mat& jac_alpha_d) {
  if (hessian.rows() != hessian.cols() || hessian.size() == 0) {
    return std::numeric_limits<double>::infinity();
  }
  const double scale = std::max(1.0, jac_alpha_d.norm());
  if (smallest_singular_value(hessian) <= 1e-12 * scale) return std::numeric_limits<double>::infinity();
  return condition_number(hessian);
}

namespace {

SkewHessianReport finish_report(const SkewProblem& p, const Vec& x_c, const Mat& jac, double tol) {
  if (p.chart.d != p.chart.n - p.chart.m) {
    throw Error(ErrorCode::NotSquare, "distribution rank d=" + std::to_string(p.chart.d) +
                                          " differs from kernel dimension n-m=" +
                                          std::to_string(p.chart.n - p.chart.m));
  }
  const KernelSplit split = kernel_split(constraint_jacobian(p, x_c));
  SkewHessianReport rep;
  rep.matrix = restricted_hessian(jac, split.kernel_basis);
  rep.tolerance = tol;
  rep.condition_number = hessian_condition(rep.matrix, jac);
  rep.nondegenerate = rep.matrix.rows() == rep.matrix.cols() && rep.condition_number < tol;
  rep.critical_residual = p.chart.d > 0 ? alpha_on_D(p, x_c).cwiseAbs().maxCoeff() : 0.0;
  rep.at_critical_point = rep.critical_residual <= 1e-8;
  return rep;
}

}  // namespace

SkewHessianReport skew_hessian(const SkewProblem& p, const Vec& x_c, double tol) {
  require_size(x_c.size(), p.chart.n, "point");
  return finish_report(p, x_c, alpha_on_D_jacobian(p, x_c), tol);
}

SkewHessianReport skew_hessian_extended(const SkewProblem& p, const Vec& x_c, const std::vector<Mat>& corrections,
                                        double tol) {
  require_size(x_c.size(), p.chart.n, "point");
  const int d = p.chart.d;
  if (static_cast<int>(corrections.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch, "need one correction matrix per distribution direction");
  }
  for (const Mat& c : corrections) {
    if (c.rows() != d || c.cols() != p.chart.n) throw Error(ErrorCode::DimensionMismatch, "correction must be d x n");
  }
  auto extended = [&p, &x_c, &corrections, d](const Vec& x) {
    const Vec a = eval_alpha(p, x);
    const Mat b = p.chart.graph_basis(eval_delta(p, x));
    const Vec shift = x - x_c;
    Vec out(d);
    for (int j = 0; j < d; ++j) {
      const Vec v = b.col(j) + b * (corrections[static_cast<std::size_t>(j)] * shift);
      out(j) = a.dot(v);
    }
    return out;
  };
  return finish_report(p, x_c, fd_jacobian(extended, x_c), tol);
}

}  // namespace skewcrit
