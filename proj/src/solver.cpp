#include "skewcrit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skewcrit {

void NewtonSettings::validate() const {
  if (!(tol_residual > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol_residual must be positive");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  if (polish_steps < 0) throw Error(ErrorCode::InvalidArgument, "polish_steps must be nonnegative");
}

Vec target_residual(const SkewProblem& p, const Vec& x, const Vec& y) {
  const FValue f = f_map(p, x);
  if (y.size() != f.g.size()) throw Error(ErrorCode::DimensionMismatch, "target y has wrong length");
  Vec r(f.alpha_d.size() + f.g.size());
  r << f.alpha_d, f.g - y;
  return r;
}

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Vec newton_step(const SkewProblem& p, const Vec& x, const Vec& y, double cond_cap) {
  if (p.chart.d != p.chart.n - p.chart.m) {
    throw Error(ErrorCode::NotSquare, "Newton step needs d = n - m");
  }
  const FValue f = f_map(p, x);
  if (y.size() != f.g.size()) throw Error(ErrorCode::DimensionMismatch, "target y has wrong length");
  const Vec w1 = -f.alpha_d;
  const Vec w2 = y - f.g;
  const Mat dg = constraint_jacobian(p, x);
  const KernelSplit split = kernel_split(dg);
  const Mat& c = split.complement_basis;
  const Mat& k = split.kernel_basis;

  Vec u_tilde = Vec::Zero(p.chart.n);
  if (p.chart.m > 0) u_tilde = c * (dg * c).partialPivLu().solve(w2);

  const Mat ja = alpha_on_D_jacobian(p, x);
  const Mat h = restricted_hessian(ja, k);
  const double cond = hessian_condition(h, ja);
  if (!(cond < cond_cap)) {
    throw Error(ErrorCode::DegenerateHessian,
                "restricted Hessian has condition number " + std::to_string(cond) + " at the current iterate");
  }
  Vec u = u_tilde;
  if (p.chart.d > 0) u += k * h.partialPivLu().solve(w1 - ja * u_tilde);
  if (!u.allFinite()) throw Error(ErrorCode::NonFiniteEvaluation, "Newton update is not finite");
  return u;
}

SolveResult solve(const SkewProblem& p, const Vec& y, const Vec& x0, const NewtonSettings& s) {
  s.validate();
  p.validate();
  if (x0.size() != p.chart.n) throw Error(ErrorCode::DimensionMismatch, "x0 has wrong length");
  if (!x0.allFinite()) throw Error(ErrorCode::InvalidArgument, "x0 is not finite");
  if (y.size() != p.chart.m) throw Error(ErrorCode::DimensionMismatch, "y has wrong length");

  SolveResult out;
  out.y = y;
  Vec x = x0;
  Vec res = target_residual(p, x, y);
  double r = inf_norm(res);
  out.residual_history.push_back(r);
  int it = 0;
  while (r > s.tol_residual) {
    if (it >= s.max_iter) {
      throw Error(ErrorCode::MaxIterExceeded, "no convergence after " + std::to_string(s.max_iter) +
                                                  " iterations (residual " + std::to_string(r) + ")");
    }
    const Vec u = newton_step(p, x, y, s.hessian_cond_cap);
    double lambda = s.damping;
    const double merit = res.norm();
    Vec best_x = x + lambda * u;
    Vec best_res;
    bool accepted = false;
    const int trials = s.armijo ? 21 : 1;
    for (int trial = 0; trial < trials; ++trial) {
      const Vec cand = x + lambda * u;
      try {
        const Vec cand_res = target_residual(p, cand, y);
        if (!s.armijo || cand_res.norm() <= (1.0 - 1e-4 * lambda) * merit) {
          best_x = cand;
          best_res = cand_res;
          accepted = true;
          break;
        }
        best_x = cand;
        best_res = cand_res;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteEvaluation && e.code() != ErrorCode::DomainError) throw;
        best_res.resize(0);
      }
      lambda *= 0.5;
    }
    if (!accepted && best_res.size() == 0) {
      throw Error(ErrorCode::NonFiniteEvaluation, "every line-search trial left the evaluation domain");
    }
    x = best_x;
    res = best_res;
    r = inf_norm(res);
    ++it;
    out.residual_history.push_back(r);
  }
  for (int k = 0; k < s.polish_steps && r > 0.0; ++k) {
    const Vec cand = x + newton_step(p, x, y, s.hessian_cond_cap);
    const Vec cand_res = target_residual(p, cand, y);
    const double cr = inf_norm(cand_res);
    if (!(cr <= r)) break;
    x = cand;
    r = cr;
  }
  out.x_c = x;
  out.iterations = it;
  out.converged = true;
  out.hessian = skew_hessian(p, x, s.hessian_cond_cap);
  if (s.require_nondegenerate && !out.hessian.nondegenerate) {
    throw Error(ErrorCode::DegenerateHessian, "converged point has skew Hessian condition number " +
                                                  std::to_string(out.hessian.condition_number));
  }
  return out;
}

ContinuationResult continuation(const SkewProblem& p, const std::vector<Vec>& y_path, const Vec& x0,
                                const NewtonSettings& s, double jump_cap, Predictor predictor) {
  if (y_path.empty()) throw Error(ErrorCode::InvalidArgument, "continuation path is empty");
  ContinuationResult out;
  const SolveResult* prev = nullptr;
  const SolveResult* prev2 = nullptr;
  for (const Vec& y : y_path) {
    Vec start = prev ? prev->x_c : x0;
    double cap = std::numeric_limits<double>::infinity();
    if (prev) {
      const double spacing = (y - prev->y).norm();
      double slope = 1e-3;
      if (prev2) {
        const double dy = (prev->y - prev2->y).norm();
        if (dy > 0.0) slope = std::max(slope, (prev->x_c - prev2->x_c).norm() / dy);
        if (predictor == Predictor::Secant && dy > 0.0) {
          start = prev->x_c + (prev->x_c - prev2->x_c) * (spacing / dy);
        }
      }
      if (jump_cap > 0.0)
        cap = jump_cap;
      else if (prev2)
        cap = 10.0 * spacing * slope + 1e-8;
    }
    try {
      SolveResult res = solve(p, y, start, s);
      if (prev && (res.x_c - prev->x_c).norm() > cap) {
        throw Error(ErrorCode::BranchJump, "solution moved " + std::to_string((res.x_c - prev->x_c).norm()) +
                                               " (cap " + std::to_string(cap) + ")");
      }
      out.samples.push_back(std::move(res));
      prev2 = out.samples.size() > 1 ? &out.samples[out.samples.size() - 2] : nullptr;
      prev = &out.samples.back();
    } catch (const Error& e) {
      out.failures.push_back({y, e.code(), e.what()});
    }
  }
  return out;
}

}  // namespace skewcrit
