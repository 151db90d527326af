#pragma once

#include "skewcrit/error.hpp"
#include "skewcrit/geometry.hpp"

#include <string>
#include <vector>

namespace skewcrit {

struct NewtonSettings {
  double tol_residual = 1e-12;
  int max_iter = 50;
  double damping = 1.0;
  bool armijo = true;
  double hessian_cond_cap = 1e8;
  /// Raise DegenerateHessian when the converged point is degenerate.
  bool require_nondegenerate = true;
  /// Extra full Newton steps after convergence, each kept only if it does
  /// not increase the residual.
  int polish_steps = 0;

  void validate() const;
};

struct SolveResult {
  Vec x_c;
  Vec y;
  int iterations = 0;
  std::vector<double> residual_history;  // |F(x_k) - (0, y)|_inf, k = 0..iterations
  SkewHessianReport hessian;
  bool converged = false;
};

/// Residual F(x) - (0, y) stacked as (alpha_D, g - y).
Vec target_residual(const SkewProblem& p, const Vec& x, const Vec& y);

/// One Newton update toward F = (0, y) through the block inverse
///   u~ = C (Dg C)^-1 w2,   u = u~ + K H^-1 (w1 - D alpha_D u~)
/// with C, K the complement and kernel bases of Dg(x) and H = D alpha_D K.
Vec newton_step(const SkewProblem& p, const Vec& x, const Vec& y, double cond_cap = 1e8);

SolveResult solve(const SkewProblem& p, const Vec& y, const Vec& x0, const NewtonSettings& s = {});

enum class Predictor { Previous, Secant };

struct ContinuationFailure {
  Vec y;
  ErrorCode code;
  std::string message;
};

struct ContinuationResult {
  std::vector<SolveResult> samples;
  std::vector<ContinuationFailure> failures;
};

/// Warm-started solves along y_path. A jump_cap <= 0 selects the default
/// 10 * spacing * max(secant slope, 1e-3) + 1e-8 (no cap until two points are accepted).
ContinuationResult continuation(const SkewProblem& p, const std::vector<Vec>& y_path, const Vec& x0,
                                const NewtonSettings& s = {}, double jump_cap = 0.0,
                                Predictor predictor = Predictor::Previous);

}  // namespace skewcrit
