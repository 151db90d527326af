#pragma once

#include "skewcrit/expr.hpp"
#include "skewcrit/numerics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace skewcrit {

class SymbolicFamily;

/// Map family f(x, t) on an adapted chart where h(x, t) = t. eval returns
/// the codomain coordinates; target_h, when present, is h_N o f.
struct AdaptedFamily {
  int in_dim = 0;
  int out_dim = 0;
  std::function<Vec(const Vec&, double)> eval;
  /// k-th t-derivative at t = 0, valid for k <= t_deriv_order.
  std::function<Vec(const Vec&, int)> t_deriv;
  int t_deriv_order = -1;
  std::function<double(const Vec&, double)> target_h;
  std::function<double(const Vec&)> target_h_dt;  // d/dt of target_h at t = 0
  /// out x (in + 1) Jacobian with respect to (x, t).
  std::function<Mat(const Vec&, double)> jac;
  std::shared_ptr<const SymbolicFamily> symbolic;

  /// Component expressions over x1..x{in_dim} and t; parameters must be
  /// bound already. Derivatives of every order are exact.
  static AdaptedFamily from_expressions(int in_dim, std::vector<expr::Expr> components,
                                        std::optional<expr::Expr> target_h = std::nullopt);

  /// Callable family; derivatives fall back to finite differences.
  static AdaptedFamily from_function(int in_dim, int out_dim, std::function<Vec(const Vec&, double)> f);

  Vec operator()(const Vec& x, double t) const;
  bool has_t_derivs(int order) const { return t_deriv && t_deriv_order >= order; }
  Mat jacobian(const Vec& x, double t) const;  // analytic or central differences
};

/// Expression backing of an AdaptedFamily; caches t-derivative expressions.
class SymbolicFamily {
 public:
  SymbolicFamily(int in_dim, std::vector<expr::Expr> components, std::optional<expr::Expr> target_h);

  int in_dim() const { return in_dim_; }
  const std::vector<expr::Expr>& components() const { return components_; }
  const std::optional<expr::Expr>& target_h() const { return target_h_; }

  Vec eval(const Vec& x, double t) const;
  /// k-th t-derivative expressions (cached).
  const std::vector<expr::Expr>& t_derivative(int k) const;
  Vec t_derivative_at_zero(const Vec& x, int k) const;
  Mat jacobian(const Vec& x, double t) const;

 private:
  struct Cache;
  int in_dim_;
  std::vector<expr::Expr> components_;
  std::optional<expr::Expr> target_h_;
  std::vector<std::vector<expr::Expr>> gradient_;  // [component][var], var = x..., t
  std::shared_ptr<Cache> cache_;
};

enum class ContactStatus { Integer, Ambiguous, MachineLimited };
enum class ResidualMethod { SlopeFit, Analytic };

std::string to_string(ContactStatus s);
std::string to_string(ResidualMethod m);

struct ContactEstimate {
  double r_est = 0.0;  // fitted slope; NaN when machine-limited
  std::optional<int> r_claimed;
  int r_used = 0;          // exponent used for the residual
  int order_exponent = 0;  // round(r_est) when Integer, else r_used
  ContactStatus status = ContactStatus::Ambiguous;
  Vec residual;
  double fit_r2 = 0.0;
  std::vector<double> h_seq;
  std::vector<double> errors;  // |f2 - f1|_inf at each h
  ResidualMethod method = ResidualMethod::SlopeFit;

  /// Slope >= r - slack, or machine-limited.
  bool at_least(int r, double slack = 0.1) const;
};

struct ContactOptions {
  std::vector<double> h_seq = halving_sequence(0.1, 11);
  std::optional<int> r_claimed;
  double floor = 1e-14;
  int drop_largest = 2;
  bool prefer_analytic = true;
  double richardson_noise = 1e-9;
  int richardson_max = 6;
  double base_tol = 1e-12;
};

/// Estimates the exponent r in f2 = f1 + O(t^r) at x and extracts the
/// r-residual (1/r!) d^r/dt^r (f2 - f1) at t = 0.
ContactEstimate contact_estimate(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x,
                                 const ContactOptions& opts = {});

/// Residual only, at a known exponent r: analytic when possible, else
/// Richardson extrapolation of (f2 - f1)/h^r.
Vec residual_at(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int r,
                const ContactOptions& opts = {}, ResidualMethod* method = nullptr);

/// Largest r <= max_r with d^k/dt^k (f2 - f1) = 0 at t = 0 for all k < r,
/// from the analytic derivatives.
int analytic_contact_order(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int max_r,
                           double tol = 1e-12);

/// phi o f, with phi a map of the codomain given by a callable and its Jacobian.
struct CodomainMap {
  VecFn eval;
  MatFn jac;  // optional
  std::optional<std::vector<expr::Expr>> exprs;  // over x1..x{out_dim}
};

struct ChartTransformCheck {
  Vec pushed;    // D phi(f(x,0)) res(f2, f1)
  Vec measured;  // res(phi o f2, phi o f1)
  double discrepancy = 0.0;
};

ChartTransformCheck residual_chart_transform_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x,
                                                   int r, const CodomainMap& phi, const ContactOptions& opts = {});

/// f / t completed at t = 0 by the t-derivative. Requires f(x, 0) = 0.
AdaptedFamily hat_divide(const AdaptedFamily& f);

struct HatContinuity {
  std::vector<double> h;
  std::vector<double> gaps;  // |f^(x,h) - f^(x,0)|_inf
  double final_gap = 0.0;
};
HatContinuity hat_continuity(const AdaptedFamily& hat, const Vec& x);

struct HatDropCheck {
  ContactEstimate original;  // (f1, f2) at r
  ContactEstimate hat;       // (f^1, f^2) at r - 1
  double discrepancy = 0.0;
};
HatDropCheck hat_contact_drop_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int r,
                                    const ContactOptions& opts = {});

/// d(h_N o f)/dt at (x, 0).
double fdot(const AdaptedFamily& f, const Vec& x);

/// (g o f)(x, t) = g(f(x, t), h_N(f(x, t))). Symbolic when both are.
AdaptedFamily compose(const AdaptedFamily& g, const AdaptedFamily& f);

struct CompositionCheck {
  Vec predicted;
  Vec measured;
  double discrepancy = 0.0;  // |predicted - measured|_inf
  ResidualMethod measured_method = ResidualMethod::SlopeFit;
};

/// Residual of g2 o f2 against g1 o f1 predicted from the parts:
///   fdot(f2)^r res(g2, g1)(n) + D g1(n, 0) res(f2, f1)(x)
/// where res(f2, f1) includes the h_N component. remark_variant swaps in
/// fdot(f1) and D g2.
CompositionCheck compose_residual_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const AdaptedFamily& g1,
                                        const AdaptedFamily& g2, const Vec& x, int r, bool remark_variant = false,
                                        const ContactOptions& opts = {});

/// Inverse of (x, t) -> (f(x, t), h(x, t)) as a family over (y, s), solved
/// by Newton. Output is (x, t).
AdaptedFamily invert_family(const AdaptedFamily& f, const Vec& x_guess);

struct InverseCheck {
  Vec predicted;  // length in_dim + 1: (x, t) components
  Vec measured;
  ContactEstimate measured_contact;
  double discrepancy = 0.0;
};
InverseCheck inverse_residual_check(const AdaptedFamily& f1, const AdaptedFamily& f2, const Vec& x, int r,
                                    const ContactOptions& opts = {});

/// gamma: base (n, h) -> (pi_1, pi_2) stacked, out_dim = 2 * in_dim. Returns
/// f_gamma(m, h) = pi_2 gamma(psi^-1(m, h)) with psi = (pi_1 gamma, h).
/// check_points are tested for the diagonal condition at h = 0.
AdaptedFamily graph_to_map(const AdaptedFamily& gamma, const std::vector<Vec>& check_points);

struct GraphBumpCheck {
  Vec delta_pi1;  // res^r of the pi_1 components of gamma
  Vec delta_pi2;
  bool symmetric = false;
  ContactEstimate map_contact;  // (f_gamma1, f_gamma2)
  Vec predicted_residual;       // delta_pi2 - delta_pi1
  double residual_discrepancy = 0.0;
  bool pass = false;
};
GraphBumpCheck graph_symmetry_bump_check(const AdaptedFamily& gamma1, const AdaptedFamily& gamma2, const Vec& x,
                                         int r, const ContactOptions& opts = {}, double sym_tol = 1e-8);

/// Matrix-valued family flattened row-major into an AdaptedFamily.
struct DistributionFamily {
  int rows = 0;
  int cols = 0;
  AdaptedFamily entries;
};

struct DistributionResidual {
  Mat residual;
  ContactEstimate estimate;
};
DistributionResidual distribution_residual(const DistributionFamily& d1, const DistributionFamily& d2, const Vec& x,
                                           int r, const ContactOptions& opts = {});

}  // namespace skewcrit
