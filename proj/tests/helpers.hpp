#pragma once

#include "skewcrit/contact.hpp"
#include "skewcrit/expr.hpp"

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace testing {

inline skewcrit::Vec vec(std::initializer_list<double> v) {
  skewcrit::Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline skewcrit::Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  skewcrit::Mat m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline skewcrit::expr::Expr parse(const std::string& s, int n_x, int n_p = 0) {
  return skewcrit::expr::Expr::parse(s, {n_x, true, n_p});
}

inline skewcrit::AdaptedFamily family(int in_dim, const std::vector<std::string>& comps,
                                      const std::optional<std::string>& h = std::nullopt) {
  std::vector<skewcrit::expr::Expr> es;
  for (const auto& c : comps) es.push_back(parse(c, in_dim));
  std::optional<skewcrit::expr::Expr> he;
  if (h) he = parse(*h, in_dim);
  return skewcrit::AdaptedFamily::from_expressions(in_dim, std::move(es), std::move(he));
}

// Same values through a plain callable, so only the numerical paths apply.
inline skewcrit::AdaptedFamily opaque(const skewcrit::AdaptedFamily& f) {
  auto out = skewcrit::AdaptedFamily::from_function(f.in_dim, f.out_dim, f.eval);
  out.target_h = f.target_h;
  out.target_h_dt = f.target_h_dt;
  return out;
}

inline double inf_norm(const skewcrit::Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing

#include "skewcrit/error.hpp"

#include <functional>

namespace testing {

// Code of the skewcrit::Error raised by fn, or nullopt when it returns normally.
inline std::optional<skewcrit::ErrorCode> error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const skewcrit::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing
