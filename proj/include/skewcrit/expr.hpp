#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skewcrit::expr {

enum class Op { Const, VarX, VarT, VarP, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int index = 0;       // VarX / VarP (0-based) or Pow exponent
  NodePtr a;
  NodePtr b;
};

struct Var {
  enum class Kind { X, T, P };
  Kind kind = Kind::X;
  int index = 0;  // 0-based for X and P

  static Var x(int i) { return {Kind::X, i}; }
  static Var t() { return {Kind::T, 0}; }
  static Var p(int i) { return {Kind::P, i}; }
  bool operator==(const Var&) const = default;
};

/// What identifiers a source string may use: x1..x{n_x}, t (if allowed),
/// p1..p{n_p}.
struct Dims {
  int n_x = 0;
  bool allow_t = true;
  int n_p = 0;
};

struct Env {
  std::span<const double> x;
  std::optional<double> t;
  std::span<const double> p;
};

struct Substitution;

/// Immutable expression tree. Copies share structure.
///
/// Grammar (whitespace-insensitive):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' INTEGER)*
///   primary := NUMBER | IDENT | FUNC '(' sum ')' | '(' sum ')'
/// FUNC is one of sin cos exp log sqrt. A minus applied directly to a
/// numeric literal folds into a negative constant.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(NodePtr node);

  static Expr parse(std::string_view src, const Dims& dims);

  static Expr constant(double v);
  static Expr variable(Var v);

  double eval(const Env& env) const;

  /// Symbolic derivative with 0/1 absorption and constant folding.
  Expr diff(Var v) const;

  /// Replaces variables; entries left empty keep the original variable.
  Expr substitute(const Substitution& s) const;

  /// Replaces p1..pk by constants.
  Expr bind_params(std::span<const double> values) const;

  /// Prints in a form that parses back to a structurally equal tree.
  std::string str() const;

  bool structurally_equal(const Expr& other) const;
  bool operator==(const Expr& other) const { return structurally_equal(other); }

  bool is_constant() const;
  bool is_constant(double v) const;
  bool depends_on(Var v) const;
  std::size_t node_count() const;

  const Node& node() const { return *node_; }
  const NodePtr& ptr() const { return node_; }

 private:
  NodePtr node_;
};

struct Substitution {
  std::vector<std::optional<Expr>> x;
  std::optional<Expr> t;
  std::vector<std::optional<Expr>> p;
};

// Simplifying builders (used by diff and by code assembling expressions).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr call(Op fn, const Expr& arg);

// Raw builders: no simplification. The parser uses these so the tree
// mirrors the source.
namespace raw {
Expr unary(Op op, const Expr& a);
Expr binary(Op op, const Expr& a, const Expr& b);
Expr pow(const Expr& base, int exponent);
}  // namespace raw

/// Parses each string with the same dimensions.
std::vector<Expr> parse_all(std::span<const std::string> sources, const Dims& dims);

}  // namespace skewcrit::expr
