#include "skewcrit/expr.hpp"

#include "skewcrit/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace skewcrit::expr {

namespace {

NodePtr make_node(Op op, double value = 0.0, int index = 0, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->index = index;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_function(Op op) {
  return op == Op::Sin || op == Op::Cos || op == Op::Exp || op == Op::Log || op == Op::Sqrt;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    default: return "?";
  }
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::string_view src, const Dims& dims) : src_(src), dims_(dims) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= src_.size()) fail("empty expression");
    Expr e = sum();
    skip_ws();
    if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::SyntaxError, what + " at position " + std::to_string(pos_) + " in \"" +
                                            std::string(src_) + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr sum() {
    Expr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = raw::binary(Op::Add, lhs, product());
      } else if (accept('-')) {
        lhs = raw::binary(Op::Sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  Expr product() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = raw::binary(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = raw::binary(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) {
      Expr operand = unary();
      if (operand.node().op == Op::Const) return Expr::constant(-operand.node().value);
      return raw::unary(Op::Neg, operand);
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    while (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a nonnegative integer literal");
      const std::string digits(src_.substr(start, pos_ - start));
      if (digits.size() > 6) fail("exponent too large");
      base = raw::pow(base, std::stoi(digits));
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    const std::string rest(src_.substr(start));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - rest.c_str());
    if (used == 0) fail("malformed number");
    // strtod would also accept hex and inf/nan spellings; keep to decimals.
    for (std::size_t i = 0; i < used; ++i) {
      const char ch = rest[i];
      if (!(std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == 'e' || ch == 'E' || ch == '+' ||
            ch == '-')) {
        fail("malformed number");
      }
    }
    pos_ += used;
    if (!std::isfinite(v)) fail("numeric literal out of range");
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));
    static const std::pair<const char*, Op> functions[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + name);
        Expr arg = sum();
        if (!accept(')')) fail("expected ')'");
        return raw::unary(op, arg);
      }
    }
    if (name == "t") {
      if (!dims_.allow_t) {
        throw Error(ErrorCode::UnknownIdentifier, "'t' is not available in this context");
      }
      return Expr::variable(Var::t());
    }
    if ((name[0] == 'x' || name[0] == 'p') && name.size() > 1) {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i) digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits && name.size() < 8 && name[1] != '0') {
        const int idx = std::stoi(name.substr(1));
        const int limit = name[0] == 'x' ? dims_.n_x : dims_.n_p;
        if (idx < 1 || idx > limit) {
          throw Error(ErrorCode::DimensionError, name + " exceeds declared dimension " + std::to_string(limit));
        }
        return Expr::variable(name[0] == 'x' ? Var::x(idx - 1) : Var::p(idx - 1));
      }
    }
    throw Error(ErrorCode::UnknownIdentifier, "unknown identifier '" + name + "'");
  }

  std::string_view src_;
  Dims dims_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- printing

int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return n.value < 0 || std::signbit(n.value) ? 3 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  return s;
}

void print(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(n, out);
  if (wrap) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Const:
      out += format_number(n.value);
      return;
    case Op::VarX:
      out += "x" + std::to_string(n.index + 1);
      return;
    case Op::VarT:
      out += "t";
      return;
    case Op::VarP:
      out += "p" + std::to_string(n.index + 1);
      return;
    case Op::Neg:
      out += '-';
      // Only a power binds tighter than unary minus; anything else is
      // wrapped (including another minus or a negative literal).
      print_wrapped(*n.a, precedence(*n.a) < 4 || n.a->op == Op::Neg, out);
      return;
    case Op::Pow:
      print_wrapped(*n.a, precedence(*n.a) < 5, out);
      out += '^';
      out += std::to_string(n.index);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(n);
      print_wrapped(*n.a, precedence(*n.a) < p, out);
      const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
      out += sym;
      // Left associativity: a right operand of equal precedence needs
      // parentheses to keep its shape.
      print_wrapped(*n.b, precedence(*n.b) <= p, out);
      return;
    }
    default:
      out += function_name(n.op);
      out += '(';
      print(*n.a, out);
      out += ')';
      return;
  }
}

bool equal_nodes(const Node& x, const Node& y) {
  if (&x == &y) return true;
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::Const: return x.value == y.value;
    case Op::VarX:
    case Op::VarP: return x.index == y.index;
    case Op::VarT: return true;
    case Op::Pow: return x.index == y.index && equal_nodes(*x.a, *y.a);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return equal_nodes(*x.a, *y.a) && equal_nodes(*x.b, *y.b);
    default: return equal_nodes(*x.a, *y.a);
  }
}

[[noreturn]] void domain_error(const std::string& what) { throw Error(ErrorCode::DomainError, what); }

double eval_node(const Node& n, const Env& env) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarX:
      if (static_cast<std::size_t>(n.index) >= env.x.size()) {
        throw Error(ErrorCode::MissingBinding, "no value bound for x" + std::to_string(n.index + 1));
      }
      return env.x[static_cast<std::size_t>(n.index)];
    case Op::VarT:
      if (!env.t) throw Error(ErrorCode::MissingBinding, "no value bound for t");
      return *env.t;
    case Op::VarP:
      if (static_cast<std::size_t>(n.index) >= env.p.size()) {
        throw Error(ErrorCode::MissingBinding, "no value bound for p" + std::to_string(n.index + 1));
      }
      return env.p[static_cast<std::size_t>(n.index)];
    case Op::Neg: return -eval_node(*n.a, env);
    case Op::Add: return eval_node(*n.a, env) + eval_node(*n.b, env);
    case Op::Sub: return eval_node(*n.a, env) - eval_node(*n.b, env);
    case Op::Mul: return eval_node(*n.a, env) * eval_node(*n.b, env);
    case Op::Div: {
      const double den = eval_node(*n.b, env);
      if (den == 0.0) domain_error("division by zero");
      return eval_node(*n.a, env) / den;
    }
    case Op::Pow: {
      const double base = eval_node(*n.a, env);
      double r = 1.0;
      for (int k = 0; k < n.index; ++k) r *= base;
      return r;
    }
    case Op::Sin: return std::sin(eval_node(*n.a, env));
    case Op::Cos: return std::cos(eval_node(*n.a, env));
    case Op::Exp: return std::exp(eval_node(*n.a, env));
    case Op::Log: {
      const double v = eval_node(*n.a, env);
      if (!(v > 0.0)) domain_error("log of nonpositive value " + std::to_string(v));
      return std::log(v);
    }
    case Op::Sqrt: {
      const double v = eval_node(*n.a, env);
      if (v < 0.0) domain_error("sqrt of negative value " + std::to_string(v));
      return std::sqrt(v);
    }
  }
  domain_error("unknown operation");
}

bool node_depends_on(const Node& n, Var v) {
  switch (n.op) {
    case Op::Const: return false;
    case Op::VarX: return v.kind == Var::Kind::X && v.index == n.index;
    case Op::VarT: return v.kind == Var::Kind::T;
    case Op::VarP: return v.kind == Var::Kind::P && v.index == n.index;
    default: return node_depends_on(*n.a, v) || (n.b && node_depends_on(*n.b, v));
  }
}

std::size_t count_nodes(const Node& n) {
  return 1 + (n.a ? count_nodes(*n.a) : 0) + (n.b ? count_nodes(*n.b) : 0);
}

Expr derivative(const Expr& e, Var v) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Const: return Expr::constant(0.0);
    case Op::VarX:
    case Op::VarT:
    case Op::VarP: {
      const bool same = (n.op == Op::VarX && v.kind == Var::Kind::X && v.index == n.index) ||
                        (n.op == Op::VarT && v.kind == Var::Kind::T) ||
                        (n.op == Op::VarP && v.kind == Var::Kind::P && v.index == n.index);
      return Expr::constant(same ? 1.0 : 0.0);
    }
    default: break;
  }
  const Expr a(n.a);
  const Expr da = derivative(a, v);
  switch (n.op) {
    case Op::Neg: return -da;
    case Op::Add: return da + derivative(Expr(n.b), v);
    case Op::Sub: return da - derivative(Expr(n.b), v);
    case Op::Mul: {
      const Expr b(n.b);
      return da * b + a * derivative(b, v);
    }
    case Op::Div: {
      const Expr b(n.b);
      return (da * b - a * derivative(b, v)) / pow(b, 2);
    }
    case Op::Pow:
      if (n.index == 0) return Expr::constant(0.0);
      return Expr::constant(n.index) * pow(a, n.index - 1) * da;
    case Op::Sin: return call(Op::Cos, a) * da;
    case Op::Cos: return -call(Op::Sin, a) * da;
    case Op::Exp: return e * da;
    case Op::Log: return da / a;
    case Op::Sqrt: return da / (Expr::constant(2.0) * e);
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "cannot differentiate node");
}

Expr substitute_node(const Expr& e, const Substitution& s) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Const: return e;
    case Op::VarX:
      if (static_cast<std::size_t>(n.index) < s.x.size() && s.x[static_cast<std::size_t>(n.index)]) {
        return *s.x[static_cast<std::size_t>(n.index)];
      }
      return e;
    case Op::VarT: return s.t ? *s.t : e;
    case Op::VarP:
      if (static_cast<std::size_t>(n.index) < s.p.size() && s.p[static_cast<std::size_t>(n.index)]) {
        return *s.p[static_cast<std::size_t>(n.index)];
      }
      return e;
    case Op::Neg: return -substitute_node(Expr(n.a), s);
    case Op::Add: return substitute_node(Expr(n.a), s) + substitute_node(Expr(n.b), s);
    case Op::Sub: return substitute_node(Expr(n.a), s) - substitute_node(Expr(n.b), s);
    case Op::Mul: return substitute_node(Expr(n.a), s) * substitute_node(Expr(n.b), s);
    case Op::Div: return substitute_node(Expr(n.a), s) / substitute_node(Expr(n.b), s);
    case Op::Pow: return pow(substitute_node(Expr(n.a), s), n.index);
    default: return call(n.op, substitute_node(Expr(n.a), s));
  }
}

bool const_value(const Expr& e, double& v) {
  if (e.node().op != Op::Const) return false;
  v = e.node().value;
  return true;
}

}  // namespace

// ---------------------------------------------------------------- Expr

Expr::Expr() : node_(make_node(Op::Const, 0.0)) {}
Expr::Expr(NodePtr node) : node_(std::move(node)) {
  if (!node_) node_ = make_node(Op::Const, 0.0);
}

Expr Expr::parse(std::string_view src, const Dims& dims) { return Parser(src, dims).parse(); }

Expr Expr::constant(double v) { return Expr(make_node(Op::Const, v)); }

Expr Expr::variable(Var v) {
  switch (v.kind) {
    case Var::Kind::X: return Expr(make_node(Op::VarX, 0.0, v.index));
    case Var::Kind::T: return Expr(make_node(Op::VarT));
    case Var::Kind::P: return Expr(make_node(Op::VarP, 0.0, v.index));
  }
  return Expr();
}

double Expr::eval(const Env& env) const { return eval_node(*node_, env); }

Expr Expr::diff(Var v) const { return derivative(*this, v); }

Expr Expr::substitute(const Substitution& s) const { return substitute_node(*this, s); }

Expr Expr::bind_params(std::span<const double> values) const {
  Substitution s;
  for (double v : values) s.p.emplace_back(Expr::constant(v));
  return substitute(s);
}

std::string Expr::str() const {
  std::string out;
  print(*node_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const { return equal_nodes(*node_, *other.node_); }

bool Expr::is_constant() const { return node_->op == Op::Const; }
bool Expr::is_constant(double v) const { return node_->op == Op::Const && node_->value == v; }
bool Expr::depends_on(Var v) const { return node_depends_on(*node_, v); }
std::size_t Expr::node_count() const { return count_nodes(*node_); }

// ---------------------------------------------------------------- builders

Expr operator+(const Expr& a, const Expr& b) {
  double va = 0.0;
  double vb = 0.0;
  const bool ca = const_value(a, va);
  const bool cb = const_value(b, vb);
  if (ca && cb) return Expr::constant(va + vb);
  if (ca && va == 0.0) return b;
  if (cb && vb == 0.0) return a;
  return raw::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  double va = 0.0;
  double vb = 0.0;
  const bool ca = const_value(a, va);
  const bool cb = const_value(b, vb);
  if (ca && cb) return Expr::constant(va - vb);
  if (cb && vb == 0.0) return a;
  if (ca && va == 0.0) return -b;
  return raw::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  double va = 0.0;
  double vb = 0.0;
  const bool ca = const_value(a, va);
  const bool cb = const_value(b, vb);
  if (ca && cb) return Expr::constant(va * vb);
  if ((ca && va == 0.0) || (cb && vb == 0.0)) return Expr::constant(0.0);
  if (ca && va == 1.0) return b;
  if (cb && vb == 1.0) return a;
  // Keep constants on the left and merge c1*(c2*e).
  if (cb) return b * a;
  if (ca && b.node().op == Op::Mul && b.node().a->op == Op::Const) {
    return Expr::constant(va * b.node().a->value) * Expr(b.node().b);
  }
  return raw::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  double va = 0.0;
  double vb = 0.0;
  const bool ca = const_value(a, va);
  const bool cb = const_value(b, vb);
  if (ca && va == 0.0) return Expr::constant(0.0);
  if (cb && vb == 1.0) return a;
  if (ca && cb && vb != 0.0) return Expr::constant(va / vb);
  return raw::binary(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  double va = 0.0;
  if (const_value(a, va)) return Expr::constant(-va);
  if (a.node().op == Op::Neg) return Expr(a.node().a);
  return raw::unary(Op::Neg, a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent");
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  double v = 0.0;
  if (const_value(base, v)) return Expr::constant(std::pow(v, exponent));
  return raw::pow(base, exponent);
}

Expr call(Op fn, const Expr& arg) {
  if (!is_function(fn)) throw Error(ErrorCode::InvalidArgument, "not a function op");
  double v = 0.0;
  if (const_value(arg, v)) {
    // Fold only where the result is finite and in-domain.
    double r = std::nan("");
    switch (fn) {
      case Op::Sin: r = std::sin(v); break;
      case Op::Cos: r = std::cos(v); break;
      case Op::Exp: r = std::exp(v); break;
      case Op::Log: r = v > 0.0 ? std::log(v) : std::nan(""); break;
      case Op::Sqrt: r = v >= 0.0 ? std::sqrt(v) : std::nan(""); break;
      default: break;
    }
    if (std::isfinite(r)) return Expr::constant(r);
  }
  return raw::unary(fn, arg);
}

namespace raw {

Expr unary(Op op, const Expr& a) { return Expr(make_node(op, 0.0, 0, a.ptr())); }

Expr binary(Op op, const Expr& a, const Expr& b) { return Expr(make_node(op, 0.0, 0, a.ptr(), b.ptr())); }

Expr pow(const Expr& base, int exponent) {
  if (exponent < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent");
  return Expr(make_node(Op::Pow, 0.0, exponent, base.ptr()));
}

}  // namespace raw

std::vector<Expr> parse_all(std::span<const std::string> sources, const Dims& dims) {
  std::vector<Expr> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(Expr::parse(s, dims));
  return out;
}

}  // namespace skewcrit::expr
