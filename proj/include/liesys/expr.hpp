// Scalar expression ASTs for time-dependent coefficients and vector-field
// components: parsing, evaluation, exact symbolic differentiation, and a
// canonical normal form used for symbolic identity checks.
//
// Expressions are immutable once built and safe to share across threads.

#ifndef LIESYS_EXPR_HPP
#define LIESYS_EXPR_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liesys {

enum class Op : std::uint8_t {
  constant,
  variable,
  add,
  sub,
  mul,
  div,
  neg,
  pow,  // exponent is always a constant node
  sin,
  cos,
  tan,
  exp,
  ln,
  sqrt,
};

// The closed identifier set of the expression grammar.
inline constexpr std::array<std::string_view, 10> kVariableNames = {
    "t", "x", "y", "z", "v", "vx", "vy", "vz", "p", "u"};

inline int variable_index(std::string_view name) {
  for (std::size_t i = 0; i < kVariableNames.size(); ++i)
    if (kVariableNames[i] == name) return static_cast<int>(i);
  return -1;
}

// Variable bindings for evaluation. Unbound lookups throw.
class Env {
 public:
  Env() = default;

  Env& set(int var, double value) {
    values_[static_cast<std::size_t>(var)] = value;
    mask_ |= (1u << var);
    return *this;
  }
  Env& set(std::string_view name, double value) {
    const int idx = variable_index(name);
    if (idx < 0) throw std::invalid_argument("unknown variable: " + std::string(name));
    return set(idx, value);
  }
  bool bound(int var) const { return (mask_ >> var) & 1u; }
  double get(int var) const { return values_[static_cast<std::size_t>(var)]; }

  static Env at_t(double t) { return Env{}.set(0, t); }

 private:
  std::array<double, kVariableNames.size()> values_{};
  std::uint32_t mask_ = 0;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t off, const std::string& expected_, const std::string& msg)
      : std::runtime_error(msg), offset(off), expected(expected_) {}
  std::size_t offset;
  std::string expected;
};

struct EvalError : std::runtime_error {
  EvalError(const std::string& msg, std::string subexpr_)
      : std::runtime_error(msg + " in `" + subexpr_ + "`"), subexpr(std::move(subexpr_)) {}
  std::string subexpr;
};

class Expr;

namespace detail {

struct Node {
  Op op;
  double value = 0.0;  // Op::constant
  int var = -1;        // Op::variable
  std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

inline NodePtr make_var(int idx) {
  auto n = std::make_shared<Node>();
  n->op = Op::variable;
  n->var = idx;
  return n;
}

inline NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline bool is_const(const NodePtr& n) { return n->op == Op::constant; }
inline bool is_const(const NodePtr& n, double v) {
  return n->op == Op::constant && n->value == v;
}

inline bool is_integer(double v) {
  return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15;
}

NodePtr simplify_add(NodePtr a, NodePtr b);
NodePtr simplify_sub(NodePtr a, NodePtr b);
NodePtr simplify_mul(NodePtr a, NodePtr b);
NodePtr simplify_div(NodePtr a, NodePtr b);
NodePtr simplify_neg(NodePtr a);
NodePtr simplify_pow(NodePtr a, double e);
NodePtr simplify_fn(Op op, NodePtr a);

inline NodePtr simplify_neg(NodePtr a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->op == Op::neg) return a->a;
  return make_node(Op::neg, std::move(a));
}

inline NodePtr simplify_add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (b->op == Op::neg) return simplify_sub(std::move(a), b->a);
  return make_node(Op::add, std::move(a), std::move(b));
}

inline NodePtr simplify_sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (b->op == Op::neg) return simplify_add(std::move(a), b->a);
  if (is_const(a, 0.0)) return simplify_neg(std::move(b));
  return make_node(Op::sub, std::move(a), std::move(b));
}

inline NodePtr simplify_mul(NodePtr a, NodePtr b) {
  // Constants drift left so chains built by differentiation keep folding.
  if (is_const(b) && !is_const(a)) std::swap(a, b);
  if (is_const(a)) {
    if (is_const(b)) return make_const(a->value * b->value);
    if (a->value == 0.0) return make_const(0.0);
    if (a->value == 1.0) return b;
    if (a->value == -1.0) return simplify_neg(std::move(b));
    if (b->op == Op::mul && is_const(b->a))
      return simplify_mul(make_const(a->value * b->a->value), b->b);
    if (b->op == Op::neg) return simplify_mul(make_const(-a->value), b->a);
  }
  return make_node(Op::mul, std::move(a), std::move(b));
}

inline NodePtr simplify_div(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b) && b->value != 0.0)
    return make_const(a->value / b->value);
  if (is_const(b, 1.0)) return a;
  return make_node(Op::div, std::move(a), std::move(b));
}

inline NodePtr simplify_pow(NodePtr a, double e) {
  if (e == 0.0) return make_const(1.0);
  if (e == 1.0) return a;
  if (is_const(a)) {
    if (a->value > 0.0 || is_integer(e)) {
      const double v = std::pow(a->value, e);
      if (std::isfinite(v)) return make_const(v);
    }
  }
  return make_node(Op::pow, std::move(a), make_const(e));
}

inline NodePtr simplify_fn(Op op, NodePtr a) {
  if (is_const(a)) {
    const double x = a->value;
    double v = std::numeric_limits<double>::quiet_NaN();
    switch (op) {
      case Op::sin: v = std::sin(x); break;
      case Op::cos: v = std::cos(x); break;
      case Op::tan: v = std::tan(x); break;
      case Op::exp: v = std::exp(x); break;
      case Op::ln: v = x > 0.0 ? std::log(x) : v; break;
      case Op::sqrt: v = x >= 0.0 ? std::sqrt(x) : v; break;
      default: break;
    }
    if (std::isfinite(v)) return make_const(v);
  }
  return make_node(op, std::move(a));
}

}  // namespace detail

// Immutable expression handle with value semantics.
class Expr {
 public:
  Expr() : node_(detail::make_const(0.0)) {}
  Expr(double v) : node_(detail::make_const(v)) {}  // NOLINT: implicit by design
  Expr(int v) : node_(detail::make_const(v)) {}     // NOLINT

  static Expr constant(double v) { return Expr(detail::make_const(v)); }
  static Expr variable(std::string_view name) {
    const int idx = variable_index(name);
    if (idx < 0) throw std::invalid_argument("unknown identifier: " + std::string(name));
    return Expr(detail::make_var(idx));
  }
  static Expr variable(int idx) { return Expr(detail::make_var(idx)); }

  Op op() const { return node_->op; }
  bool is_constant() const { return node_->op == Op::constant; }
  bool is_constant(double v) const { return detail::is_const(node_, v); }
  double constant_value() const { return node_->value; }
  int var_index() const { return node_->var; }
  Expr child_a() const { return Expr(node_->a); }
  Expr child_b() const { return Expr(node_->b); }

  const detail::NodePtr& node() const { return node_; }
  explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}

 private:
  detail::NodePtr node_;
};

inline Expr operator+(const Expr& a, const Expr& b) {
  return Expr(detail::simplify_add(a.node(), b.node()));
}
inline Expr operator-(const Expr& a, const Expr& b) {
  return Expr(detail::simplify_sub(a.node(), b.node()));
}
inline Expr operator*(const Expr& a, const Expr& b) {
  return Expr(detail::simplify_mul(a.node(), b.node()));
}
inline Expr operator/(const Expr& a, const Expr& b) {
  return Expr(detail::simplify_div(a.node(), b.node()));
}
inline Expr operator-(const Expr& a) { return Expr(detail::simplify_neg(a.node())); }
inline Expr pow(const Expr& a, double e) { return Expr(detail::simplify_pow(a.node(), e)); }
inline Expr sin(const Expr& a) { return Expr(detail::simplify_fn(Op::sin, a.node())); }
inline Expr cos(const Expr& a) { return Expr(detail::simplify_fn(Op::cos, a.node())); }
inline Expr tan(const Expr& a) { return Expr(detail::simplify_fn(Op::tan, a.node())); }
inline Expr exp(const Expr& a) { return Expr(detail::simplify_fn(Op::exp, a.node())); }
inline Expr ln(const Expr& a) { return Expr(detail::simplify_fn(Op::ln, a.node())); }
inline Expr sqrt(const Expr& a) { return Expr(detail::simplify_fn(Op::sqrt, a.node())); }

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

// Precedence levels: sum 1, product 2, unary minus 3, power 4, atom 5.
inline int precedence(const Node& n) {
  switch (n.op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::constant: return n.value < 0.0 ? 3 : 5;
    default: return 5;
  }
}

inline void print_node(const Node& n, std::string& out);

inline void print_child(const Node& c, int min_prec, std::string& out) {
  if (precedence(c) < min_prec) {
    out += '(';
    print_node(c, out);
    out += ')';
  } else {
    print_node(c, out);
  }
}

inline void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::constant: out += format_double(n.value); return;
    case Op::variable: out += kVariableNames[static_cast<std::size_t>(n.var)]; return;
    case Op::add:
      print_child(*n.a, 1, out);
      out += '+';
      print_child(*n.b, 2, out);
      return;
    case Op::sub:
      print_child(*n.a, 1, out);
      out += '-';
      print_child(*n.b, 2, out);
      return;
    case Op::mul:
      print_child(*n.a, 2, out);
      out += '*';
      print_child(*n.b, 3, out);
      return;
    case Op::div:
      print_child(*n.a, 2, out);
      out += '/';
      print_child(*n.b, 3, out);
      return;
    case Op::neg:
      out += '-';
      print_child(*n.a, 3, out);
      return;
    case Op::pow:
      // The grammar admits a unary-minus base without parentheses, but a
      // power base must be wrapped: ^ is right-associative when re-parsed.
      if (n.a->op == Op::pow) {
        out += '(';
        print_node(*n.a, out);
        out += ')';
      } else {
        print_child(*n.a, 3, out);
      }
      out += '^';
      print_child(*n.b, 4, out);
      return;
    case Op::sin: out += "sin("; break;
    case Op::cos: out += "cos("; break;
    case Op::tan: out += "tan("; break;
    case Op::exp: out += "exp("; break;
    case Op::ln: out += "ln("; break;
    case Op::sqrt: out += "sqrt("; break;
  }
  print_node(*n.a, out);
  out += ')';
}

}  // namespace detail

inline std::string print(const Expr& e) {
  std::string out;
  detail::print_node(*e.node(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline double pow_int(double base, long long e, const Node& ctx) {
  if (e < 0) {
    if (base == 0.0) {
      std::string s;
      print_node(ctx, s);
      throw EvalError("division by zero", s);
    }
    return 1.0 / pow_int(base, -e, ctx);
  }
  // repeated multiplication by squaring; exact for the usual small exponents
  double r = 1.0;
  double sq = base;
  while (e > 0) {
    if (e & 1) r *= sq;
    sq *= sq;
    e >>= 1;
  }
  return r;
}

inline double eval_node(const Node& n, const Env& env) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable:
      if (!env.bound(n.var))
        throw EvalError("unbound variable",
                        std::string(kVariableNames[static_cast<std::size_t>(n.var)]));
      return env.get(n.var);
    case Op::add: return eval_node(*n.a, env) + eval_node(*n.b, env);
    case Op::sub: return eval_node(*n.a, env) - eval_node(*n.b, env);
    case Op::mul: return eval_node(*n.a, env) * eval_node(*n.b, env);
    case Op::div: {
      const double num = eval_node(*n.a, env);
      const double den = eval_node(*n.b, env);
      if (den == 0.0) {
        std::string s;
        print_node(n, s);
        throw EvalError("division by zero", s);
      }
      return num / den;
    }
    case Op::neg: return -eval_node(*n.a, env);
    case Op::pow: {
      const double base = eval_node(*n.a, env);
      const double e = n.b->value;
      if (is_integer(e)) return pow_int(base, static_cast<long long>(e), n);
      if (base <= 0.0) {
        std::string s;
        print_node(n, s);
        throw EvalError("non-integer power of non-positive base", s);
      }
      return std::pow(base, e);
    }
    case Op::sin: return std::sin(eval_node(*n.a, env));
    case Op::cos: return std::cos(eval_node(*n.a, env));
    case Op::tan: return std::tan(eval_node(*n.a, env));
    case Op::exp: return std::exp(eval_node(*n.a, env));
    case Op::ln: {
      const double x = eval_node(*n.a, env);
      if (x <= 0.0) {
        std::string s;
        print_node(n, s);
        throw EvalError("ln of non-positive value", s);
      }
      return std::log(x);
    }
    case Op::sqrt: {
      const double x = eval_node(*n.a, env);
      if (x < 0.0) {
        std::string s;
        print_node(n, s);
        throw EvalError("sqrt of negative value", s);
      }
      return std::sqrt(x);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

inline double eval(const Expr& e, const Env& env) { return detail::eval_node(*e.node(), env); }
inline double eval_at_t(const Expr& e, double t) { return eval(e, Env::at_t(t)); }

/// Bitmask of free variables (bit i <-> kVariableNames[i]).
inline std::uint32_t free_variables(const Expr& e) {
  const auto& n = *e.node();
  switch (n.op) {
    case Op::constant: return 0;
    case Op::variable: return 1u << n.var;
    default: {
      std::uint32_t m = n.a ? free_variables(Expr(n.a)) : 0;
      if (n.b) m |= free_variables(Expr(n.b));
      return m;
    }
  }
}

// ---------------------------------------------------------------------------
// Differentiation and substitution

/// Exact symbolic derivative, constant-folded as it is built.
inline Expr differentiate(const Expr& e, int var) {
  const auto& n = *e.node();
  const Expr a = n.a ? Expr(n.a) : Expr();
  const Expr b = n.b ? Expr(n.b) : Expr();
  switch (n.op) {
    case Op::constant: return Expr(0.0);
    case Op::variable: return Expr(n.var == var ? 1.0 : 0.0);
    case Op::add: return differentiate(a, var) + differentiate(b, var);
    case Op::sub: return differentiate(a, var) - differentiate(b, var);
    case Op::mul: return differentiate(a, var) * b + a * differentiate(b, var);
    case Op::div:
      return (differentiate(a, var) * b - a * differentiate(b, var)) / pow(b, 2.0);
    case Op::neg: return -differentiate(a, var);
    case Op::pow: {
      const double c = n.b->value;
      return Expr(c) * pow(a, c - 1.0) * differentiate(a, var);
    }
    case Op::sin: return cos(a) * differentiate(a, var);
    case Op::cos: return -(sin(a) * differentiate(a, var));
    case Op::tan: return differentiate(a, var) / pow(cos(a), 2.0);
    case Op::exp: return exp(a) * differentiate(a, var);
    case Op::ln: return differentiate(a, var) / a;
    case Op::sqrt: return differentiate(a, var) / (Expr(2.0) * sqrt(a));
  }
  throw std::logic_error("unreachable");
}

inline Expr differentiate(const Expr& e, std::string_view var) {
  const int idx = variable_index(var);
  if (idx < 0) throw std::invalid_argument("unknown variable: " + std::string(var));
  return differentiate(e, idx);
}

/// Replace every occurrence of `var` by `replacement`, re-simplifying.
inline Expr substitute(const Expr& e, int var, const Expr& replacement) {
  const auto& n = *e.node();
  switch (n.op) {
    case Op::constant: return e;
    case Op::variable: return n.var == var ? replacement : e;
    case Op::add: return substitute(Expr(n.a), var, replacement) + substitute(Expr(n.b), var, replacement);
    case Op::sub: return substitute(Expr(n.a), var, replacement) - substitute(Expr(n.b), var, replacement);
    case Op::mul: return substitute(Expr(n.a), var, replacement) * substitute(Expr(n.b), var, replacement);
    case Op::div: return substitute(Expr(n.a), var, replacement) / substitute(Expr(n.b), var, replacement);
    case Op::neg: return -substitute(Expr(n.a), var, replacement);
    case Op::pow: return pow(substitute(Expr(n.a), var, replacement), n.b->value);
    default: {
      auto inner = substitute(Expr(n.a), var, replacement);
      return Expr(detail::simplify_fn(n.op, inner.node()));
    }
  }
}

inline Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  const int idx = variable_index(var);
  if (idx < 0) throw std::invalid_argument("unknown variable: " + std::string(var));
  return substitute(e, idx, replacement);
}

// ---------------------------------------------------------------------------
// Parser (recursive descent over the fixed grammar)

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError(pos_, expected,
                     "syntax error at offset " + std::to_string(pos_) + ": expected " + expected);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = e + parse_term();
      else if (accept('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      if (accept('*'))
        e = e * parse_factor();
      else if (accept('/'))
        e = e / parse_factor();
      else
        return e;
    }
  }

  Expr parse_factor() {
    Expr base = parse_unary();
    if (accept('^')) {
      const std::size_t at = pos_;
      Expr expo = parse_factor();
      if (!expo.is_constant())
        throw ParseError(at, "constant exponent",
                         "syntax error at offset " + std::to_string(at) +
                             ": exponent must be a constant");
      return pow(base, expo.constant_value());
    }
    return base;
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_atom();
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, identifier or '('");
    const char c = text_[pos_];
    if (accept('(')) {
      Expr e = parse_expr();
      if (!accept(')')) fail("')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_ident();
    fail("number, identifier or '('");
  }

  Expr parse_number() {
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{}) fail("number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return Expr(v);
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           ((text_[pos_] >= 'a' && text_[pos_] <= 'z') ||
            (text_[pos_] >= 'A' && text_[pos_] <= 'Z') ||
            (text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    static constexpr std::array<std::pair<std::string_view, Op>, 6> fns = {{
        {"sin", Op::sin}, {"cos", Op::cos}, {"tan", Op::tan},
        {"exp", Op::exp}, {"ln", Op::ln}, {"sqrt", Op::sqrt},
    }};
    for (const auto& [fname, op] : fns) {
      if (name == fname) {
        if (!accept('(')) fail("'(' after function name");
        Expr arg = parse_expr();
        if (!accept(')')) fail("')'");
        return Expr(simplify_fn(op, arg.node()));
      }
    }
    const int idx = variable_index(name);
    if (idx < 0)
      throw ParseError(start, "known identifier",
                       "unknown identifier `" + std::string(name) + "` at offset " +
                           std::to_string(start));
    return Expr::variable(idx);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Canonical normal form.
//
// Expressions are flattened into sums of coefficient-weighted monomials over
// atomic bases (variables, function applications, non-expandable powers of
// sums). Like terms cancel exactly, which is what the symbolic bracket
// identities need. This is a fixed structural rewriting, not a general
// simplifier: no trigonometric or exponential identities are applied.

namespace detail {

struct Factor {
  NodePtr base;      // canonical
  double exponent;
  std::string key;   // printed base
};

struct Term {
  double coeff = 1.0;
  std::vector<Factor> factors;  // sorted by key, no duplicate keys
};

using TermMap = std::map<std::string, Term>;

inline std::string monomial_key(const std::vector<Factor>& fs) {
  std::string k;
  for (const auto& f : fs) {
    k += f.key;
    k += '^';
    k += format_double(f.exponent);
    k += '|';
  }
  return k;
}

inline void add_term(TermMap& m, Term t) {
  if (t.coeff == 0.0) return;
  auto key = monomial_key(t.factors);
  auto it = m.find(key);
  if (it == m.end()) {
    m.emplace(std::move(key), std::move(t));
  } else {
    it->second.coeff += t.coeff;
    if (it->second.coeff == 0.0) m.erase(it);
  }
}

inline void merge_into(TermMap& dst, const TermMap& src, double scale) {
  for (const auto& [k, t] : src) {
    Term copy = t;
    copy.coeff *= scale;
    add_term(dst, std::move(copy));
  }
}

inline Term mul_terms(const Term& a, const Term& b) {
  Term r;
  r.coeff = a.coeff * b.coeff;
  r.factors = a.factors;
  for (const auto& f : b.factors) {
    auto it = std::find_if(r.factors.begin(), r.factors.end(),
                           [&](const Factor& g) { return g.key == f.key; });
    if (it == r.factors.end()) {
      r.factors.push_back(f);
    } else {
      it->exponent += f.exponent;
      if (it->exponent == 0.0) r.factors.erase(it);
    }
  }
  std::sort(r.factors.begin(), r.factors.end(),
            [](const Factor& x, const Factor& y) { return x.key < y.key; });
  return r;
}

inline TermMap mul_maps(const TermMap& a, const TermMap& b) {
  TermMap r;
  for (const auto& [ka, ta] : a)
    for (const auto& [kb, tb] : b) add_term(r, mul_terms(ta, tb));
  return r;
}

NodePtr rebuild(const TermMap& m);

inline Factor make_atom(NodePtr canonical_base, double exponent) {
  Factor f;
  f.key.clear();
  print_node(*canonical_base, f.key);
  f.base = std::move(canonical_base);
  f.exponent = exponent;
  return f;
}

inline TermMap to_terms(const Node& n);

inline TermMap atom_map(NodePtr base, double exponent) {
  Term t;
  t.factors.push_back(make_atom(std::move(base), exponent));
  TermMap m;
  add_term(m, std::move(t));
  return m;
}

inline TermMap pow_map(const TermMap& base, double e) {
  if (e == 0.0) {
    TermMap one;
    add_term(one, Term{});
    return one;
  }
  if (e == 1.0) return base;
  if (base.size() == 1) {
    const Term& t = base.begin()->second;
    // (k * f1^a * f2^b)^e distributes when k > 0 or e is an integer;
    // factor exponents only combine for integer e (x^2)^(1/2) != x.
    if (is_integer(e) || (t.coeff > 0.0 && t.factors.size() <= 1)) {
      if (is_integer(e)) {
        Term r;
        r.coeff = std::pow(t.coeff, e);
        for (const auto& f : t.factors) {
          Factor g = f;
          g.exponent *= e;
          if (g.exponent != 0.0) r.factors.push_back(g);
        }
        std::sort(r.factors.begin(), r.factors.end(),
                  [](const Factor& x, const Factor& y) { return x.key < y.key; });
        TermMap m;
        add_term(m, std::move(r));
        return m;
      }
      // non-integer exponent, single positive-coefficient factor of power 1
      if (t.factors.empty()) {
        TermMap m;
        Term r;
        r.coeff = std::pow(t.coeff, e);
        add_term(m, std::move(r));
        return m;
      }
      if (t.factors.size() == 1 && t.factors[0].exponent == 1.0) {
        Term r;
        r.coeff = std::pow(t.coeff, e);
        r.factors.push_back(make_atom(t.factors[0].base, e));
        TermMap m;
        add_term(m, std::move(r));
        return m;
      }
    }
  }
  if (is_integer(e) && e > 0.0 && e <= 16.0) {
    TermMap r = base;
    for (int i = 1; i < static_cast<int>(e); ++i) r = mul_maps(r, base);
    return r;
  }
  // Opaque power of a sum: keep as an atom over the rebuilt base.
  return atom_map(rebuild(base), e);
}

inline TermMap to_terms(const Node& n) {
  TermMap m;
  switch (n.op) {
    case Op::constant: {
      Term t;
      t.coeff = n.value;
      add_term(m, std::move(t));
      return m;
    }
    case Op::variable:
      return atom_map(make_var(n.var), 1.0);
    case Op::add: {
      m = to_terms(*n.a);
      merge_into(m, to_terms(*n.b), 1.0);
      return m;
    }
    case Op::sub: {
      m = to_terms(*n.a);
      merge_into(m, to_terms(*n.b), -1.0);
      return m;
    }
    case Op::neg: {
      TermMap inner = to_terms(*n.a);
      merge_into(m, inner, -1.0);
      return m;
    }
    case Op::mul:
      return mul_maps(to_terms(*n.a), to_terms(*n.b));
    case Op::div:
      return mul_maps(to_terms(*n.a), pow_map(to_terms(*n.b), -1.0));
    case Op::pow:
      return pow_map(to_terms(*n.a), n.b->value);
    case Op::sqrt:
      return pow_map(to_terms(*n.a), 0.5);
    default: {  // sin, cos, tan, exp, ln: opaque unary atoms
      NodePtr arg = rebuild(to_terms(*n.a));
      return atom_map(make_node(n.op, std::move(arg)), 1.0);
    }
  }
}

inline NodePtr rebuild_term(const Term& t) {
  NodePtr prod;
  for (const auto& f : t.factors) {
    NodePtr piece = f.exponent == 1.0 ? f.base : simplify_pow(f.base, f.exponent);
    prod = prod ? simplify_mul(prod, piece) : piece;
  }
  if (!prod) return make_const(t.coeff);
  if (t.coeff == 1.0) return prod;
  return simplify_mul(make_const(t.coeff), prod);
}

inline NodePtr rebuild(const TermMap& m) {
  if (m.empty()) return make_const(0.0);
  NodePtr sum;
  for (const auto& [k, t] : m) {
    NodePtr piece = rebuild_term(t);
    sum = sum ? simplify_add(sum, piece) : piece;
  }
  return sum;
}

inline bool nodes_equal(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::constant: return a.value == b.value;
    case Op::variable: return a.var == b.var;
    default:
      if (static_cast<bool>(a.a) != static_cast<bool>(b.a)) return false;
      if (static_cast<bool>(a.b) != static_cast<bool>(b.b)) return false;
      if (a.a && !nodes_equal(*a.a, *b.a)) return false;
      if (a.b && !nodes_equal(*a.b, *b.b)) return false;
      return true;
  }
}

}  // namespace detail

/// Canonical sum-of-monomials rebuild of `e`.
inline Expr normalize(const Expr& e) { return Expr(detail::rebuild(detail::to_terms(*e.node()))); }

inline bool structurally_equal(const Expr& a, const Expr& b) {
  return detail::nodes_equal(*a.node(), *b.node());
}

/// Symbolic identity: the normal form of a - b collapses to zero.
inline bool symbolically_equal(const Expr& a, const Expr& b) {
  return detail::to_terms(*(a - b).node()).empty();
}

}  // namespace liesys

#endif  // LIESYS_EXPR_HPP
