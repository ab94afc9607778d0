// Polynomial/analytic vector fields with symbolic components, their Lie
// bracket, and the concrete sl(2,R) realizations carried by each system.

#ifndef LIESYS_VECTORFIELD_HPP
#define LIESYS_VECTORFIELD_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "liesys/expr.hpp"

namespace liesys {

// Vector field sum_i comps[i] * d/d(vars[i]) with symbolic components.
struct VectorField {
  std::vector<int> vars;    // variable indices, one per component
  std::vector<Expr> comps;  // same length as vars

  VectorField() = default;
  VectorField(std::initializer_list<std::string_view> names, std::initializer_list<Expr> cs) {
    for (auto n : names) vars.push_back(variable_index(n));
    comps.assign(cs);
    if (vars.size() != comps.size())
      throw std::invalid_argument("vector field: component/variable count mismatch");
  }
};

/// Directional derivative V(f) = sum_i V^i df/dx_i, symbolic.
inline Expr apply_field(const VectorField& v, const Expr& f) {
  Expr out(0.0);
  for (std::size_t i = 0; i < v.vars.size(); ++i)
    out = out + v.comps[i] * differentiate(f, v.vars[i]);
  return out;
}

/// Componentwise symbolic Lie bracket [V, W] = V(W^i) - W(V^i).
inline VectorField bracket(const VectorField& v, const VectorField& w) {
  if (v.vars != w.vars)
    throw std::invalid_argument("bracket: vector fields live on different variable lists");
  VectorField r;
  r.vars = v.vars;
  r.comps.reserve(v.comps.size());
  for (std::size_t i = 0; i < v.comps.size(); ++i)
    r.comps.push_back(apply_field(v, w.comps[i]) - apply_field(w, v.comps[i]));
  return r;
}

inline VectorField scale(double s, const VectorField& v) {
  VectorField r;
  r.vars = v.vars;
  for (const auto& c : v.comps) r.comps.push_back(Expr(s) * c);
  return r;
}

/// Symbolic equality of two fields (componentwise normal-form identity).
inline bool fields_equal(const VectorField& a, const VectorField& b) {
  if (a.vars != b.vars || a.comps.size() != b.comps.size()) return false;
  for (std::size_t i = 0; i < a.comps.size(); ++i)
    if (!symbolically_equal(a.comps[i], b.comps[i])) return false;
  return true;
}

// --- Concrete realizations -------------------------------------------------

/// Riccati generators on the line: Y0 = d/dx, Y1 = x d/dx, Y2 = x^2 d/dx.
inline std::array<VectorField, 3> riccati_generators() {
  const Expr x = Expr::variable("x");
  return {VectorField{{"x"}, {Expr(1.0)}},
          VectorField{{"x"}, {x}},
          VectorField{{"x"}, {x * x}}};
}

/// Oscillator generators on phase space:
/// X0 = p d/dx, X1 = (x d/dx - p d/dp)/2, X2 = -x d/dp.
inline std::array<VectorField, 3> oscillator_generators() {
  const Expr x = Expr::variable("x");
  const Expr p = Expr::variable("p");
  return {VectorField{{"x", "p"}, {p, Expr(0.0)}},
          VectorField{{"x", "p"}, {Expr(0.5) * x, Expr(-0.5) * p}},
          VectorField{{"x", "p"}, {Expr(0.0), -x}}};
}

/// Milne-Pinney generators on (x, v):
/// L1 = x d/dv, L2 = v d/dx + (k/x^3) d/dv, L3 = (x d/dx - v d/dv)/2.
inline std::array<VectorField, 3> pinney_generators(double k) {
  const Expr x = Expr::variable("x");
  const Expr v = Expr::variable("v");
  return {VectorField{{"x", "v"}, {Expr(0.0), x}},
          VectorField{{"x", "v"}, {v, Expr(k) / pow(x, 3.0)}},
          VectorField{{"x", "v"}, {Expr(0.5) * x, Expr(-0.5) * v}}};
}

/// Generalized Ermakov generators on (x, vx, y, vy) for couplings f, g given
/// as expressions in u (evaluated at u = y/x):
/// N1 = x d/dvx + y d/dvy,
/// N2 = vx d/dx + f(y/x)/x^3 d/dvx + vy d/dy + g(y/x)/y^3 d/dvy,
/// N3 = (x d/dx - vx d/dvx + y d/dy - vy d/dvy)/2.
inline std::array<VectorField, 3> generalized_ermakov_generators(const Expr& f, const Expr& g) {
  const Expr x = Expr::variable("x");
  const Expr y = Expr::variable("y");
  const Expr vx = Expr::variable("vx");
  const Expr vy = Expr::variable("vy");
  const Expr u_of_xy = y / x;
  const Expr f_xy = substitute(f, "u", u_of_xy);
  const Expr g_xy = substitute(g, "u", u_of_xy);
  return {VectorField{{"x", "vx", "y", "vy"}, {Expr(0.0), x, Expr(0.0), y}},
          VectorField{{"x", "vx", "y", "vy"},
                      {vx, f_xy / pow(x, 3.0), vy, g_xy / pow(y, 3.0)}},
          VectorField{{"x", "vx", "y", "vy"},
                      {Expr(0.5) * x, Expr(-0.5) * vx, Expr(0.5) * y, Expr(-0.5) * vy}}};
}

}  // namespace liesys

#endif  // LIESYS_VECTORFIELD_HPP
