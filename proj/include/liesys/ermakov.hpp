// Milne-Pinney equation, Ermakov systems and their invariants, and the
// two-oscillator superposition rule for the Pinney equation.

#ifndef LIESYS_ERMAKOV_HPP
#define LIESYS_ERMAKOV_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "liesys/expr.hpp"
#include "liesys/ode.hpp"
#include "liesys/quadrature.hpp"

namespace liesys {

// xdd = -omega^2(t) x + k / x^3. Trajectories must keep x away from zero.
struct PinneySpec {
  double k = 1.0;
  Expr omega2;
};

// The 1/x^3 barrier: integration halts (by domain error) this close to zero.
inline constexpr double kPinneyZeroGuard = 1e-8;

/// Right-hand side on (x, v).
inline Rhs pinney_rhs(const PinneySpec& s) {
  return [s](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const double x = y[0];
    if (s.k != 0.0 && std::abs(x) < kPinneyZeroGuard)
      throw std::domain_error("pinney: |x| below zero guard at t=" + std::to_string(t));
    const double w2 = eval_at_t(s.omega2, t);
    dy[0] = y[1];
    dy[1] = -w2 * x + (s.k == 0.0 ? 0.0 : s.k / (x * x * x));
  };
}

// Joint state of an oscillator solution (x, vx) and a Pinney solution (y, vy).
struct ErmakovState {
  double x = 0.0, vx = 0.0;
  double y = 1.0, vy = 0.0;
};

/// Coupled oscillator + Pinney pair sharing omega^2(t); state (x, vx, y, vy).
inline Rhs ermakov_pair_rhs(const Expr& omega2, double k = 1.0) {
  return [omega2, k](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const double w2 = eval_at_t(omega2, t);
    if (std::abs(y[2]) < kPinneyZeroGuard)
      throw std::domain_error("ermakov: |y| below zero guard at t=" + std::to_string(t));
    dy[0] = y[1];
    dy[1] = -w2 * y[0];
    dy[2] = y[3];
    dy[3] = -w2 * y[2] + k / (y[2] * y[2] * y[2]);
  };
}

/// psi = (x/y)^2 + (x vy - y vx)^2, the joint first integral of the pair.
inline double ermakov_invariant(const ErmakovState& st) {
  if (st.y == 0.0) throw std::domain_error("ermakov invariant: y = 0");
  const double ratio = st.x / st.y;
  const double xi = st.x * st.vy - st.y * st.vx;
  return ratio * ratio + xi * xi;
}

// Coupled pair xdd = f(y/x)/x^3 - omega^2 x, ydd = g(y/x)/y^3 - omega^2 y
// with couplings f, g given as expressions in the variable u.
struct GeneralizedErmakovSpec {
  Expr f, g;        // functions of u
  Expr omega2;      // function of t
  double base_point = 1.0;  // lower limit of the invariant's quadrature
};

inline Rhs generalized_ermakov_rhs(const GeneralizedErmakovSpec& s) {
  return [s](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const double x = y[0], yy = y[2];
    if (std::abs(x) < kPinneyZeroGuard || std::abs(yy) < kPinneyZeroGuard)
      throw std::domain_error("generalized ermakov: coordinate below zero guard at t=" +
                              std::to_string(t));
    const double w2 = eval_at_t(s.omega2, t);
    const Env env = Env{}.set("u", yy / x);
    const double fv = eval(s.f, env);
    const double gv = eval(s.g, env);
    dy[0] = y[1];
    dy[1] = -w2 * x + fv / (x * x * x);
    dy[2] = y[3];
    dy[3] = -w2 * yy + gv / (yy * yy * yy);
  };
}

/// First integral of the generalized pair:
///   I = (x vy - y vx)^2 / 2 + int_{u*}^{x/y} [-u^-3 f(1/u) + u g(1/u)] du.
/// The base point only shifts the invariant by a constant.
inline double generalized_invariant(const GeneralizedErmakovSpec& s, const ErmakovState& st,
                                    double tol = 1e-10) {
  if (st.y == 0.0) throw std::domain_error("generalized invariant: y = 0");
  const double xi = st.x * st.vy - st.y * st.vx;
  const double upper = st.x / st.y;
  const bool f_zero = s.f.is_constant(0.0);
  const auto integrand = [&](double uv) {
    double val = 0.0;
    if (uv == 0.0) {
      // u = 0 is regular only when the f-term is absent and g is constant
      // (then u * g(1/u) -> 0); this covers a base point at 0.
      if (f_zero && s.g.is_constant()) return 0.0;
      throw QuadratureError("generalized invariant: u crosses zero");
    }
    const Env env = Env{}.set("u", 1.0 / uv);
    if (!f_zero) val -= eval(s.f, env) / (uv * uv * uv);
    return val + uv * eval(s.g, env);
  };
  return 0.5 * xi * xi + quad(integrand, s.base_point, upper, tol);
}

// Pinney solution x with two companion oscillator solutions y and z.
struct TripleState {
  double x = 1.0, vx = 0.0;
  double y = 1.0, vy = 0.0;
  double z = 0.0, vz = 1.0;
};

/// Pinney (x) plus two copies of the oscillator (y, z); state ordered
/// (x, vx, y, vy, z, vz).
inline Rhs pinney_triple_rhs(const Expr& omega2, double k) {
  return [omega2, k](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const double w2 = eval_at_t(omega2, t);
    const double x = y[0];
    if (std::abs(x) < kPinneyZeroGuard)
      throw std::domain_error("pinney triple: |x| below zero guard at t=" + std::to_string(t));
    dy[0] = y[1];
    dy[1] = -w2 * x + k / (x * x * x);
    dy[2] = y[3];
    dy[3] = -w2 * y[2];
    dy[4] = y[5];
    dy[5] = -w2 * y[4];
  };
}

struct TripleInvariants {
  double I1 = 0.0;  // Ermakov invariant of the (x, y) subsystem
  double I2 = 0.0;  // Ermakov invariant of the (x, z) subsystem
  double W = 0.0;   // Wronskian of the (y, z) subsystem
};

/// W = y vz - z vy, I1 = ((y vx - x vy)^2 + k (y/x)^2)/2,
/// I2 = ((x vz - z vx)^2 + k (z/x)^2)/2.
inline TripleInvariants triple_invariants(const TripleState& st, double k) {
  if (st.x == 0.0) throw std::domain_error("triple invariants: x = 0");
  TripleInvariants inv;
  const double a = st.y * st.vx - st.x * st.vy;
  const double b = st.x * st.vz - st.z * st.vx;
  inv.I1 = 0.5 * (a * a + k * (st.y / st.x) * (st.y / st.x));
  inv.I2 = 0.5 * (b * b + k * (st.z / st.x) * (st.z / st.x));
  inv.W = st.y * st.vz - st.z * st.vy;
  return inv;
}

/// Explicit Pinney solution from two oscillator solutions and the constants:
///   x = (sqrt(2)/W) (I2 y^2 + I1 z^2 +- sqrt(4 I1 I2 - k W^2) y z)^{1/2}.
/// `branch` selects the sign (+1 or -1).
inline double pinney_superposition(double y, double z, double I1, double I2, double W, double k,
                                   int branch = +1) {
  if (W == 0.0) throw std::domain_error("pinney superposition: W = 0");
  if (branch != 1 && branch != -1)
    throw std::invalid_argument("pinney superposition: branch must be +1 or -1");
  double disc = 4.0 * I1 * I2 - k * W * W;
  const double disc_scale = 4.0 * std::abs(I1 * I2) + std::abs(k * W * W) + 1.0;
  if (disc < 0.0) {
    if (disc < -1e-12 * disc_scale)
      throw std::domain_error("pinney superposition: negative discriminant");
    disc = 0.0;
  }
  double radicand = I2 * y * y + I1 * z * z + branch * std::sqrt(disc) * y * z;
  const double rad_scale = std::abs(I2 * y * y) + std::abs(I1 * z * z) + 1.0;
  if (radicand < 0.0) {
    if (radicand < -1e-12 * rad_scale)
      throw std::domain_error("pinney superposition: negative radicand");
    radicand = 0.0;
  }
  return std::sqrt(2.0) / W * std::sqrt(radicand);
}

/// Branch whose value at the given state matches st.x; prefers +1 on ties.
/// When y z = 0 the two branch values coincide and the comparison carries no
/// information, so the sign of the conserved bilinear a b - k y z / x^2
/// (whose square is the discriminant) decides instead.
inline int select_pinney_branch(const TripleState& st, const TripleInvariants& inv, double k) {
  const double plus = pinney_superposition(st.y, st.z, inv.I1, inv.I2, inv.W, k, +1);
  const double minus = pinney_superposition(st.y, st.z, inv.I1, inv.I2, inv.W, k, -1);
  const double dp = std::abs(plus - st.x);
  const double dm = std::abs(minus - st.x);
  const double scale = std::abs(st.x) + 1.0;
  if (std::abs(dp - dm) > 1e-9 * scale) return dp <= dm ? +1 : -1;
  const double a = st.y * st.vx - st.x * st.vy;
  const double b = st.x * st.vz - st.z * st.vx;
  const double q = a * b - k * st.y * st.z / (st.x * st.x);
  return q >= 0.0 ? +1 : -1;
}

}  // namespace liesys

#endif  // LIESYS_ERMAKOV_HPP
