// SL(2,R) machinery shared by every system here: coefficient curves, the
// matrix equation on the group, the Mobius action on the projective line,
// and the affine gauge action on coefficient triples.

#ifndef LIESYS_SL2_HPP
#define LIESYS_SL2_HPP

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "liesys/expr.hpp"
#include "liesys/ode.hpp"

namespace liesys {

// Row-major 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 scaled(double s) const { return {s * a, s * b, s * c, s * d}; }

  Mat2 inverse() const {
    const double dt = det();
    if (dt == 0.0) throw std::invalid_argument("singular 2x2 matrix");
    return Mat2{d, -b, -c, a}.scaled(1.0 / dt);
  }

  std::array<double, 2> apply(double x, double p) const {
    return {a * x + b * p, c * x + d * p};
  }
};

/// exp(M) for traceless M, split by the sign of det M (rotation-like,
/// boost-like, or parabolic).
inline Mat2 exp_traceless(const Mat2& m) {
  if (std::abs(m.trace()) > 1e-12 * (1.0 + std::abs(m.a) + std::abs(m.d)))
    throw std::invalid_argument("exp_traceless requires a traceless matrix");
  const double dt = m.det();
  double ci, si;  // exp(M) = ci * I + si * M
  if (dt > 1e-300) {
    const double w = std::sqrt(dt);
    ci = std::cos(w);
    si = std::sin(w) / w;
  } else if (dt < -1e-300) {
    const double w = std::sqrt(-dt);
    ci = std::cosh(w);
    si = std::sinh(w) / w;
  } else {
    ci = 1.0;
    si = 1.0;
  }
  return {ci + si * m.a, si * m.b, si * m.c, ci + si * m.d};
}

// Point of the projective real line: a real number or the single infinity.
struct ExtReal {
  double value = 0.0;
  bool infinite = false;

  ExtReal() = default;
  ExtReal(double v) : value(v) {}  // NOLINT: implicit by design
  static ExtReal inf() {
    ExtReal r;
    r.infinite = true;
    return r;
  }
  bool finite() const { return !infinite; }
};

/// Full Mobius action of an invertible matrix on the projective line,
/// with exact handling of the point at infinity and of poles.
inline ExtReal mobius(const Mat2& m, ExtReal x) {
  if (x.infinite) {
    if (m.c == 0.0) return ExtReal::inf();
    return m.a / m.c;
  }
  const double num = m.a * x.value + m.b;
  const double den = m.c * x.value + m.d;
  if (den == 0.0) return ExtReal::inf();
  return num / den;
}

/// Chordal metric on the projective line; bounded by 1, smooth through
/// infinity. Used to compare solutions across pole crossings.
inline double chordal_distance(ExtReal x, ExtReal y) {
  const auto lift = [](ExtReal e) -> std::array<double, 2> {
    if (e.infinite) return {1.0, 0.0};
    const double n = std::sqrt(1.0 + e.value * e.value);
    return {e.value / n, 1.0 / n};
  };
  const auto ux = lift(x), uy = lift(y);
  return std::abs(ux[0] * uy[1] - ux[1] * uy[0]);
}

// Coefficient triple (b0(t), b1(t), b2(t)) of an SL(2,R) Lie system, with
// cached symbolic t-derivatives.
class Sl2Coeffs {
 public:
  Sl2Coeffs() = default;
  Sl2Coeffs(Expr b0, Expr b1, Expr b2)
      : b0_(std::move(b0)),
        b1_(std::move(b1)),
        b2_(std::move(b2)),
        db0_(differentiate(b0_, 0)),
        db1_(differentiate(b1_, 0)),
        db2_(differentiate(b2_, 0)) {}

  static Sl2Coeffs parse(std::string_view b0, std::string_view b1, std::string_view b2) {
    return Sl2Coeffs(parse_expr(b0), parse_expr(b1), parse_expr(b2));
  }

  const Expr& b0() const { return b0_; }
  const Expr& b1() const { return b1_; }
  const Expr& b2() const { return b2_; }
  const Expr& db0() const { return db0_; }
  const Expr& db1() const { return db1_; }
  const Expr& db2() const { return db2_; }

  std::array<double, 3> eval(double t) const {
    const Env env = Env::at_t(t);
    return {liesys::eval(b0_, env), liesys::eval(b1_, env), liesys::eval(b2_, env)};
  }
  std::array<double, 3> eval_derivs(double t) const {
    const Env env = Env::at_t(t);
    return {liesys::eval(db0_, env), liesys::eval(db1_, env), liesys::eval(db2_, env)};
  }

 private:
  Expr b0_, b1_, b2_;
  Expr db0_, db1_, db2_;
};

/// Defining 2x2 representation of the coefficient curve at time t:
/// A(t) = [[b1/2, b0], [-b2, -b1/2]]. The Mobius action of its fundamental
/// solution solves the Riccati equation with the same coefficients, and the
/// linear action solves the matching oscillator.
inline Mat2 algebra_matrix(const Sl2Coeffs& c, double t) {
  const auto b = c.eval(t);
  return {0.5 * b[1], b[0], -b[2], -0.5 * b[1]};
}

// Time-indexed family of 2x2 matrices on a sample grid.
struct Mat2Curve {
  std::vector<double> times;
  std::vector<Mat2> values;
  std::size_t size() const { return times.size(); }
};

/// Fundamental solution Phi(t) of Phi' = A(t) Phi, Phi(t0) = identity,
/// integrated as a 4-dimensional ODE; every sample is renormalized by
/// 1/sqrt(det) to stay exactly unimodular.
inline Mat2Curve fundamental_solution(const Sl2Coeffs& c, double t0, double t1,
                                      std::span<const double> sample_times,
                                      const IntegratorConfig& cfg = {}) {
  Rhs rhs = [c](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const Mat2 A = algebra_matrix(c, t);
    // y = (a, b, c, d) row-major
    dy[0] = A.a * y[0] + A.b * y[2];
    dy[1] = A.a * y[1] + A.b * y[3];
    dy[2] = A.c * y[0] + A.d * y[2];
    dy[3] = A.c * y[1] + A.d * y[3];
  };
  Trajectory traj = integrate_ode(rhs, {1.0, 0.0, 0.0, 1.0}, t0, t1, sample_times, cfg);
  if (traj.size() != sample_times.size())
    throw IntegrationError("fundamental solution blew up before the final sample",
                           traj.times.empty() ? t0 : traj.times.back());
  Mat2Curve curve;
  curve.times = traj.times;
  curve.values.reserve(traj.size());
  for (const auto& s : traj.states) {
    Mat2 m{s[0], s[1], s[2], s[3]};
    const double dt = m.det();
    if (!(dt > 0.0))
      throw IntegrationError("fundamental solution lost unimodularity", curve.times.back());
    curve.values.push_back(m.scaled(1.0 / std::sqrt(dt)));
  }
  return curve;
}

// Smooth SL(2,R)-valued curve with symbolic entries and their t-derivatives.
class GaugeCurve {
 public:
  GaugeCurve(Expr alpha, Expr beta, Expr gamma, Expr delta)
      : alpha_(std::move(alpha)),
        beta_(std::move(beta)),
        gamma_(std::move(gamma)),
        delta_(std::move(delta)),
        dalpha_(differentiate(alpha_, 0)),
        dbeta_(differentiate(beta_, 0)),
        dgamma_(differentiate(gamma_, 0)),
        ddelta_(differentiate(delta_, 0)) {}

  static GaugeCurve constant(const Mat2& m) {
    return GaugeCurve(Expr(m.a), Expr(m.b), Expr(m.c), Expr(m.d));
  }

  /// diag(alpha, 1/alpha) for a nonvanishing alpha(t).
  static GaugeCurve diagonal(const Expr& alpha) {
    return GaugeCurve(alpha, Expr(0.0), Expr(0.0), Expr(1.0) / alpha);
  }

  const Expr& alpha() const { return alpha_; }
  const Expr& beta() const { return beta_; }
  const Expr& gamma() const { return gamma_; }
  const Expr& delta() const { return delta_; }
  const Expr& dalpha() const { return dalpha_; }
  const Expr& dbeta() const { return dbeta_; }
  const Expr& dgamma() const { return dgamma_; }
  const Expr& ddelta() const { return ddelta_; }

  Mat2 at(double t) const {
    const Env env = Env::at_t(t);
    return {eval(alpha_, env), eval(beta_, env), eval(gamma_, env), eval(delta_, env)};
  }

  /// Checks |det - 1| <= tol over the grid.
  void validate_unimodular(std::span<const double> grid, double tol = 1e-9) const {
    for (double t : grid) {
      const Mat2 m = at(t);
      if (std::abs(m.det() - 1.0) > tol)
        throw std::invalid_argument("gauge curve is not unimodular at t=" + std::to_string(t));
    }
  }

 private:
  Expr alpha_, beta_, gamma_, delta_;
  Expr dalpha_, dbeta_, dgamma_, ddelta_;
};

/// Pointwise matrix product of two gauge curves (g2 * g1)(t).
inline GaugeCurve gauge_product(const GaugeCurve& g2, const GaugeCurve& g1) {
  return GaugeCurve(g2.alpha() * g1.alpha() + g2.beta() * g1.gamma(),
                    g2.alpha() * g1.beta() + g2.beta() * g1.delta(),
                    g2.gamma() * g1.alpha() + g2.delta() * g1.gamma(),
                    g2.gamma() * g1.beta() + g2.delta() * g1.delta());
}

/// Affine action of a gauge curve on a coefficient triple. If x(t) solves the
/// system with coefficients c, then the Mobius image of x under the curve
/// solves the system with the returned coefficients.
inline Sl2Coeffs gauge_transform(const Sl2Coeffs& c, const GaugeCurve& g) {
  const Expr &al = g.alpha(), &be = g.beta(), &ga = g.gamma(), &de = g.delta();
  const Expr &dal = g.dalpha(), &dbe = g.dbeta(), &dga = g.dgamma(), &dde = g.ddelta();
  const Expr &b0 = c.b0(), &b1 = c.b1(), &b2 = c.b2();

  Expr nb2 = de * de * b2 - de * ga * b1 + ga * ga * b0 + ga * dde - de * dga;
  Expr nb1 = Expr(-2.0) * be * de * b2 + (al * de + be * ga) * b1 - Expr(2.0) * al * ga * b0 +
             de * dal - al * dde + be * dga - ga * dbe;
  Expr nb0 = be * be * b2 - al * be * b1 + al * al * b0 + al * dbe - be * dal;
  return Sl2Coeffs(std::move(nb0), std::move(nb1), std::move(nb2));
}

}  // namespace liesys

#endif  // LIESYS_SL2_HPP
