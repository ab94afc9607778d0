// Time-dependent harmonic oscillators as SL(2,R) Lie systems: coefficient
// extraction, the damped-oscillator autonomization, the two solvable
// frequency families, and the linear/partial superposition rules.

#ifndef LIESYS_OSCILLATOR_HPP
#define LIESYS_OSCILLATOR_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "liesys/expr.hpp"
#include "liesys/ode.hpp"
#include "liesys/quadrature.hpp"
#include "liesys/riccati.hpp"
#include "liesys/sl2.hpp"

namespace liesys {

// Oscillator with Hamiltonian H = p^2/(2 m(t)) + m(t) w^2(t) x^2 / 2.
struct OscillatorSpec {
  enum class Kind { generic, caldirola_kanai, td_frequency };

  Expr m;       // mass, positive on the working interval
  Expr omega2;  // squared angular frequency
  Kind kind = Kind::generic;
  double m0 = 1.0, mu = 0.0, omega0 = 1.0;  // preset parameters where applicable

  static OscillatorSpec generic(Expr m, Expr omega2) {
    OscillatorSpec s;
    s.m = std::move(m);
    s.omega2 = std::move(omega2);
    return s;
  }

  /// Damped oscillator with exponentially growing mass m(t) = m0 e^{mu t}
  /// and constant frequency omega0.
  static OscillatorSpec caldirola_kanai(double m0, double mu, double omega0) {
    OscillatorSpec s;
    s.m = Expr(m0) * exp(Expr(mu) * Expr::variable("t"));
    s.omega2 = Expr(omega0 * omega0);
    s.kind = Kind::caldirola_kanai;
    s.m0 = m0;
    s.mu = mu;
    s.omega0 = omega0;
    return s;
  }

  /// Unit mass, omega^2(t) = F(t) omega0^2.
  static OscillatorSpec td_frequency(const Expr& F, double omega0) {
    OscillatorSpec s;
    s.m = Expr(1.0);
    s.omega2 = F * Expr(omega0 * omega0);
    s.kind = Kind::td_frequency;
    s.omega0 = omega0;
    return s;
  }
};

/// Coefficient triple (1/m, 0, m omega^2) of the oscillator as a Lie system.
inline Sl2Coeffs to_sl2_coeffs(const OscillatorSpec& s) {
  return Sl2Coeffs(Expr(1.0) / s.m, Expr(0.0), s.m * s.omega2);
}

/// Hamilton equations xdot = b0 p, pdot = -b2 x as an integrable right-hand
/// side; built from the same coefficient expressions as the linear system so
/// the two agree bit-for-bit.
inline Rhs hamilton_rhs(const OscillatorSpec& s) {
  const Sl2Coeffs c = to_sl2_coeffs(s);
  return [c](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const auto b = c.eval(t);
    dy[0] = b[0] * y[1];
    dy[1] = -b[2] * y[0];
  };
}

// Autonomized damped oscillator: the time-dependent scaling x' = sqrt(G) x,
// p' = p / sqrt(G) with G(t) = m0 omega0 e^{mu t} turns the system into a
// constant linear one, solved by a matrix exponential.
struct CkReduction {
  double m0 = 1.0, mu = 0.0, omega0 = 1.0;
  Mat2 matrix;           // constant coefficient matrix of (x', p')
  Expr scaling;          // G(t)
  double D = 1.0;        // constant reparametrization factor
  IntegrabilityReport report;

  std::array<double, 2> transform(double x, double p, double t) const {
    const double sg = std::sqrt(eval_at_t(scaling, t));
    return {sg * x, p / sg};
  }
  std::array<double, 2> untransform(double xp, double pp, double t) const {
    const double sg = std::sqrt(eval_at_t(scaling, t));
    return {xp / sg, pp * sg};
  }

  /// Solution of the original system from (x0, p0) at t = 0.
  std::array<double, 2> solve(double x0, double p0, double t) const {
    const auto z0 = transform(x0, p0, 0.0);
    const auto zt = exp_traceless(matrix.scaled(t)).apply(z0[0], z0[1]);
    return untransform(zt[0], zt[1], t);
  }
};

/// Builds the scaling gauge from the integrability report of the damped
/// oscillator coefficients, applies the gauge action, and returns the
/// resulting constant coefficient matrix together with the transformation.
inline CkReduction reduce_ck_autonomous(double m0, double mu, double omega0) {
  if (!(omega0 > 0.0) || !(m0 > 0.0))
    throw std::invalid_argument("reduce_ck_autonomous: m0 and omega0 must be positive");

  const OscillatorSpec spec = OscillatorSpec::caldirola_kanai(m0, mu, omega0);
  const Sl2Coeffs coeffs = to_sl2_coeffs(spec);
  const auto grid = linspace(0.0, 10.0, 201);

  CkReduction red;
  red.m0 = m0;
  red.mu = mu;
  red.omega0 = omega0;
  red.report = check_integrability(coeffs, grid);
  if (!red.report.integrable())
    throw std::logic_error("damped-oscillator coefficients failed the criterion");
  red.scaling = red.report.scaling;

  // Transformed coefficients under diag(sqrt(G), 1/sqrt(G)) are constant;
  // read them off the gauge action and verify constancy.
  const GaugeCurve gauge = GaugeCurve::diagonal(sqrt(red.scaling));
  const Sl2Coeffs transformed = gauge_transform(coeffs, gauge);
  std::array<std::vector<double>, 3> samples;
  for (double t : grid) {
    const auto b = transformed.eval(t);
    for (int i = 0; i < 3; ++i) samples[static_cast<std::size_t>(i)].push_back(b[static_cast<std::size_t>(i)]);
  }
  std::array<double, 3> bconst{};
  for (int i = 0; i < 3; ++i) {
    const auto rep = constancy(samples[static_cast<std::size_t>(i)], 1e-8);
    if (!rep.is_constant)
      throw std::logic_error("transformed coefficients are not constant");
    bconst[static_cast<std::size_t>(i)] = rep.mean;
  }
  red.matrix = Mat2{0.5 * bconst[1], bconst[0], -bconst[2], -0.5 * bconst[1]};
  red.D = eval_at_t(red.report.target.D, 0.0);
  return red;
}

/// The one-parameter frequency family F(t) = 1 / (-K omega0 t + K')^2 whose
/// coefficients satisfy the scaling criterion with constant K.
inline OscillatorSpec solvable_frequency_family(double K, double Kprime, double omega0) {
  const Expr t = Expr::variable("t");
  const Expr F = Expr(1.0) / pow(Expr(-K * omega0) * t + Expr(Kprime), 2.0);
  return OscillatorSpec::td_frequency(F, omega0);
}

// Quartic frequency family F(t) = (u1 t + u0)^-4 reduced by the triangular
// gauge [[1/V, 0], [-u1, V]] with V(t) = u1 t + u0 and the reparametrization
// tau(t) = int_0^t V^-2.
struct QuarticReduction {
  double u0 = 1.0, u1 = 0.0, omega0 = 1.0;
  Expr V;

  static QuarticReduction make(double u0, double u1, double omega0) {
    QuarticReduction q;
    q.u0 = u0;
    q.u1 = u1;
    q.omega0 = omega0;
    q.V = Expr(u1) * Expr::variable("t") + Expr(u0);
    return q;
  }

  OscillatorSpec spec() const {
    return OscillatorSpec::td_frequency(Expr(1.0) / pow(V, 4.0), omega0);
  }

  double tau(double t, double tol = 1e-11) const {
    const Expr integrand = Expr(1.0) / (V * V);
    const double by_quad = quad(integrand, 0.0, t, tol);
    if (u1 != 0.0) {
      // closed form of the reparametrization, used as a cross-check
      const double closed = t / (u0 * (u1 * t + u0));
      if (!(std::abs(by_quad - closed) <= 1e3 * tol * (1.0 + std::abs(closed))))
        throw std::domain_error("quartic reduction: reparametrization mismatch (pole of V inside?)");
    }
    return by_quad;
  }
};

/// Closed-form oscillator solution for the quartic frequency family:
///   x(t) = V(t) (cos(w0 tau) x0/V(0) + sin(w0 tau)(-u1 x0 + V(0) p0)/w0).
inline double quartic_reduction_solve(const QuarticReduction& q, double x0, double p0, double t,
                                      double tol = 1e-11) {
  const double v0 = eval_at_t(q.V, 0.0);
  const double vt = eval_at_t(q.V, t);
  if (v0 == 0.0 || vt == 0.0) throw std::domain_error("quartic reduction: V vanishes");
  const double tau = q.tau(t, tol);
  const double xp0 = x0 / v0;
  const double pp0 = -q.u1 * x0 + v0 * p0;
  return vt * (std::cos(q.omega0 * tau) * xp0 + std::sin(q.omega0 * tau) * pp0 / q.omega0);
}

/// Pointwise linear combination k1 * x1 + k2 * x2 on a shared sample grid.
inline Trajectory linear_superposition(const Trajectory& x1, const Trajectory& x2, double k1,
                                       double k2) {
  if (x1.times != x2.times || x1.dim() != x2.dim())
    throw std::invalid_argument("linear_superposition: trajectories must share the sample grid");
  Trajectory out;
  out.times = x1.times;
  out.states.reserve(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    std::vector<double> s(x1.dim());
    for (std::size_t j = 0; j < s.size(); ++j)
      s[j] = k1 * x1.states[i][j] + k2 * x2.states[i][j];
    out.states.push_back(std::move(s));
  }
  return out;
}

/// Per-sample Wronskian x1 v2 - x2 v1 of two co-evolving (x, v) trajectories;
/// constant in time for solutions of one oscillator.
inline std::vector<double> wronskian_invariants(const Trajectory& x1, const Trajectory& x2) {
  if (x1.times != x2.times || x1.dim() < 2 || x2.dim() < 2)
    throw std::invalid_argument("wronskian_invariants: need co-sampled (x, v) trajectories");
  std::vector<double> w;
  w.reserve(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i)
    w.push_back(x1.states[i][0] * x2.states[i][1] - x2.states[i][0] * x1.states[i][1]);
  return w;
}

/// Partial superposition from one oscillator solution:
///   x2(t) = k' x1(t) + k x1(t) int_base^t dz / x1^2(z).
/// The callable overload accepts interpolated numeric solutions.
template <class F>
double partial_superposition_fn(F&& x1, double k, double kprime, double t, double t_base = 0.0,
                                double tol = 1e-10) {
  const double x1t = x1(t);
  double integral = 0.0;
  if (k != 0.0) {
    integral = quad(
        [&](double z) {
          const double v = x1(z);
          if (v == 0.0) throw QuadratureError("partial superposition: x1 vanishes at z=" +
                                              std::to_string(z));
          return 1.0 / (v * v);
        },
        t_base, t, tol);
  }
  return kprime * x1t + k * x1t * integral;
}

inline double partial_superposition(const Expr& x1, double k, double kprime, double t,
                                    double t_base = 0.0, double tol = 1e-10) {
  return partial_superposition_fn([&](double z) { return eval_at_t(x1, z); }, k, kprime, t,
                                  t_base, tol);
}

}  // namespace liesys

#endif  // LIESYS_OSCILLATOR_HPP
