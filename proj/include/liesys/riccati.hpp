// Riccati solving, reduction, superposition rules, and the scaling-criterion
// integrability pipeline for SL(2,R) coefficient curves.

#ifndef LIESYS_RICCATI_HPP
#define LIESYS_RICCATI_HPP

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "liesys/expr.hpp"
#include "liesys/ode.hpp"
#include "liesys/quadrature.hpp"
#include "liesys/sl2.hpp"

namespace liesys {

struct RiccatiProblem {
  Sl2Coeffs coeffs;
  ExtReal x0;
  double t0 = 0.0;
  double t1 = 1.0;
};

// Chart-switch threshold for projective continuation through poles.
inline constexpr double kChartThreshold = 1e6;

namespace detail {

// dx/dt = b2 x^2 + b1 x + b0 (direct chart) and its inverse-chart companion
// dw/dt = -(b0 w^2 + b1 w + b2) for w = 1/x.
inline Rhs riccati_rhs(const Sl2Coeffs& c, bool inverse_chart) {
  return [c, inverse_chart](double t, const std::vector<double>& y, std::vector<double>& dy) {
    const auto b = c.eval(t);
    const double s = y[0];
    dy[0] = inverse_chart ? -(b[0] * s * s + b[1] * s + b[2])
                          : b[2] * s * s + b[1] * s + b[0];
  };
}

}  // namespace detail

/// Numeric Riccati solution continued through blow-ups: once |x| exceeds the
/// chart threshold the integration proceeds in the inverse chart w = 1/x and
/// comes back when |w| exceeds the same threshold. Pole crossings (w changing
/// sign) are flagged as blow_up events; chart transitions as chart_switch.
inline Trajectory solve_numeric(const RiccatiProblem& p, std::span<const double> sample_times,
                                const IntegratorConfig& cfg = {}) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < p.t0 || sample_times[i] > p.t1)
      throw std::invalid_argument("sample time outside problem interval");
    if (i > 0 && sample_times[i] <= sample_times[i - 1])
      throw std::invalid_argument("sample times must be strictly increasing");
  }

  bool inverse = p.x0.infinite || std::abs(p.x0.value) > kChartThreshold;
  double y0 = p.x0.infinite ? 0.0 : (inverse ? 1.0 / p.x0.value : p.x0.value);

  Trajectory traj;
  auto emit = [&](double ts, double chart_value) {
    const double x = inverse ? 1.0 / chart_value : chart_value;
    traj.times.push_back(ts);
    traj.states.push_back({x});
  };

  AdaptiveStepper stepper(detail::riccati_rhs(p.coeffs, inverse), p.t0, {y0}, p.t1, cfg);

  std::size_t next = 0;
  if (next < sample_times.size() && sample_times[next] == p.t0) {
    emit(p.t0, y0);
    ++next;
  }

  while (!stepper.finished()) {
    stepper.advance();
    const double w_prev = stepper.state()[0];  // value at step end
    // samples inside the accepted step
    while (next < sample_times.size() && sample_times[next] <= stepper.t()) {
      emit(sample_times[next], stepper.interpolate1(sample_times[next]));
      ++next;
    }
    // pole crossing: in the inverse chart x passes through infinity when w
    // crosses zero; locate it on the dense output by bisection
    if (inverse) {
      const double wa = stepper.interpolate1(stepper.t_prev());
      const double wb = stepper.state()[0];
      if (wa == 0.0 || wa * wb < 0.0) {
        double lo = stepper.t_prev(), hi = stepper.t();
        double flo = wa;
        for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = stepper.interpolate1(mid);
          if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        traj.events.push_back({0.5 * (lo + hi), EventKind::blow_up});
      }
    }
    if (next >= sample_times.size()) break;
    if (std::abs(w_prev) > kChartThreshold) {
      inverse = !inverse;
      traj.events.push_back({stepper.t(), EventKind::chart_switch});
      stepper.reset(stepper.t(), {1.0 / w_prev}, detail::riccati_rhs(p.coeffs, inverse));
    }
  }
  return traj;
}

/// Same solution via the group: x(t) is the Mobius action of the fundamental
/// solution on the initial condition.
inline Trajectory solve_via_fundamental(const RiccatiProblem& p,
                                        std::span<const double> sample_times,
                                        const IntegratorConfig& cfg = {}) {
  const Mat2Curve phi = fundamental_solution(p.coeffs, p.t0, p.t1, sample_times, cfg);
  Trajectory traj;
  traj.times = phi.times;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const ExtReal x = mobius(phi.values[i], p.x0);
    traj.states.push_back({x.infinite ? std::numeric_limits<double>::infinity() : x.value});
    if (x.infinite) traj.events.push_back({phi.times[i], EventKind::blow_up});
  }
  return traj;
}

namespace detail {

// Mobius matrix sending (x1, x2, x3) to (0, inf, 1); applying it to x yields
// the cross ratio (x-x1)/(x-x2) : (x3-x1)/(x3-x2), with the usual limits when
// one of the reference points is infinite.
inline Mat2 cross_ratio_matrix(ExtReal x1, ExtReal x2, ExtReal x3) {
  const auto degenerate = [](ExtReal a, ExtReal b) {
    if (a.infinite || b.infinite) return a.infinite && b.infinite;
    return a.value == b.value;
  };
  if (degenerate(x1, x2) || degenerate(x1, x3) || degenerate(x2, x3))
    throw std::invalid_argument("cross ratio: reference points must be pairwise distinct");

  if (x1.infinite) return {0.0, x3.value - x2.value, 1.0, -x2.value};
  if (x2.infinite) return {1.0, -x1.value, 0.0, x3.value - x1.value};
  if (x3.infinite) return {1.0, -x1.value, 1.0, -x2.value};
  return {x3.value - x2.value, -x1.value * (x3.value - x2.value),
          x3.value - x1.value, -x2.value * (x3.value - x1.value)};
}

}  // namespace detail

/// k = (x-x1)/(x-x2) : (x3-x1)/(x3-x2) on the projective line.
inline ExtReal cross_ratio(ExtReal x, ExtReal x1, ExtReal x2, ExtReal x3) {
  return mobius(detail::cross_ratio_matrix(x1, x2, x3), x);
}

/// Solves the cross-ratio relation for x given three solutions and the
/// constant k: the nonlinear superposition rule of the Riccati equation.
inline ExtReal superpose_cross_ratio(ExtReal x1, ExtReal x2, ExtReal x3, double k) {
  const Mat2 m = detail::cross_ratio_matrix(x1, x2, x3);
  // Inverse Mobius map via the adjugate (projectively equal to the inverse).
  const Mat2 adj{m.d, -m.b, -m.c, m.a};
  return mobius(adj, ExtReal(k));
}

/// Gauge reduction by a particular solution x1(t): returns (0, b1 + 2 b2 x1,
/// b2). The candidate is first checked to solve the equation (sup-norm
/// residual on a 200-point grid).
inline Sl2Coeffs reduce_with_particular(const Sl2Coeffs& c, const Expr& x1, double t0, double t1,
                                        double residual_tol = 1e-6) {
  const Expr dx1 = differentiate(x1, 0);
  const Expr residual = dx1 - (c.b2() * x1 * x1 + c.b1() * x1 + c.b0());
  for (double t : linspace(t0, t1, 200)) {
    const double r = eval_at_t(residual, t);
    if (!(std::abs(r) <= residual_tol))
      throw std::invalid_argument("reduce_with_particular: candidate is not a solution (residual " +
                                  std::to_string(r) + " at t=" + std::to_string(t) + ")");
  }
  const GaugeCurve g(Expr(1.0), -x1, Expr(0.0), Expr(1.0));
  Sl2Coeffs reduced = gauge_transform(c, g);
  // b0 of the reduced triple vanishes identically along solutions; pin it.
  return Sl2Coeffs(Expr(0.0), reduced.b1(), reduced.b2());
}

/// Solves dz/dt = b1(t) z + b2(t) z^2 (the particular-solution reduction,
/// b0 == 0) by two quadratures:
///   z(t) = e^{B(t)} / (1/z0 - int_0^t b2(s) e^{B(s)} ds),  B(t) = int_0^t b1.
inline double solve_bernoulli_reduced(const Sl2Coeffs& c, double z0, double t,
                                      double tol = 1e-10) {
  if (!c.b0().is_constant(0.0))
    throw std::invalid_argument("solve_bernoulli_reduced expects b0 == 0");
  if (z0 == 0.0) return 0.0;

  const auto B = [&](double s) { return quad(c.b1(), 0.0, s, tol * 0.01); };
  const auto integrand = [&](double s) { return eval_at_t(c.b2(), s) * std::exp(B(s)); };
  const auto denom = [&](double s) { return 1.0 / z0 - quad(integrand, 0.0, s, tol); };

  // The denominator must not cross zero inside (0, t): that is a blow-up.
  const double d_end = denom(t);
  const int n_guard = 64;
  double prev_s = 0.0, prev_d = 1.0 / z0;
  for (int i = 1; i <= n_guard; ++i) {
    const double s = t * static_cast<double>(i) / n_guard;
    const double d = i == n_guard ? d_end : denom(s);
    if (prev_d == 0.0 || prev_d * d < 0.0)
      throw std::domain_error("solution blows up: denominator crosses zero in [" +
                              std::to_string(prev_s) + ", " + std::to_string(s) + "]");
    prev_s = s;
    prev_d = d;
  }
  return std::exp(B(t)) / d_end;
}

/// Two-quadrature solution of the inhomogeneous linear equation
/// dx/dt = b0(t) + b1(t) x:
///   x(t) = e^{int_0^t b1} (x0 + int_0^t b0(s) e^{-int_0^s b1} ds).
inline double linear_inhomogeneous_solve(const Expr& b0, const Expr& b1, double x0, double t,
                                         double tol = 1e-10) {
  const auto B = [&](double s) { return quad(b1, 0.0, s, tol * 0.01); };
  const auto integrand = [&](double s) { return eval_at_t(b0, s) * std::exp(-B(s)); };
  return std::exp(B(t)) * (x0 + quad(integrand, 0.0, t, tol));
}

// Constant-coefficient target dy'/dt = D(t) (c0 + c1 y' + c2 y'^2).
struct SolvableTarget {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 1.0;
  Expr D;
};

// Outcome of the scaling criterion: the constants K and L, the target system,
// the scaling y' = G(t) y, and the constancy diagnostics of K(t). The curve is
// integrable by this route exactly when the diagnostics accept.
struct IntegrabilityReport {
  double K = 0.0;
  double L = 1.0;
  SolvableTarget target;
  Expr scaling;  // G(t)
  ConstancyReport diagnostics;

  bool integrable() const { return diagnostics.is_constant; }
};

/// Evaluates K(t) = (b1 + (d/dt ln(b2/b0))/2) sqrt(L / (b0 b2)) on the grid
/// with L = sign(b0 b2), and accepts when K(t) is constant. On acceptance the
/// canonical split c0 = 1, c2 = L, c1 = K is returned together with
/// D(t) = sign(b0) sqrt(b0 b2 / L) and the scaling G(t) = sqrt(b2 / (L b0)).
inline IntegrabilityReport check_integrability(const Sl2Coeffs& c, std::span<const double> grid,
                                               double tol = 1e-6) {
  if (grid.size() < 2) throw std::invalid_argument("check_integrability: grid too small");

  const auto first = c.eval(grid.front());
  const double prod0 = first[0] * first[2];
  if (prod0 == 0.0 || !std::isfinite(prod0))
    throw std::domain_error("check_integrability: b0*b2 vanishes on the grid");
  const double L = prod0 > 0.0 ? 1.0 : -1.0;
  const double sign_b0 = first[0] > 0.0 ? 1.0 : -1.0;

  std::vector<double> ks;
  ks.reserve(grid.size());
  for (double t : grid) {
    const auto b = c.eval(t);
    const auto db = c.eval_derivs(t);
    const double prod = b[0] * b[2];
    if (prod * L <= 0.0)
      throw std::domain_error("check_integrability: b0*b2 vanishes or changes sign on the grid");
    const double k = (b[1] + 0.5 * (db[2] / b[2] - db[0] / b[0])) * std::sqrt(L / prod);
    ks.push_back(k);
  }

  IntegrabilityReport rep;
  rep.diagnostics = constancy(ks, tol);
  rep.K = rep.diagnostics.mean;
  rep.L = L;
  rep.target.c0 = 1.0;
  rep.target.c1 = rep.K;
  rep.target.c2 = L;
  rep.target.D = Expr(sign_b0) * sqrt(c.b0() * c.b2() / Expr(L));
  rep.scaling = sqrt(c.b2() / (Expr(L) * c.b0()));
  return rep;
}

struct CriterionRejected : std::runtime_error {
  explicit CriterionRejected(const ConstancyReport& rep)
      : std::runtime_error("integrability criterion rejected: K(t) deviates by " +
                           std::to_string(rep.max_deviation)),
        diagnostics(rep) {}
  ConstancyReport diagnostics;
};

/// Closed-form flow of dy/dtau = c0 + c1 y + c2 y^2 for time tau, realized as
/// the Mobius action of exp(tau A) with A = [[c1/2, c0], [-c2, -c1/2]]; the
/// discriminant cases (tangent / hyperbolic / rational) all live inside the
/// traceless exponential. Total on the projective line.
inline ExtReal solve_constant_riccati(double c0, double c1, double c2, double tau, ExtReal y0) {
  const Mat2 a{0.5 * c1, c0, -c2, -0.5 * c1};
  return mobius(exp_traceless(a.scaled(tau)), y0);
}

/// Criterion pipeline: scale by G(t), reparametrize by tau(t) = int D, apply
/// the constant flow, and undo the scaling. Throws CriterionRejected when the
/// criterion does not accept the coefficients.
inline Trajectory solve_via_criterion(const RiccatiProblem& p, std::span<const double> sample_times,
                                      double tol = 1e-6, double quad_tol = 1e-11) {
  const auto grid = linspace(p.t0, p.t1, 201);
  const IntegrabilityReport rep = check_integrability(p.coeffs, grid, tol);
  if (!rep.integrable()) throw CriterionRejected(rep.diagnostics);

  const double g0 = eval_at_t(rep.scaling, p.t0);
  const ExtReal y0 = p.x0.infinite ? ExtReal::inf() : ExtReal(g0 * p.x0.value);

  const auto d_at = [&](double s) { return eval_at_t(rep.target.D, s); };

  Trajectory traj;
  double tau = 0.0;
  double t_prev = p.t0;
  for (double ts : sample_times) {
    tau += quad(d_at, t_prev, ts, quad_tol);
    t_prev = ts;
    const ExtReal yp = solve_constant_riccati(rep.target.c0, rep.target.c1, rep.target.c2, tau, y0);
    const double g = eval_at_t(rep.scaling, ts);
    traj.times.push_back(ts);
    if (yp.infinite) {
      traj.states.push_back({std::numeric_limits<double>::infinity()});
      traj.events.push_back({ts, EventKind::blow_up});
    } else {
      traj.states.push_back({yp.value / g});
    }
  }
  return traj;
}

}  // namespace liesys

#endif  // LIESYS_RICCATI_HPP
