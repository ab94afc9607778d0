// Adaptive Simpson quadrature and the constancy detector.

#ifndef LIESYS_QUADRATURE_HPP
#define LIESYS_QUADRATURE_HPP

#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <string>

#include "liesys/expr.hpp"

namespace liesys {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm))
    throw QuadratureError("non-finite integrand sample near t=" + std::to_string(lm));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) throw QuadratureError("subdivision limit reached in quadrature");
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integral of a callable over [a, b] with absolute error
/// estimate below `tol`; signed result when a > b.
template <class F>
  requires std::invocable<F&, double>
double quad(F&& f, double a, double b, double tol = 1e-10) {
  if (a == b) return 0.0;
  if (a > b) return -quad(f, b, a, tol);
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
  const double fa = f(a), fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw QuadratureError("non-finite integrand sample at interval endpoints");
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

/// Quadrature of an expression in (at most) one free variable.
inline double quad(const Expr& f, double a, double b, double tol = 1e-10) {
  const std::uint32_t fv = free_variables(f);
  if (fv != 0 && (fv & (fv - 1)) != 0)
    throw std::invalid_argument("quad expects an expression in one variable: " + print(f));
  int var = 0;
  for (int i = 0; i < static_cast<int>(kVariableNames.size()); ++i)
    if (fv & (1u << i)) var = i;
  return quad([&](double s) { return eval(f, Env{}.set(var, s)); }, a, b, tol);
}

struct ConstancyReport {
  bool is_constant = false;
  double mean = 0.0;
  double max_deviation = 0.0;
};

/// Mean and worst absolute deviation of a sample set; constant when the
/// deviation stays below tol * (1 + |mean|).
inline ConstancyReport constancy(std::span<const double> samples, double tol = 1e-6) {
  if (samples.size() < 2) throw std::invalid_argument("constancy needs at least two samples");
  double sum = 0.0;
  for (double s : samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("constancy: non-finite sample");
    sum += s;
  }
  ConstancyReport rep;
  rep.mean = sum / static_cast<double>(samples.size());
  for (double s : samples) rep.max_deviation = std::max(rep.max_deviation, std::abs(s - rep.mean));
  rep.is_constant = rep.max_deviation <= tol * (1.0 + std::abs(rep.mean));
  return rep;
}

}  // namespace liesys

#endif  // LIESYS_QUADRATURE_HPP
