// Shared test utilities: deterministic random generators, independent
// residual oracles, and a small CSV reader. Everything here is test-only and
// independent of the code paths under test.

#ifndef LIESYS_TESTS_HELPERS_HPP
#define LIESYS_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <liesys/expr.hpp>
#include <liesys/ode.hpp>

namespace testutil {

using liesys::Expr;

// --- random expressions -----------------------------------------------------

// Random expression over the given variables, leaf-heavy so values stay tame.
inline Expr random_expr(std::mt19937& rng, const std::vector<std::string>& vars, int depth) {
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 99);
  const int r = pick(rng);
  if (depth <= 0 || r < 30) {
    if (r % 2 == 0 || vars.empty()) return Expr(coeff(rng));
    std::uniform_int_distribution<std::size_t> vi(0, vars.size() - 1);
    return Expr::variable(vars[vi(rng)]);
  }
  const auto a = [&] { return random_expr(rng, vars, depth - 1); };
  if (r < 45) return a() + a();
  if (r < 55) return a() - a();
  if (r < 70) return a() * a();
  if (r < 76) return a() / (a() + Expr(3.0));  // shifted denominator, fewer poles
  if (r < 82) {
    std::uniform_int_distribution<int> ex(2, 4);
    return pow(a(), static_cast<double>(ex(rng)));
  }
  if (r < 88) return liesys::sin(a());
  if (r < 94) return liesys::cos(a());
  if (r < 97) return liesys::exp(Expr(0.3) * liesys::sin(a()));
  return liesys::sqrt(a() * a() + Expr(1.0));
}

// Smooth omega^2(t) for oscillator/Ermakov property tests; bounded away from
// zero so solutions stay oscillatory (no inverted-potential growth).
inline Expr random_omega2(std::mt19937& rng) {
  std::uniform_real_distribution<double> amp(0.15, 0.4);
  std::uniform_real_distribution<double> freq(0.3, 1.0);
  std::uniform_real_distribution<double> base(1.0, 1.6);
  const Expr t = Expr::variable("t");
  return Expr(base(rng)) + Expr(amp(rng)) * liesys::sin(Expr(freq(rng)) * t) +
         Expr(0.5 * amp(rng)) * liesys::cos(Expr(freq(rng)) * t);
}

// Smooth coefficient function: polynomial of degree <= 3 or a scaled
// exponential, with small coefficients.
inline Expr random_smooth_coeff(std::mt19937& rng) {
  std::uniform_real_distribution<double> c(-0.5, 0.5);
  std::uniform_int_distribution<int> kind(0, 3);
  const Expr t = Expr::variable("t");
  if (kind(rng) == 0) return Expr(c(rng)) * liesys::exp(Expr(c(rng)) * t);
  Expr p = Expr(c(rng));
  p = p + Expr(c(rng)) * t;
  p = p + Expr(0.5 * c(rng)) * t * t;
  p = p + Expr(0.25 * c(rng)) * t * t * t;
  return p;
}

// --- residual oracles -------------------------------------------------------

// Max collocation residual of an (x, v) trajectory against xdot = v,
// vdot = -omega2(t) x, measured at segment midpoints of the cubic Hermite
// rebuilt from the samples. Independent of the integrator internals.
inline double oscillator_residual(const liesys::Trajectory& traj, const Expr& omega2) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double h = traj.times[i + 1] - traj.times[i];
    const double tm = traj.times[i] + 0.5 * h;
    const double x0 = traj.states[i][0], v0 = traj.states[i][1];
    const double x1 = traj.states[i + 1][0], v1 = traj.states[i + 1][1];
    // cubic Hermite midpoint value and slope for the x component
    const double xm = 0.5 * (x0 + x1) + 0.125 * h * (v0 - v1);
    const double dxm = 1.5 * (x1 - x0) / h - 0.25 * (v0 + v1);
    const double w2 = liesys::eval_at_t(omega2, tm);
    // v component: slope must be -w2*x; rebuild v midpoint from its own nodes
    const double a0 = -liesys::eval_at_t(omega2, traj.times[i]) * x0;
    const double a1 = -liesys::eval_at_t(omega2, traj.times[i + 1]) * x1;
    const double vm = 0.5 * (v0 + v1) + 0.125 * h * (a0 - a1);
    const double dvm = 1.5 * (v1 - v0) / h - 0.25 * (a0 + a1);
    worst = std::max(worst, std::abs(dxm - vm));
    worst = std::max(worst, std::abs(dvm + w2 * xm));
  }
  return worst;
}

// Second-difference residual of a sampled scalar x(t) against
// xdd = -omega2(t) x + k/x^3 on a uniform grid.
inline double pinney_second_difference_residual(const std::vector<double>& times,
                                                const std::vector<double>& xs, const Expr& omega2,
                                                double k) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    const double xdd = (xs[i + 1] - 2.0 * xs[i] + xs[i - 1]) / (h * h);
    const double rhs = -liesys::eval_at_t(omega2, times[i]) * xs[i] + k / std::pow(xs[i], 3);
    worst = std::max(worst, std::abs(xdd - rhs));
  }
  return worst;
}

inline double max_drift(const std::vector<double>& samples) {
  double lo = samples.front(), hi = samples.front();
  for (double s : samples) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi - lo;
}

// --- CSV --------------------------------------------------------------------

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;
};

inline Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      csv.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = cells;
      first = false;
    } else {
      std::vector<double> row;
      row.reserve(cells.size());
      for (const auto& c : cells) row.push_back(std::stod(c));
      csv.rows.push_back(std::move(row));
    }
  }
  return csv;
}

}  // namespace testutil

#endif  // LIESYS_TESTS_HELPERS_HPP
