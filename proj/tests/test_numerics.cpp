#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <liesys/expr.hpp>
#include <liesys/ode.hpp>
#include <liesys/quadrature.hpp>

#include "helpers.hpp"

using namespace liesys;

namespace {

const Rhs kExpGrowth = [](double, const std::vector<double>& y, std::vector<double>& dy) {
  dy[0] = y[0];
};
const Rhs kHarmonic = [](double, const std::vector<double>& y, std::vector<double>& dy) {
  dy[0] = y[1];
  dy[1] = -y[0];
};
const Rhs kRiccatiTan = [](double, const std::vector<double>& y, std::vector<double>& dy) {
  dy[0] = 1.0 + y[0] * y[0];
};

}  // namespace

TEST_CASE("integrate_ode closed-form checks") {
  SECTION("ydot = y reaches e") {
    const auto traj = integrate_ode(kExpGrowth, {1.0}, 0.0, 1.0, linspace(0.0, 1.0, 11));
    REQUIRE(traj.size() == 11);
    CHECK(traj.states.back()[0] == Catch::Approx(std::exp(1.0)).margin(1e-8));
  }
  SECTION("xdd = -x from (1,0) lands at (-1,0) after pi") {
    const double pi = std::acos(-1.0);
    const auto traj = integrate_ode(kHarmonic, {1.0, 0.0}, 0.0, pi, linspace(0.0, pi, 5));
    CHECK(traj.states.back()[0] == Catch::Approx(-1.0).margin(1e-8));
    CHECK(traj.states.back()[1] == Catch::Approx(0.0).margin(1e-8));
  }
  SECTION("xdot = 1+x^2 reaches tan(1)") {
    const auto traj = integrate_ode(kRiccatiTan, {0.0}, 0.0, 1.0, linspace(0.0, 1.0, 3));
    CHECK(traj.states.back()[0] == Catch::Approx(std::tan(1.0)).margin(1e-8));
  }
}

TEST_CASE("dense output reproduces stepper states at step endpoints exactly") {
  IntegratorConfig cfg;
  AdaptiveStepper stepper(kHarmonic, 0.0, {1.0, 0.0}, 2.0, cfg);
  std::vector<double> buf;
  for (int i = 0; i < 5 && !stepper.finished(); ++i) {
    stepper.advance();
    // endpoint samples are bitwise copies of the stepper states
    stepper.interpolate(stepper.t_prev(), buf);
    CHECK(buf == stepper.state_prev());
    stepper.interpolate(stepper.t(), buf);
    CHECK(buf == stepper.state());
  }
}

TEST_CASE("halving rtol never increases max error") {
  const auto samples = linspace(0.0, 1.0, 21);
  double prev_err = std::numeric_limits<double>::infinity();
  for (double rtol = 1e-5; rtol >= 1e-10; rtol *= 0.5) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = 1e-14;
    const auto traj = integrate_ode(kExpGrowth, {1.0}, 0.0, 1.0, samples, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
      err = std::max(err, std::abs(traj.states[i][0] - std::exp(traj.times[i])));
    CHECK(err <= prev_err + 1e-14);
    prev_err = err;
  }
}

TEST_CASE("blow-up detection halts the trajectory") {
  const Rhs quad_growth = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[0] * y[0];
  };
  const auto traj = integrate_ode(quad_growth, {1.0}, 0.0, 2.0, linspace(0.0, 2.0, 201));
  REQUIRE_FALSE(traj.events.empty());
  CHECK(traj.events.back().kind == EventKind::blow_up);
  CHECK(traj.events.back().time < 1.01);
  CHECK(traj.size() < 201);
}

TEST_CASE("step budget and bad samples are reported") {
  IntegratorConfig cfg;
  cfg.max_steps = 10;
  CHECK_THROWS_AS(integrate_ode(kHarmonic, {1.0, 0.0}, 0.0, 100.0, linspace(0.0, 100.0, 11), cfg),
                  IntegrationError);
  CHECK_THROWS_AS(integrate_ode(kHarmonic, {1.0, 0.0}, 0.0, 1.0, std::vector<double>{0.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("rk4 cross-checks the adaptive stepper") {
  const auto fine = integrate_rk4(kHarmonic, {1.0, 0.0}, 0.0, 3.0, 3000);
  const auto adap = integrate_ode(kHarmonic, {1.0, 0.0}, 0.0, 3.0, std::vector<double>{3.0});
  CHECK(fine.states.back()[0] == Catch::Approx(adap.states.back()[0]).margin(1e-8));
}

TEST_CASE("quad basics") {
  CHECK(quad(parse_expr("t^2"), 0.0, 1.0, 1e-10) == Catch::Approx(1.0 / 3.0).margin(1e-10));
  CHECK(quad(parse_expr("sin(t)"), 0.0, std::acos(-1.0), 1e-10) ==
        Catch::Approx(2.0).margin(1e-10));
  CHECK(quad(parse_expr("(1+t)^-2"), 0.0, 1.0, 1e-10) == Catch::Approx(0.5).margin(1e-10));

  SECTION("signed when a > b") {
    CHECK(quad(parse_expr("t^2"), 1.0, 0.0, 1e-10) == Catch::Approx(-1.0 / 3.0).margin(1e-10));
  }
  SECTION("empty interval") { CHECK(quad(parse_expr("t"), 2.0, 2.0) == 0.0); }
  SECTION("expression must have a single free variable") {
    CHECK_THROWS_AS(quad(parse_expr("x+t"), 0.0, 1.0), std::invalid_argument);
    CHECK(quad(parse_expr("x^2"), 0.0, 1.0, 1e-10) == Catch::Approx(1.0 / 3.0).margin(1e-10));
  }
  SECTION("non-finite integrand is an error") {
    CHECK_THROWS_AS(quad([](double s) { return 1.0 / s; }, -1.0, 1.0, 1e-10), QuadratureError);
  }
}

TEST_CASE("property: quad is additive") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> pick(-2.0, 2.0);
  const double tol = 1e-10;
  for (int i = 0; i < 25; ++i) {
    Expr f;
    try {
      f = testutil::random_expr(rng, {"t"}, 4);
      (void)eval_at_t(f, 0.0);
    } catch (const EvalError&) {
      continue;
    }
    double a = pick(rng), b = pick(rng), c = pick(rng);
    try {
      const double whole = quad(f, a, b, tol);
      const double split = quad(f, a, c, tol) + quad(f, c, b, tol);
      CHECK(std::abs(whole - split) <= 3.0 * tol);
    } catch (const EvalError&) {
    } catch (const QuadratureError&) {
    }
  }
}

TEST_CASE("constancy detector") {
  SECTION("constant samples") {
    const std::vector<double> s{1.0, 1.0, 1.0};
    const auto rep = constancy(s, 1e-9);
    CHECK(rep.is_constant);
    CHECK(rep.mean == 1.0);
    CHECK(rep.max_deviation == 0.0);
  }
  SECTION("drifting samples rejected") {
    const std::vector<double> s{1.0, 1.001};
    CHECK_FALSE(constancy(s, 1e-6).is_constant);
  }
  SECTION("non-finite sample is an error") {
    const std::vector<double> s{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(constancy(s, 1e-6), std::invalid_argument);
  }
  SECTION("needs two samples") {
    const std::vector<double> s{1.0};
    CHECK_THROWS_AS(constancy(s, 1e-6), std::invalid_argument);
  }
  SECTION("K(t) of the damped-oscillator coefficients is constant at 0.2") {
    // b0 = e^{-mu t}/m0, b1 = 0, b2 = m0 w0^2 e^{mu t} with m0 = w0 = 1,
    // mu = 0.2; K(t) = (b1 + (d/dt ln(b2/b0))/2) / sqrt(b0 b2) sampled directly
    const double mu = 0.2;
    std::vector<double> ks;
    for (double t : linspace(0.0, 10.0, 200)) {
      const double b0 = std::exp(-mu * t), b2 = std::exp(mu * t);
      const double db0 = -mu * b0, db2 = mu * b2;
      ks.push_back(0.5 * (db2 / b2 - db0 / b0) / std::sqrt(b0 * b2));
    }
    const auto rep = constancy(ks, 1e-6);
    CHECK(rep.is_constant);
    CHECK(rep.mean == Catch::Approx(0.2).margin(1e-12));
  }
}
