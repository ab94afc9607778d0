// Autonomizes the damped oscillator with m(t) = m0 e^{mu t} and compares the
// closed-form solution against direct numeric integration.

#include <cstdio>

#include <liesys/liesys.hpp>

int main() {
  using namespace liesys;
  const double m0 = 1.0, mu = 0.2, w0 = 1.0;

  const auto red = reduce_ck_autonomous(m0, mu, w0);
  std::printf("criterion: K=%.6f L=%.0f D=%.6f\n", red.report.K, red.report.L, red.D);
  std::printf("reduced matrix [[%.3f, %.3f], [%.3f, %.3f]]\n", red.matrix.a, red.matrix.b,
              red.matrix.c, red.matrix.d);

  const auto rhs = hamilton_rhs(OscillatorSpec::caldirola_kanai(m0, mu, w0));
  const auto ts = linspace(0.0, 10.0, 11);
  const auto traj = integrate_ode(rhs, {1.0, 0.0}, 0.0, 10.0, ts);

  std::printf("%8s %16s %16s %12s\n", "t", "x (closed form)", "x (numeric)", "diff");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto z = red.solve(1.0, 0.0, ts[i]);
    std::printf("%8.3f %16.9f %16.9f %12.3e\n", ts[i], z[0], traj.states[i][0],
                z[0] - traj.states[i][0]);
  }
  return 0;
}
