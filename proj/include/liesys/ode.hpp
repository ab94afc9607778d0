// Adaptive ODE integration with dense sampling.
//
// The workhorse is an embedded Dormand-Prince 5(4) pair with step rejection
// and cubic Hermite dense output on accepted steps. A fixed-step RK4 driver
// is kept alongside for cross-checks.

#ifndef LIESYS_ODE_HPP
#define LIESYS_ODE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace liesys {

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 0.0;  // 0: choose automatically
  double h_max = 0.0;   // 0: span length
  long max_steps = 1000000;
};

enum class EventKind { blow_up, chart_switch };

inline const char* event_kind_name(EventKind k) {
  return k == EventKind::blow_up ? "blow_up" : "chart_switch";
}

struct TrajectoryEvent {
  double time;
  EventKind kind;
};

// Dense numerical solution samples plus event annotations.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<TrajectoryEvent> events;

  std::size_t size() const { return times.size(); }
  std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }
};

struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& msg, double last_good)
      : std::runtime_error(msg + " (last good time " + std::to_string(last_good) + ")"),
        last_good_time(last_good) {}
  double last_good_time;
};

using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Any |state component| beyond this flags blow_up and halts the trajectory.
inline constexpr double kBlowUpThreshold = 1e8;

namespace detail {

inline void validate_config(const IntegratorConfig& cfg) {
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
    throw std::invalid_argument("integrator tolerances must be positive");
  if (cfg.h_max > 0.0 && cfg.h_init > cfg.h_max)
    throw std::invalid_argument("h_init must not exceed h_max");
  if (cfg.max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
}

}  // namespace detail

// One accepted Dormand-Prince 5(4) step at a time, with Hermite interpolation
// over the most recent step. The right-hand side can be swapped on restart,
// which is what the projective chart switching needs.
class AdaptiveStepper {
 public:
  AdaptiveStepper(Rhs rhs, double t0, std::vector<double> y0, double t_end,
                  const IntegratorConfig& cfg)
      : rhs_(std::move(rhs)), cfg_(cfg), t_end_(t_end) {
    detail::validate_config(cfg);
    if (!(t_end > t0)) throw std::invalid_argument("t_end must exceed t0");
    reset(t0, std::move(y0));
    h_max_ = cfg.h_max > 0.0 ? cfg.h_max : (t_end_ - t_);
  }

  void reset(double t, std::vector<double> y, Rhs new_rhs = nullptr) {
    if (new_rhs) rhs_ = std::move(new_rhs);
    t_ = t_prev_ = t;
    y_ = std::move(y);
    y_prev_ = y_;
    const std::size_t n = y_.size();
    f_.assign(n, 0.0);
    f_prev_.assign(n, 0.0);
    for (auto& k : k_) k.assign(n, 0.0);
    ytmp_.assign(n, 0.0);
    ynew_.assign(n, 0.0);
    rhs_(t_, y_, f_);
    for (double v : f_)
      if (!std::isfinite(v)) throw IntegrationError("rhs not finite at initial point", t_);
    h_ = cfg_.h_init > 0.0 ? cfg_.h_init : initial_step_guess();
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const std::vector<double>& state() const { return y_; }
  const std::vector<double>& state_prev() const { return y_prev_; }
  bool finished() const { return t_ >= t_end_; }
  long steps_taken() const { return accepted_; }

  // Advances to the next accepted step (possibly after rejections).
  // Returns false when t_end has already been reached.
  bool advance() {
    if (finished()) return false;
    const double eps = std::numeric_limits<double>::epsilon();
    for (;;) {
      if (++attempts_ > cfg_.max_steps)
        throw IntegrationError("step budget exhausted", t_);
      double h = std::min(h_, t_end_ - t_);
      if (h < 16.0 * eps * std::max(std::abs(t_), 1.0))
        throw IntegrationError("step size underflow near singularity", t_);

      const double err = try_step(h);
      if (err <= 1.0) {
        t_prev_ = t_;
        y_prev_ = y_;
        f_prev_ = f_;
        t_ += h;
        y_ = ynew_;
        f_ = k_[6];  // FSAL
        const double grow = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
        h_ = std::min(h_max_, h * std::clamp(grow, 0.2, 5.0));
        ++accepted_;
        return true;
      }
      const double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h_ = h * shrink;
    }
  }

  // Cubic Hermite interpolation on [t_prev, t]; endpoints reproduce the
  // stepper states bit-for-bit.
  void interpolate(double ts, std::vector<double>& out) const {
    if (ts == t_prev_) {
      out = y_prev_;
      return;
    }
    if (ts == t_) {
      out = y_;
      return;
    }
    const double h = t_ - t_prev_;
    const double th = (ts - t_prev_) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    const double h10 = th3 - 2.0 * th2 + th;
    const double h01 = -2.0 * th3 + 3.0 * th2;
    const double h11 = th3 - th2;
    out.resize(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i)
      out[i] = h00 * y_prev_[i] + h10 * h * f_prev_[i] + h01 * y_[i] + h11 * h * f_[i];
  }

  double interpolate1(double ts) const {
    std::vector<double> out;
    interpolate(ts, out);
    return out[0];
  }

 private:
  double initial_step_guess() const {
    double ynorm = 0.0, fnorm = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      ynorm = std::max(ynorm, std::abs(y_[i]));
      fnorm = std::max(fnorm, std::abs(f_[i]));
    }
    const double span = t_end_ - t_;
    double h = fnorm > 0.0 ? 0.01 * (ynorm + 1.0) / fnorm : span / 100.0;
    return std::clamp(h, span * 1e-10, span / 10.0);
  }

  // Returns the scaled error; on success ynew_/k_[6] hold the new state/slope.
  double try_step(double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const std::size_t n = y_.size();
    k_[0] = f_;

    auto stage = [&](double c, auto&& fill) {
      for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * fill(i);
      rhs_(t_ + c * h, ytmp_, k_[stage_idx_]);
    };

    stage_idx_ = 1;
    stage(c2, [&](std::size_t i) { return a21 * k_[0][i]; });
    stage_idx_ = 2;
    stage(c3, [&](std::size_t i) { return a31 * k_[0][i] + a32 * k_[1][i]; });
    stage_idx_ = 3;
    stage(c4, [&](std::size_t i) { return a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]; });
    stage_idx_ = 4;
    stage(c5, [&](std::size_t i) {
      return a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i];
    });
    stage_idx_ = 5;
    stage(1.0, [&](std::size_t i) {
      return a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] + a64 * k_[3][i] + a65 * k_[4][i];
    });

    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y_[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                              b6 * k_[5][i]);
    rhs_(t_ + h, ynew_, k_[6]);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                            e6 * k_[5][i] + e7 * k_[6][i]);
      const double sc = cfg_.atol + cfg_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      err += (e / sc) * (e / sc);
      if (!std::isfinite(ynew_[i])) return std::numeric_limits<double>::infinity();
    }
    err = std::sqrt(err / static_cast<double>(n));
    return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  }

  Rhs rhs_;
  IntegratorConfig cfg_;
  double t_end_;
  double t_ = 0.0, t_prev_ = 0.0;
  double h_ = 0.0, h_max_ = 0.0;
  long accepted_ = 0, attempts_ = 0;
  int stage_idx_ = 0;
  std::vector<double> y_, y_prev_, f_, f_prev_;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> ytmp_, ynew_;
};

/// Uniform sample grid, endpoints included.
inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least two samples");
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i)
    ts[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  ts.back() = b;
  return ts;
}

/// Integrates y' = rhs(t, y) over [t0, t1], sampling at `sample_times`
/// (ascending, within the span) via dense output. A component exceeding
/// kBlowUpThreshold flags a blow_up event and halts the trajectory.
inline Trajectory integrate_ode(const Rhs& rhs, std::vector<double> y0, double t0, double t1,
                                std::span<const double> sample_times,
                                const IntegratorConfig& cfg = {}) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 || sample_times[i] > t1)
      throw std::invalid_argument("sample time outside integration span");
    if (i > 0 && sample_times[i] <= sample_times[i - 1])
      throw std::invalid_argument("sample times must be strictly increasing");
  }

  Trajectory traj;
  AdaptiveStepper stepper(rhs, t0, std::move(y0), t1, cfg);

  std::size_t next = 0;
  if (next < sample_times.size() && sample_times[next] == t0) {
    traj.times.push_back(t0);
    traj.states.push_back(stepper.state());
    ++next;
  }

  std::vector<double> buf;
  while (!stepper.finished() && next < sample_times.size()) {
    stepper.advance();
    while (next < sample_times.size() && sample_times[next] <= stepper.t()) {
      stepper.interpolate(sample_times[next], buf);
      traj.times.push_back(sample_times[next]);
      traj.states.push_back(buf);
      ++next;
    }
    bool blown = false;
    for (double v : stepper.state())
      if (std::abs(v) > kBlowUpThreshold) blown = true;
    if (blown) {
      traj.events.push_back({stepper.t(), EventKind::blow_up});
      break;
    }
  }
  return traj;
}

/// Fixed-step classical RK4 over a uniform grid; one sample per node.
inline Trajectory integrate_rk4(const Rhs& rhs, std::vector<double> y0, double t0, double t1,
                                std::size_t n_steps) {
  if (n_steps == 0) throw std::invalid_argument("n_steps must be positive");
  const double h = (t1 - t0) / static_cast<double>(n_steps);
  const std::size_t n = y0.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(y0);
  std::vector<double> y = std::move(y0);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double t = t0 + h * static_cast<double>(s);
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    traj.times.push_back(t + h);
    traj.states.push_back(y);
  }
  return traj;
}

// Piecewise-cubic Hermite interpolant over (t, value, slope) samples.
// Used to turn dense trajectories into continuous integrands.
class CubicHermite {
 public:
  CubicHermite(std::vector<double> t, std::vector<double> y, std::vector<double> dy)
      : t_(std::move(t)), y_(std::move(y)), dy_(std::move(dy)) {
    if (t_.size() < 2 || t_.size() != y_.size() || t_.size() != dy_.size())
      throw std::invalid_argument("CubicHermite: inconsistent sample arrays");
  }

  /// Columns of a trajectory: `value_col` holds the value, `slope_col` its
  /// time derivative (e.g. x and v of a second-order system).
  static CubicHermite from_trajectory(const Trajectory& traj, std::size_t value_col,
                                      std::size_t slope_col) {
    std::vector<double> y, dy;
    y.reserve(traj.size());
    dy.reserve(traj.size());
    for (const auto& s : traj.states) {
      y.push_back(s[value_col]);
      dy.push_back(s[slope_col]);
    }
    return CubicHermite(traj.times, std::move(y), std::move(dy));
  }

  double operator()(double ts) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), ts);
    std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    hi = std::clamp<std::size_t>(hi, 1, t_.size() - 1);
    const std::size_t lo = hi - 1;
    const double h = t_[hi] - t_[lo];
    const double th = (ts - t_[lo]) / h;
    const double th2 = th * th, th3 = th2 * th;
    return (2 * th3 - 3 * th2 + 1) * y_[lo] + (th3 - 2 * th2 + th) * h * dy_[lo] +
           (-2 * th3 + 3 * th2) * y_[hi] + (th3 - th2) * h * dy_[hi];
  }

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }

 private:
  std::vector<double> t_, y_, dy_;
};

}  // namespace liesys

#endif  // LIESYS_ODE_HPP
