// lie: command-line front end for SL(2,R) Lie systems.
//
// Subcommands:
//   presets    list built-in system presets
//   integrate  integrate a preset or explicit coefficients, emit CSV
//   check      run the scaling integrability criterion on the coefficients
//   superpose  rebuild a solution through a superposition rule, with residuals
//
// Exit codes: 0 success / integrable, 1 criterion rejection, 2 usage or
// configuration error, 3 numeric or degenerate failure.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <liesys/liesys.hpp>

namespace {

constexpr int kOk = 0;
constexpr int kRejected = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

using namespace liesys;

struct CommonOpts {
  double rtol = 1e-9;
  double atol = 1e-12;
  double t0 = 0.0;
  double t1 = 10.0;
  std::size_t samples = 201;
  std::string out;
  std::uint64_t seed = 0;  // reserved for randomized helpers

  IntegratorConfig integrator() const {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = atol;
    return cfg;
  }
  std::vector<double> grid() const {
    if (samples < 2) throw std::invalid_argument("need at least two samples");
    if (!(t1 > t0)) throw std::invalid_argument("t1 must exceed t0");
    return linspace(t0, t1, samples);
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--rtol", o.rtol, "relative tolerance");
  cmd->add_option("--atol", o.atol, "absolute tolerance");
  cmd->add_option("--t0", o.t0, "start time");
  cmd->add_option("--t1", o.t1, "end time");
  cmd->add_option("-n,--samples", o.samples, "number of samples");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--seed", o.seed, "seed for randomized test helpers");
}

class Params {
 public:
  explicit Params(const std::vector<std::string>& kvs) {
    for (const auto& kv : kvs) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--param expects name=value, got: " + kv);
      map_[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }

  double real(const std::string& name, std::optional<double> fallback = {}) const {
    const auto it = map_.find(name);
    if (it == map_.end()) {
      if (fallback) return *fallback;
      throw std::invalid_argument("missing required --param " + name + "=<real>");
    }
    return std::stod(it->second);
  }

  Expr expr(const std::string& name, const char* fallback = nullptr) const {
    const auto it = map_.find(name);
    if (it == map_.end()) {
      if (fallback) return parse_expr(fallback);
      throw std::invalid_argument("missing required --param " + name + "=<expr>");
    }
    return parse_expr(it->second);
  }

  bool has(const std::string& name) const { return map_.count(name) != 0; }
  void set(const std::string& name, double v) { map_[name] = format_e12(v); }

 private:
  std::map<std::string, std::string> map_;
};

ExtReal parse_ext(const std::string& s) {
  if (s == "inf" || s == "+inf") return ExtReal::inf();
  return ExtReal(std::stod(s));
}

std::array<double, 2> parse_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("expected \"x,v\" pair, got: " + s);
  return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::invalid_argument("cannot open output file: " + path);
      os = &file;
    }
  }
};

// --- presets -----------------------------------------------------------------

struct PresetInfo {
  const char* name;
  const char* params;
  const char* columns;
};

constexpr PresetInfo kPresets[] = {
    {"caldirola-kanai", "m0=1, mu, omega0", "t,s0(x),s1(p)"},
    {"td-frequency", "omega0, F=<expr in t>", "t,s0(x),s1(p)"},
    {"quartic-family", "u0, u1, omega0", "t,s0(x),s1(p)"},
    {"pinney", "k, omega2=<expr in t>", "t,s0(x),s1(v),s2..s5(aux osc),I1,I2,W"},
    {"ermakov", "k=1, omega2=<expr in t>", "t,s0(x),s1(vx),s2(y),s3(vy),psi"},
    {"ermakov-generalized", "f=<expr in u>, g=<expr in u>, omega2, ustar=1",
     "t,s0(x),s1(vx),s2(y),s3(vy),invariant"},
    {"pinney-triple", "k, omega2=<expr in t>", "t,s0..s5,I1,I2,W"},
};

int cmd_presets() {
  for (const auto& p : kPresets)
    std::cout << p.name << "\n  params:  " << p.params << "\n  columns: " << p.columns << "\n";
  return kOk;
}

// --- system selection --------------------------------------------------------

struct SystemOpts {
  std::string preset;
  std::vector<std::string> param_kvs;
  bool riccati = false;
  bool oscillator = false;
  std::string b0, b1, b2;  // riccati coefficients
  std::string m_expr, omega2_expr;  // explicit oscillator
};

void add_system(CLI::App* cmd, SystemOpts& s) {
  cmd->add_option("--preset", s.preset, "preset name (see `lie presets`)");
  cmd->add_option("--param", s.param_kvs, "preset parameter name=value (repeatable)");
  cmd->add_flag("--riccati", s.riccati, "explicit Riccati coefficients");
  cmd->add_option("--b0", s.b0, "Riccati b0(t)");
  cmd->add_option("--b1", s.b1, "Riccati b1(t)");
  cmd->add_option("--b2", s.b2, "Riccati b2(t)");
  cmd->add_flag("--oscillator", s.oscillator, "explicit oscillator m(t), omega2(t)");
  cmd->add_option("--m", s.m_expr, "oscillator mass m(t)");
  cmd->add_option("--omega2", s.omega2_expr, "oscillator squared frequency");
}

void require_one_system(const SystemOpts& s) {
  const int picked = (!s.preset.empty()) + s.riccati + s.oscillator;
  if (picked != 1)
    throw std::invalid_argument("select exactly one of --preset, --riccati, --oscillator");
}

// Coefficient triple of whatever system was selected (for check / riccati runs).
Sl2Coeffs system_coeffs(const SystemOpts& s) {
  if (s.riccati) {
    if (s.b0.empty() || s.b1.empty() || s.b2.empty())
      throw std::invalid_argument("--riccati needs --b0, --b1 and --b2");
    return Sl2Coeffs::parse(s.b0, s.b1, s.b2);
  }
  if (s.oscillator) {
    if (s.m_expr.empty() || s.omega2_expr.empty())
      throw std::invalid_argument("--oscillator needs --m and --omega2");
    return to_sl2_coeffs(OscillatorSpec::generic(parse_expr(s.m_expr), parse_expr(s.omega2_expr)));
  }
  const Params params(s.param_kvs);
  if (s.preset == "caldirola-kanai")
    return to_sl2_coeffs(OscillatorSpec::caldirola_kanai(
        params.real("m0", 1.0), params.real("mu"), params.real("omega0")));
  if (s.preset == "td-frequency")
    return to_sl2_coeffs(OscillatorSpec::td_frequency(params.expr("F"), params.real("omega0")));
  if (s.preset == "quartic-family") {
    const auto q = QuarticReduction::make(params.real("u0"), params.real("u1"),
                                          params.real("omega0"));
    return to_sl2_coeffs(q.spec());
  }
  if (s.preset == "pinney" || s.preset == "ermakov" || s.preset == "pinney-triple")
    return Sl2Coeffs(Expr(1.0), Expr(0.0), params.expr("omega2"));
  throw std::invalid_argument("unknown or criterion-incompatible preset: " + s.preset);
}

// --- integrate ---------------------------------------------------------------

struct IntegrateOpts {
  SystemOpts system;
  std::string x0 = "1";
  double v0 = 0.0;
  std::optional<std::string> seed_b;  // optional second oscillator seed "x,v"
  std::optional<double> y0, vy0, z0, vz0;
  std::string sweep;
};

struct RunResult {
  Trajectory traj;
  std::vector<std::pair<std::string, std::vector<double>>> extra;
};

RunResult run_integrate(const IntegrateOpts& o, const CommonOpts& common, const Params& params) {
  const auto ts = common.grid();
  const auto cfg = common.integrator();
  RunResult out;

  const auto& s = o.system;
  if (s.riccati) {
    out.traj = solve_numeric({system_coeffs(s), parse_ext(o.x0), common.t0, common.t1}, ts, cfg);
    return out;
  }

  const auto oscillator_run = [&](const OscillatorSpec& spec) {
    const auto rhs = hamilton_rhs(spec);
    out.traj = integrate_ode(rhs, {std::stod(o.x0), o.v0}, common.t0, common.t1, ts, cfg);
    if (o.seed_b) {
      const auto other = parse_pair(*o.seed_b);
      const auto traj_b =
          integrate_ode(rhs, {other[0], other[1]}, common.t0, common.t1, ts, cfg);
      if (traj_b.size() == out.traj.size())
        out.extra.emplace_back("wronskian", wronskian_invariants(out.traj, traj_b));
    }
  };

  if (s.oscillator) {
    oscillator_run(OscillatorSpec::generic(parse_expr(s.m_expr), parse_expr(s.omega2_expr)));
    return out;
  }

  if (s.preset == "caldirola-kanai") {
    oscillator_run(OscillatorSpec::caldirola_kanai(params.real("m0", 1.0), params.real("mu"),
                                                   params.real("omega0")));
    return out;
  }
  if (s.preset == "td-frequency") {
    oscillator_run(OscillatorSpec::td_frequency(params.expr("F"), params.real("omega0")));
    return out;
  }
  if (s.preset == "quartic-family") {
    const auto q = QuarticReduction::make(params.real("u0"), params.real("u1"),
                                          params.real("omega0"));
    oscillator_run(q.spec());
    return out;
  }
  if (s.preset == "pinney") {
    // co-integrate the two auxiliary oscillator solutions that feed the
    // superposition invariants
    const double k = params.real("k");
    const Expr omega2 = params.expr("omega2");
    out.traj = integrate_ode(pinney_triple_rhs(omega2, k),
                             {std::stod(o.x0), o.v0, 1.0, 0.0, 0.0, 1.0}, common.t0, common.t1,
                             ts, cfg);
    std::vector<double> i1s, i2s, ws;
    for (const auto& st : out.traj.states) {
      const auto inv = triple_invariants({st[0], st[1], st[2], st[3], st[4], st[5]}, k);
      i1s.push_back(inv.I1);
      i2s.push_back(inv.I2);
      ws.push_back(inv.W);
    }
    out.extra.emplace_back("I1", std::move(i1s));
    out.extra.emplace_back("I2", std::move(i2s));
    out.extra.emplace_back("W", std::move(ws));
    return out;
  }
  if (s.preset == "ermakov") {
    const double k = params.real("k", 1.0);
    const Expr omega2 = params.expr("omega2");
    out.traj = integrate_ode(ermakov_pair_rhs(omega2, k),
                             {std::stod(o.x0), o.v0, o.y0.value_or(1.0), o.vy0.value_or(0.0)},
                             common.t0, common.t1, ts, cfg);
    std::vector<double> psis;
    for (const auto& st : out.traj.states)
      psis.push_back(ermakov_invariant({st[0], st[1], st[2], st[3]}));
    out.extra.emplace_back("psi", std::move(psis));
    return out;
  }
  if (s.preset == "ermakov-generalized") {
    GeneralizedErmakovSpec spec{params.expr("f"), params.expr("g"), params.expr("omega2"),
                                params.real("ustar", 1.0)};
    out.traj = integrate_ode(generalized_ermakov_rhs(spec),
                             {std::stod(o.x0), o.v0, o.y0.value_or(1.0), o.vy0.value_or(0.0)},
                             common.t0, common.t1, ts, cfg);
    std::vector<double> vals;
    for (const auto& st : out.traj.states)
      vals.push_back(generalized_invariant(spec, {st[0], st[1], st[2], st[3]}));
    out.extra.emplace_back("invariant", std::move(vals));
    return out;
  }
  if (s.preset == "pinney-triple") {
    const double k = params.real("k");
    const Expr omega2 = params.expr("omega2");
    out.traj = integrate_ode(pinney_triple_rhs(omega2, k),
                             {std::stod(o.x0), o.v0, o.y0.value_or(1.0), o.vy0.value_or(0.0),
                              o.z0.value_or(0.0), o.vz0.value_or(1.0)},
                             common.t0, common.t1, ts, cfg);
    std::vector<double> i1s, i2s, ws;
    for (const auto& st : out.traj.states) {
      const auto inv = triple_invariants({st[0], st[1], st[2], st[3], st[4], st[5]}, k);
      i1s.push_back(inv.I1);
      i2s.push_back(inv.I2);
      ws.push_back(inv.W);
    }
    out.extra.emplace_back("I1", std::move(i1s));
    out.extra.emplace_back("I2", std::move(i2s));
    out.extra.emplace_back("W", std::move(ws));
    return out;
  }
  throw std::invalid_argument("unknown preset: " + s.preset);
}

struct SweepSpec {
  std::string name;
  double from = 0.0, to = 0.0;
  std::size_t count = 1;

  static SweepSpec parse(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--sweep expects name=a:b:n, got: " + text);
    SweepSpec sw;
    sw.name = text.substr(0, eq);
    const std::string rest = text.substr(eq + 1);
    const auto c1 = rest.find(':');
    const auto c2 = rest.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("--sweep expects name=a:b:n, got: " + text);
    sw.from = std::stod(rest.substr(0, c1));
    sw.to = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    const long n = std::stol(rest.substr(c2 + 1));
    if (n < 1) throw std::invalid_argument("--sweep needs at least one point");
    sw.count = static_cast<std::size_t>(n);
    return sw;
  }

  double value(std::size_t i) const {
    if (count == 1) return from;
    return from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
};

std::size_t sweep_workers(std::size_t jobs) {
  std::size_t cap = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("LIE_NUM_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) cap = static_cast<std::size_t>(v);
  }
  if (cap == 0) cap = 1;
  return std::min(cap, jobs);
}

int cmd_integrate(const IntegrateOpts& o, const CommonOpts& common) {
  require_one_system(o.system);
  Output out(common.out);

  if (o.sweep.empty()) {
    const Params params(o.system.param_kvs);
    const RunResult r = run_integrate(o, common, params);
    write_csv(*out.os, r.traj, r.extra);
    return kOk;
  }

  if (o.system.preset.empty())
    throw std::invalid_argument("--sweep requires a --preset system");
  const SweepSpec sw = SweepSpec::parse(o.sweep);

  // one run per worker, merged afterwards in parameter order
  std::vector<RunResult> results(sw.count);
  std::vector<std::string> errors(sw.count);
  std::atomic<std::size_t> cursor{0};
  const std::size_t workers = sweep_workers(sw.count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= sw.count) return;
        try {
          Params params(o.system.param_kvs);
          params.set(sw.name, sw.value(i));
          results[i] = run_integrate(o, common, params);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error("sweep run failed: " + err);

  // merged CSV with a leading parameter column
  *out.os << sw.name << ",t";
  for (std::size_t j = 0; j < results.front().traj.dim(); ++j) *out.os << ",s" << j;
  for (const auto& [name, col] : results.front().extra) *out.os << ',' << name;
  *out.os << '\n';
  for (std::size_t i = 0; i < sw.count; ++i) {
    const auto& r = results[i];
    for (std::size_t row = 0; row < r.traj.size(); ++row) {
      *out.os << format_e12(sw.value(i)) << ',' << format_e12(r.traj.times[row]);
      for (double v : r.traj.states[row]) *out.os << ',' << format_e12(v);
      for (const auto& [name, col] : r.extra) *out.os << ',' << format_e12(col[row]);
      *out.os << '\n';
    }
  }
  return kOk;
}

// --- check -------------------------------------------------------------------

int cmd_check(const SystemOpts& system, const CommonOpts& common, double tol) {
  require_one_system(system);
  const Sl2Coeffs coeffs = system_coeffs(system);
  const auto grid = common.grid();
  const auto rep = check_integrability(coeffs, grid, tol);

  std::cout << "K=" << format_e12(rep.K) << " L=" << (rep.L > 0 ? "1" : "-1");
  // D(t) printed as a value when constant, as an expression otherwise
  std::vector<double> ds;
  ds.reserve(grid.size());
  for (double t : grid) ds.push_back(eval_at_t(rep.target.D, t));
  const auto dconst = constancy(ds, 1e-9);
  if (dconst.is_constant)
    std::cout << " D=" << format_e12(dconst.mean);
  else
    std::cout << " D(t)=" << print(rep.target.D);
  std::cout << " integrable=" << (rep.integrable() ? "yes" : "no")
            << " max_deviation=" << format_e12(rep.diagnostics.max_deviation) << "\n";
  return rep.integrable() ? kOk : kRejected;
}

// --- superpose ---------------------------------------------------------------

struct SuperposeOpts {
  SystemOpts system;
  std::string rule;
  std::string seeds;      // cross-ratio: comma list of three x0
  std::string seed1, seed2;  // oscillator seeds "x,v"
  double k = 0.0, kprime = 0.0;
  double k1 = 1.0, k2 = 1.0;
  std::string x0 = "1";
  double v0 = 0.0;
};

int cmd_superpose(const SuperposeOpts& o, const CommonOpts& common) {
  Output out(common.out);
  const auto ts = common.grid();
  const auto cfg = common.integrator();

  if (o.rule == "cross-ratio") {
    require_one_system(o.system);
    const Sl2Coeffs coeffs = system_coeffs(o.system);
    std::vector<ExtReal> seeds;
    {
      std::istringstream in(o.seeds);
      std::string tok;
      while (std::getline(in, tok, ',')) seeds.push_back(parse_ext(tok));
    }
    if (seeds.size() != 3)
      throw std::invalid_argument("--rule cross-ratio needs --seeds \"x01,x02,x03\"");

    std::array<Trajectory, 3> sols;
    for (int i = 0; i < 3; ++i)
      sols[static_cast<std::size_t>(i)] =
          solve_numeric({coeffs, seeds[static_cast<std::size_t>(i)], common.t0, common.t1}, ts, cfg);
    const ExtReal x4_0 = superpose_cross_ratio(seeds[0], seeds[1], seeds[2], o.k);
    const Trajectory direct = solve_numeric({coeffs, x4_0, common.t0, common.t1}, ts, cfg);

    *out.os << "t,rebuilt,direct,residual\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const ExtReal rebuilt = superpose_cross_ratio(
          sols[0].states[i][0], sols[1].states[i][0], sols[2].states[i][0], o.k);
      const double d = direct.states[i][0];
      const double r = rebuilt.infinite ? std::numeric_limits<double>::infinity() : rebuilt.value;
      const double res = chordal_distance(rebuilt, std::isinf(d) ? ExtReal::inf() : ExtReal(d));
      *out.os << format_e12(ts[i]) << ',' << format_e12(r) << ',' << format_e12(d) << ','
              << format_e12(res) << '\n';
    }
    return kOk;
  }

  // the remaining rules act on an oscillator system
  const auto oscillator_spec = [&]() -> OscillatorSpec {
    if (o.system.oscillator)
      return OscillatorSpec::generic(parse_expr(o.system.m_expr),
                                     parse_expr(o.system.omega2_expr));
    const Params params(o.system.param_kvs);
    if (o.system.preset == "caldirola-kanai")
      return OscillatorSpec::caldirola_kanai(params.real("m0", 1.0), params.real("mu"),
                                             params.real("omega0"));
    if (o.system.preset == "td-frequency")
      return OscillatorSpec::td_frequency(params.expr("F"), params.real("omega0"));
    if (o.system.preset == "pinney" || o.system.preset.empty())
      return OscillatorSpec::generic(Expr(1.0), Params(o.system.param_kvs).expr("omega2"));
    throw std::invalid_argument("unsupported system for rule " + o.rule);
  };

  if (o.rule == "linear") {
    const auto spec = oscillator_spec();
    const auto rhs = hamilton_rhs(spec);
    const auto s1 = parse_pair(o.seed1.empty() ? "1,0" : o.seed1);
    const auto s2 = parse_pair(o.seed2.empty() ? "0,1" : o.seed2);
    const auto t1 = integrate_ode(rhs, {s1[0], s1[1]}, common.t0, common.t1, ts, cfg);
    const auto t2 = integrate_ode(rhs, {s2[0], s2[1]}, common.t0, common.t1, ts, cfg);
    const auto rebuilt = linear_superposition(t1, t2, o.k1, o.k2);
    const auto direct = integrate_ode(rhs, {o.k1 * s1[0] + o.k2 * s2[0], o.k1 * s1[1] + o.k2 * s2[1]},
                                      common.t0, common.t1, ts, cfg);
    *out.os << "t,rebuilt_x,rebuilt_v,direct_x,direct_v,residual\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double res = std::abs(rebuilt.states[i][0] - direct.states[i][0]);
      *out.os << format_e12(ts[i]) << ',' << format_e12(rebuilt.states[i][0]) << ','
              << format_e12(rebuilt.states[i][1]) << ',' << format_e12(direct.states[i][0]) << ','
              << format_e12(direct.states[i][1]) << ',' << format_e12(res) << '\n';
    }
    return kOk;
  }

  if (o.rule == "partial") {
    const auto spec = oscillator_spec();
    const auto rhs = hamilton_rhs(spec);
    const auto s1 = parse_pair(o.seed1.empty() ? "1,0" : o.seed1);
    const auto dense = linspace(common.t0, common.t1, std::max<std::size_t>(2001, common.samples));
    const auto x1 = integrate_ode(rhs, {s1[0], s1[1]}, common.t0, common.t1, dense, cfg);
    if (x1.size() != dense.size()) throw std::runtime_error("seed trajectory did not complete");
    const auto interp = CubicHermite::from_trajectory(x1, 0, 1);

    // direct solution with the matching initial data x2(0), v2(0)
    const double x20 = o.kprime * s1[0] + 0.0;
    const double v20 = o.kprime * s1[1] + o.k / s1[0];  // d/dt at base point t0
    const auto direct = integrate_ode(rhs, {x20, v20}, common.t0, common.t1, ts, cfg);

    *out.os << "t,rebuilt,direct,residual\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double rebuilt =
          partial_superposition_fn(interp, o.k, o.kprime, ts[i], common.t0, 1e-11);
      const double res = std::abs(rebuilt - direct.states[i][0]);
      *out.os << format_e12(ts[i]) << ',' << format_e12(rebuilt) << ','
              << format_e12(direct.states[i][0]) << ',' << format_e12(res) << '\n';
    }
    return kOk;
  }

  if (o.rule == "pinney") {
    const Params params(o.system.param_kvs);
    const double k = params.real("k", 1.0);
    const Expr omega2 = params.expr("omega2");
    const auto s1 = parse_pair(o.seed1.empty() ? "1,0" : o.seed1);
    const auto s2 = parse_pair(o.seed2.empty() ? "0,1" : o.seed2);
    const TripleState init{std::stod(o.x0), o.v0, s1[0], s1[1], s2[0], s2[1]};
    const auto inv = triple_invariants(init, k);
    if (inv.W == 0.0) throw std::domain_error("pinney rule: seeds have zero Wronskian");
    const int branch = select_pinney_branch(init, inv, k);

    const auto traj = integrate_ode(pinney_triple_rhs(omega2, k),
                                    {init.x, init.vx, init.y, init.vy, init.z, init.vz},
                                    common.t0, common.t1, ts, cfg);
    if (traj.size() != ts.size()) throw std::runtime_error("pinney trajectory did not complete");

    *out.os << "t,rebuilt,direct,residual\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& s = traj.states[i];
      const double rebuilt = pinney_superposition(s[2], s[4], inv.I1, inv.I2, inv.W, k, branch);
      const double res = std::abs(rebuilt - s[0]);
      *out.os << format_e12(ts[i]) << ',' << format_e12(rebuilt) << ',' << format_e12(s[0]) << ','
              << format_e12(res) << '\n';
    }
    return kOk;
  }

  throw std::invalid_argument("unknown rule: " + o.rule +
                              " (expected cross-ratio, linear, partial or pinney)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SL(2,R) Lie systems: Riccati, oscillators, Ermakov/Pinney"};
  app.require_subcommand(1);

  auto* presets = app.add_subcommand("presets", "list built-in presets");

  CommonOpts common;
  IntegrateOpts iopt;
  auto* integrate = app.add_subcommand("integrate", "integrate a system, emit trajectory CSV");
  add_common(integrate, common);
  add_system(integrate, iopt.system);
  integrate->add_option("--x0", iopt.x0, "initial x (riccati accepts 'inf')");
  integrate->add_option("--v0,--p0", iopt.v0, "initial v/p");
  integrate->add_option("--y0", iopt.y0, "initial y (ermakov-type presets)");
  integrate->add_option("--vy0", iopt.vy0, "initial vy");
  integrate->add_option("--z0", iopt.z0, "initial z (triple preset)");
  integrate->add_option("--vz0", iopt.vz0, "initial vz");
  std::string seed_b;
  integrate->add_option("--seed2", seed_b, "second oscillator seed \"x,v\" (adds wronskian column)");
  integrate->add_option("--sweep", iopt.sweep, "parameter sweep name=a:b:n");

  SystemOpts chk_system;
  CommonOpts chk_common;
  double chk_tol = 1e-6;
  auto* check = app.add_subcommand("check", "run the integrability criterion");
  add_common(check, chk_common);
  add_system(check, chk_system);
  check->add_option("--tol", chk_tol, "constancy tolerance for K(t)");

  SuperposeOpts sopt;
  CommonOpts sup_common;
  auto* superpose = app.add_subcommand("superpose", "rebuild a solution via a superposition rule");
  add_common(superpose, sup_common);
  add_system(superpose, sopt.system);
  superpose->add_option("--rule", sopt.rule, "cross-ratio | linear | partial | pinney")
      ->required();
  superpose->add_option("--seeds", sopt.seeds, "cross-ratio: three initial values \"a,b,c\"");
  superpose->add_option("--seed1", sopt.seed1, "first oscillator seed \"x,v\"");
  superpose->add_option("--seed2", sopt.seed2, "second oscillator seed \"x,v\"");
  superpose->add_option("--k", sopt.k, "superposition constant k");
  superpose->add_option("--kprime", sopt.kprime, "superposition constant k'");
  superpose->add_option("--k1", sopt.k1, "linear rule coefficient k1");
  superpose->add_option("--k2", sopt.k2, "linear rule coefficient k2");
  superpose->add_option("--x0", sopt.x0, "pinney rule: initial x");
  superpose->add_option("--v0", sopt.v0, "pinney rule: initial v");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kConfigError;
  }

  try {
    if (app.got_subcommand(presets)) return cmd_presets();
    if (app.got_subcommand(integrate)) {
      if (!seed_b.empty()) iopt.seed_b = seed_b;
      return cmd_integrate(iopt, common);
    }
    if (app.got_subcommand(check)) return cmd_check(chk_system, chk_common, chk_tol);
    if (app.got_subcommand(superpose)) return cmd_superpose(sopt, sup_common);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return kConfigError;
}
