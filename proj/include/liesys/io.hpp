// CSV emission for trajectories and matrix curves. All floating output uses
// %.12e so runs are byte-reproducible.

#ifndef LIESYS_IO_HPP
#define LIESYS_IO_HPP

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "liesys/ode.hpp"
#include "liesys/sl2.hpp"

namespace liesys {

inline std::string format_e12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

/// Header `t,s0,s1,...` plus one row per sample; extra named columns follow
/// the state columns; events appended as `# event,<t>,<kind>` comment lines.
inline void write_csv(std::ostream& os, const Trajectory& traj,
                      const std::vector<std::pair<std::string, std::vector<double>>>& extra = {}) {
  os << 't';
  for (std::size_t j = 0; j < traj.dim(); ++j) os << ",s" << j;
  for (const auto& [name, col] : extra) os << ',' << name;
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_e12(traj.times[i]);
    for (double v : traj.states[i]) os << ',' << format_e12(v);
    for (const auto& [name, col] : extra) os << ',' << format_e12(col[i]);
    os << '\n';
  }
  for (const auto& ev : traj.events)
    os << "# event," << format_e12(ev.time) << ',' << event_kind_name(ev.kind) << '\n';
}

/// Header `t,a,b,c,d` plus one row per sample.
inline void write_csv(std::ostream& os, const Mat2Curve& curve) {
  os << "t,a,b,c,d\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const Mat2& m = curve.values[i];
    os << format_e12(curve.times[i]) << ',' << format_e12(m.a) << ',' << format_e12(m.b) << ','
       << format_e12(m.c) << ',' << format_e12(m.d) << '\n';
  }
}

}  // namespace liesys

#endif  // LIESYS_IO_HPP
