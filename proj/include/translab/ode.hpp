#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace translab {

template <std::size_t N>
using State = std::array<double, N>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
  long max_steps = 5'000'000;
  double event_tolerance = 1e-12;
  double initial_step = 0.0;  // 0 selects automatically
  double fixed_step = 0.0;    // > 0 disables error control (order studies)

  void validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw ParameterError("tolerances must be positive");
    if (!(min_step > 0) || !(min_step < max_step)) throw ParameterError("need 0 < min_step < max_step");
    if (max_steps < 1) throw ParameterError("max_steps must be positive");
    if (!(event_tolerance > 0)) throw ParameterError("event_tolerance must be positive");
  }
};

enum class Direction { rising, falling, any };
enum class Termination { reached_end, terminal_event, step_underflow, domain_exit, max_steps };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached_end: return "reached_end";
    case Termination::terminal_event: return "terminal_event";
    case Termination::step_underflow: return "step_underflow";
    case Termination::domain_exit: return "domain_exit";
    case Termination::max_steps: return "max_steps";
  }
  return "?";
}

template <std::size_t N>
struct EventSpec {
  std::function<double(double, const State<N>&)> fn;
  Direction direction = Direction::any;
  bool terminal = false;
  std::string id;
};

template <std::size_t N>
struct EventHit {
  double t;
  State<N> state;
  std::size_t id;
};

namespace dp5 {
// Dormand-Prince 5(4) with Hairer's continuous extension
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

template <std::size_t N>
struct DenseSegment {
  double t0 = 0, h = 0;
  State<N> r1{}, r2{}, r3{}, r4{}, r5{};

  State<N> value(double t) const {
    double th = (t - t0) / h, th1 = 1.0 - th;
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    return out;
  }
  State<N> derivative(double t) const {
    double th = (t - t0) / h, th1 = 1.0 - th;
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      double A = r4[i] + th1 * r5[i];
      double dA = -r5[i];
      double B = r3[i] + th * A;
      double dB = A + th * dA;
      double C = r2[i] + th1 * B;
      double dC = -B + th1 * dB;
      out[i] = (C + th * dC) / h;
    }
    return out;
  }
};

template <std::size_t N>
class Trajectory {
 public:
  std::vector<double> t;
  std::vector<State<N>> y;
  std::vector<State<N>> dy;  // rhs at nodes
  std::vector<DenseSegment<N>> segments;  // segments[i] spans [t[i], t[i+1]]
  std::vector<EventHit<N>> events;
  Termination termination = Termination::reached_end;
  long rejected = 0;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  std::size_t size() const { return t.size(); }

  std::size_t segment_index(double tt) const {
    if (!(tt >= t.front() && tt <= t.back())) throw RangeError("time outside trajectory span");
    auto it = std::upper_bound(t.begin(), t.end(), tt);
    std::size_t i = std::size_t(it - t.begin());
    if (i == 0) return 0;
    return std::min(i - 1, segments.size() - 1);
  }

  State<N> at(double tt) const {
    auto it = std::lower_bound(t.begin(), t.end(), tt);
    if (it != t.end() && *it == tt) return y[std::size_t(it - t.begin())];
    if (segments.empty()) throw RangeError("trajectory has a single node");
    return segments[segment_index(tt)].value(tt);
  }
  State<N> derivative_at(double tt) const {
    auto it = std::lower_bound(t.begin(), t.end(), tt);
    if (it != t.end() && *it == tt) return dy[std::size_t(it - t.begin())];
    if (segments.empty()) throw RangeError("trajectory has a single node");
    return segments[segment_index(tt)].derivative(tt);
  }

  std::vector<State<N>> resample(const std::vector<double>& grid) const {
    std::vector<State<N>> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (i > 0 && grid[i] < grid[i - 1]) throw RangeError("resample grid must be monotone");
      out.push_back(at(grid[i]));
    }
    return out;
  }
};

namespace detail {
template <std::size_t N>
bool finite(const State<N>& s) {
  for (double v : s)
    if (!std::isfinite(v)) return false;
  return true;
}
template <std::size_t N>
double err_norm(const State<N>& e, const State<N>& y0, const State<N>& y1, const IntegratorConfig& c) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double sk = c.abs_tol + c.rel_tol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    s += (e[i] / sk) * (e[i] / sk);
  }
  return std::sqrt(s / N);
}
}  // namespace detail

// Adaptive Dormand-Prince 5(4) with PI step control, dense output and events.
template <std::size_t N, class Rhs>
Trajectory<N> integrate(Rhs&& rhs, double t0, const State<N>& y0, double t_end, const IntegratorConfig& cfg,
                        const std::vector<EventSpec<N>>& events = {}) {
  using namespace dp5;
  cfg.validate();
  if (!(t_end > t0)) throw ParameterError("t_end must exceed t0");
  Trajectory<N> tr;
  State<N> f0 = rhs(t0, y0);
  if (!detail::finite(y0) || !detail::finite(f0)) throw DomainError("rhs not finite at the initial state");
  tr.t.push_back(t0);
  tr.y.push_back(y0);
  tr.dy.push_back(f0);

  auto sk = [&](const State<N>& y, std::size_t i) { return cfg.abs_tol + cfg.rel_tol * std::fabs(y[i]); };
  double h;
  if (cfg.fixed_step > 0) {
    h = cfg.fixed_step;
  } else if (cfg.initial_step > 0) {
    h = cfg.initial_step;
  } else {
    double d0 = 0, d1n = 0;
    for (std::size_t i = 0; i < N; ++i) {
      d0 += std::pow(y0[i] / sk(y0, i), 2);
      d1n += std::pow(f0[i] / sk(y0, i), 2);
    }
    d0 = std::sqrt(d0 / N);
    d1n = std::sqrt(d1n / N);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min({h0, cfg.max_step, t_end - t0});
    State<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h0 * f0[i];
    State<N> f1 = rhs(t0 + h0, y1);
    if (detail::finite(f1)) {
      double d2 = 0;
      for (std::size_t i = 0; i < N; ++i) d2 += std::pow((f1[i] - f0[i]) / sk(y0, i), 2);
      d2 = std::sqrt(d2 / N) / h0;
      double m = std::max(d1n, d2);
      double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
      h = std::min({100 * h0, h1, cfg.max_step});
    } else {
      h = 0.1 * h0;
    }
  }

  std::vector<double> gprev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].fn(t0, y0);

  const double safe = 0.9, facc1 = 5.0, facc2 = 0.1, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  double t = t0;
  State<N> y = y0, k1 = f0;
  long steps = 0;
  while (t < t_end) {
    if (steps >= cfg.max_steps) {
      tr.termination = Termination::max_steps;
      break;
    }
    if (cfg.fixed_step <= 0) h = std::min(h, cfg.max_step);
    bool last = false;
    if (t + h >= t_end || t_end - (t + h) < 1e-10 * h) {
      h = t_end - t;
      last = true;
    }
    State<N> yt, k2, k3, k4, k5, k6, k7, y1;
    auto stage = [&](State<N>& out, double ct, auto&& comb) {
      for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * comb(i);
      out = rhs(t + ct * h, yt);
      return detail::finite(out);
    };
    bool ok = stage(k2, c2, [&](std::size_t i) { return a21 * k1[i]; }) &&
              stage(k3, c3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }) &&
              stage(k4, c4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }) &&
              stage(k5, c5, [&](std::size_t i) {
                return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
              }) &&
              stage(k6, 1.0, [&](std::size_t i) {
                return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
              });
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      k7 = rhs(t + h, y1);
      ok = detail::finite(y1) && detail::finite(k7);
    }
    if (!ok) {
      ++tr.rejected;
      h *= 0.25;
      if (h < cfg.min_step) {
        tr.termination = Termination::domain_exit;
        break;
      }
      continue;
    }
    double err = 0;
    if (cfg.fixed_step <= 0) {
      State<N> e;
      for (std::size_t i = 0; i < N; ++i)
        e[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err = detail::err_norm(e, y, y1, cfg);
    }
    double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (err <= 1.0) {
      ++steps;
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.h = h;
      for (std::size_t i = 0; i < N; ++i) {
        seg.r1[i] = y[i];
        double ydiff = y1[i] - y[i];
        seg.r2[i] = ydiff;
        double bspl = h * k1[i] - ydiff;
        seg.r3[i] = bspl;
        seg.r4[i] = ydiff - h * k7[i] - bspl;
        seg.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      double tn = last ? t_end : t + h;
      // events
      struct Hit {
        double t;
        std::size_t id;
      };
      std::vector<Hit> hits;
      std::vector<double> gnew(events.size());
      for (std::size_t e = 0; e < events.size(); ++e) {
        gnew[e] = events[e].fn(tn, y1);
        double ga = gprev[e], gb = gnew[e];
        if (!std::isfinite(ga) || !std::isfinite(gb) || ga == 0.0) continue;
        bool rise = ga < 0 && gb >= 0, fall = ga > 0 && gb <= 0;
        bool fire = (events[e].direction == Direction::rising && rise) ||
                    (events[e].direction == Direction::falling && fall) ||
                    (events[e].direction == Direction::any && (rise || fall));
        if (!fire) continue;
        double lo = t, hi = tn;
        double glo = ga;
        for (int it = 0; it < 200 && hi - lo > cfg.event_tolerance; ++it) {
          double m = 0.5 * (lo + hi);
          double gm = events[e].fn(m, seg.value(m));
          if (!std::isfinite(gm)) {
            hi = m;
            continue;
          }
          if ((glo < 0) == (gm < 0) && gm != 0.0) {
            lo = m;
            glo = gm;
          } else {
            hi = m;
          }
        }
        hits.push_back({0.5 * (lo + hi), e});
      }
      std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.t < b.t || (a.t == b.t && a.id < b.id);
      });
      bool stop = false;
      double tstop = tn;
      for (const auto& hh : hits) {
        tr.events.push_back({hh.t, seg.value(hh.t), hh.id});
        if (events[hh.id].terminal) {
          stop = true;
          tstop = hh.t;
          break;
        }
      }
      tr.segments.push_back(seg);
      if (stop) {
        State<N> ys = seg.value(tstop);
        if (tstop > t) {
          tr.t.push_back(tstop);
          tr.y.push_back(ys);
          State<N> fs = rhs(tstop, ys);
          tr.dy.push_back(detail::finite(fs) ? fs : seg.derivative(tstop));
        } else {
          tr.segments.pop_back();
        }
        tr.termination = Termination::terminal_event;
        break;
      }
      tr.t.push_back(tn);
      tr.y.push_back(y1);
      tr.dy.push_back(k7);
      gprev = gnew;
      t = tn;
      y = y1;
      k1 = k7;
      if (cfg.fixed_step > 0) continue;
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      h = h / fac;
      facold = std::max(err, 1e-4);
    } else {
      ++tr.rejected;
      h = h / std::min(facc1, fac11 / safe);
      if (h < cfg.min_step) {
        tr.termination = Termination::step_underflow;
        break;
      }
    }
  }
  return tr;
}

}  // namespace translab
