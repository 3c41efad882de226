#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "curvature.hpp"
#include "errors.hpp"
#include "implicit.hpp"
#include "ode.hpp"
#include "stiff.hpp"

namespace translab {

// Slope field of a rotational graph u(r) on the level z:
//   v' = (1+v^2)^{beta+1} G(y),  y = v / (r (1+v^2)^beta),  gamma(G(y), y) = z.
// y > 0 is solved on the plus chart, y < 0 on the reflected chart.
class SlopeField {
 public:
  explicit SlopeField(const CurvatureFunction& f, double z = 1.0, double tol = 1e-12)
      : f_(&f), branch_(f, ImplicitBranch::Sign::plus, tol), z_(z), beta_(f.beta()), tol_(tol) {}

  const CurvatureFunction& curvature() const { return *f_; }
  double beta() const { return beta_; }
  double level() const { return z_; }

  double arg(double r, double v) const { return v / (r * std::pow(1.0 + v * v, beta_)); }

  double G(double y) const {
    if (y > 0) return branch_.g_plus_unchecked(y, z_);
    if (y < 0) return solve_level(*f_, y, z_, LowerChart::reflected, tol_);
    throw DomainError("slope argument vanished");
  }

  double dG(double y, double x) const { return implicit_derivatives(*f_, x, y).d1; }

  double operator()(double r, double v) const {
    double w = 1.0 + v * v;
    return std::pow(w, beta_ + 1.0) * G(arg(r, v));
  }

  // (dF/dr, dF/dv)
  std::pair<double, double> jacobian(double r, double v) const {
    double w = 1.0 + v * v;
    double Q = std::pow(w, beta_);
    double y = v / (r * Q);
    double x = G(y);
    double gp = dG(y, x);
    double P = w * Q;
    double dydv = (1.0 - 2.0 * beta_ * v * v / w) / (r * Q);
    double dFdv = 2.0 * (beta_ + 1.0) * v * Q * x + P * gp * dydv;
    double dFdr = -P * gp * y / r;
    return {dFdr, dFdv};
  }

 private:
  const CurvatureFunction* f_;
  ImplicitBranch branch_;
  double z_, beta_, tol_;
};

enum class GraphBackend { automatic, explicit_rk, rosenbrock };

inline const char* to_string(GraphBackend b) {
  switch (b) {
    case GraphBackend::automatic: return "automatic";
    case GraphBackend::explicit_rk: return "dp5";
    case GraphBackend::rosenbrock: return "rosenbrock4";
  }
  return "?";
}

namespace detail {
// Cubic through four consecutive nodes around [r_i, r_{i+1}]: value and derivative at x.
inline std::pair<double, double> lagrange4(const std::vector<double>& r, const std::vector<double>& v, std::size_t i,
                                           double x) {
  std::size_t m = r.size();
  if (m < 4) {
    double sl = (v[i + 1] - v[i]) / (r[i + 1] - r[i]);
    return {v[i] + sl * (x - r[i]), sl};
  }
  std::size_t j0 = i == 0 ? 0 : std::min(i - 1, m - 4);
  double val = 0, der = 0;
  for (std::size_t a = j0; a < j0 + 4; ++a) {
    double L = 1, dL = 0;
    for (std::size_t b = j0; b < j0 + 4; ++b) {
      if (b == a) continue;
      double den = r[a] - r[b];
      dL = dL * (x - r[b]) / den + L / den;
      L *= (x - r[b]) / den;
    }
    val += v[a] * L;
    der += v[a] * dL;
  }
  return {val, der};
}

}  // namespace detail

// Sampled graph r -> (u, v) with arc length and defect per node.
struct GraphPath {
  std::vector<double> r, u, v, dv, s, residual;
  Termination termination = Termination::reached_end;
  GraphBackend backend = GraphBackend::explicit_rk;
  bool nodal = false;  // interpolate from node values only (stiff runs)
  bool event_hit = false;
  double event_r = std::numeric_limits<double>::quiet_NaN();
  long rejected = 0;

  std::size_t size() const { return r.size(); }
  double r_end() const { return r.back(); }
  double max_residual() const {
    double m = 0;
    for (double x : residual) m = std::max(m, x);
    return m;
  }

  std::size_t index(double x) const {
    if (r.size() < 2 || !(x >= r.front() && x <= r.back())) throw RangeError("radius outside the computed graph");
    auto it = std::upper_bound(r.begin(), r.end(), x);
    std::size_t i = std::size_t(it - r.begin());
    return std::min(i == 0 ? 0 : i - 1, r.size() - 2);
  }

  // cubic Hermite on (v, v'), or the nodal cubic
  double slope(double x) const {
    std::size_t i = index(x);
    if (nodal) return detail::lagrange4(r, v, i, x).first;
    double h = r[i + 1] - r[i], t = (x - r[i]) / h;
    double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
    double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    return h00 * v[i] + h10 * h * dv[i] + h01 * v[i + 1] + h11 * h * dv[i + 1];
  }
  double slope_derivative(double x) const {
    std::size_t i = index(x);
    if (nodal) return detail::lagrange4(r, v, i, x).second;
    double h = r[i + 1] - r[i], t = (x - r[i]) / h;
    double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
    double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    return (d00 * v[i] + d01 * v[i + 1]) / h + d10 * dv[i] + d11 * dv[i + 1];
  }
  // Hermite on (u, v), or u_i plus the integral of the nodal cubic
  double height(double x) const {
    std::size_t i = index(x);
    if (nodal) {
      const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834}, gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
      double h = x - r[i], acc = 0;
      for (int q = 0; q < 3; ++q) acc += gw[q] * detail::lagrange4(r, v, i, r[i] + 0.5 * h * (1 + gx[q])).first;
      return u[i] + 0.5 * h * acc;
    }
    double h = r[i + 1] - r[i], t = (x - r[i]) / h;
    double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
    double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    return h00 * u[i] + h10 * h * v[i] + h01 * u[i + 1] + h11 * h * v[i + 1];
  }
};

struct GraphStart {
  double r0 = 0, v0 = 0, u0 = 0, s0 = 0;
};

namespace detail {

// u and s by trapezoid with the endpoint-derivative correction
inline void accumulate_height(GraphPath& p, double u0, double s0) {
  std::size_t m = p.r.size();
  p.u.assign(m, u0);
  p.s.assign(m, s0);
  for (std::size_t i = 1; i < m; ++i) {
    double h = p.r[i] - p.r[i - 1];
    p.u[i] = p.u[i - 1] + 0.5 * h * (p.v[i - 1] + p.v[i]) + h * h / 12.0 * (p.dv[i - 1] - p.dv[i]);
    double a0 = std::sqrt(1 + p.v[i - 1] * p.v[i - 1]), a1 = std::sqrt(1 + p.v[i] * p.v[i]);
    double b0 = p.v[i - 1] * p.dv[i - 1] / a0, b1 = p.v[i] * p.dv[i] / a1;
    p.s[i] = p.s[i - 1] + 0.5 * h * (a0 + a1) + h * h / 12.0 * (b0 - b1);
  }
}

// u and s by Gauss quadrature on the nodal cubic (no node derivatives)
inline void accumulate_height_nodal(GraphPath& p, double u0, double s0) {
  std::size_t m = p.r.size();
  p.u.assign(m, u0);
  p.s.assign(m, s0);
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  for (std::size_t i = 1; i < m; ++i) {
    double a = p.r[i - 1], h = p.r[i] - a;
    double du = 0, ds = 0;
    for (int q = 0; q < 3; ++q) {
      double x = a + 0.5 * h * (1 + gx[q]);
      double vv = lagrange4(p.r, p.v, i - 1, x).first;
      du += gw[q] * vv;
      ds += gw[q] * std::sqrt(1 + vv * vv);
    }
    p.u[i] = p.u[i - 1] + 0.5 * h * du;
    p.s[i] = p.s[i - 1] + 0.5 * h * ds;
  }
}

inline double defect(const SlopeField& F, double r, double v, double dv) {
  double fv = F(r, v);
  double w = std::pow(1.0 + v * v, F.beta() + 1.0);
  return std::fabs(dv - fv) / w;
}

}  // namespace detail

// Terminal stop when stop(r, v) rises through zero.
using GraphStop = std::function<double(double, double)>;

inline GraphBackend resolve_backend(const CurvatureFunction& f, GraphBackend b) {
  if (b != GraphBackend::automatic) return b;
  if (f.alpha_value() > 1.0) return GraphBackend::rosenbrock;
  if (f.nondegenerate()) {
    Jet2 j = f.jet(0.0, 1.0);
    if (!(j.x > 0) || !std::isfinite(j.x) || !std::isfinite(j.y)) return GraphBackend::rosenbrock;
  }
  return GraphBackend::explicit_rk;
}

inline GraphPath integrate_graph_dp5(const SlopeField& F, const GraphStart& st, double r_end,
                                     const IntegratorConfig& cfg, const GraphStop& stop) {
  auto rhs = [&](double r, const State<1>& y) -> State<1> {
    try {
      return {F(r, y[0])};
    } catch (const Error&) {
      return {std::numeric_limits<double>::quiet_NaN()};
    }
  };
  std::vector<EventSpec<1>> ev;
  if (stop) ev.push_back({[&](double r, const State<1>& y) { return stop(r, y[0]); }, Direction::rising, true, "stop"});
  auto tr = integrate<1>(rhs, st.r0, State<1>{st.v0}, r_end, cfg, ev);
  GraphPath p;
  p.backend = GraphBackend::explicit_rk;
  p.termination = tr.termination;
  p.rejected = tr.rejected;
  if (!tr.events.empty()) {
    p.event_hit = true;
    p.event_r = tr.events.front().t;
  }
  std::size_t m = tr.size();
  p.r.resize(m);
  p.v.resize(m);
  p.dv.resize(m);
  p.residual.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    p.r[i] = tr.t[i];
    p.v[i] = tr.y[i][0];
    p.dv[i] = tr.dy[i][0];
  }
  for (std::size_t i = 1; i < m; ++i) {
    double rm = 0.5 * (p.r[i - 1] + p.r[i]);
    const auto& seg = tr.segments[i - 1];
    try {
      p.residual[i] = detail::defect(F, rm, seg.value(rm)[0], seg.derivative(rm)[0]);
    } catch (const Error&) {
      p.residual[i] = std::numeric_limits<double>::infinity();
    }
  }
  detail::accumulate_height(p, st.u0, st.s0);
  return p;
}

inline GraphPath integrate_graph_rosenbrock(const SlopeField& F, const GraphStart& st, double r_end,
                                            const IntegratorConfig& cfg, const GraphStop& stop) {
  cfg.validate();
  if (!(r_end > st.r0)) throw ParameterError("r_end must exceed the start radius");

  auto rhs = [&F](double r, double v) { return F(r, v); };
  auto jac = [&F](double r, double v) { return F.jacobian(r, v); };
  double max_dt = std::isfinite(cfg.max_step) ? cfg.max_step : 0.0;
  Rosenbrock4Controller ctl(cfg.abs_tol, cfg.rel_tol, max_dt);

  GraphPath p;
  p.backend = GraphBackend::rosenbrock;
  p.nodal = true;
  double r = st.r0;
  std::array<double, 1> x{st.v0};
  double f0 = F(r, x[0]);
  if (!std::isfinite(f0)) throw DomainError("slope field not finite at the start");
  p.r.push_back(r);
  p.v.push_back(x[0]);
  p.dv.push_back(f0);
  p.residual.push_back(0.0);
  double dt = cfg.initial_step > 0 ? cfg.initial_step : std::min(1e-6 * std::max(1.0, r), r_end - r);
  double gprev = stop ? stop(r, x[0]) : 0.0;
  long steps = 0;
  p.termination = Termination::reached_end;
  while (r < r_end) {
    if (steps >= cfg.max_steps) {
      p.termination = Termination::max_steps;
      break;
    }
    if (r + dt > r_end) dt = r_end - r;
    std::array<double, 1> xn{0.0};
    double rn = r, dtn = dt;
    bool success = false;
    bool ok = true;
    try {
      success = ctl.try_step(rhs, jac, rn, x[0], xn[0], dtn);
      if (success && !std::isfinite(xn[0])) ok = false;
    } catch (const std::exception&) {
      ok = false;
    }
    double fn = 0;
    if (ok && success) {
      try {
        fn = F(rn, xn[0]);
      } catch (const Error&) {
        ok = false;
      }
      if (!std::isfinite(fn)) ok = false;
    }
    if (!ok) {
      ++p.rejected;
      dt *= 0.25;
      if (dt < cfg.min_step) {
        p.termination = Termination::domain_exit;
        break;
      }
      continue;
    }
    if (!success) {
      ++p.rejected;
      dt = dtn;
      if (dt < cfg.min_step) {
        p.termination = Termination::step_underflow;
        break;
      }
      continue;
    }
    ++steps;
    // Hermite interval [r, rn] for events and the midpoint defect
    double r0 = r, v0 = x[0], d0 = p.dv.back();
    double h = rn - r0;
    auto herm = [&](double t, double* der) {
      double s = (t - r0) / h;
      double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
      double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
      if (der) {
        double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
        double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
        *der = (d00 * v0 + d01 * xn[0]) / h + d10 * d0 + d11 * fn;
      }
      return h00 * v0 + h10 * h * d0 + h01 * xn[0] + h11 * h * fn;
    };
    if (stop) {
      double gn = stop(rn, xn[0]);
      if (std::isfinite(gprev) && std::isfinite(gn) && gprev < 0 && gn >= 0) {
        double lo = r0, hi = rn, glo = gprev;
        for (int it = 0; it < 200 && hi - lo > cfg.event_tolerance; ++it) {
          double m = 0.5 * (lo + hi);
          double gm = stop(m, herm(m, nullptr));
          if (std::isfinite(gm) && gm < 0) {
            lo = m;
            glo = gm;
          } else {
            hi = m;
          }
        }
        (void)glo;
        double te = 0.5 * (lo + hi);
        p.event_hit = true;
        p.event_r = te;
        if (te > r0) {
          double dte;
          double ve = herm(te, &dte);
          p.r.push_back(te);
          p.v.push_back(ve);
          p.dv.push_back(dte);
          p.residual.push_back(0.0);
        }
        p.termination = Termination::terminal_event;
        break;
      }
      gprev = gn;
    }
    p.r.push_back(rn);
    p.v.push_back(xn[0]);
    p.dv.push_back(fn);
    p.residual.push_back(0.0);
    r = rn;
    x = xn;
    dt = dtn;
    if (r_end - r < 1e-12 * std::max(1.0, r_end)) break;
  }
  for (std::size_t i = 1; i < p.size(); ++i) {
    double rm = 0.5 * (p.r[i - 1] + p.r[i]);
    auto [vm, dm] = detail::lagrange4(p.r, p.v, i - 1, rm);
    try {
      p.residual[i] = detail::defect(F, rm, vm, dm);
    } catch (const Error&) {
      p.residual[i] = std::numeric_limits<double>::infinity();
    }
  }
  detail::accumulate_height_nodal(p, st.u0, st.s0);
  return p;
}

inline GraphPath integrate_graph(const SlopeField& F, const GraphStart& st, double r_end, const IntegratorConfig& cfg,
                                 GraphBackend backend = GraphBackend::automatic, const GraphStop& stop = {}) {
  if (resolve_backend(F.curvature(), backend) == GraphBackend::rosenbrock)
    return integrate_graph_rosenbrock(F, st, r_end, cfg, stop);
  return integrate_graph_dp5(F, st, r_end, cfg, stop);
}

}  // namespace translab
