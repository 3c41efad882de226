#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bowl.hpp"
#include "curvature.hpp"
#include "errors.hpp"
#include "fit.hpp"
#include "graph.hpp"
#include "implicit.hpp"
#include "ode.hpp"

namespace translab {

enum class OriginCase { continuous_origin, derivative_origin };
inline const char* to_string(OriginCase c) {
  return c == OriginCase::continuous_origin ? "continuous_origin" : "derivative_origin";
}

// Decides the lower-end case from the slice data at the origin.
inline OriginCase classify_origin(const CurvatureFunction& f) {
  if (!f.is_signed()) throw UnsupportedError("curvature function is not signed");
  if (f.signed_meta()->origin_value == OriginValue::continuous_zero) return OriginCase::continuous_origin;
  ImplicitBranch br(f, ImplicitBranch::Sign::minus);
  double b;
  try {
    b = br.dg_dy(0.0, -1.0, 1);
  } catch (const Error& e) {
    throw ClassificationError(f.key() + ": g- data at the origin is not decidable (" + e.what() + ")");
  }
  if (!(b < 0)) throw ClassificationError(f.key() + ": d/dy g-(0,-1) is not negative");
  return OriginCase::derivative_origin;
}

// dy g-(0,-1), the lower-end exponent b
inline double lower_end_exponent(const CurvatureFunction& f) {
  return ImplicitBranch(f, ImplicitBranch::Sign::minus).dg_dy(0.0, -1.0, 1);
}

// Samples along one branch in its travel frame: tangent (cos psi, sin psi), psi' = kappa.
struct Branch {
  std::vector<double> s, r, u, psi, kappa, residual;
  std::vector<int> segment;  // 0 neck chart, 1 regularized arc length, 2 graph

  std::size_t size() const { return s.size(); }
  double max_residual() const {
    double m = 0;
    for (double x : residual) m = std::max(m, x);
    return m;
  }
  void push(double s_, double r_, double u_, double p_, double k_, double res, int seg) {
    s.push_back(s_);
    r.push_back(r_);
    u.push_back(u_);
    psi.push_back(p_);
    kappa.push_back(k_);
    residual.push_back(res);
    segment.push_back(seg);
  }
  // u over r; needs r strictly increasing, which holds for psi in (-pi/2, pi/2)
  double u_at(double x) const {
    if (r.size() < 2 || !(x >= r.front() && x <= r.back())) throw RangeError("radius outside the branch");
    auto it = std::upper_bound(r.begin(), r.end(), x);
    std::size_t i = std::min(std::size_t(it - r.begin()) - 1, r.size() - 2);
    double h = r[i + 1] - r[i];
    if (!(h > 0)) return u[i];
    double t = (x - r[i]) / h;
    double m0 = std::tan(psi[i]), m1 = std::tan(psi[i + 1]);
    if (!std::isfinite(m0) || !std::isfinite(m1)) return u[i] + t * (u[i + 1] - u[i]);
    double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
    double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    return h00 * u[i] + h10 * h * m0 + h01 * u[i + 1] + h11 * h * m1;
  }
};

struct NeckSolution {
  double R = 0, epsilon = 0, kappa_at_neck = 0, handoff = 0;
  // upward frame, w = |u|: r(w), q = dr/dw, arc length
  Trajectory<3> upper, lower;
  double max_residual = 0;
};

struct EndBehavior {
  std::string kind;  // bowl_type, power_law, logarithmic
  double b = kNaN;            // closed-form exponent of the slope
  double b_fit = kNaN;        // fitted slope exponent
  double exponent = kNaN;     // b+1, the exponent of u
  double exponent_fit = kNaN;
  double a_match = kNaN;      // matched at the handoff radius
  double a_R = kNaN;          // tail least squares with b fixed
  double log_coefficient = kNaN;  // u ~ c - a ln r
  double fit_rms = kNaN;
};

struct CatenoidConfig {
  double R = 1.0;
  double r_max = 50.0;
  double handoff = std::numbers::pi / 8;
  IntegratorConfig integrator = [] {
    IntegratorConfig c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-14;
    return c;
  }();
  double neck_cap = 50.0;  // cap on |u| for the neck chart, in units of R
};

struct CatenoidResult {
  std::string curvature_key;
  double R = 0, alpha = 1, beta = 0, handoff = 0;
  OriginCase origin_case = OriginCase::continuous_origin;
  NeckSolution neck;
  Branch upper, lower;
  std::optional<double> s0, s1;
  int s0_events = 0, s1_events = 0;
  std::optional<double> C_plus, C_minus, C_plus_alt, C_minus_alt;
  EndBehavior end;
  double upper_growth = kNaN;
  bool upper_monotone_after_min = false;
  double upper_min_psi = kNaN;
  double embed_r_star = kNaN, embed_min_gap = kNaN;
  bool embed_widening = false;
  std::string embed_status;
  double arc_length_defect = 0;
};

namespace detail {

// Neck chart in the upward frame: gamma(X, 1/(r(1+q^2)^beta)) = sgn q, r'' = -(1+q^2)^{1+beta} X.
struct NeckField {
  const CurvatureFunction* f;
  double sgn, beta;
  double X(double r, double q) const {
    double Y = 1.0 / (r * std::pow(1 + q * q, beta));
    return solve_level(*f, Y, sgn * q, LowerChart::far);
  }
  double rdd(double r, double q) const { return -std::pow(1 + q * q, 1 + beta) * X(r, q); }
  // relative curvature defect in the upward frame from r, q, r''
  double residual(double r, double q, double rdd_) const {
    double w = std::sqrt(1 + q * q);
    double kap = -rdd_ / (w * w * w);
    double keq = solve_level(*f, 1.0 / (r * w), sgn * q / w, LowerChart::far);
    return std::fabs(kap - keq) / (1 + std::fabs(keq));
  }
};

inline Trajectory<3> integrate_neck(const NeckField& F, double R, double handoff, double cap,
                                    const IntegratorConfig& cfg) {
  auto rhs = [&F](double, const State<3>& y) -> State<3> {
    try {
      return {y[1], F.rdd(y[0], y[1]), std::sqrt(1 + y[1] * y[1])};
    } catch (const Error&) {
      return {kNaN, kNaN, kNaN};
    }
  };
  double qh = std::tan(handoff);
  // leave at the handoff slope, or where the neck chart stops being convex
  std::vector<EventSpec<3>> ev{
      {[qh](double, const State<3>& y) { return y[1] - qh; }, Direction::rising, true, "handoff"},
      {[&F](double, const State<3>& y) {
         try {
           return F.rdd(y[0], y[1]);
         } catch (const Error&) {
           return kNaN;
         }
       },
       Direction::falling, true, "inflection"}};
  auto tr = integrate<3>(rhs, 0.0, State<3>{R, 0.0, 0.0}, cap * R, cfg, ev);
  if (tr.events.empty()) {
    throw ChartError("neck chart left before the handoff slope, last valid u=" + std::to_string(tr.t_end()));
  }
  for (std::size_t i = 0; i + 1 < tr.size(); ++i)
    if (!(tr.dy[i][1] > 0)) throw StructureError("neck chart is not strictly convex at u=" + std::to_string(tr.t[i]));
  return tr;
}

// curvature in the travel frame; infinite where the slope argument vanishes
inline double travel_kappa(const CurvatureFunction& f, double r, double psi) {
  double y = std::sin(psi) / r, z = std::cos(psi);
  if (y == 0.0) return kInf;
  return solve_level(f, y, z, y > 0 ? LowerChart::far : LowerChart::reflected);
}

// relative curvature defect |kappa - kappa_eq| / (1 + |kappa_eq|) from a graph defect in G units
inline double graph_residual(const SlopeField& F, double r, double v, double defect) {
  double c = std::pow(1 + v * v, 1.0 / (2 * F.curvature().alpha_value()));
  return defect / (c + std::fabs(F.G(F.arg(r, v))));
}

inline void append_graph(Branch& b, const SlopeField& F, const GraphPath& p, bool skip_first) {
  for (std::size_t i = skip_first ? 1 : 0; i < p.size(); ++i) {
    double v = p.v[i];
    double w = 1 + v * v;
    double kap = (p.nodal ? detail::lagrange4(p.r, p.v, std::min(i, p.size() - 2), p.r[i]).second : p.dv[i]) /
                 (w * std::sqrt(w));
    b.push(p.s[i], p.r[i], p.u[i], std::atan(v), kap, graph_residual(F, p.r[i], v, p.residual[i]), 2);
  }
}

inline void append_neck(Branch& b, const NeckField& F, const Trajectory<3>& tr, double dir) {
  // dir = +1 upper (u = w), -1 lower (u = -w)
  for (std::size_t i = 0; i < tr.size(); ++i) {
    double r = tr.y[i][0], q = tr.y[i][1];
    double w = std::sqrt(1 + q * q);
    double kup = -tr.dy[i][1] / (w * w * w);
    double res = 0;
    if (i + 1 < tr.size()) {
      double tm = 0.5 * (tr.t[i] + tr.t[i + 1]);
      auto ym = tr.segments[i].value(tm);
      auto dm = tr.segments[i].derivative(tm);
      res = F.residual(ym[0], ym[1], dm[1]);
    }
    double psi = dir > 0 ? std::numbers::pi / 2 - std::atan(q) : -std::numbers::pi / 2 + std::atan(q);
    b.push(tr.y[i][2], r, dir * tr.t[i], psi, dir > 0 ? kup : -kup, res, 0);
  }
}

inline double mean_offset(const Branch& b, const BowlProfile& bowl, double lo, double hi, int samples = 200) {
  auto g = log_grid(lo, hi, samples);
  double acc = 0;
  for (double x : g) acc += b.u_at(x) - bowl.path.height(x);
  return acc / samples;
}

}  // namespace detail

inline NeckSolution solve_neck(const CurvatureFunction& f, double R, const CatenoidConfig& cfg) {
  if (!f.is_signed()) throw UnsupportedError("curvature function is not signed");
  if (!(R > 0)) throw ParameterError("neck radius must be positive");
  if (!(cfg.handoff > 0 && cfg.handoff < std::numbers::pi / 2)) throw ParameterError("handoff angle must lie in (0, pi/2)");
  NeckSolution n;
  n.R = R;
  n.handoff = cfg.handoff;
  n.kappa_at_neck = -solve_level(f, 1.0 / R, 0.0, LowerChart::far);
  detail::NeckField up{&f, 1.0, f.beta()}, lo{&f, -1.0, f.beta()};
  n.upper = detail::integrate_neck(up, R, cfg.handoff, cfg.neck_cap, cfg.integrator);
  n.lower = detail::integrate_neck(lo, R, cfg.handoff, cfg.neck_cap, cfg.integrator);
  n.epsilon = std::min(n.upper.t_end(), n.lower.t_end());
  Branch tmp;
  detail::append_neck(tmp, up, n.upper, 1);
  detail::append_neck(tmp, lo, n.lower, -1);
  n.max_residual = tmp.max_residual();
  return n;
}

// Upper branch: neck chart, then the graph ODE on the plus chart.
inline Branch solve_upper_branch(const CurvatureFunction& f, const NeckSolution& neck, const CatenoidConfig& cfg) {
  Branch b;
  detail::NeckField nf{&f, 1.0, f.beta()};
  detail::append_neck(b, nf, neck.upper, 1);
  SlopeField F(f);
  GraphStart st{b.r.back(), 1.0 / neck.upper.y.back()[1], b.u.back(), b.s.back()};
  if (!(cfg.r_max > st.r0)) throw ParameterError("r_max must exceed the neck handoff radius");
  GraphPath p = integrate_graph(F, st, cfg.r_max, cfg.integrator);
  if (p.termination != Termination::reached_end)
    throw IntegrationError(std::string("upper branch stopped: ") + to_string(p.termination) + " at r=" +
                           std::to_string(p.r_end()));
  for (double v : p.v)
    if (!(v > 0)) throw StructureError("upper branch left the graphical sector (0, pi/2)");
  detail::append_graph(b, F, p, true);
  return b;
}

struct LowerBranchResult {
  Branch branch;
  std::optional<double> s0, s1;
  int s0_events = 0, s1_events = 0;
};

// Lower branch in the travel frame leaving the neck downward.
inline LowerBranchResult solve_lower_branch(const CurvatureFunction& f, const NeckSolution& neck, OriginCase oc,
                                            const CatenoidConfig& cfg) {
  LowerBranchResult out;
  Branch& b = out.branch;
  detail::NeckField nf{&f, -1.0, f.beta()};
  detail::append_neck(b, nf, neck.lower, -1);
  SlopeField F(f);
  const double h = neck.handoff;
  double psi0 = b.psi.back();

  if (oc == OriginCase::continuous_origin) {
    // (s, r, u, psi) against tau with ds/dtau = 1/(1+|kappa|)
    auto rhs = [&f](double, const State<4>& y) -> State<4> {
      try {
        double k = detail::travel_kappa(f, y[1], y[3]);
        if (std::isinf(k)) return {0.0, 0.0, 0.0, 1.0};
        double ds = 1.0 / (1.0 + std::fabs(k));
        return {ds, std::cos(y[3]) * ds, std::sin(y[3]) * ds, k * ds};
      } catch (const Error&) {
        return {kNaN, kNaN, kNaN, kNaN};
      }
    };
    std::vector<EventSpec<4>> ev{
        {[](double, const State<4>& y) { return y[3]; }, Direction::rising, false, "s0"},
        {[&f](double, const State<4>& y) {
           try {
             return detail::travel_kappa(f, y[1], y[3]);
           } catch (const Error&) {
             return kNaN;
           }
         },
         Direction::falling, false, "s1"},
        {[h](double, const State<4>& y) { return y[3] - h; }, Direction::rising, true, "graph"}};
    State<4> y0{b.s.back(), b.r.back(), b.u.back(), psi0};
    IntegratorConfig ic = cfg.integrator;
    ic.rel_tol = std::min(ic.rel_tol, 1e-13);
    auto tr = integrate<4>(rhs, 0.0, y0, 1e6, ic, ev);
    bool reached = false;
    for (const auto& e : tr.events) {
      if (e.id == 0) {
        ++out.s0_events;
        if (!out.s0) out.s0 = e.state[0];
      } else if (e.id == 1) {
        ++out.s1_events;
        if (!out.s1) out.s1 = e.state[0];
      } else {
        reached = true;
      }
    }
    if (!out.s0) throw StructureError("lower branch has no vertical-tangent crossing before leaving the domain");
    if (!reached) throw IntegrationError("lower branch did not reach the graph chart");
    for (std::size_t i = 1; i < tr.size(); ++i) {
      const auto& y = tr.y[i];
      double k = tr.dy[i][0] > 0 ? tr.dy[i][3] / tr.dy[i][0] : kInf;
      double res = 0;
      if (i + 1 < tr.size()) {
        double tm = 0.5 * (tr.t[i] + tr.t[i + 1]);
        auto ym = tr.segments[i].value(tm);
        auto dm = tr.segments[i].derivative(tm);
        // defect of the regularized system, finite through kappa = inf
        auto fm = rhs(tm, ym);
        res = std::max(std::fabs(dm[0] - fm[0]), std::fabs(dm[3] - fm[3]));
      }
      b.push(y[0], y[1], y[2], y[3], k, res, 1);
    }
    GraphStart st{b.r.back(), std::tan(b.psi.back()), b.u.back(), b.s.back()};
    if (!(cfg.r_max > st.r0)) throw ParameterError("r_max must exceed the lower handoff radius");
    GraphPath p = integrate_graph(F, st, cfg.r_max, cfg.integrator);
    if (p.termination != Termination::reached_end)
      throw IntegrationError(std::string("lower branch stopped: ") + to_string(p.termination));
    detail::append_graph(b, F, p, true);
  } else {
    GraphStart st{b.r.back(), std::tan(psi0), b.u.back(), b.s.back()};
    if (!(cfg.r_max > st.r0)) throw ParameterError("r_max must exceed the lower handoff radius");
    GraphPath p = integrate_graph(F, st, cfg.r_max, cfg.integrator);
    if (p.termination != Termination::reached_end)
      throw IntegrationError(std::string("lower branch stopped: ") + to_string(p.termination));
    for (double v : p.v)
      if (!(v < 0)) throw StructureError("derivative-origin lower branch crossed the horizontal");
    detail::append_graph(b, F, p, true);
  }
  // interior maximum of psi on the graph part is a theta-bar minimum
  for (std::size_t i = 1; i + 1 < b.size(); ++i) {
    if (b.segment[i] != 2 || b.segment[i - 1] != 2) continue;
    if (b.psi[i] > b.psi[i - 1] && b.psi[i] > b.psi[i + 1]) {
      ++out.s1_events;
      if (!out.s1) out.s1 = b.s[i];
    }
  }
  return out;
}

// Slope tail -a r^b of a derivative-origin lower branch.
inline EndBehavior fit_lower_end(const CurvatureFunction& f, const Branch& lower, double r_handoff, FitWindow w) {
  EndBehavior e;
  e.b = lower_end_exponent(f);
  e.exponent = e.b + 1;
  bool log_case = std::fabs(e.b + 1) < 1e-9;
  e.kind = log_case ? "logarithmic" : "power_law";
  auto grid = log_grid(w.lo, w.hi, 200);
  std::vector<double> av, lr, la, uu;
  for (double x : grid) {
    auto it = std::upper_bound(lower.r.begin(), lower.r.end(), x);
    std::size_t i = std::min(std::size_t(it - lower.r.begin()) - 1, lower.size() - 2);
    double t = (x - lower.r[i]) / (lower.r[i + 1] - lower.r[i]);
    double v = std::tan(lower.psi[i] + t * (lower.psi[i + 1] - lower.psi[i]));
    if (!(v < 0)) throw ClassificationError("lower tail slope is not negative");
    av.push_back(-v);
    lr.push_back(std::log(x));
    la.push_back(std::log(-v) - e.b * std::log(x));
    uu.push_back(lower.u_at(x));
  }
  LineFit lf = fit_loglog(grid, av);
  e.b_fit = lf.slope;
  e.exponent_fit = lf.slope + 1;
  e.fit_rms = lf.rms;
  double m = 0;
  for (double x : la) m += x;
  e.a_R = std::exp(m / la.size());
  auto it = std::upper_bound(lower.r.begin(), lower.r.end(), r_handoff);
  std::size_t i = std::min(std::size_t(it - lower.r.begin()), lower.size() - 1);
  e.a_match = -std::tan(lower.psi[i]) / std::pow(lower.r[i], e.b);
  if (log_case) {
    LineFit uf = fit_line(lr, uu);
    e.log_coefficient = -uf.slope;
  }
  return e;
}

inline CatenoidResult solve_catenoid(const CurvatureFunction& f, const CatenoidConfig& cfg) {
  if (!f.is_signed()) throw UnsupportedError("curvature function is not signed");
  CatenoidResult c;
  c.curvature_key = f.key();
  c.R = cfg.R;
  c.alpha = f.alpha_value();
  c.beta = f.beta();
  c.handoff = cfg.handoff;
  c.origin_case = classify_origin(f);
  c.neck = solve_neck(f, cfg.R, cfg);
  c.upper = solve_upper_branch(f, c.neck, cfg);
  auto lo = solve_lower_branch(f, c.neck, c.origin_case, cfg);
  c.lower = std::move(lo.branch);
  c.s0 = lo.s0;
  c.s1 = lo.s1;
  c.s0_events = lo.s0_events;
  c.s1_events = lo.s1_events;

  // upper slope angle: minimum, then increasing
  std::size_t imin = std::size_t(std::min_element(c.upper.psi.begin(), c.upper.psi.end()) - c.upper.psi.begin());
  c.upper_min_psi = c.upper.psi[imin];
  c.upper_monotone_after_min = true;
  for (std::size_t i = imin + 1; i < c.upper.size(); ++i)
    if (!(c.upper.psi[i] >= c.upper.psi[i - 1])) c.upper_monotone_after_min = false;

  FitWindow w{cfg.r_max / 10, cfg.r_max / 2};
  {
    auto g = log_grid(w.lo, w.hi, 200);
    std::vector<double> uu;
    for (double x : g) uu.push_back(c.upper.u_at(x));
    c.upper_growth = fit_loglog(g, uu).slope;
  }

  bool lower_bowl = c.origin_case == OriginCase::continuous_origin;
  if (f.nondegenerate() || f.alpha_value() > 1.0 / 3.0) {
    try {
      BowlProfile bowl = solve_bowl(f, cfg.r_max, cfg.integrator);
      if (bowl.r_end() >= w.hi) {
        c.C_plus = detail::mean_offset(c.upper, bowl, w.lo, w.hi);
        c.C_plus_alt = detail::mean_offset(c.upper, bowl, 2 * w.lo, w.hi);
        if (lower_bowl) {
          c.C_minus = detail::mean_offset(c.lower, bowl, w.lo, w.hi);
          c.C_minus_alt = detail::mean_offset(c.lower, bowl, 2 * w.lo, w.hi);
        }
      }
    } catch (const Error&) {
    }
  }
  if (lower_bowl) {
    c.end.kind = "bowl_type";
  } else {
    double rh = c.lower.r[c.neck.lower.size() - 1];
    c.end = fit_lower_end(f, c.lower, rh, w);
  }

  // embeddedness on r >= r*, both branches graphs over r there
  double rs = std::max(c.upper.r[c.neck.upper.size() - 1], c.lower.r[c.neck.lower.size() - 1]);
  double rend = std::min(c.upper.r.back(), c.lower.r.back());
  c.embed_r_star = rs;
  if (!(rend > rs)) {
    c.embed_status = "inconclusive";
  } else {
    auto g = log_grid(rs, rend, 400);
    double mn = kInf;
    bool widen = true;
    double prev = -kInf;
    for (double x : g) {
      double d = c.upper.u_at(x) - c.lower.u_at(x);
      mn = std::min(mn, d);
      if (d < prev) widen = false;
      prev = d;
    }
    c.embed_min_gap = mn;
    c.embed_widening = widen;
    c.embed_status = mn > 0 ? "embedded" : "overlap";
  }
  // arc-length consistency on the regularized segment and the graph pieces
  auto check = [&c](const Branch& b) {
    for (std::size_t i = 1; i < b.size(); ++i) {
      double ds = b.s[i] - b.s[i - 1];
      if (!(ds > 0)) continue;
      double dr = b.r[i] - b.r[i - 1], du = b.u[i] - b.u[i - 1];
      double chord = std::sqrt(dr * dr + du * du);
      c.arc_length_defect = std::max(c.arc_length_defect, (chord - ds) / ds > 0 ? (chord - ds) / ds : 0.0);
    }
  };
  check(c.upper);
  check(c.lower);
  return c;
}

}  // namespace translab
