#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvature.hpp"
#include "errors.hpp"
#include "fit.hpp"
#include "graph.hpp"
#include "implicit.hpp"
#include "ode.hpp"

namespace translab {

struct BowlProfile {
  std::string curvature_key;
  double alpha = 1, beta = 0;
  double lambda0 = 0, eps0 = 0;
  GraphPath path;  // includes the axis sample r = 0
  std::string status;  // "entire" or "reached cylinder slope y=1"
  bool cylinder_bounded = false;

  const std::vector<double>& r() const { return path.r; }
  const std::vector<double>& u() const { return path.u; }
  const std::vector<double>& v() const { return path.v; }
  const std::vector<double>& residual() const { return path.residual; }
  double r_end() const { return path.r_end(); }
  double max_residual() const { return path.max_residual(); }
};

// Axis start at eps0 with v = lambda0 * eps0, then the slope ODE to r_max.
inline BowlProfile solve_bowl(const CurvatureFunction& f, double r_max, const IntegratorConfig& cfg,
                              GraphBackend backend = GraphBackend::automatic, double eps0 = 1e-6) {
  double al = f.alpha_value();
  if (!(al > 1.0 / 3.0)) throw ParameterError("bowl solver needs alpha > 1/3");
  if (!(r_max > eps0)) throw ParameterError("r_max must exceed the axis offset");
  double g11 = f.evaluate(1.0, 1.0);
  if (!(g11 > 0)) throw DomainError("gamma(1,1) must be positive");
  BowlProfile b;
  b.curvature_key = f.key();
  b.alpha = al;
  b.beta = f.beta();
  b.eps0 = eps0;
  b.lambda0 = std::pow(g11, -1.0 / al);
  SlopeField F(f);
  GraphStop stop;
  if (f.nondegenerate()) stop = [&F](double r, double v) { return F.arg(r, v) - 1.0; };
  GraphStart st{eps0, b.lambda0 * eps0, 0.5 * b.lambda0 * eps0 * eps0, eps0};
  b.path = integrate_graph(F, st, r_max, cfg, backend, stop);
  auto& p = b.path;
  if (p.termination == Termination::step_underflow || p.size() < 2)
    throw IntegrationError("bowl integration failed near r=" + std::to_string(p.r_end()));
  p.r.insert(p.r.begin(), 0.0);
  p.v.insert(p.v.begin(), 0.0);
  p.dv.insert(p.dv.begin(), b.lambda0);
  p.u.insert(p.u.begin(), 0.0);
  p.s.insert(p.s.begin(), 0.0);
  p.residual.insert(p.residual.begin(), 0.0);
  b.cylinder_bounded = p.event_hit;
  if (p.event_hit)
    b.status = "reached cylinder slope y=1";
  else if (p.termination == Termination::reached_end)
    b.status = "entire";
  else
    b.status = to_string(p.termination);
  return b;
}

struct NondegenerateCoeffs {
  double a = 0, b = 0, dg1 = 0, dg2 = 0;
};

inline NondegenerateCoeffs coeffs_nondegenerate(const CurvatureFunction& f) {
  if (!f.nondegenerate()) throw ParameterError(f.key() + " is 1-degenerate");
  double al = f.alpha_value(), be = f.beta();
  if (!(al > 1.0 / 3.0)) throw ParameterError("coefficients need alpha > 1/3");
  ImplicitBranch br(f);
  NondegenerateCoeffs c;
  c.dg1 = br.dg_dy(1.0, 1.0, 1);
  c.dg2 = br.dg_dy(1.0, 1.0, 2);
  double g1 = c.dg1, g2 = c.dg2;
  if (g1 == 0.0) throw DegeneracyError("d/dy g+(1,1) vanishes");
  double a = -al * (al / g1 + be);
  double den = 2.0 * al * g1 * (1.0 - 2.0 * be);
  double t1 = 2.0 * a * al * al - g1 * ((1 - 2 * a) * be * (1 + be * (1 - 2 * a)) - 2 * a * a * be);
  double q = a / al + be;
  double t2 = g1 * q * (3 * al - 1) * (1 - 2 * a) - al * g2 * q * q;
  c.a = a;
  c.b = (t1 + t2) / den;
  return c;
}

struct DegenerateCoeffs {
  double k_gamma = 0, c_gamma = 0, d_gamma = 0, A_gamma = 0;
  double tail_rms = 0;
  bool boundary_case = false;  // k_gamma = 3 alpha - 1
};

inline DegenerateCoeffs coeffs_degenerate(const CurvatureFunction& f) {
  if (f.nondegenerate()) throw ParameterError(f.key() + " is 1-nondegenerate");
  ImplicitBranch br(f);
  LaurentTail t = laurent_tail(br);
  double al = f.alpha_value();
  DegenerateCoeffs c;
  c.k_gamma = t.k_gamma;
  c.c_gamma = t.c_gamma;
  c.tail_rms = t.fit_rms;
  double lim = 3 * al - 1;
  if (c.k_gamma < lim - 1e-6) throw ParameterError("k_gamma < 3 alpha - 1");
  c.boundary_case = std::fabs(c.k_gamma - lim) <= 1e-6;
  c.d_gamma = al * (c.k_gamma + 1) / (c.k_gamma - 2 * al + 1);
  c.A_gamma = std::pow(c.d_gamma / c.c_gamma, al / (2 * al - 1 - c.k_gamma));
  return c;
}

enum class Regime { nondegenerate, degenerate };
inline const char* to_string(Regime r) { return r == Regime::nondegenerate ? "nondegenerate" : "degenerate"; }

struct Coefficient {
  std::string name;
  double formula = kNaN, fitted = kNaN;
  double abs_error = kNaN, rel_error = kNaN;  // rel_error is NaN when the formula value vanishes
};

struct AsymptoticReport {
  Regime regime = Regime::nondegenerate;
  std::vector<Coefficient> coefficients;
  double r_lo = 0, r_hi = 0;
  int samples = 0;
  double fit_rms = 0;

  const Coefficient& get(const std::string& name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return c;
    throw RangeError("no coefficient named " + name);
  }
};

inline Coefficient make_coefficient(const std::string& name, double formula, double fitted) {
  Coefficient c{name, formula, fitted, std::fabs(fitted - formula), kNaN};
  if (std::fabs(formula) > 1e-12) c.rel_error = c.abs_error / std::fabs(formula);
  return c;
}

struct FitWindow {
  double lo = 0, hi = 0;
};

inline FitWindow default_window(const BowlProfile& p) { return {p.r_end() / 10.0, p.r_end() / 2.0}; }

namespace detail {
inline void check_window(const BowlProfile& p, const FitWindow& w) {
  if (!(w.lo > 0 && w.hi > w.lo)) throw RangeError("fit window must satisfy 0 < lo < hi");
  if (w.hi > p.r_end()) throw RangeError("fit window outside the computed profile");
}
}  // namespace detail

inline AsymptoticReport fit_tail(const CurvatureFunction& f, const BowlProfile& p, Regime regime,
                                 FitWindow w = {}, int samples = 200) {
  if (w.hi == 0) w = default_window(p);
  detail::check_window(p, w);
  auto grid = log_grid(w.lo, w.hi, samples);
  std::vector<double> v(samples);
  for (int i = 0; i < samples; ++i) {
    v[i] = p.path.slope(grid[i]);
    if (i > 0 && !(v[i] > v[i - 1])) throw ClassificationError("profile slope is not monotone on the fit window");
  }
  AsymptoticReport rep;
  rep.regime = regime;
  rep.r_lo = w.lo;
  rep.r_hi = w.hi;
  rep.samples = samples;
  double al = p.alpha;
  if (regime == Regime::nondegenerate) {
    // v - r^a = -a r^-a + b r^-3a + c r^-5a
    Eigen::MatrixXd A(samples, 3);
    Eigen::VectorXd rhs(samples);
    for (int i = 0; i < samples; ++i) {
      double ra = std::pow(grid[i], al);
      A(i, 0) = -1.0 / ra;
      A(i, 1) = std::pow(ra, -3.0);
      A(i, 2) = std::pow(ra, -5.0);
      rhs(i) = v[i] - ra;
    }
    Eigen::VectorXd s = least_squares(A, rhs);
    rep.fit_rms = std::sqrt((A * s - rhs).squaredNorm() / samples);
    auto c = coeffs_nondegenerate(f);
    rep.coefficients.push_back(make_coefficient("a", c.a, s(0)));
    rep.coefficients.push_back(make_coefficient("b", c.b, s(1)));
  } else {
    LineFit lf = fit_loglog(grid, v);
    rep.fit_rms = lf.rms;
    auto c = coeffs_degenerate(f);
    rep.coefficients.push_back(make_coefficient("k_gamma", c.k_gamma, c.k_gamma));
    rep.coefficients.push_back(make_coefficient("c_gamma", c.c_gamma, c.c_gamma));
    rep.coefficients.push_back(make_coefficient("d_gamma", c.d_gamma, lf.slope));
    rep.coefficients.push_back(make_coefficient("A_gamma", c.A_gamma, std::exp(lf.intercept)));
  }
  return rep;
}

// log-log slope of u on the window
inline double growth_exponent(const BowlProfile& p, FitWindow w = {}, int samples = 200) {
  if (w.hi == 0) w = default_window(p);
  detail::check_window(p, w);
  auto grid = log_grid(w.lo, w.hi, samples);
  std::vector<double> u(samples);
  for (int i = 0; i < samples; ++i) u[i] = p.path.height(grid[i]);
  return fit_loglog(grid, u).slope;
}

}  // namespace translab
