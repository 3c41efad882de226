#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curvature.hpp"

namespace translab {

struct UnitSolve {
  double X = kNaN;
  double residual = kNaN;  // gamma(X, sigma) - w
  int iterations = 0;
};

// Solve gamma(X, sigma) = w for X inside chart c. Bracket by geometric expansion,
// bisect to relative width 1e-3, then safeguarded Newton to machine resolution.
inline UnitSolve solve_unit(const CurvatureFunction& f, const Chart& c, double sigma, double w,
                            double tol = 1e-12, double seed = kNaN) {
  if (!std::isfinite(w)) throw DomainError("level is not finite");
  if (!c.reaches(w)) {
    std::ostringstream os;
    os.precision(17);
    os << "level " << w << " outside chart range (" << c.v_lo << ", " << c.v_hi << ") of " << f.key();
    throw DomainError(os.str());
  }
  auto F = [&](double X) { return f.evaluate(X, sigma) - w; };
  UnitSolve out;
  double X0 = seed;
  if (!(std::isfinite(X0) && c.contains_x(X0))) {
    bool flo = std::isfinite(c.x_lo), fhi = std::isfinite(c.x_hi);
    if (!flo && !fhi) X0 = 0.0;
    else if (flo && !fhi) X0 = c.x_lo + std::max(1.0, std::fabs(c.x_lo));
    else if (!flo && fhi) X0 = c.x_hi - std::max(1.0, std::fabs(c.x_hi));
    else X0 = 0.5 * (c.x_lo + c.x_hi);
  }
  double F0 = F(X0);
  if (F0 == 0.0) {
    out.X = X0;
    out.residual = 0.0;
    return out;
  }
  double lo, hi;
  int it = 0;
  const int max_expand = 2200;
  if (F0 < 0) {
    lo = X0;
    double step = std::max(1.0, std::fabs(X0));
    for (;; ++it) {
      if (it > max_expand) throw ConvergenceError("bracket expansion failed to the right");
      double Xn = std::isfinite(c.x_hi) ? c.x_hi - 0.5 * (c.x_hi - lo) : lo + step;
      step *= 2;
      if (Xn == lo) throw ConvergenceError("bracket collapsed at chart edge");
      double Fn = F(Xn);
      if (!std::isfinite(Fn)) throw ConvergenceError("non-finite value while bracketing");
      if (Fn >= 0) {
        hi = Xn;
        if (Fn == 0) {
          out.X = Xn;
          out.residual = 0;
          out.iterations = it;
          return out;
        }
        break;
      }
      lo = Xn;
    }
  } else {
    hi = X0;
    double step = std::max(1.0, std::fabs(X0));
    for (;; ++it) {
      if (it > max_expand) throw ConvergenceError("bracket expansion failed to the left");
      double Xn = std::isfinite(c.x_lo) ? c.x_lo + 0.5 * (hi - c.x_lo) : hi - step;
      step *= 2;
      if (Xn == hi) throw ConvergenceError("bracket collapsed at chart edge");
      double Fn = F(Xn);
      if (!std::isfinite(Fn)) throw ConvergenceError("non-finite value while bracketing");
      if (Fn <= 0) {
        lo = Xn;
        if (Fn == 0) {
          out.X = Xn;
          out.residual = 0;
          out.iterations = it;
          return out;
        }
        break;
      }
      hi = Xn;
    }
  }
  auto mid = [](double a, double b) {
    if (a > 0 && b > 4 * a) return std::sqrt(a * b);
    if (b < 0 && a < 4 * b) return -std::sqrt(a * b);
    return 0.5 * (a + b);
  };
  for (int j = 0; j < 400 && (hi - lo) > 1e-3 * std::max(std::fabs(lo), std::fabs(hi)); ++j, ++it) {
    double m = mid(lo, hi);
    if (m <= lo || m >= hi) break;
    double Fm = F(m);
    if (Fm == 0) {
      out.X = m;
      out.residual = 0;
      out.iterations = it;
      return out;
    }
    (Fm < 0 ? lo : hi) = m;
  }
  double X = 0.5 * (lo + hi);
  double FX = F(X);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int j = 0; j < 500; ++j, ++it) {
    if (FX == 0) break;
    (FX < 0 ? lo : hi) = X;
    Jet2 jt = f.jet(X, sigma);
    double Xn = (jt.x > 0 && std::isfinite(jt.x)) ? X - FX / jt.x : kNaN;
    if (!(Xn > lo && Xn < hi)) Xn = mid(lo, hi);
    if (Xn <= lo || Xn >= hi) break;
    double dX = std::fabs(Xn - X);
    X = Xn;
    FX = F(X);
    if (dX <= 2 * eps * std::fabs(X) || hi - lo <= 4 * eps * std::max(std::fabs(lo), std::fabs(hi))) break;
  }
  // one polishing Newton step if it improves the residual
  Jet2 jt = f.jet(X, sigma);
  if (jt.x > 0 && std::isfinite(jt.x) && FX != 0) {
    double Xp = X - FX / jt.x;
    double Fp = F(Xp);
    if (std::isfinite(Fp) && std::fabs(Fp) < std::fabs(FX)) {
      X = Xp;
      FX = Fp;
    }
  }
  out.X = X;
  out.residual = FX;
  out.iterations = it;
  if (!(std::fabs(FX) <= tol * std::max(1.0, std::fabs(w)))) {
    // accept ill-conditioned roots resolved to machine precision in X
    double slope = std::fabs(jt.x);
    if (!(std::fabs(FX) <= 64 * eps * std::max(1.0, std::fabs(X)) * slope + tol * std::max(1.0, std::fabs(w)))) {
      std::ostringstream os;
      os.precision(17);
      os << "root solve residual " << FX << " above tolerance; bracket [" << lo << ", " << hi << "]";
      throw ConvergenceError(os.str());
    }
  }
  return out;
}

// Which chart to use on y < 0.
enum class LowerChart { far, reflected };

// x with gamma(x, y) = z; y > 0 uses the plus chart, y < 0 the chosen lower chart.
inline double solve_level(const CurvatureFunction& f, double y, double z, LowerChart lc = LowerChart::far,
                          double tol = 1e-12, double* residual = nullptr) {
  if (y == 0.0 || !std::isfinite(y)) throw DomainError("slope argument y must be finite and nonzero");
  double t = std::fabs(y);
  double ta = std::pow(t, f.alpha_value());
  double sigma = y > 0 ? 1.0 : -1.0;
  Chart c;
  if (y > 0) {
    c = f.plus_chart();
  } else {
    auto oc = lc == LowerChart::far ? f.far_chart() : f.reflected_chart();
    if (!oc) throw UnsupportedError(f.key() + " has no chart on y < 0");
    c = *oc;
  }
  UnitSolve u = solve_unit(f, c, sigma, z / ta, tol);
  if (residual) *residual = u.residual * ta;
  return t * u.X;
}

// Implicit derivatives of x = g(y) on the level set through (x, y).
struct ImplicitDerivs {
  double d1 = kNaN, d2 = kNaN;
};
inline ImplicitDerivs implicit_derivatives(const CurvatureFunction& f, double x, double y) {
  Jet2 j = f.jet(x, y);
  if (!(j.x > 0) || !std::isfinite(j.x))
    throw DegeneracyError("partial derivative in x is not positive at the solved point");
  ImplicitDerivs d;
  d.d1 = -j.y / j.x;
  double g1 = d.d1;
  d.d2 = -((j.xy * g1 + j.yy) * j.x - j.y * (j.xx * g1 + j.xy)) / (j.x * j.x);
  return d;
}

struct EndpointData {
  double left_y = kNaN, left_value = kNaN;
  double right_y = kNaN, right_value = kNaN;  // right_y = inf for degenerate functions
  std::optional<double> m0;                   // m̄₀, when the far chart carries the unit ray
  double max_limit_gap = 0;                   // largest gap between identity and interior-solve limits
};

class ImplicitBranch {
 public:
  enum class Sign { plus, minus };

  explicit ImplicitBranch(CurvatureFunction f, Sign s = Sign::plus, double tol = 1e-12)
      : f_(std::move(f)), sign_(s), tol_(tol) {
    if (s == Sign::minus && !f_.far_chart())
      throw UnsupportedError(f_.key() + " has no -1 level on the slice");
    g11_ = f_.evaluate(1.0, 1.0);
  }

  const CurvatureFunction& source() const { return f_; }
  Sign sign() const { return sign_; }
  double solve_tolerance() const { return tol_; }
  double gamma11() const { return g11_; }

  // U₊ membership, closure allowed within relative slack.
  bool in_u_plus(double y, double z, std::string* why = nullptr, double slack = 1e-12) const {
    double a = f_.alpha_value();
    if (!(z > 0)) {
      if (why) *why = "z > 0";
      return false;
    }
    if (!(y > 0)) {
      if (why) *why = "y > 0";
      return false;
    }
    double ya = std::pow(y, a);
    if (ya < z / g11_ * (1 - slack)) {
      if (why) *why = "z/gamma(1,1) < y^alpha";
      return false;
    }
    if (f_.nondegenerate() && ya > z * (1 + slack)) {
      if (why) *why = "y^alpha < z/gamma(0,1)";
      return false;
    }
    return true;
  }

  // Endpoints of U₊ in y for level z.
  double left_endpoint(double z) const { return std::pow(z / g11_, 1.0 / f_.alpha_value()); }
  double right_endpoint(double z) const {
    return f_.nondegenerate() ? std::pow(z, 1.0 / f_.alpha_value()) : kInf;
  }

  double g_plus(double y, double z) const {
    std::string why;
    if (!in_u_plus(y, z, &why)) {
      std::ostringstream os;
      os.precision(17);
      os << "(y,z)=(" << y << "," << z << ") outside U+: violates " << why;
      throw DomainError(os.str());
    }
    return g_plus_unchecked(y, z);
  }

  // Plus-chart solve without the U₊ guard, with endpoint identities near the edges.
  double g_plus_unchecked(double y, double z) const {
    double yl = left_endpoint(z);
    if (std::fabs(y - yl) <= 1e-8 * yl) return near_endpoint(y, z, yl, yl);
    if (f_.nondegenerate()) {
      double yr = right_endpoint(z);
      if (std::fabs(y - yr) <= 1e-8 * yr) {
        Jet2 j = f_.jet(0.0, yr);
        if (j.x > 0 && std::isfinite(j.x)) return near_endpoint(y, z, yr, 0.0);
      }
    }
    return solve_level(f_, y, z, LowerChart::far, tol_);
  }

  std::pair<double, double> u_minus() const {
    auto c = f_.far_chart();
    if (!c) throw UnsupportedError(f_.key() + " has no -1 level on the slice");
    double a = f_.alpha_value();
    double tmax = kInf, tmin = 0.0;
    if (c->v_hi < 0) tmax = std::pow(-1.0 / c->v_hi, 1.0 / a);
    if (std::isfinite(c->v_lo) && c->v_lo < 0) tmin = std::pow(-1.0 / c->v_lo, 1.0 / a);
    return {-tmax, -tmin};
  }

  double g_minus(double y) const {
    auto [lo, hi] = u_minus();
    if (!(y > lo && y < hi)) {
      std::ostringstream os;
      os.precision(17);
      os << "y=" << y << " outside U-=(" << lo << "," << hi << ") of " << f_.key();
      throw DomainError(os.str());
    }
    return solve_level(f_, y, -1.0, LowerChart::far, tol_);
  }

  // Value of the branch at (y, z): plus uses g₊, minus uses g₋ with z = -1.
  double value(double y, double z) const {
    return sign_ == Sign::plus ? g_plus(y, z) : (z == -1.0 ? g_minus(y) : solve_level(f_, y, z, LowerChart::far, tol_));
  }

  double dg_dy(double y, double z, int order) const {
    if (order != 1 && order != 2) throw ParameterError("order must be 1 or 2");
    if (sign_ == Sign::minus && y == 0.0) {
      // g₋(y) = |y| X(|y|) with X -> pole of the far chart as y -> 0⁻
      auto c = *f_.far_chart();
      if (order == 1 && std::isfinite(c.x_lo) && c.v_lo == -kInf && f_.alpha_value() == 1.0) return -c.x_lo;
      throw DomainError("derivative of g- at y=0 is not available for " + f_.key());
    }
    double x = sign_ == Sign::plus ? g_plus(y, z) : solve_level(f_, y, z, LowerChart::far, tol_);
    auto d = implicit_derivatives(f_, x, y);
    return order == 1 ? d.d1 : d.d2;
  }

  EndpointData endpoint_data() const {
    EndpointData e;
    e.left_y = left_endpoint(1.0);
    e.left_value = e.left_y;
    double gl = solve_level(f_, e.left_y * (1 + 1e-6), 1.0, LowerChart::far, tol_);
    e.max_limit_gap = std::fabs(gl - e.left_value);
    if (f_.nondegenerate()) {
      e.right_y = 1.0;
      e.right_value = 0.0;
      double gr = solve_level(f_, 1.0 - 1e-6, 1.0, LowerChart::far, tol_);
      e.max_limit_gap = std::max(e.max_limit_gap, std::fabs(gr - e.right_value));
    } else {
      e.right_y = kInf;
      e.right_value = 0.0;
    }
    auto c = f_.far_chart();
    if (c && c->contains_x(1.0)) {
      double v = f_.evaluate(1.0, -1.0);
      if (v < 0) e.m0 = -std::pow(-v, -1.0 / f_.alpha_value());
    }
    return e;
  }

 private:
  double near_endpoint(double y, double z, double ye, double xe) const {
    Jet2 j = f_.jet(xe, ye);
    if (!(j.x > 0) || !std::isfinite(j.x)) return solve_level(f_, y, z, LowerChart::far, tol_);
    return xe - j.y / j.x * (y - ye);
  }

  CurvatureFunction f_;
  Sign sign_;
  double tol_;
  double g11_;
};

// Hessian-quotient closed forms: x = g(y, z) for gamma = y (S_k/S_l / y^m)^{1/m} / c_N.
inline double hq_closed_form(const CurvatureFunction& f, double y, double z) {
  if (f.family() != Family::hessian_quotient) throw UnsupportedError("closed form only for Hessian quotients");
  int k = f.k(), l = f.l(), m = k - l;
  double Ck = f.C(k), Ck1 = f.C(k - 1), Cl = f.C(l), Cl1 = f.C(l - 1);
  double zm = std::pow(z, m), ym = std::pow(y, m);
  return Ck * y * (zm - ym) / (Ck1 * ym - Ck * Cl1 / Cl * zm);
}

struct LaurentTail {
  double k_gamma = kNaN, c_gamma = kNaN;
  double fit_rms = kNaN;
};

// Power-law tail g₊(y,1) ~ c y^{-k} from a log-log fit over y in [1e3, 1e6].
inline LaurentTail laurent_tail(const ImplicitBranch& br, int points = 48) {
  const auto& f = br.source();
  if (f.nondegenerate()) throw ParameterError("laurent_tail needs a 1-degenerate curvature function");
  Eigen::MatrixXd A(points, 2);
  Eigen::VectorXd b(points);
  for (int i = 0; i < points; ++i) {
    double ly = std::log(1e3) + (std::log(1e6) - std::log(1e3)) * i / (points - 1);
    double g = br.g_plus(std::exp(ly), 1.0);
    if (!(g > 0)) throw ClassificationError("tail value not positive");
    A(i, 0) = 1.0;
    A(i, 1) = ly;
    b(i) = std::log(g);
  }
  Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
  LaurentTail t;
  t.k_gamma = -sol(1);
  t.c_gamma = std::exp(sol(0));
  t.fit_rms = std::sqrt((A * sol - b).squaredNorm() / points);
  if (t.fit_rms > 1e-3) throw ClassificationError("tail is not a power law (rms " + std::to_string(t.fit_rms) + ")");
  return t;
}

}  // namespace translab
