#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "curvature.hpp"
#include "errors.hpp"
#include "fit.hpp"
#include "graph.hpp"
#include "implicit.hpp"
#include "ode.hpp"

namespace translab {

enum class BarrierKind { implicit_cone, power };
inline const char* to_string(BarrierKind k) { return k == BarrierKind::implicit_cone ? "implicit_cone" : "power"; }

struct BarrierSpec {
  BarrierKind kind = BarrierKind::power;
  double m = kNaN;          // implicit cone slope ratio
  double a = 1, b = -1;     // power barrier -a r^b
  double r_lo = 0, r_hi = kInf;

  static BarrierSpec cone(double m, double lo = 0, double hi = kInf) {
    if (!(m < 0)) throw ParameterError("implicit cone needs m < 0");
    return {BarrierKind::implicit_cone, m, kNaN, kNaN, lo, hi};
  }
  static BarrierSpec power(double a, double b, double lo = 0, double hi = kInf) {
    if (!(a > 0) || !(b < 0)) throw ParameterError("power barrier needs a > 0 and b < 0");
    return {BarrierKind::power, kNaN, a, b, lo, hi};
  }
};

// (w, w') of the barrier at r
inline std::pair<double, double> evaluate_barrier(const BarrierSpec& sp, double r, double beta) {
  if (!(r > 0) || r < sp.r_lo || r > sp.r_hi) throw RangeError("radius outside the barrier range");
  if (sp.kind == BarrierKind::power) return {-sp.a * std::pow(r, sp.b), -sp.a * sp.b * std::pow(r, sp.b - 1)};
  if (!(beta < 0.5)) throw ParameterError("implicit cone needs beta < 1/2");
  // phi(w) = w / (1+w^2)^beta = m r on w <= 0
  const double target = sp.m * r;
  auto phi = [beta](double w) { return w / std::pow(1 + w * w, beta); };
  auto dphi = [beta](double w) {
    double q = 1 + w * w;
    return std::pow(q, -beta) * (1 - 2 * beta * w * w / q);
  };
  double lo = target, hi = 0;
  while (phi(lo) > target) {
    lo *= 2;
    if (!std::isfinite(lo)) throw ConvergenceError("implicit cone bracket failed");
  }
  double w = target;
  for (int it = 0; it < 200; ++it) {
    double g = phi(w) - target;
    if (g > 0) hi = w; else lo = w;
    double d = dphi(w);
    double wn = w - g / d;
    if (!(wn > lo && wn < hi)) wn = 0.5 * (lo + hi);
    if (std::fabs(wn - w) <= 1e-15 * (1 + std::fabs(w))) {
      w = wn;
      break;
    }
    w = wn;
    if (it == 199) throw ConvergenceError("implicit cone Newton did not converge");
  }
  return {w, sp.m / dphi(w)};
}

enum class Verdict { verified_super, verified_sub, violated };
inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::verified_super: return "verified_super";
    case Verdict::verified_sub: return "verified_sub";
    case Verdict::violated: return "violated";
  }
  return "?";
}

struct BarrierReport {
  BarrierSpec spec;
  std::vector<double> r, w, margin;
  double min_margin = kNaN, max_margin = kNaN;
  Verdict verdict = Verdict::violated;
  double r_star = kNaN;  // sign is uniform on [r_star, end]
  double r_at = kNaN;    // last sign change when violated
  int skipped = 0;
};

// n_per_decade log-spaced points on [lo, hi]
inline std::vector<double> decade_grid(double lo, double hi, int n_per_decade = 400) {
  int pts = std::max(2, int(std::ceil(std::log10(hi / lo) * n_per_decade)) + 1);
  return log_grid(lo, hi, pts);
}

// margin w' - (1+w^2)^{beta+1} g-(w/(r(1+w^2)^beta), -1); >= 0 means supersolution
inline BarrierReport verify_inequality(const BarrierSpec& sp, const CurvatureFunction& f,
                                       const std::vector<double>& grid) {
  ImplicitBranch br(f, ImplicitBranch::Sign::minus);
  double be = f.beta();
  BarrierReport rep;
  rep.spec = sp;
  for (double r : grid) {
    auto [w, dw] = evaluate_barrier(sp, r, be);
    double q = 1 + w * w;
    double y = w / (r * std::pow(q, be));
    double g;
    try {
      g = br.g_minus(y);
    } catch (const Error&) {
      ++rep.skipped;
      continue;
    }
    rep.r.push_back(r);
    rep.w.push_back(w);
    rep.margin.push_back(dw - std::pow(q, be + 1) * g);
  }
  if (rep.margin.empty()) throw RangeError("barrier grid left the g- domain everywhere");
  rep.min_margin = *std::min_element(rep.margin.begin(), rep.margin.end());
  rep.max_margin = *std::max_element(rep.margin.begin(), rep.margin.end());
  // uniform sign on a terminal segment covering at least the last quarter of the grid
  std::size_t m = rep.margin.size();
  auto tail_start = [&](auto ok) {
    std::size_t i = m;
    while (i > 0 && ok(rep.margin[i - 1])) --i;
    return i;
  };
  std::size_t ip = tail_start([](double x) { return x >= 0; });
  std::size_t in = tail_start([](double x) { return x <= 0; });
  std::size_t start = std::min(ip, in);
  if (start > 0) rep.r_at = rep.r[start - 1];
  if (start <= 3 * m / 4) {
    rep.verdict = ip <= in ? Verdict::verified_super : Verdict::verified_sub;
    rep.r_star = rep.r[start];
  } else {
    rep.verdict = Verdict::violated;
  }
  return rep;
}

struct OrderingPair {
  double v_lo = 0, v_hi = 0;
  double min_gap = kNaN;
  double r_common = kNaN;
  bool complete = false;
};

struct OrderingReport {
  std::string curvature_key;
  double r0 = 1, r_end = 100;
  std::vector<OrderingPair> pairs;
  double min_gap = kInf;
  bool preserved = true;
  int partial = 0;
};

// Integrates ordered pairs of slope solutions from r0 and checks v_lo <= v_hi on a shared grid.
inline OrderingReport compare_orderings(const CurvatureFunction& f, const std::vector<std::pair<double, double>>& v0,
                                        double r0, double r_end, const IntegratorConfig& cfg,
                                        double tol = 1e-9, int samples = 400) {
  OrderingReport rep;
  rep.curvature_key = f.key();
  rep.r0 = r0;
  rep.r_end = r_end;
  SlopeField F(f);
  for (auto [a, b] : v0) {
    if (a > b) std::swap(a, b);
    OrderingPair p{a, b};
    GraphPath pa = integrate_graph(F, {r0, a, 0, 0}, r_end, cfg);
    GraphPath pb = a == b ? pa : integrate_graph(F, {r0, b, 0, 0}, r_end, cfg);
    double hi = std::min(pa.r_end(), pb.r_end());
    p.r_common = hi;
    p.complete = pa.termination == Termination::reached_end && pb.termination == Termination::reached_end;
    if (!p.complete) ++rep.partial;
    if (hi > r0) {
      double mg = kInf;
      for (double x : log_grid(r0, hi, samples)) mg = std::min(mg, pb.slope(x) - pa.slope(x));
      p.min_gap = mg;
      rep.min_gap = std::min(rep.min_gap, mg);
      if (mg < -tol) rep.preserved = false;
    }
    rep.pairs.push_back(p);
  }
  return rep;
}

// n ordered pairs drawn uniformly from [lo, hi]
inline std::vector<std::pair<double, double>> random_pairs(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double a = U(rng), b = U(rng);
    out.push_back({std::min(a, b), std::max(a, b)});
  }
  return out;
}

}  // namespace translab
