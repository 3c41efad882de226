#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "curvature.hpp"
#include "errors.hpp"
#include "implicit.hpp"

namespace translab {

struct MonotonicityReport {
  double min_dx = kInf, min_dy = kInf;
  int evaluated = 0;
  bool pass = false;
};

// dx and dy of the slice at sampled cone points
inline MonotonicityReport check_monotonicity(const CurvatureFunction& f, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MonotonicityReport rep;
  for (int i = 0; i < samples; ++i) {
    auto [x, y] = sample_cone_point(f, rng);
    Jet2 j = f.jet(x, y);
    if (!std::isfinite(j.x) || !std::isfinite(j.y)) continue;
    rep.min_dx = std::min(rep.min_dx, j.x);
    rep.min_dy = std::min(rep.min_dy, j.y);
    ++rep.evaluated;
  }
  rep.pass = rep.evaluated > 0 && rep.min_dx > 0 && rep.min_dy > 0;
  return rep;
}

struct ImplicitReport {
  double max_plus_error = 0, max_minus_error = 0;  // vs the closed form, NaN without one
  double max_roundtrip = 0;                        // |gamma(g, y) - z| / max(1, |z|)
  double max_scaling = 0;                          // relative
  int plus_points = 0, minus_points = 0;
  bool has_closed_form = false, has_minus = false;
};

// Interior grid over U+ (and U- when present), z in [0.5, 2] resp. [-2, -0.5].
inline ImplicitReport check_implicit(const CurvatureFunction& f, int grid = 50,
                                     const std::vector<double>& scales = {0.5, 2.0, 5.0}) {
  ImplicitReport rep;
  rep.has_closed_form = f.family() == Family::hessian_quotient;
  if (!rep.has_closed_form) rep.max_plus_error = rep.max_minus_error = kNaN;
  const double a = f.alpha_value();
  ImplicitBranch br(f);
  auto frac = [grid](int i) { return (i + 0.5) / grid; };
  for (int j = 0; j < grid; ++j) {
    double z = 0.5 + 1.5 * j / (grid - 1);
    double yl = br.left_endpoint(z), yr = br.right_endpoint(z);
    if (!std::isfinite(yr)) yr = 10 * yl;
    for (int i = 0; i < grid; ++i) {
      double y = yl + (yr - yl) * frac(i);
      double x = br.g_plus(y, z);
      rep.max_roundtrip = std::max(rep.max_roundtrip, std::fabs(f.evaluate(x, y) - z) / std::max(1.0, z));
      if (rep.has_closed_form)
        rep.max_plus_error = std::max(rep.max_plus_error, std::fabs(x - hq_closed_form(f, y, z)));
      for (double c : scales) {
        double xs = br.g_plus(c * y, std::pow(c, a) * z);
        rep.max_scaling = std::max(rep.max_scaling, std::fabs(c * x - xs) / std::max(1.0, std::fabs(c * x)));
      }
      ++rep.plus_points;
    }
  }
  if (f.far_chart()) {
    rep.has_minus = true;
    ImplicitBranch bm(f, ImplicitBranch::Sign::minus);
    auto [lo, hi] = bm.u_minus();
    if (!std::isfinite(lo)) lo = hi == 0.0 ? -10.0 : 10 * hi;
    for (int j = 0; j < grid; ++j) {
      double z = -0.5 - 1.5 * j / (grid - 1);
      double s = std::pow(-z, 1.0 / a);  // U- at level z is s U- at level -1
      for (int i = 0; i < grid; ++i) {
        double y = s * (lo + (hi - lo) * frac(i));
        double x = solve_level(f, y, z, LowerChart::far);
        rep.max_roundtrip = std::max(rep.max_roundtrip, std::fabs(f.evaluate(x, y) - z) / std::max(1.0, -z));
        if (rep.has_closed_form)
          rep.max_minus_error = std::max(rep.max_minus_error, std::fabs(x - hq_closed_form(f, y, z)));
        ++rep.minus_points;
      }
    }
  }
  return rep;
}

}  // namespace translab
