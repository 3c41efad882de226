#pragma once

#include <cmath>

namespace translab {

// Second-order jet in two variables: value plus first and second partials.
struct Jet2 {
  double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;

  Jet2() = default;
  Jet2(double c) : v(c) {}
  Jet2(double v_, double x_, double y_, double xx_, double xy_, double yy_)
      : v(v_), x(x_), y(y_), xx(xx_), xy(xy_), yy(yy_) {}

  static Jet2 var_x(double a) { return {a, 1, 0, 0, 0, 0}; }
  static Jet2 var_y(double a) { return {a, 0, 1, 0, 0, 0}; }
};

// f(a) given f, f', f'' at a.v
inline Jet2 chain(const Jet2& a, double f, double d1, double d2) {
  return {f,
          d1 * a.x,
          d1 * a.y,
          d2 * a.x * a.x + d1 * a.xx,
          d2 * a.x * a.y + d1 * a.xy,
          d2 * a.y * a.y + d1 * a.yy};
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v, a.x + b.x, a.y + b.y, a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v, a.x - b.x, a.y - b.y, a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.x, -a.y, -a.xx, -a.xy, -a.yy}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v,
          a.x * b.v + a.v * b.x,
          a.y * b.v + a.v * b.y,
          a.xx * b.v + 2 * a.x * b.x + a.v * b.xx,
          a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
          a.yy * b.v + 2 * a.y * b.y + a.v * b.yy};
}
inline Jet2 operator*(double c, const Jet2& a) {
  return {c * a.v, c * a.x, c * a.y, c * a.xx, c * a.xy, c * a.yy};
}
inline Jet2 operator*(const Jet2& a, double c) { return c * a; }

inline Jet2 reciprocal(const Jet2& a) {
  double r = 1.0 / a.v;
  return chain(a, r, -r * r, 2 * r * r * r);
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
inline Jet2 operator/(const Jet2& a, double c) { return (1.0 / c) * a; }
inline Jet2 operator/(double c, const Jet2& a) { return c * reciprocal(a); }

inline Jet2& operator+=(Jet2& a, const Jet2& b) { return a = a + b; }

// |a|^p with a > 0 required for non-integer p
inline Jet2 pow(const Jet2& a, double p) {
  double f = std::pow(a.v, p);
  double d1 = p * std::pow(a.v, p - 1);
  double d2 = p * (p - 1) * std::pow(a.v, p - 2);
  return chain(a, f, d1, d2);
}

// sign(a)|a|^p, odd extension
inline double spow(double a, double p) {
  return a < 0 ? -std::pow(-a, p) : std::pow(a, p);
}
inline Jet2 spow(const Jet2& a, double p) {
  double m = std::fabs(a.v);
  double s = a.v < 0 ? -1.0 : 1.0;
  double f = s * std::pow(m, p);
  double d1 = p * std::pow(m, p - 1);
  double d2 = s * p * (p - 1) * std::pow(m, p - 2);
  return chain(a, f, d1, d2);
}

inline double value_of(double a) { return a; }
inline double value_of(const Jet2& a) { return a.v; }

}  // namespace translab
