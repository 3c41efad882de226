#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"

namespace translab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

struct Rational {
  long p = 1, q = 1;
  double value() const { return double(p) / double(q); }
  // c^alpha for c < 0 is defined only when p and q are both odd
  bool odd() const { return (std::labs(p) % 2 == 1) && (std::labs(q) % 2 == 1); }
};

enum class Family { mean, gauss_root, hessian_quotient, s_k, k_norm, k_convexity };
enum class OriginValue { continuous_zero, undefined };
enum class DegeneracyKind { one_nondegenerate, one_degenerate };

inline const char* to_string(OriginValue o) {
  return o == OriginValue::continuous_zero ? "continuous_zero" : "undefined";
}
inline const char* to_string(DegeneracyKind d) {
  return d == DegeneracyKind::one_nondegenerate ? "one_nondegenerate" : "one_degenerate";
}

struct SignedMeta {
  double x0 = 0, y0 = 0;
  OriginValue origin_value = OriginValue::undefined;
};

struct DegeneracyClass {
  DegeneracyKind kind;
  double value_at_01;
};

// Interval of X on the line y = sigma on which X -> gamma(X, sigma) is finite and
// strictly increasing, together with the open range of values it takes.
struct Chart {
  double x_lo = -kInf, x_hi = kInf;
  double v_lo = -kInf, v_hi = kInf;
  bool contains_x(double X) const { return X > x_lo && X < x_hi; }
  bool reaches(double w) const { return w > v_lo && w < v_hi; }
  Chart reflected() const { return {-x_hi, -x_lo, -v_hi, -v_lo}; }
};

class CurvatureFunction {
 public:
  static CurvatureFunction build(Family fam, int n, int k = 0, int l = 0) {
    CurvatureFunction f;
    f.fam_ = fam;
    f.n_ = n;
    f.k_ = k;
    f.l_ = l;
    if (n < 2) throw ParameterError("dimension n must be at least 2");
    for (int j = 0; j <= n; ++j) f.C_[j] = binom(n - 1, j);
    std::ostringstream key;
    switch (fam) {
      case Family::mean:
        f.name_ = "mean";
        key << "mean:n=" << n;
        break;
      case Family::gauss_root:
        f.name_ = "gauss_root";
        key << "gauss:n=" << n;
        break;
      case Family::hessian_quotient:
        if (!(0 <= l && l < k && k <= n))
          throw ParameterError("hessian quotient needs 0 <= l < k <= n");
        f.name_ = "hessian_quotient";
        if (l == k - 1 && k >= 2)
          key << "qk:k=" << k << ",n=" << n;
        else
          key << "hq:k=" << k << ",l=" << l << ",n=" << n;
        break;
      case Family::s_k:
        if (!(1 <= k && k <= n)) throw ParameterError("s_k needs 1 <= k <= n");
        f.name_ = "s_k";
        f.alpha_ = {k, 1};
        key << "sk:k=" << k << ",n=" << n;
        break;
      case Family::k_norm:
        if (k < 1) throw ParameterError("k_norm needs k >= 1");
        f.name_ = "k_norm";
        key << "knorm:k=" << k << ",n=" << n;
        break;
      case Family::k_convexity:
        if (!(1 <= k && k <= n)) throw ParameterError("k_convexity needs 1 <= k <= n");
        f.name_ = "k_convexity";
        key << "kconv:k=" << k << ",n=" << n;
        break;
    }
    f.key_ = key.str();
    f.cN_ = 1.0;
    double v01 = f.raw(0.0, 1.0);
    if (!std::isfinite(v01) && fam != Family::gauss_root && fam != Family::k_convexity)
      throw ConstructionError("slice value at (0,1) is not finite for " + f.key_);
    f.value_at_01_ = std::isfinite(v01) ? v01 : 0.0;
    if (f.value_at_01_ > 1e-12) f.cN_ = f.value_at_01_;
    if (!f.cone_contains(1.0, 1.0)) throw ConstructionError("empty slice cone for " + f.key_);
    f.init_signed();
    return f;
  }

  const std::string& name() const { return name_; }
  const std::string& key() const { return key_; }
  Family family() const { return fam_; }
  int n() const { return n_; }
  int k() const { return k_; }
  int l() const { return l_; }
  Rational alpha() const { return alpha_; }
  double alpha_value() const { return alpha_.value(); }
  double beta() const { return (alpha_value() - 1.0) / (2.0 * alpha_value()); }
  double normalization() const { return cN_; }
  const std::optional<SignedMeta>& signed_meta() const { return signed_; }
  bool is_signed() const { return signed_.has_value(); }

  // Literal slice formula divided by the normalization constant.
  double evaluate(double x, double y) const { return raw(x, y) / cN_; }
  double raw(double x, double y) const { return eval_raw(x, y); }

  Jet2 jet(double x, double y) const {
    return eval_raw(Jet2::var_x(x), Jet2::var_y(y)) / cN_;
  }

  std::array<double, 2> grad(double x, double y) const {
    Jet2 j = jet(x, y);
    return {j.x, j.y};
  }

  bool cone_contains(double x, double y) const {
    switch (fam_) {
      case Family::mean:
        return x + (n_ - 1) * y > 0;
      case Family::gauss_root:
      case Family::k_norm:
        return x > 0 && y > 0;
      case Family::hessian_quotient:
      case Family::s_k:
        if (k_ == 1) return x + (n_ - 1) * y > 0;
        return y > 0 && C(k_) * y + C(k_ - 1) * x > 0;
      case Family::k_convexity:
        return y > 0 && x + (k_ - 1) * y > 0;
    }
    return false;
  }

  DegeneracyClass classify_degeneracy() const {
    if (!cone_contains(1e-12, 1.0))
      throw DomainError("(0,1) is outside the closure of the slice cone");
    return {value_at_01_ > 1e-12 ? DegeneracyKind::one_nondegenerate
                                 : DegeneracyKind::one_degenerate,
            value_at_01_};
  }
  bool nondegenerate() const { return value_at_01_ > 1e-12; }

  std::array<double, 2> zero_ray() const {
    if (!signed_) throw UnsupportedError(key_ + " has no zero ray (positive-only family)");
    return {signed_->x0, signed_->y0};
  }

  // Chart on y = +1 used for the positive level sets.
  Chart plus_chart() const {
    switch (fam_) {
      case Family::mean:
      case Family::k_norm:
        return {};
      case Family::s_k:
        return {};
      case Family::gauss_root:
        return {0.0, kInf, 0.0, kInf};
      case Family::k_convexity: {
        double hi = C(k_) > 0 ? (k_ / C(k_)) / cN_ : kInf;
        return {-(k_ - 1.0), kInf, 0.0, hi};
      }
      case Family::hessian_quotient: {
        int m = k_ - l_;
        double hi = l_ >= 1 ? std::pow(C(k_ - 1) / C(l_ - 1), 1.0 / m) / cN_ : kInf;
        if (m % 2 == 1) {
          if (l_ == 0) return {};
          return {-C(l_) / C(l_ - 1), kInf, -kInf, hi};
        }
        return {-C(k_) / C(k_ - 1), kInf, 0.0, hi};
      }
    }
    return {};
  }

  // Chart on y = -1 carrying the -1 level (the far side of the pole for quotients).
  std::optional<Chart> far_chart() const {
    switch (fam_) {
      case Family::hessian_quotient: {
        int m = k_ - l_;
        if (l_ >= 1) {
          double hi = -std::pow(C(k_ - 1) / C(l_ - 1), 1.0 / m) / cN_;
          return Chart{C(l_) / C(l_ - 1), kInf, -kInf, hi};
        }
        if (m % 2 == 1) return Chart{};
        return Chart{-kInf, C(k_) / C(k_ - 1), -kInf, 0.0};
      }
      case Family::s_k:
        if (k_ % 2 == 1) return Chart{};
        return std::nullopt;
      case Family::k_norm:
        return Chart{};
      default:
        return std::nullopt;
    }
  }

  // Chart on y = -1 obtained by odd reflection of the plus chart.
  std::optional<Chart> reflected_chart() const {
    if (!odd_symmetric()) return std::nullopt;
    return plus_chart().reflected();
  }

  bool odd_symmetric() const {
    switch (fam_) {
      case Family::mean:
      case Family::hessian_quotient:
      case Family::k_norm:
        return true;
      case Family::s_k:
        return k_ % 2 == 1;
      default:
        return false;
    }
  }

  double C(int j) const { return (j < 0 || j > n_) ? 0.0 : C_[j]; }

 private:
  template <class T>
  static T ipow(const T& a, int e) {
    T r(1.0);
    for (int i = 0; i < e; ++i) r = r * a;
    return r;
  }

  template <class T>
  T eval_raw(const T& x, const T& y) const {
    using std::pow;
    const double nan = kNaN;
    switch (fam_) {
      case Family::mean:
        return x + (n_ - 1.0) * y;
      case Family::gauss_root: {
        if (!(value_of(x) > 0 && value_of(y) > 0)) return T(nan);
        return pow(x * ipow(y, n_ - 1), 1.0 / n_);
      }
      case Family::hessian_quotient: {
        int m = k_ - l_;
        T num = C(k_) * y + C(k_ - 1) * x;
        T den = C(l_) * y + C(l_ - 1) * x;
        if (value_of(den) == 0.0) return T(nan);
        T rho = num / den;
        if (m == 1) return y * rho;
        if (m % 2 == 1) return y * spow(rho, 1.0 / m);
        if (value_of(rho) < 0) return T(nan);
        return y * pow(rho, 1.0 / m);
      }
      case Family::s_k:
        return ipow(y, k_ - 1) * (C(k_) * y + C(k_ - 1) * x);
      case Family::k_norm:
        return spow(spow(x, double(k_)) + (n_ - 1.0) * spow(y, double(k_)), 1.0 / k_);
      case Family::k_convexity: {
        T a = x + (k_ - 1.0) * y;
        if (value_of(a) <= 0 || value_of(y) <= 0) return T(nan);
        T s = C(k_ - 1) / a;
        if (C(k_) > 0) s = s + C(k_) / (k_ * y);
        return 1.0 / s;
      }
    }
    return T(nan);
  }

  void init_signed() {
    bool has = false;
    OriginValue ov = OriginValue::undefined;
    double ratio = 0;
    if (fam_ == Family::hessian_quotient && (k_ - l_) % 2 == 1 && k_ < n_) {
      has = true;
      ratio = -C(k_) / C(k_ - 1);
      ov = l_ == 0 ? OriginValue::continuous_zero : OriginValue::undefined;
    } else if (fam_ == Family::s_k && k_ % 2 == 1 && k_ < n_ && k_ >= 1) {
      has = true;
      ratio = -C(k_) / C(k_ - 1);
      ov = OriginValue::continuous_zero;
    }
    if (!has) return;
    double nrm = std::hypot(ratio, 1.0);
    signed_ = SignedMeta{ratio / nrm, 1.0 / nrm, ov};
  }

  Family fam_ = Family::mean;
  int n_ = 0, k_ = 0, l_ = 0;
  Rational alpha_{1, 1};
  double cN_ = 1.0;
  double value_at_01_ = 0.0;
  std::array<double, 64> C_{};
  std::string name_, key_;
  std::optional<SignedMeta> signed_;
};

// Registry keys: mean:n=5, gauss:n=4, hq:k=2,l=0,n=4, qk:k=3,n=7, sk:k=3,n=5,
// knorm:k=2,n=3, kconv:k=2,n=4
inline CurvatureFunction parse_curvature_key(const std::string& key) {
  auto colon = key.find(':');
  if (colon == std::string::npos) throw ParameterError("curvature key needs 'family:params': " + key);
  std::string fam = key.substr(0, colon);
  std::map<std::string, int> p;
  std::stringstream ss(key.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParameterError("bad parameter '" + item + "' in " + key);
    std::string name = item.substr(0, eq);
    try {
      std::size_t used = 0;
      int v = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
      p[name] = v;
    } catch (const std::exception&) {
      throw ParameterError("bad integer in '" + item + "'");
    }
  }
  auto need = [&](const char* nm) {
    auto it = p.find(nm);
    if (it == p.end()) throw ParameterError(std::string("missing ") + nm + " in " + key);
    int v = it->second;
    p.erase(it);
    return v;
  };
  auto done = [&]() {
    if (!p.empty()) throw ParameterError("unknown parameter '" + p.begin()->first + "' in " + key);
  };
  if (fam == "mean") {
    int n = need("n");
    done();
    return CurvatureFunction::build(Family::mean, n);
  }
  if (fam == "gauss") {
    int n = need("n");
    done();
    return CurvatureFunction::build(Family::gauss_root, n);
  }
  if (fam == "hq") {
    int k = need("k"), l = need("l"), n = need("n");
    done();
    return CurvatureFunction::build(Family::hessian_quotient, n, k, l);
  }
  if (fam == "qk") {
    int k = need("k"), n = need("n");
    done();
    if (k < 2) throw ParameterError("qk needs k >= 2");
    return CurvatureFunction::build(Family::hessian_quotient, n, k, k - 1);
  }
  if (fam == "sk") {
    int k = need("k"), n = need("n");
    done();
    return CurvatureFunction::build(Family::s_k, n, k);
  }
  if (fam == "knorm") {
    int k = need("k"), n = need("n");
    done();
    return CurvatureFunction::build(Family::k_norm, n, k);
  }
  if (fam == "kconv") {
    int k = need("k"), n = need("n");
    done();
    return CurvatureFunction::build(Family::k_convexity, n, k);
  }
  throw ParameterError("unknown curvature family '" + fam + "'");
}

inline std::vector<std::string> registry_templates() {
  return {"mean:n=<n>",         "gauss:n=<n>",         "hq:k=<k>,l=<l>,n=<n>",
          "qk:k=<k>,n=<n>",     "sk:k=<k>,n=<n>",      "knorm:k=<k>,n=<n>",
          "kconv:k=<k>,n=<n>"};
}

inline std::vector<std::string> registry_examples() {
  return {"mean:n=3",     "mean:n=5",      "gauss:n=4",      "gauss:n=5",    "hq:k=2,l=0,n=3",
          "hq:k=2,l=1,n=4", "hq:k=3,l=1,n=5", "qk:k=3,n=7",   "qk:k=4,n=6",   "qk:k=5,n=6",
          "sk:k=3,n=5",   "knorm:k=2,n=3", "kconv:k=2,n=4"};
}

// Central differences with step 1e-6 * max(1,|x|,|y|).
inline std::array<double, 2> finite_difference_grad(const CurvatureFunction& f, double x, double y) {
  double h = 1e-6 * std::max({1.0, std::fabs(x), std::fabs(y)});
  return {(f.evaluate(x + h, y) - f.evaluate(x - h, y)) / (2 * h),
          (f.evaluate(x, y + h) - f.evaluate(x, y - h)) / (2 * h)};
}

// c^alpha with the odd rule for c < 0
inline double scale_power(double c, Rational a) {
  if (c >= 0) return std::pow(c, a.value());
  if (!a.odd()) return kNaN;
  return -std::pow(-c, a.value());
}

// Random point of the slice cone: y in (0.2, 3), x spread over the admissible ray range.
inline std::array<double, 2> sample_cone_point(const CurvatureFunction& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uy(0.2, 3.0), ut(0.02, 3.0);
  for (int tries = 0; tries < 1000; ++tries) {
    double y = uy(rng);
    double lo = -(f.n() - 1.0);
    switch (f.family()) {
      case Family::gauss_root:
      case Family::k_norm:
        lo = 0.0;
        break;
      case Family::hessian_quotient:
      case Family::s_k:
        lo = f.k() == 1 ? -(f.n() - 1.0) : -f.C(f.k()) / f.C(f.k() - 1);
        break;
      case Family::k_convexity:
        lo = -(f.k() - 1.0);
        break;
      default:
        break;
    }
    double x = (lo + ut(rng)) * y;
    if (f.cone_contains(x, y) && std::isfinite(f.evaluate(x, y))) return {x, y};
  }
  return {1.0, 1.0};
}

struct HomogeneityReport {
  double max_defect = 0;
  int evaluated = 0;
  int skipped = 0;
};

// Relative homogeneity defect over sampled (c, x, y); c < 0 included for odd-symmetric signed functions.
inline HomogeneityReport check_homogeneity(const CurvatureFunction& f, int samples, std::uint64_t seed) {
  if (samples < 1) throw ParameterError("samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> cs = {0.5, 2.0, 3.0};
  if (f.is_signed() && f.alpha().odd()) cs.insert(cs.end(), {-0.5, -2.0, -3.0});
  HomogeneityReport rep;
  for (int i = 0; i < samples; ++i) {
    auto [x, y] = sample_cone_point(f, rng);
    double g = f.evaluate(x, y);
    for (double c : cs) {
      double gc = f.evaluate(c * x, c * y);
      double cp = scale_power(c, f.alpha());
      if (!std::isfinite(gc) || !std::isfinite(g) || !std::isfinite(cp)) {
        ++rep.skipped;
        continue;
      }
      double d = std::fabs(gc - cp * g) / std::max(1.0, std::fabs(g));
      rep.max_defect = std::max(rep.max_defect, d);
      ++rep.evaluated;
    }
  }
  return rep;
}

}  // namespace translab
