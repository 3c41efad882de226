#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace translab {

// Ordinary least squares; columns of A are basis functions sampled at the data points.
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() < A.cols()) throw RangeError("not enough samples for the fit");
  return A.colPivHouseholderQr().solve(b);
}

struct LineFit {
  double slope = 0, intercept = 0, rms = 0;
};

// y = intercept + slope * x
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int m = int(x.size());
  if (m < 2 || y.size() != x.size()) throw RangeError("line fit needs at least two points");
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i];
    b(i) = y[i];
  }
  Eigen::VectorXd s = least_squares(A, b);
  LineFit f;
  f.intercept = s(0);
  f.slope = s(1);
  f.rms = std::sqrt((A * s - b).squaredNorm() / m);
  return f;
}

// log-log regression of positive data
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw RangeError("log-log fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace translab
