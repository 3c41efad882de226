#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace translab {

// Scalar 4th-order Rosenbrock step, coefficients of odeint's rosenbrock4 with d4 = -0.0362.
// Rhs(t, x) -> f, Jac(t, x) -> {df/dt, df/dx}.
struct Rosenbrock4 {
  static constexpr double gamma = 0.25;
  static constexpr double d1 = 0.25, d2 = -0.1043, d3 = 0.1035, d4 = -0.3620000000000023e-01;
  static constexpr double c2 = 0.386, c3 = 0.21, c4 = 0.63;
  static constexpr double c21 = -0.5668800000000000e+01, a21 = 0.1544000000000000e+01;
  static constexpr double c31 = -0.2430093356833875e+01, c32 = -0.2063599157091915e+00;
  static constexpr double a31 = 0.9466785280815826e+00, a32 = 0.2557011698983284e+00;
  static constexpr double c41 = -0.1073529058151375e+00, c42 = -0.9594562251023355e+01,
                          c43 = -0.2047028614809616e+02;
  static constexpr double a41 = 0.3314825187068521e+01, a42 = 0.2896124015972201e+01,
                          a43 = 0.9986419139977817e+00;
  static constexpr double c51 = 0.7496443313967647e+01, c52 = -0.1024680431464352e+02,
                          c53 = -0.3399990352819905e+02, c54 = 0.1170890893206160e+02;
  static constexpr double a51 = 0.1221224509226641e+01, a52 = 0.6019134481288629e+01,
                          a53 = 0.1253708332932087e+02, a54 = -0.6878860361058950e+00;
  static constexpr double c61 = 0.8083246795921522e+01, c62 = -0.7981132988064893e+01,
                          c63 = -0.3152159432874371e+02, c64 = 0.1631930543123136e+02,
                          c65 = -0.6058818238834054e+01;

  // Returns the new state; err receives the embedded error estimate.
  template <class Rhs, class Jac>
  static double step(Rhs&& f, Jac&& jac, double t, double x, double dt, double& err) {
    auto [dfdt, J] = jac(t, x);
    double m = 1.0 / (gamma * dt) - J;
    double fx = f(t, x);
    double g1 = (fx + dt * d1 * dfdt) / m;
    double g2 = (f(t + c2 * dt, x + a21 * g1) + dt * d2 * dfdt + c21 * g1 / dt) / m;
    double g3 = (f(t + c3 * dt, x + a31 * g1 + a32 * g2) + dt * d3 * dfdt + (c31 * g1 + c32 * g2) / dt) / m;
    double g4 = (f(t + c4 * dt, x + a41 * g1 + a42 * g2 + a43 * g3) + dt * d4 * dfdt +
                 (c41 * g1 + c42 * g2 + c43 * g3) / dt) /
                m;
    double xt = x + a51 * g1 + a52 * g2 + a53 * g3 + a54 * g4;
    double g5 = (f(t + dt, xt) + (c51 * g1 + c52 * g2 + c53 * g3 + c54 * g4) / dt) / m;
    xt += g5;
    err = (f(t + dt, xt) + (c61 * g1 + c62 * g2 + c63 * g3 + c64 * g4 + c65 * g5) / dt) / m;
    return xt + err;
  }
};

// Step-size controller with the predictive (Gustafsson) correction.
class Rosenbrock4Controller {
 public:
  Rosenbrock4Controller(double atol, double rtol, double max_dt = 0) : atol_(atol), rtol_(rtol), max_dt_(max_dt) {}

  // On success advances t and returns true; dt always receives the proposal for the next try.
  template <class Rhs, class Jac>
  bool try_step(Rhs&& f, Jac&& jac, double& t, double x, double& xout, double& dt) {
    if (max_dt_ > 0 && dt > max_dt_) {
      dt = max_dt_;
      return false;
    }
    const double safe = 0.9, fac1 = 5.0, fac2 = 1.0 / 6.0;
    double xerr;
    xout = Rosenbrock4::step(f, jac, t, x, dt, xerr);
    double sk = atol_ + rtol_ * std::max(std::fabs(x), std::fabs(xout));
    double err = std::fabs(xerr) / sk;
    if (!std::isfinite(err)) throw std::domain_error("non-finite Rosenbrock stage");
    double fac = std::max(fac2, std::min(fac1, std::pow(err, 0.25) / safe));
    double dt_new = dt / fac;
    if (err <= 1.0) {
      if (first_) {
        first_ = false;
      } else {
        double pred = (dt_old_ / dt) * std::pow(err * err / err_old_, 0.25) / safe;
        pred = std::max(fac2, std::min(fac1, pred));
        fac = std::max(fac, pred);
        dt_new = dt / fac;
      }
      dt_old_ = dt;
      err_old_ = std::max(0.01, err);
      if (last_rejected_) dt_new = std::min(dt_new, dt);
      t += dt;
      dt = max_dt_ > 0 ? std::min(max_dt_, dt_new) : dt_new;
      last_rejected_ = false;
      return true;
    }
    dt = dt_new;
    last_rejected_ = true;
    return false;
  }

 private:
  double atol_, rtol_, max_dt_;
  bool first_ = true, last_rejected_ = false;
  double dt_old_ = 0, err_old_ = 0;
};

}  // namespace translab
