#include <gtest/gtest.h>

#include <cmath>

#include "translab/graph.hpp"
#include "translab/ode.hpp"

using namespace translab;

namespace {
IntegratorConfig tight(double rel = 1e-12, double abs = 1e-14) {
  IntegratorConfig c;
  c.rel_tol = rel;
  c.abs_tol = abs;
  return c;
}
}  // namespace

TEST(Dp5, ExponentialDecay) {
  auto tr = integrate<1>([](double, const State<1>& y) { return State<1>{-y[0]}; }, 0.0, {1.0}, 5.0, tight());
  EXPECT_EQ(tr.termination, Termination::reached_end);
  EXPECT_NEAR(tr.y.back()[0], std::exp(-5.0), 1e-12);
  EXPECT_NEAR(tr.at(2.3)[0], std::exp(-2.3), 1e-11);
  EXPECT_NEAR(tr.derivative_at(2.3)[0], -std::exp(-2.3), 1e-9);
}

TEST(Dp5, OscillatorEnergy) {
  auto rhs = [](double, const State<2>& y) { return State<2>{y[1], -y[0]}; };
  auto tr = integrate<2>(rhs, 0.0, {1.0, 0.0}, 20.0, tight());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_NEAR(tr.y[i][0], std::cos(tr.t[i]), 1e-10);
    EXPECT_NEAR(tr.y[i][1], -std::sin(tr.t[i]), 1e-10);
  }
}

TEST(Dp5, FifthOrderConvergence) {
  auto run = [](double h) {
    IntegratorConfig c;
    c.fixed_step = h;
    auto tr = integrate<1>([](double t, const State<1>& y) { return State<1>{std::cos(t) * y[0]}; }, 0.0, {1.0},
                           2.0, c);
    return std::fabs(tr.y.back()[0] - std::exp(std::sin(2.0)));
  };
  double order = std::log2(run(0.05) / run(0.025));
  EXPECT_NEAR(order, 5.0, 0.3);
}

TEST(Events, RisingZeroOfSine) {
  auto rhs = [](double, const State<2>& y) { return State<2>{y[1], -y[0]}; };
  EventSpec<2> ev{[](double, const State<2>& y) { return y[0]; }, Direction::rising, false, "x"};
  auto tr = integrate<2>(rhs, 0.0, {1.0, 0.0}, 12.0, tight(), {ev});
  ASSERT_EQ(tr.events.size(), 2u);
  EXPECT_NEAR(tr.events[0].t, 1.5 * M_PI, 1e-10);
  EXPECT_NEAR(tr.events[1].t, 3.5 * M_PI, 1e-10);
}

TEST(Events, TerminalStopsIntegration) {
  auto rhs = [](double, const State<1>&) { return State<1>{1.0}; };
  EventSpec<1> ev{[](double, const State<1>& y) { return y[0] - 2.5; }, Direction::any, true, "stop"};
  auto tr = integrate<1>(rhs, 0.0, {0.0}, 10.0, tight(), {ev});
  EXPECT_EQ(tr.termination, Termination::terminal_event);
  EXPECT_NEAR(tr.t_end(), 2.5, 1e-10);
}

TEST(Config, RejectsBadTolerances) {
  IntegratorConfig c;
  c.rel_tol = -1;
  EXPECT_THROW(c.validate(), ParameterError);
  EXPECT_THROW(integrate<1>([](double, const State<1>& y) { return y; }, 1.0, {1.0}, 0.5, tight()), ParameterError);
}

TEST(Dp5, NonFiniteStartThrows) {
  auto rhs = [](double, const State<1>& y) { return State<1>{1.0 / y[0]}; };
  EXPECT_THROW(integrate<1>(rhs, 0.0, {0.0}, 1.0, tight()), DomainError);
}

TEST(Rosenbrock, StiffLinear) {
  // x' = -1000 (x - cos t)
  auto f = [](double t, double x) { return -1000.0 * (x - std::cos(t)); };
  auto jac = [](double t, double) { return std::pair<double, double>{-1000.0 * std::sin(t), -1000.0}; };
  Rosenbrock4Controller ctl(1e-12, 1e-10);
  double t = 0, x = 1, dt = 1e-4;
  int steps = 0;
  while (t < 1.0 && steps < 100000) {
    dt = std::min(dt, 1.0 - t);
    double xo;
    if (ctl.try_step(f, jac, t, x, xo, dt)) x = xo;
    ++steps;
  }
  double lam = 1000.0;
  double exact = lam * (lam * std::cos(1.0) + std::sin(1.0)) / (lam * lam + 1) +
                 (1 - lam * lam / (lam * lam + 1)) * std::exp(-lam);
  EXPECT_NEAR(x, exact, 1e-8);
  EXPECT_LT(steps, 5000);
}

TEST(SlopeField, BothBackendsAgree) {
  auto f = parse_curvature_key("mean:n=3");
  SlopeField F(f);
  auto c = tight();
  auto a = integrate_graph(F, {1.0, 0.5, 0, 0}, 20.0, c, GraphBackend::explicit_rk);
  auto b = integrate_graph(F, {1.0, 0.5, 0, 0}, 20.0, c, GraphBackend::rosenbrock);
  for (double r : {2.0, 5.0, 10.0, 19.0}) {
    EXPECT_NEAR(a.slope(r), b.slope(r), 1e-7 * (1 + a.slope(r)));
    EXPECT_NEAR(a.height(r), b.height(r), 1e-7 * (1 + std::fabs(a.height(r))));
  }
  EXPECT_LE(a.max_residual(), 1e-8);
  EXPECT_LE(b.max_residual(), 1e-8);
}
