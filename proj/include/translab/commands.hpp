#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "barrier.hpp"
#include "bowl.hpp"
#include "catenoid.hpp"
#include "curvature.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "suites.hpp"

namespace translab {

enum ExitCode { kExitOk = 0, kExitCheck = 1, kExitUsage = 2, kExitSolver = 3 };

struct CommandResult {
  int exit_code = kExitOk;
  Json summary;
  std::vector<CheckResult> checks;
  std::filesystem::path out_dir;
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline IntegratorConfig integrator_from(const RunConfig& c) {
  IntegratorConfig ic;
  ic.rel_tol = c.real("rel_tol", 1e-12);
  ic.abs_tol = c.real("abs_tol", 1e-14);
  ic.validate();
  return ic;
}

inline CurvatureFunction curvature_from(const RunConfig& c) {
  if (!c.has("curvature")) throw ConfigError("missing curvature key (--curvature)");
  try {
    return parse_curvature_key(c.str("curvature"));
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  } catch (const ConstructionError& e) {
    throw ConfigError(e.what());
  }
}

inline std::filesystem::path prepare_out(const RunConfig& c) {
  std::filesystem::path p = c.str("out", "out");
  std::filesystem::create_directories(p);
  return p;
}

inline Json coefficients_json(const AsymptoticReport& r) {
  Json j;
  j["regime"] = to_string(r.regime);
  j["window"] = {num(r.r_lo), num(r.r_hi)};
  j["samples"] = r.samples;
  j["fit_rms"] = num(r.fit_rms);
  Json cs = Json::object();
  for (const auto& c : r.coefficients)
    cs[c.name] = {{"formula", num(c.formula)}, {"fitted", num(c.fitted)}, {"abs_error", num(c.abs_error)},
                  {"rel_error", num(c.rel_error)}};
  j["coefficients"] = cs;
  return j;
}

inline CommandResult finish(RunManifest& m, const std::filesystem::path& out, Json summary, double t0_wall) {
  CommandResult r;
  r.out_dir = out;
  r.checks = m.checks();
  r.summary = std::move(summary);
  r.exit_code = m.all_pass() ? kExitOk : kExitCheck;
  write_json(out / "manifest.json", m.to_json(t0_wall));
  return r;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Whether b-hat passes: 5% relative, or 1e-2 absolute where the formula vanishes.
inline bool b_coefficient_ok(const Coefficient& c) {
  if (std::fabs(c.formula) <= 1e-12) return c.abs_error <= 1e-2;
  return c.rel_error <= 0.05;
}

inline CommandResult run_bowl(const RunConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto f = detail::curvature_from(c);
  double r_max = c.real("r_max", 500);
  if (!(r_max > 0) || !std::isfinite(r_max)) throw ConfigError("r_max must be positive");
  auto ic = detail::integrator_from(c);
  double eps0 = c.real("eps0", 1e-6);
  std::string regime_s = c.str("regime", "auto");
  Regime regime;
  if (regime_s == "auto")
    regime = f.nondegenerate() ? Regime::nondegenerate : Regime::degenerate;
  else if (regime_s == "nondegenerate")
    regime = Regime::nondegenerate;
  else if (regime_s == "degenerate")
    regime = Regime::degenerate;
  else
    throw ConfigError("regime must be auto, nondegenerate or degenerate");
  if (!(r_max > eps0)) throw ConfigError("r_max must exceed eps0");

  auto out = detail::prepare_out(c);
  RunManifest m("bowl", c.echo());
  BowlProfile b = solve_bowl(f, r_max, ic, GraphBackend::automatic, eps0);
  FitWindow w{c.real("fit_lo", b.r_end() / 10), c.real("fit_hi", b.r_end() / 2)};

  Json j;
  j["curvature_key"] = f.key();
  j["alpha"] = f.alpha_value();
  j["beta"] = f.beta();
  j["lambda0"] = b.lambda0;
  j["eps0"] = b.eps0;
  j["status"] = b.status;
  j["r_end"] = b.r_end();
  j["nodes"] = b.path.size();
  j["backend"] = to_string(b.path.backend);
  j["max_residual"] = b.max_residual();
  m.add_check("residual", b.max_residual() <= 1e-8, "max " + detail::fmt(b.max_residual()));

  try {
    AsymptoticReport rep = fit_tail(f, b, regime, w);
    j["fit"] = detail::coefficients_json(rep);
    if (regime == Regime::nondegenerate) {
      const auto& a = rep.get("a");
      const auto& bc = rep.get("b");
      m.add_check("coefficient_a", a.rel_error <= 0.01, "rel " + detail::fmt(a.rel_error));
      m.add_check("coefficient_b", b_coefficient_ok(bc), "abs " + detail::fmt(bc.abs_error));
    } else {
      const auto& d = rep.get("d_gamma");
      const auto& A = rep.get("A_gamma");
      m.add_check("coefficient_d_gamma", d.rel_error <= 0.02, "rel " + detail::fmt(d.rel_error));
      m.add_check("coefficient_A_gamma", A.rel_error <= 0.02, "rel " + detail::fmt(A.rel_error));
    }
  } catch (const Error& e) {
    j["fit"] = {{"error", e.what()}, {"kind", e.kind()}};
    m.add_check("fit", false, e.what());
  }
  if (b.status == "entire") {
    double g = growth_exponent(b, w);
    j["growth_exponent"] = g;
    if (regime == Regime::nondegenerate)
      m.add_check("growth", std::fabs(g - (f.alpha_value() + 1)) <= 0.05, "slope " + detail::fmt(g));
  }

  write_csv(out / "bowl.csv", "r,u,v,residual", {&b.path.r, &b.path.u, &b.path.v, &b.path.residual});
  m.add_file(out / "bowl.csv");
  write_json(out / "bowl.json", j);
  m.add_file(out / "bowl.json");
  if (c.boolean("plot", true)) {
    write_text(out / "plot_bowl.gp",
               "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'r'\nset ylabel 'u'\n"
               "set terminal pngcairo size 900,600\nset output 'bowl.png'\n"
               "plot 'bowl.csv' using 1:2 with lines title '" + f.key() + "'\n");
    m.add_file(out / "plot_bowl.gp");
  }
  return detail::finish(m, out, j, detail::seconds_since(t0));
}

inline CommandResult run_catenoid(const RunConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto f = detail::curvature_from(c);
  if (!f.is_signed()) throw UnsupportedError("curvature function is not signed");
  CatenoidConfig cc;
  cc.R = c.real("R", 1.0);
  cc.r_max = c.real("r_max", 100.0);
  cc.handoff = c.real("handoff", cc.handoff);
  cc.integrator = detail::integrator_from(c);
  if (!(cc.R > 0)) throw ConfigError("R must be positive");
  if (!(cc.r_max > 2 * cc.R)) throw ConfigError("r_max must exceed 2R");
  if (!(cc.handoff > 0 && cc.handoff < 1.5)) throw ConfigError("handoff angle must lie in (0, 1.5)");

  auto out = detail::prepare_out(c);
  RunManifest m("catenoid", c.echo());
  CatenoidResult r = solve_catenoid(f, cc);
  const auto zr = f.zero_ray();
  double kappa_formula = -zr[0] / (zr[1] * cc.R);

  Json j;
  j["curvature_key"] = f.key();
  j["R"] = cc.R;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["handoff"] = r.handoff;
  j["r_max"] = cc.r_max;
  j["case"] = to_string(r.origin_case);
  j["kappa_at_neck"] = r.neck.kappa_at_neck;
  j["kappa_formula"] = kappa_formula;
  j["neck_epsilon"] = r.neck.epsilon;
  j["s0"] = num(r.s0);
  j["s1"] = num(r.s1);
  j["s0_events"] = r.s0_events;
  j["s1_events"] = r.s1_events;
  j["C_plus"] = num(r.C_plus);
  j["C_minus"] = num(r.C_minus);
  j["C_plus_window2"] = num(r.C_plus_alt);
  j["C_minus_window2"] = num(r.C_minus_alt);
  j["upper_growth"] = num(r.upper_growth);
  j["upper_min_theta"] = num(r.upper_min_psi);
  Json e;
  e["kind"] = r.end.kind;
  e["b"] = num(r.end.b);
  e["b_fit"] = num(r.end.b_fit);
  e["exponent"] = num(r.end.exponent);
  e["exponent_fit"] = num(r.end.exponent_fit);
  e["a_R"] = num(r.end.a_R);
  e["a_match"] = num(r.end.a_match);
  e["log_coefficient"] = num(r.end.log_coefficient);
  if (f.family() == Family::hessian_quotient && f.l() == f.k() - 1 && f.k() > 1)
    e["exponent_prose"] = (2.0 * (f.k() + 1) - f.n()) / (f.k() - 1);
  j["end_behavior"] = e;
  j["embeddedness"] = {{"status", r.embed_status},
                       {"r_star", num(r.embed_r_star)},
                       {"min_gap", num(r.embed_min_gap)},
                       {"widening", r.embed_widening}};
  j["max_residual_upper"] = r.upper.max_residual();
  j["max_residual_lower"] = r.lower.max_residual();
  j["arc_length_defect"] = r.arc_length_defect;

  m.add_check("neck_curvature", std::fabs(r.neck.kappa_at_neck - kappa_formula) <= 1e-8,
              detail::fmt(r.neck.kappa_at_neck));
  m.add_check("residual_upper", r.upper.max_residual() <= 1e-8, detail::fmt(r.upper.max_residual()));
  m.add_check("residual_lower", r.lower.max_residual() <= 1e-8, detail::fmt(r.lower.max_residual()));
  m.add_check("arc_length", r.arc_length_defect <= 1e-8, detail::fmt(r.arc_length_defect));
  m.add_check("upper_theta_increasing_after_minimum", r.upper_monotone_after_min);
  if (r.origin_case == OriginCase::continuous_origin)
    m.add_check("vertical_crossing", r.s0_events == 1, std::to_string(r.s0_events) + " crossings");
  m.add_check("embeddedness", r.embed_status != "overlap", r.embed_status + " gap " + detail::fmt(r.embed_min_gap));
  m.add_check("upper_growth", std::fabs(r.upper_growth - (r.alpha + 1)) <= 0.02 * (r.alpha + 1),
              detail::fmt(r.upper_growth));
  auto stable = [](const std::optional<double>& a, const std::optional<double>& b) {
    return !a || (b && std::fabs(*a - *b) <= 1e-3 * std::max(1.0, std::fabs(*a)));
  };
  m.add_check("offset_window_stability", stable(r.C_plus, r.C_plus_alt) && stable(r.C_minus, r.C_minus_alt));
  if (r.origin_case == OriginCase::derivative_origin) {
    bool ok = r.end.kind == "logarithmic" ? std::fabs(r.end.b_fit - r.end.b) <= 0.05 * std::fabs(r.end.b)
                                          : std::fabs(r.end.exponent_fit - r.end.exponent) <=
                                                0.05 * std::fabs(r.end.exponent);
    m.add_check("end_exponent", ok,
                detail::fmt(r.end.kind == "logarithmic" ? r.end.b_fit : r.end.exponent_fit));
  }

  auto dump = [&](const Branch& b, const std::string& name) {
    write_csv(out / name, "s,r,u,theta,kappa,residual", {&b.s, &b.r, &b.u, &b.psi, &b.kappa, &b.residual});
    m.add_file(out / name);
  };
  dump(r.upper, "catenoid_upper.csv");
  dump(r.lower, "catenoid_lower.csv");
  write_json(out / "catenoid.json", j);
  m.add_file(out / "catenoid.json");
  if (c.boolean("plot", true)) {
    write_text(out / "plot_catenoid.gp",
               "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'r'\nset ylabel 'u'\n"
               "set terminal pngcairo size 900,600\nset output 'catenoid.png'\n"
               "plot 'catenoid_upper.csv' using 2:3 with lines title 'upper', \\\n"
               "     'catenoid_lower.csv' using 2:3 with lines title 'lower'\n");
    m.add_file(out / "plot_catenoid.gp");
  }
  return detail::finish(m, out, j, detail::seconds_since(t0));
}

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s = {"homogeneity", "monotonicity", "implicit", "ordering", "barrier"};
  return s;
}

inline CommandResult run_verify(const RunConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto f = detail::curvature_from(c);
  std::string suite = c.str("suite", "all");
  std::vector<std::string> run;
  if (suite == "all") {
    run = verify_suites();
  } else {
    if (std::find(verify_suites().begin(), verify_suites().end(), suite) == verify_suites().end())
      throw ConfigError("unknown suite '" + suite + "'");
    run = {suite};
  }
  auto seed = std::uint64_t(c.integer("seed", 1));
  int samples = int(c.integer("samples", 200));
  int pairs = int(c.integer("pairs", 50));
  double r_max = c.real("r_max", 100);
  if (samples < 1 || pairs < 1 || !(r_max > 1)) throw ConfigError("samples, pairs must be positive and r_max > 1");
  auto ic = detail::integrator_from(c);

  auto out = detail::prepare_out(c);
  RunManifest m("verify", c.echo());
  Json j;
  j["curvature_key"] = f.key();
  j["seed"] = seed;
  for (const auto& s : run) {
    if (s == "homogeneity") {
      auto h = check_homogeneity(f, samples, seed);
      j["homogeneity"] = {{"max_defect", h.max_defect}, {"evaluated", h.evaluated}, {"skipped", h.skipped}};
      m.add_check("homogeneity", h.max_defect <= 1e-10, detail::fmt(h.max_defect));
    } else if (s == "monotonicity") {
      auto h = check_monotonicity(f, samples, seed);
      j["monotonicity"] = {{"min_dx", h.min_dx}, {"min_dy", h.min_dy}, {"evaluated", h.evaluated}};
      m.add_check("monotonicity", h.pass);
    } else if (s == "implicit") {
      auto h = check_implicit(f);
      j["implicit"] = {{"closed_form", h.has_closed_form},
                       {"max_plus_error", num(h.max_plus_error)},
                       {"max_minus_error", num(h.max_minus_error)},
                       {"max_roundtrip", h.max_roundtrip},
                       {"max_scaling", h.max_scaling},
                       {"plus_points", h.plus_points},
                       {"minus_points", h.minus_points}};
      if (h.has_closed_form)
        m.add_check("closed_form", h.max_plus_error <= 1e-10 && (!h.has_minus || h.max_minus_error <= 1e-10),
                    detail::fmt(std::max(h.max_plus_error, h.has_minus ? h.max_minus_error : 0.0)));
      m.add_check("roundtrip", h.max_roundtrip <= 1e-12, detail::fmt(h.max_roundtrip));
      m.add_check("scaling", h.max_scaling <= 1e-10, detail::fmt(h.max_scaling));
    } else if (s == "ordering") {
      // start radius small enough that y = v/(r(1+v^2)^beta) lies in U+ for every drawn slope
      double yl = ImplicitBranch(f).left_endpoint(1.0);
      auto yv = [&](double v) { return v / std::pow(1 + v * v, f.beta()); };
      double r0 = yl > 0 ? std::min(1.0, 0.5 * std::min(yv(0.05), yv(0.95)) / yl) : 1.0;
      auto rep = compare_orderings(f, random_pairs(pairs, 0.05, 0.95, seed), r0, r_max, ic);
      Json ps = Json::array();
      for (const auto& p : rep.pairs)
        ps.push_back({{"v_lo", p.v_lo}, {"v_hi", p.v_hi}, {"min_gap", num(p.min_gap)}, {"r_common", num(p.r_common)}});
      j["ordering"] = {{"r0", rep.r0}, {"r_end", rep.r_end}, {"min_gap", num(rep.min_gap)},
                       {"partial", rep.partial}, {"pairs", ps}};
      m.add_check("ordering", rep.preserved, "min gap " + detail::fmt(rep.min_gap));
    } else if (s == "barrier") {
      Json bj = Json::object();
      if (!f.far_chart()) {
        bj["skipped"] = "no -1 level on the slice";
      } else {
        auto grid = decade_grid(1.0, r_max);
        auto emit = [&](const BarrierReport& rep, const std::string& name) {
          write_csv(out / ("barrier_" + name + ".csv"), "r,w,margin", {&rep.r, &rep.w, &rep.margin});
          m.add_file(out / ("barrier_" + name + ".csv"));
          return Json{{"verdict", to_string(rep.verdict)}, {"r_star", num(rep.r_star)},
                      {"min_margin", num(rep.min_margin)}, {"max_margin", num(rep.max_margin)},
                      {"skipped", rep.skipped}};
        };
        try {
          double b = lower_end_exponent(f);
          auto rep = verify_inequality(BarrierSpec::power(1.0, b), f, grid);
          bj["power"] = emit(rep, "power");
          bj["power"]["b"] = b;
          m.add_check("power_supersolution", rep.verdict == Verdict::verified_super, to_string(rep.verdict));
        } catch (const DomainError& e) {
          bj["power"] = {{"skipped", e.what()}};
        }
        auto ed = ImplicitBranch(f).endpoint_data();
        if (ed.m0) {
          auto rep = verify_inequality(BarrierSpec::cone(*ed.m0), f, grid);
          bj["implicit_cone"] = emit(rep, "cone");
          bj["implicit_cone"]["m0"] = *ed.m0;
          m.add_check("cone_subsolution", rep.verdict == Verdict::verified_sub, to_string(rep.verdict));
        } else {
          bj["implicit_cone"] = {{"skipped", "m0 not defined"}};
        }
      }
      j["barrier"] = bj;
    }
  }
  write_json(out / "verify.json", j);
  m.add_file(out / "verify.json");
  return detail::finish(m, out, j, detail::seconds_since(t0));
}

}  // namespace translab
