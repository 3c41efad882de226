// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero only when a criterion outside kKnownFailures fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "translab/barrier.hpp"
#include "translab/bowl.hpp"
#include "translab/catenoid.hpp"
#include "translab/commands.hpp"
#include "translab/suites.hpp"

using namespace translab;
namespace fs = std::filesystem;

namespace {

// 5: the power barrier margin is negative in the far field (see README, "Known deviations").
// 6: the S_3 lower branch has no interior minimum of the angle.
const std::set<int> kKnownFailures = {5, 6};

IntegratorConfig tight() {
  IntegratorConfig c;
  c.rel_tol = 1e-12;
  c.abs_tol = 1e-14;
  return c;
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void info(const char* fmt, ...) {
  std::printf("      ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

std::vector<BowlProfile> g_mean_bowls;

bool criterion1() {
  bool ok = true;
  for (int n = 3; n <= 8; ++n) {
    auto t0 = std::chrono::steady_clock::now();
    auto f = parse_curvature_key("mean:n=" + std::to_string(n));
    auto b = solve_bowl(f, 500, tight());
    auto rep = fit_tail(f, b, Regime::nondegenerate, default_window(b));
    double dt = seconds(t0);
    const auto& a = rep.get("a");
    const auto& bc = rep.get("b");
    bool pa = a.rel_error <= 0.01;
    bool pb = b_coefficient_ok(bc);
    bool pt = dt <= 10;
    info("n=%d  a=%.8f (formula %.8f, rel %.2e)  b=%.8f (formula %.8f, abs %.2e)  %.2fs  %s", n, a.fitted, a.formula,
         a.rel_error, bc.fitted, bc.formula, bc.abs_error, dt, pa && pb && pt ? "ok" : "fail");
    ok = ok && pa && pb && pt;
    g_mean_bowls.push_back(std::move(b));
  }
  return ok;
}

bool criterion2() {
  bool ok = true;
  for (int n : {4, 5}) {
    auto t0 = std::chrono::steady_clock::now();
    auto f = parse_curvature_key("gauss:n=" + std::to_string(n));
    auto b = solve_bowl(f, 1e4, tight());
    auto rep = fit_tail(f, b, Regime::degenerate, default_window(b));
    auto lt = laurent_tail(ImplicitBranch(f));
    double dt = seconds(t0);
    const auto& d = rep.get("d_gamma");
    const auto& A = rep.get("A_gamma");
    bool pk = rel(lt.k_gamma, n - 1) <= 0.01 && rel(lt.c_gamma, 1.0) <= 0.01;
    bool p = d.rel_error <= 0.02 && A.rel_error <= 0.02 && pk && dt <= 30;
    info("n=%d  d=%.8f (formula %.8f)  A=%.8f (formula %.8f)  k=%.6f c=%.6f  %.2fs  %s", n, d.fitted, d.formula,
         A.fitted, A.formula, lt.k_gamma, lt.c_gamma, dt, p ? "ok" : "fail");
    ok = ok && p;
  }
  return ok;
}

bool criterion3() {
  bool ok = true;
  for (const char* k : {"hq:k=2,l=0,n=3", "hq:k=2,l=1,n=4", "hq:k=3,l=1,n=5"}) {
    auto r = check_implicit(parse_curvature_key(k), 50, {0.5, 2.0, 5.0});
    bool p = r.has_closed_form && r.max_plus_error <= 1e-10 && (!r.has_minus || r.max_minus_error <= 1e-10) &&
             r.max_roundtrip <= 1e-12 && r.max_scaling <= 1e-10;
    info("%-15s g+ err %.2e (%d pts)  g- err %.2e (%d pts)  roundtrip %.2e  scaling %.2e  %s", k, r.max_plus_error,
         r.plus_points, r.has_minus ? r.max_minus_error : 0.0, r.minus_points, r.max_roundtrip, r.max_scaling,
         p ? "ok" : "fail");
    ok = ok && p;
  }
  return ok;
}

bool criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (const char* k : {"mean:n=3", "hq:k=2,l=0,n=4"}) {
    auto rep = compare_orderings(parse_curvature_key(k), random_pairs(50, 0.05, 0.95, 42), 1.0, 100.0, tight());
    bool p = rep.preserved && rep.min_gap >= -1e-9 && rep.partial == 0;
    info("%-15s 50 pairs  min gap %.3e  incomplete %d  %s", k, rep.min_gap, rep.partial, p ? "ok" : "fail");
    ok = ok && p;
  }
  double dt = seconds(t0);
  info("total %.2fs (limit 20s)", dt);
  return ok && dt <= 20;
}

bool criterion5() {
  bool ok = true;
  for (const char* k : {"qk:k=3,n=7", "qk:k=4,n=6"}) {
    auto f = parse_curvature_key(k);
    double b = lower_end_exponent(f);
    auto grid = decade_grid(1.0, 1e3);
    for (double a : {0.5, 1.0, 2.0}) {
      auto rep = verify_inequality(BarrierSpec::power(a, b), f, grid);
      bool p = rep.verdict == Verdict::verified_super;
      info("%-11s power a=%.1f b=%.3f  verdict %s  r*=%.4g  margin [%.3e, %.3e]  %s", k, a, b, to_string(rep.verdict),
           rep.r_star, rep.min_margin, rep.max_margin, p ? "ok" : "fail");
      ok = ok && p;
    }
    auto ed = ImplicitBranch(f).endpoint_data();
    if (ed.m0) {
      auto rep = verify_inequality(BarrierSpec::cone(*ed.m0), f, grid);
      bool p = rep.verdict == Verdict::verified_sub;
      info("%-11s cone m0=%.6f  verdict %s  %s", k, *ed.m0, to_string(rep.verdict), p ? "ok" : "fail");
      ok = ok && p;
    } else {
      info("%-11s cone: m0 undefined (unit ray outside the far chart), not applicable", k);
    }
  }
  info("the margin of -a r^b is -(a b^2 + O(1)) r^(2b-1) with a negative leading term, so it is a subsolution");
  return ok;
}

bool criterion6() {
  bool ok = true;
  auto f = parse_curvature_key("sk:k=3,n=5");
  for (double R : {0.5, 1.0, 2.0}) {
    auto t0 = std::chrono::steady_clock::now();
    CatenoidConfig cfg;
    cfg.R = R;
    cfg.r_max = 50;
    auto r = solve_catenoid(f, cfg);
    double dt = seconds(t0);
    double kf = double(5 - 3) / (3 * R);
    bool pk = std::fabs(r.neck.kappa_at_neck - kf) <= 1e-8;
    bool ps0 = r.s0_events == 1;
    bool ps1 = r.s1_events == 1;
    bool pe = r.embed_status == "embedded" && r.embed_min_gap > 0;
    bool pg = std::fabs(r.upper_growth - 4.0) <= 0.02 * 4.0;
    bool p = pk && ps0 && ps1 && pe && pg && dt <= 60;
    info("R=%.1f  kappa %.12f (formula %.12f)  s0 events %d (s0=%.7f)  s1 events %d  gap %.4f  growth %.5f  %.1fs  %s",
         R, r.neck.kappa_at_neck, kf, r.s0_events, r.s0.value_or(kNaN), r.s1_events, r.embed_min_gap, r.upper_growth,
         dt, p ? "ok" : "fail");
    if (!ps1) info("       no interior angle minimum: kappa > 0 along the whole lower branch, residual %.2e",
                   r.lower.max_residual());
    ok = ok && p;
  }
  return ok;
}

bool criterion7() {
  bool ok = true;
  const char* expected[] = {"power_law", "logarithmic", "power_law"};
  const double expo[] = {-1.0, 0.0, 0.5};
  for (int k = 3; k <= 5; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    auto f = parse_curvature_key("qk:k=" + std::to_string(k) + ",n=6");
    CatenoidConfig cfg;
    cfg.r_max = 1000;
    auto r = solve_catenoid(f, cfg);
    double dt = seconds(t0);
    const auto& e = r.end;
    bool kind = e.kind == expected[k - 3];
    bool p;
    if (e.kind == "logarithmic") {
      p = kind && std::fabs(e.b + 1) < 1e-9 && rel(e.b_fit, -1.0) <= 0.05;
      info("k=%d  %s  b=%.6f  fitted b %.7f  log coefficient %.5f  %.1fs  %s", k, e.kind.c_str(), e.b, e.b_fit,
           e.log_coefficient, dt, p ? "ok" : "fail");
    } else {
      p = kind && std::fabs(e.exponent - expo[k - 3]) < 1e-9 && rel(e.exponent_fit, e.exponent) <= 0.05;
      info("k=%d  %s  exponent %.4f  fitted %.5f  a_R %.5f  %.1fs  %s", k, e.kind.c_str(), e.exponent, e.exponent_fit,
           e.a_R, dt, p ? "ok" : "fail");
    }
    ok = ok && p;
  }
  return ok;
}

bool criterion8() {
  bool ok = true;
  for (std::size_t i = 0; i < g_mean_bowls.size(); ++i) {
    const auto& b = g_mean_bowls[i];
    double g = growth_exponent(b, default_window(b));
    bool p = std::fabs(g - (b.alpha + 1)) <= 0.05;
    info("%-9s slope %.5f (alpha+1 = %.1f)  %s", b.curvature_key.c_str(), g, b.alpha + 1, p ? "ok" : "fail");
    ok = ok && p;
  }
  return ok && !g_mean_bowls.empty();
}

bool criterion9() {
  bool ok = true;
  auto cmp = [&](const char* what, std::optional<double> x, std::optional<double> y) {
    if (!x && !y) return;
    bool p = x && y && std::fabs(*x - *y) <= 1e-4 * std::max(1.0, std::fabs(*x));
    info("  %-14s %.10g vs %.10g  %s", what, x.value_or(kNaN), y.value_or(kNaN), p ? "ok" : "fail");
    ok = ok && p;
  };
  for (const char* k : {"sk:k=3,n=5", "qk:k=4,n=6", "qk:k=3,n=7"}) {
    auto f = parse_curvature_key(k);
    CatenoidConfig a, b;
    a.r_max = b.r_max = std::string(k).rfind("sk", 0) == 0 ? 50 : 500;
    a.handoff = M_PI / 8;
    b.handoff = M_PI / 6;
    auto ra = solve_catenoid(f, a), rb = solve_catenoid(f, b);
    info("%s  handoff pi/8 vs pi/6", k);
    cmp("s0", ra.s0, rb.s0);
    cmp("C+", ra.C_plus, rb.C_plus);
    cmp("C-", ra.C_minus, rb.C_minus);
    if (ra.origin_case == OriginCase::derivative_origin) {
      if (ra.end.kind == "logarithmic")
        cmp("b fit", ra.end.b_fit, rb.end.b_fit);
      else
        cmp("exponent fit", ra.end.exponent_fit, rb.end.exponent_fit);
    }
  }
  return ok;
}

std::map<std::string, std::string> hashes(const fs::path& dir) {
  std::map<std::string, std::string> h;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") h[e.path().filename().string()] = sha256_file(e.path());
  return h;
}

bool criterion10() {
  auto base = fs::current_path() / "acceptance_runs";
  fs::remove_all(base);
  bool ok = true;
  struct Job {
    std::string name;
    std::function<CommandResult(const RunConfig&)> fn;
    std::vector<std::pair<std::string, std::string>> keys;
  };
  std::vector<Job> jobs = {
      {"bowl", run_bowl, {{"curvature", "mean:n=3"}, {"r_max", "500"}}},
      {"catenoid", run_catenoid, {{"curvature", "qk:k=4,n=6"}, {"r_max", "200"}}},
      {"verify", run_verify, {{"curvature", "mean:n=3"}, {"suite", "ordering"}, {"pairs", "10"}}},
      {"verify", run_verify, {{"curvature", "gauss:n=4"}, {"suite", "homogeneity"}}},
  };
  int idx = 0;
  for (const auto& job : jobs) {
    std::map<std::string, std::string> h[2];
    for (int rep = 0; rep < 2; ++rep) {
      RunConfig c(job.name);
      for (const auto& [k, v] : job.keys) c.set(k, v);
      c.set("seed", "2024");
      auto dir = base / (std::to_string(idx) + "_" + job.name + "_" + std::to_string(rep));
      c.set("out", dir.string());
      job.fn(c);
      h[rep] = hashes(dir);
    }
    bool p = !h[0].empty() && h[0] == h[1];
    info("%-9s %-14s %zu files  %s", job.name.c_str(), job.keys[0].second.c_str(), h[0].size(),
         p ? "identical" : "differ");
    ok = ok && p;
    ++idx;
  }
  return ok;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    bool (*fn)();
  };
  const Criterion all[] = {
      {1, "nondegenerate bowl asymptotics (mean, n=3..8)", criterion1},
      {2, "degenerate bowl asymptotics (gauss, n=4,5)", criterion2},
      {3, "implicit branch against closed forms", criterion3},
      {4, "ordering of slope solutions", criterion4},
      {5, "barrier inequalities (Q_k)", criterion5},
      {6, "catenoid construction (S_3, n=5)", criterion6},
      {7, "catenoid lower end classification (Q_k, n=6)", criterion7},
      {8, "growth exponent of bowl profiles", criterion8},
      {9, "handoff angle independence", criterion9},
      {10, "determinism of command outputs", criterion10},
  };
  int unexpected = 0, passed = 0;
  for (const auto& c : all) {
    std::printf("[%d] %s\n", c.id, c.title);
    std::fflush(stdout);
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      info("error: %s", e.what());
    }
    bool known = kKnownFailures.count(c.id) > 0;
    std::printf("%s  %d  %s%s\n\n", ok ? "PASS" : "FAIL", c.id, c.title, !ok && known ? "  (known)" : "");
    std::fflush(stdout);
    if (ok) ++passed;
    if (!ok && !known) ++unexpected;
  }
  std::printf("%d/10 passed, %d unexpected failures\n", passed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
