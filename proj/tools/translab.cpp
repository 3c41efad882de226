#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "translab/commands.hpp"

using namespace translab;

namespace {

struct Flags {
  std::string config, out, curvature, regime, suite;
  double r_max = kNaN, R = kNaN, handoff = kNaN, fit_lo = kNaN, fit_hi = kNaN, rel_tol = kNaN, abs_tol = kNaN,
         eps0 = kNaN;
  long seed = -1, pairs = -1, samples = -1;
  bool quiet = false, no_plot = false;
};

void put(RunConfig& c, const std::string& k, double v) {
  if (!std::isnan(v)) c.set(k, format_double(v));
}
void put(RunConfig& c, const std::string& k, long v) {
  if (v >= 0) c.set(k, std::to_string(v));
}
void put(RunConfig& c, const std::string& k, const std::string& v) {
  if (!v.empty()) c.set(k, v);
}

RunConfig build_config(const std::string& cmd, const Flags& f) {
  RunConfig c(cmd);
  if (!f.config.empty()) c.load_file(f.config);
  c.load_env();
  put(c, "curvature", f.curvature);
  put(c, "out", f.out);
  put(c, "seed", f.seed);
  if (f.quiet) c.set("quiet", "true");
  if (f.no_plot) c.set("plot", "false");
  put(c, "rel_tol", f.rel_tol);
  put(c, "abs_tol", f.abs_tol);
  if (cmd == "bowl" || cmd == "catenoid" || cmd == "verify") put(c, "r_max", f.r_max);
  if (cmd == "bowl") {
    put(c, "regime", f.regime);
    put(c, "eps0", f.eps0);
  }
  if (cmd == "bowl" || cmd == "catenoid") {
    put(c, "fit_lo", f.fit_lo);
    put(c, "fit_hi", f.fit_hi);
  }
  if (cmd == "catenoid") {
    put(c, "R", f.R);
    put(c, "handoff", f.handoff);
  }
  if (cmd == "verify") {
    put(c, "suite", f.suite);
    put(c, "pairs", f.pairs);
    put(c, "samples", f.samples);
  }
  return c;
}

void write_error(const RunConfig& c, const std::string& kind, const std::string& what) {
  try {
    std::filesystem::path out = c.str("out", "out");
    std::filesystem::create_directories(out);
    Json j;
    j["tool"] = "translab";
    j["version"] = kToolVersion;
    j["command"] = c.command();
    j["error"] = kind;
    j["message"] = what;
    j["config"] = c.echo();
    write_json(out / "error.json", j);
  } catch (const std::exception&) {
  }
}

int run(const std::string& cmd, const Flags& flags) {
  RunConfig c(cmd);
  try {
    c = build_config(cmd, flags);
  } catch (const Error& e) {
    std::cerr << "translab: " << e.what() << '\n';
    return kExitUsage;
  }
  CommandResult res;
  try {
    if (cmd == "bowl")
      res = run_bowl(c);
    else if (cmd == "catenoid")
      res = run_catenoid(c);
    else
      res = run_verify(c);
  } catch (const ConfigError& e) {
    std::cerr << "translab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "translab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "translab: " << e.kind() << ": " << e.what() << '\n';
    write_error(c, e.kind(), e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "translab: " << e.what() << '\n';
    write_error(c, "internal", e.what());
    return kExitSolver;
  }
  if (!c.boolean("quiet", false)) {
    for (const auto& ch : res.checks)
      std::cout << (ch.pass ? "pass  " : "FAIL  ") << ch.name << (ch.detail.empty() ? "" : "  " + ch.detail) << '\n';
    std::cout << "output: " << res.out_dir.string() << '\n';
  }
  if (res.exit_code == kExitCheck) {
    for (const auto& ch : res.checks)
      if (!ch.pass) std::cerr << "check failed: " << ch.name << '\n';
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"translab: translating solitons for curvature functions"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--seed", f.seed, "random seed")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", f.quiet, "no summary on stdout");

  auto common = [&](CLI::App* s) {
    s->add_option("--curvature", f.curvature, "registry key, e.g. mean:n=3");
    s->add_option("--rel-tol", f.rel_tol);
    s->add_option("--abs-tol", f.abs_tol);
    s->add_flag("--no-plot", f.no_plot, "skip the plot script");
    s->fallthrough();
  };
  auto* bowl = app.add_subcommand("bowl", "rotationally symmetric entire solution");
  common(bowl);
  bowl->add_option("--rmax", f.r_max);
  bowl->add_option("--regime", f.regime, "auto, nondegenerate or degenerate");
  bowl->add_option("--fit-lo", f.fit_lo);
  bowl->add_option("--fit-hi", f.fit_hi);
  bowl->add_option("--eps0", f.eps0);

  auto* cat = app.add_subcommand("catenoid", "two-ended solution with a neck of radius R");
  common(cat);
  cat->add_option("--rmax", f.r_max);
  cat->add_option("--R", f.R);
  cat->add_option("--handoff", f.handoff, "neck chart handoff angle");

  auto* ver = app.add_subcommand("verify", "property suites");
  common(ver);
  ver->add_option("--suite", f.suite, "homogeneity, monotonicity, implicit, ordering, barrier or all");
  ver->add_option("--rmax", f.r_max);
  ver->add_option("--pairs", f.pairs);
  ver->add_option("--samples", f.samples);

  auto* list = app.add_subcommand("list", "registry keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (list->parsed()) {
    std::cout << "templates:\n";
    for (const auto& t : registry_templates()) std::cout << "  " << t << '\n';
    std::cout << "examples:\n";
    for (const auto& k : registry_examples()) {
      auto fn = parse_curvature_key(k);
      std::cout << "  " << k << (fn.is_signed() ? "  (signed)" : "") << '\n';
    }
    return 0;
  }
  for (auto* s : {bowl, cat, ver})
    if (s->parsed()) return run(s->get_name(), f);
  return kExitUsage;
}
