#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "translab/commands.hpp"

using namespace translab;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("translab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST(Config, FileSectionsAndPrecedence) {
  auto d = scratch("cfg");
  std::ofstream(d / "run.ini") << "# comment\ncurvature = mean:n=3\n[bowl]\nr_max = 200 ; inline\n"
                               << "[catenoid]\nR = 2\n";
  RunConfig c("bowl");
  c.load_file((d / "run.ini").string());
  EXPECT_EQ(c.str("curvature"), "mean:n=3");
  EXPECT_DOUBLE_EQ(c.real("r_max", 0), 200);
  EXPECT_FALSE(c.has("R"));
  c.set("r_max", "300");
  EXPECT_DOUBLE_EQ(c.real("r_max", 0), 300);
}

TEST(Config, UnknownKeysRejected) {
  auto d = scratch("cfg_bad");
  std::ofstream(d / "a.ini") << "colour = red\n";
  std::ofstream(d / "b.ini") << "[bowl]\nR = 1\n";
  std::ofstream(d / "c.ini") << "[plot]\n";
  RunConfig c("bowl");
  EXPECT_THROW(c.load_file((d / "a.ini").string()), ConfigError);
  EXPECT_THROW(c.load_file((d / "b.ini").string()), ConfigError);
  EXPECT_THROW(c.load_file((d / "c.ini").string()), ConfigError);
  EXPECT_THROW(c.set("nope", "1"), ConfigError);
  EXPECT_THROW(c.set("r_max", "abc"), ConfigError);
  EXPECT_THROW(c.set("quiet", "maybe"), ConfigError);
}

TEST(Config, EnvironmentOverride) {
  setenv("TRANSLAB_R_MAX", "77", 1);
  RunConfig c("bowl");
  c.load_env();
  unsetenv("TRANSLAB_R_MAX");
  EXPECT_DOUBLE_EQ(c.real("r_max", 0), 77);
}

TEST(Output, SeventeenDigitCsv) {
  auto d = scratch("csv");
  std::vector<double> a = {0.1, 1.0 / 3}, b = {1e-300, kInf};
  write_csv(d / "x.csv", "r,w", {&a, &b});
  EXPECT_EQ(slurp(d / "x.csv"), "r,w\n0.10000000000000001,1e-300\n0.33333333333333331,inf\n");
  std::vector<double> c = {1.0};
  EXPECT_THROW(write_csv(d / "y.csv", "a,b", {&a, &c}), ParameterError);
}

TEST(Output, Sha256KnownVector) {
  auto d = scratch("sha");
  std::ofstream(d / "abc", std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file(d / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Output, JsonNullForNonFinite) {
  EXPECT_TRUE(num(kNaN).is_null());
  EXPECT_TRUE(num(std::optional<double>{}).is_null());
  EXPECT_EQ(num(2.5).get<double>(), 2.5);
}

TEST(Commands, BowlWritesManifestedFiles) {
  auto d = scratch("bowl");
  RunConfig c("bowl");
  c.set("curvature", "mean:n=3");
  c.set("r_max", "100");
  c.set("out", d.string());
  auto r = run_bowl(c);
  EXPECT_EQ(r.exit_code, kExitOk);
  for (const char* f : {"bowl.csv", "bowl.json", "plot_bowl.gp", "manifest.json"}) EXPECT_TRUE(fs::exists(d / f)) << f;
  auto csv = slurp(d / "bowl.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "r,u,v,residual");
  auto m = Json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["command"], "bowl");
  EXPECT_EQ(m["config"]["curvature"], "mean:n=3");
  EXPECT_EQ(m["files"].size(), 3u);
  for (const auto& f : m["files"]) EXPECT_EQ(f["sha256"], sha256_file(d / f["path"].get<std::string>()));
  auto j = Json::parse(slurp(d / "bowl.json"));
  EXPECT_NEAR(j["fit"]["coefficients"]["a"]["formula"].get<double>(), 0.5, 1e-9);
}

TEST(Commands, BowlRepeatable) {
  auto d1 = scratch("rep1"), d2 = scratch("rep2");
  for (auto& d : {d1, d2}) {
    RunConfig c("bowl");
    c.set("curvature", "hq:k=2,l=0,n=3");
    c.set("r_max", "50");
    c.set("out", d.string());
    run_bowl(c);
  }
  for (const char* f : {"bowl.csv", "bowl.json"}) EXPECT_EQ(sha256_file(d1 / f), sha256_file(d2 / f)) << f;
}

TEST(Commands, ValidationErrors) {
  RunConfig c("bowl");
  c.set("curvature", "mean:n=3");
  c.set("r_max", "-1");
  EXPECT_THROW(run_bowl(c), ConfigError);
  RunConfig e("bowl");
  EXPECT_THROW(run_bowl(e), ConfigError);
  RunConfig k("catenoid");
  k.set("curvature", "mean:n=3");
  try {
    run_catenoid(k);
    FAIL();
  } catch (const UnsupportedError& err) {
    EXPECT_STREQ(err.what(), "curvature function is not signed");
  }
  RunConfig v("verify");
  v.set("curvature", "mean:n=3");
  v.set("suite", "everything");
  EXPECT_THROW(run_verify(v), ConfigError);
}

TEST(Commands, VerifyImplicitSuite) {
  auto d = scratch("verify");
  RunConfig c("verify");
  c.set("curvature", "hq:k=2,l=0,n=3");
  c.set("suite", "implicit");
  c.set("out", d.string());
  auto r = run_verify(c);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(r.summary["implicit"]["closed_form"].get<bool>());
}
