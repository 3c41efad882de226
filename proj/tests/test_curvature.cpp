#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "translab/curvature.hpp"

using namespace translab;

TEST(Registry, AllExamplesParse) {
  for (const auto& k : registry_examples()) {
    auto f = parse_curvature_key(k);
    EXPECT_EQ(parse_curvature_key(f.key()).key(), f.key());
    EXPECT_GT(f.alpha_value(), 0.0);
  }
}

TEST(Registry, QuotientKeyIsCanonical) {
  EXPECT_EQ(parse_curvature_key("hq:k=4,l=3,n=6").key(), "qk:k=4,n=6");
}

TEST(Registry, RejectsBadKeys) {
  for (const char* k : {"hq:k=2,l=2,n=3", "mean:n=1", "foo:n=3", "qk:k=3", "mean:n=3,k=2", "gauss:n=1"})
    EXPECT_THROW(parse_curvature_key(k), ParameterError) << k;
}

TEST(Normalization, UnitValueOnAxis) {
  for (const char* k : {"mean:n=3", "hq:k=2,l=1,n=4", "qk:k=4,n=6", "sk:k=3,n=5", "knorm:k=2,n=3"})
    EXPECT_NEAR(parse_curvature_key(k).evaluate(0, 1), 1.0, 1e-14) << k;
}

TEST(Normalization, MeanCurvatureIsAverageLike) {
  // (n-1) y + x over n-1
  auto f = parse_curvature_key("mean:n=5");
  EXPECT_NEAR(f.evaluate(1, 1), 1.25, 1e-14);
  EXPECT_NEAR(f.evaluate(2, 3), 3.5, 1e-14);
}

TEST(Homogeneity, DefectAtRoundoff) {
  for (const auto& k : registry_examples()) {
    auto h = check_homogeneity(parse_curvature_key(k), 200, 7);
    EXPECT_GT(h.evaluated, 0) << k;
    EXPECT_LE(h.max_defect, 1e-10) << k;
  }
}

TEST(Gradient, JetMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (const auto& k : registry_examples()) {
    auto f = parse_curvature_key(k);
    for (int i = 0; i < 20; ++i) {
      auto [x, y] = sample_cone_point(f, rng);
      auto g = f.grad(x, y);
      auto fd = finite_difference_grad(f, x, y);
      double s = std::max({1.0, std::fabs(g[0]), std::fabs(g[1])});
      EXPECT_NEAR(g[0], fd[0], 1e-6 * s) << k;
      EXPECT_NEAR(g[1], fd[1], 1e-6 * s) << k;
    }
  }
}

TEST(Degeneracy, GaussIsDegenerateMeanIsNot) {
  EXPECT_FALSE(parse_curvature_key("gauss:n=4").nondegenerate());
  EXPECT_TRUE(parse_curvature_key("mean:n=4").nondegenerate());
  EXPECT_EQ(parse_curvature_key("gauss:n=4").classify_degeneracy().kind, DegeneracyKind::one_degenerate);
}

TEST(Signed, ZeroRayOfQuotient) {
  auto f = parse_curvature_key("qk:k=3,n=7");
  ASSERT_TRUE(f.is_signed());
  auto zr = f.zero_ray();
  EXPECT_NEAR(zr[0], -0.8, 1e-12);
  EXPECT_NEAR(zr[1], 0.6, 1e-12);
  EXPECT_NEAR(f.evaluate(zr[0], zr[1]), 0.0, 1e-12);
  EXPECT_FALSE(parse_curvature_key("mean:n=3").is_signed());
  EXPECT_FALSE(parse_curvature_key("gauss:n=4").is_signed());
}

TEST(Signed, OddSymmetry) {
  for (const char* k : {"qk:k=4,n=6", "sk:k=3,n=5", "hq:k=2,l=1,n=4"}) {
    auto f = parse_curvature_key(k);
    EXPECT_TRUE(f.odd_symmetric()) << k;
    EXPECT_NEAR(f.evaluate(-0.3, -1.0), -f.evaluate(0.3, 1.0), 1e-13) << k;
  }
}

TEST(Alpha, HomogeneityDegree) {
  EXPECT_DOUBLE_EQ(parse_curvature_key("sk:k=3,n=5").alpha_value(), 3.0);
  EXPECT_NEAR(parse_curvature_key("sk:k=3,n=5").beta(), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(parse_curvature_key("qk:k=4,n=6").alpha_value(), 1.0);
}
