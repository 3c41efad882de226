#include <gtest/gtest.h>

#include <cmath>

#include "translab/implicit.hpp"
#include "translab/suites.hpp"

using namespace translab;

TEST(ImplicitSuite, QuotientClosedForms) {
  for (const char* k : {"hq:k=2,l=0,n=3", "hq:k=2,l=1,n=4", "hq:k=3,l=1,n=5"}) {
    auto r = check_implicit(parse_curvature_key(k));
    ASSERT_TRUE(r.has_closed_form);
    EXPECT_EQ(r.plus_points, 2500);
    EXPECT_LE(r.max_plus_error, 1e-10) << k;
    if (r.has_minus) {
      EXPECT_LE(r.max_minus_error, 1e-10) << k;
    }
    EXPECT_LE(r.max_roundtrip, 1e-12) << k;
    EXPECT_LE(r.max_scaling, 1e-10) << k;
  }
}

TEST(ImplicitSuite, RoundTripWithoutClosedForm) {
  for (const char* k : {"mean:n=4", "gauss:n=4", "knorm:k=2,n=3", "sk:k=3,n=5"}) {
    auto r = check_implicit(parse_curvature_key(k), 20);
    EXPECT_LE(r.max_roundtrip, 1e-12) << k;
    EXPECT_LE(r.max_scaling, 1e-10) << k;
  }
}

TEST(ImplicitBranch, MeanCurvatureExplicit) {
  // gamma = (x + (n-1) y)/(n-1) gives g+(y,z) = (n-1)(z - y)
  auto f = parse_curvature_key("mean:n=3");
  ImplicitBranch br(f);
  EXPECT_NEAR(br.g_plus(0.8, 1.0), 0.4, 1e-12);
  EXPECT_NEAR(br.dg_dy(0.8, 1.0, 1), -2.0, 1e-8);
}

TEST(ImplicitBranch, OutsideDomainThrows) {
  ImplicitBranch br(parse_curvature_key("mean:n=3"));
  EXPECT_THROW(br.g_plus(0.4, 1.0), Error);
}

TEST(ImplicitBranch, EndpointLimitsOfQuotient) {
  auto ed = ImplicitBranch(parse_curvature_key("qk:k=5,n=6")).endpoint_data();
  ASSERT_TRUE(ed.m0.has_value());
  EXPECT_NEAR(*ed.m0, -0.25, 1e-10);
}

TEST(Laurent, GaussTail) {
  auto t = laurent_tail(ImplicitBranch(parse_curvature_key("gauss:n=5")));
  EXPECT_NEAR(t.k_gamma, 4.0, 0.04);
  EXPECT_NEAR(t.c_gamma, 1.0, 0.01);
}

TEST(Monotonicity, AllFamiliesIncreasing) {
  for (const auto& k : registry_examples()) {
    auto r = check_monotonicity(parse_curvature_key(k), 200, 11);
    EXPECT_TRUE(r.pass) << k;
  }
}
