#include <gtest/gtest.h>

#include <cmath>

#include "lss/error.hpp"
#include "lss/flows.hpp"
#include "lss/models.hpp"
#include "oracles.hpp"

namespace {

using lss::Mat;
using lss::Vec;

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

lss::FlowConfig tight() {
  lss::FlowConfig f;
  f.eps_tol = 1e-12;
  f.gd_tol = 1e-12;
  f.max_iters = 100000;
  return f;
}

Mat skew_half() {
  Mat A(2, 2);
  A << 0.0, 0.5, -0.5, 0.0;
  return A;
}

// y' = -(id - A) xi grad xi for the ellipse, written out by hand.
Vec ellipse_field(double c, const Mat& A, const Vec& y) {
  const double xi = 0.5 * (y[0] * y[0] / (c * c) + y[1] * y[1] - 1.0);
  const Vec g = v2(y[0] / (c * c), y[1]);
  return -(Mat::Identity(2, 2) - A) * (xi * g);
}

double ellipse_xi(double c, const Vec& y) { return 0.5 * (y[0] * y[0] / (c * c) + y[1] * y[1] - 1.0); }

TEST(Theta, FixesLevelSet) {
  const auto e = lss::make_ellipse(3.0);
  const auto r = lss::theta(e.model, e.field, v2(3, 0), {});
  EXPECT_EQ(r.iters, 0);
  EXPECT_EQ(r.point, v2(3, 0));
}

TEST(Theta, MinorAxisContractsToVertex) {
  const auto e = lss::make_ellipse(3.0);
  const auto r = lss::theta(e.model, e.field, v2(0, 2), tight());
  EXPECT_EQ(r.point[0], 0.0);
  EXPECT_NEAR(r.point[1], 1.0, 1e-11);
}

TEST(Theta, TraceIsMonotone) {
  const auto e = lss::make_ellipse(3.0);
  auto cfg = tight();
  cfg.record_trace = true;
  const auto r = lss::theta(e.model, e.field, v2(2.1, 0.9), cfg);
  ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(r.iters + 1));
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(Theta, GenericPointMatchesRk4) {
  const double c = 3.0;
  const auto e = lss::make_ellipse(c);
  const Vec x0 = v2(2.1, 0.9);
  const Mat zero = Mat::Zero(2, 2);
  const Vec ref = oracle::rk4_limit([&](const Vec& y) { return ellipse_field(c, zero, y); },
                                    [&](const Vec& y) { return ellipse_xi(c, y); }, x0, 1e-4,
                                    1e-14, 10000000);
  EXPECT_LT((lss::theta(e.model, e.field, x0, tight()).point - ref).norm(), 1e-6);
}

TEST(Theta, PreconditionedSphereIsRadial) {
  const auto s = lss::make_sphere(3, true, 0.1);
  Vec u(3);
  u << 0.48, 0.6, 0.64;
  const auto r = lss::theta(s.model, s.field, 2.0 * u, tight());
  EXPECT_LT((r.point - u).norm(), 1e-10);
}

TEST(Theta, DivergenceIsReported) {
  const auto e = lss::make_ellipse(3.0);
  EXPECT_THROW(lss::theta(e.model, e.field, v2(0, 1e3), {}), lss::Error);
  lss::FlowConfig few;
  few.max_iters = 3;
  try {
    lss::theta(e.model, e.field, v2(0, 2), few);
    FAIL();
  } catch (const lss::Error& err) {
    EXPECT_EQ(err.kind(), lss::ErrorKind::FlowDiverged);
  }
}

TEST(Theta, ConfigValidation) {
  lss::FlowConfig bad;
  bad.growth = 0.0;
  EXPECT_THROW(bad.validate(), lss::Error);
  bad = {};
  bad.eps_tol = -1.0;
  EXPECT_THROW(bad.validate(), lss::Error);
}

TEST(ThetaSkew, ZeroMatrixIsBitwiseTheta) {
  const auto e = lss::make_ellipse(3.0);
  for (const Vec& x : {v2(0, 2), v2(2.1, 0.9), v2(-3.3, -0.2)}) {
    const auto a = lss::theta(e.model, e.field, x, {});
    const auto b = lss::theta_skew(e.model, e.field, x, Mat::Zero(2, 2), {});
    EXPECT_EQ(a.point, b.point);
    EXPECT_EQ(a.iters, b.iters);
  }
}

TEST(ThetaSkew, FixesLevelSet) {
  const auto e = lss::make_ellipse(3.0);
  EXPECT_EQ(lss::theta_skew(e.model, e.field, v2(3, 0), skew_half(), {}).point, v2(3, 0));
}

TEST(ThetaSkew, MatchesFineRk4) {
  const double c = 3.0;
  const auto e = lss::make_ellipse(c);
  const Vec x0 = v2(0, 2);
  const Vec ref = oracle::rk4_limit([&](const Vec& y) { return ellipse_field(c, skew_half(), y); },
                                    [&](const Vec& y) { return ellipse_xi(c, y); }, x0, 1e-4,
                                    1e-14, 10000000);
  // the default dt0 = 0.1 lands about 5e-5 from the exact limit; the late
  // steps of the geometric schedule are too coarse for 1e-6
  auto cfg = tight();
  cfg.dt0 = 0.01;
  const Vec got = lss::theta_skew(e.model, e.field, x0, skew_half(), cfg).point;
  EXPECT_LT((got - ref).norm(), 1e-6);
  EXPECT_GT(std::abs(got[0]), 1e-3);  // the skew part moves the limit off the symmetry axis
}

TEST(ThetaSkew, RejectsNonSkew) {
  const auto e = lss::make_ellipse(3.0);
  Mat A(2, 2);
  A << 0.0, 0.5, 0.5, 0.0;
  try {
    lss::theta_skew(e.model, e.field, v2(0, 2), A, {});
    FAIL();
  } catch (const lss::Error& err) {
    EXPECT_EQ(err.kind(), lss::ErrorKind::NotSkewSymmetric);
  }
}

TEST(Pi, SymmetryAxes) {
  const auto e = lss::make_ellipse(3.0);
  EXPECT_LT((lss::pi_nearest(e.model, v2(0, 2), tight()).point - v2(0, 1)).norm(), 1e-9);
  EXPECT_LT((lss::pi_nearest(e.model, v2(4, 0), tight()).point - v2(3, 0)).norm(), 1e-9);
}

TEST(Pi, MatchesDenseScan) {
  const auto e = lss::make_ellipse(3.0);
  const Vec x = v2(2, 0.8);
  const Vec ref = oracle::ellipse_nearest(3.0, x);
  EXPECT_LT((lss::pi_nearest(e.model, x, tight()).point - ref).norm(), 1e-6);
}

TEST(Pi, ChartParametersAreReturned) {
  const auto e = lss::make_ellipse(3.0);
  const auto cp = lss::pi_chart_descent(e.model, v2(2, 0.8), tight());
  ASSERT_EQ(cp.params.size(), 1);
  EXPECT_LT((e.model.chart->point(cp.params) - cp.result.point).norm(), 1e-12);
}

TEST(Pi, KktNewtonOnSphere) {
  const auto s = lss::make_sphere(3, false, 0.1);
  Vec x(3);
  x << 0.3, -0.9, 0.7;
  const Vec p = lss::pi_nearest(s.model, x, tight()).point;
  EXPECT_LT((p - x.normalized()).norm(), 1e-10);
}

TEST(Pi, CenterIsNotUnique) {
  // every point of the circle is nearest to its centre
  const auto e = lss::make_ellipse(3.0);
  EXPECT_THROW(lss::pi_nearest(e.model, v2(0, 0), tight()), lss::Error);
}

}  // namespace
