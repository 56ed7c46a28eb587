#include <gtest/gtest.h>

#include <cmath>

#include "lss/error.hpp"
#include "lss/geometry.hpp"
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
Vec v3(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return x;
}

TEST(Psi, SphereIdentityAtPole) {
  const auto s = lss::make_sphere(3, false, 0.1);
  const Mat psi = lss::eval_psi(s.model, s.field, v3(1, 0, 0));
  ASSERT_EQ(psi.rows(), 1);
  EXPECT_DOUBLE_EQ(psi(0, 0), 1.0);
}

TEST(Psi, EllipseVertex) {
  const auto e = lss::make_ellipse(3.0);
  EXPECT_NEAR(lss::eval_psi(e.model, e.field, v2(3, 0))(0, 0), 1.0 / 9.0, 1e-15);
}

TEST(Psi, PreconditionedSphereIsOneOnSigma) {
  const auto s = lss::make_sphere(3, true, 0.1);
  for (const Vec& x : {v3(1, 0, 0), v3(0.6, 0.0, 0.8), v3(0.48, 0.6, 0.64)}) {
    EXPECT_NEAR(lss::eval_psi(s.model, s.field, x)(0, 0), std::pow(x.squaredNorm(), 2), 1e-12);
  }
}

TEST(Projection, SphereAndEllipse) {
  const auto s = lss::make_sphere(3, false, 0.1);
  const Mat P = lss::eval_projection(s.model, s.field, v3(1, 0, 0)).P;
  EXPECT_LT(lss::max_abs(P - Mat(Vec(v3(0, 1, 1)).asDiagonal())), 1e-15);
  const auto e = lss::make_ellipse(3.0);
  const Mat Pe = lss::eval_projection(e.model, e.field, v2(3, 0)).P;
  EXPECT_LT(lss::max_abs(Pe - Mat(Vec(v2(0, 1)).asDiagonal())), 1e-15);
}

TEST(Projection, LinearSchurBlock) {
  Mat a(3, 3);
  a << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0;
  const auto lin = lss::make_linear(3, 1, a);
  const Mat Pa = lss::eval_projection(lin.model, lin.field, v3(0.0, 0.3, -1.2)).Pa;
  Mat expect = Mat::Zero(3, 3);
  expect.bottomRightCorner(2, 2) =
      a.bottomRightCorner(2, 2) - a.bottomLeftCorner(2, 1) * a.topRightCorner(1, 2) / a(0, 0);
  EXPECT_LT(lss::max_abs(Pa - expect), 1e-12);
}

TEST(Projection, ProjectorIdentities) {
  const auto s = lss::make_sphere(3, true, 0.1);
  const Vec x = v3(0.48, 0.6, 0.64);
  const auto pd = lss::eval_projection(s.model, s.field, x);
  const Mat g = s.model.grad_xi(x);
  EXPECT_LT(lss::max_abs(pd.P * pd.P - pd.P), 1e-13);
  EXPECT_LT(lss::max_abs(pd.P.transpose() * g), 1e-13);
  EXPECT_LT(lss::max_abs(pd.Pa - pd.Pa.transpose()), 1e-13);
}

TEST(Projection, RankDeficientThrows) {
  const auto s = lss::make_sphere(3, false, 0.1);
  EXPECT_THROW(lss::eval_projection(s.model, s.field, v3(0, 0, 0)), lss::Error);
}

TEST(PaDivergence, LinearIsZero) {
  Mat a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;
  const auto lin = lss::make_linear(2, 1, a);
  EXPECT_LT(lss::eval_pa_divergence(lin.model, lin.field, v2(0.0, 0.7)).norm(), 1e-9);
}

TEST(PaDivergence, EllipseClosedForm) {
  const auto e = lss::make_ellipse(3.0);
  const double c = 3.0, c2 = 9.0;
  for (double t : {0.0, 0.4, 1.1, 2.0, 3.7, 5.5}) {
    const Vec x = v2(c * std::cos(t), std::sin(t));
    const double q = x[0] * x[0] + c2 * c2 * x[1] * x[1];
    const double d1 = (c2 * c2 * (c2 - 2) * x[0] * x[1] * x[1] - c2 * std::pow(x[0], 3)) / (q * q);
    const double d2 = (c2 * (1 - 2 * c2) * x[0] * x[0] * x[1] - std::pow(c, 6) * std::pow(x[1], 3)) / (q * q);
    const Vec an = lss::eval_pa_divergence(e.model, e.field, x);
    const Vec fd = lss::eval_pa_divergence_fd(e.model, e.field, x);
    EXPECT_NEAR(an[0], d1, 1e-12);
    EXPECT_NEAR(an[1], d2, 1e-12);
    EXPECT_LT((an - fd).norm(), 1e-6);
  }
}

TEST(PaDivergence, PreconditionedSphereOnSigma) {
  const double eps = 0.1;
  const auto s = lss::make_sphere(3, true, eps);
  for (const Vec& x : {v3(1, 0, 0), v3(0.6, 0.0, 0.8), v3(0.48, 0.6, 0.64)}) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const Vec expect = v3(-(1 + eps) * x[0] + eps * x[0] * x[2] * x[2] / r2,
                          -(1 + eps) * x[1] + eps * x[1] * x[2] * x[2] / r2, -2 * eps * x[2]);
    EXPECT_LT((lss::eval_pa_divergence(s.model, s.field, x) - expect).norm(), 1e-12);
    EXPECT_LT((lss::eval_pa_divergence_fd(s.model, s.field, x) - expect).norm(), 1e-6);
  }
}

TEST(MeanCurvature, SphereAndCircle) {
  const auto s = lss::make_sphere(3, false, 0.1);
  const Vec x = v3(0.48, 0.6, 0.64);
  EXPECT_LT((lss::eval_mean_curvature_id(s.model, s.field, x) + 2.0 * x).norm(), 1e-12);
  const auto circle = lss::make_ellipse(1.0);
  const Vec y = v2(std::cos(0.9), std::sin(0.9));
  EXPECT_LT((lss::eval_mean_curvature_id(circle.model, circle.field, y) + y).norm(), 1e-12);
}

TEST(MeanCurvature, EllipseMatchesPlaneCurveCurvature) {
  const double c = 3.0;
  const auto e = lss::make_ellipse(c);
  for (double t : {0.0, 0.3, oracle::kPi / 2, 2.5, 4.0}) {
    const double s = std::sin(t), co = std::cos(t);
    const double kappa = c / std::pow(c * c * s * s + co * co, 1.5);
    Vec n = v2(co / c, s);  // outward normal direction of gamma(t) = (c cos t, sin t)
    n.normalize();
    const Vec H = lss::eval_mean_curvature_id(e.model, e.field, v2(c * co, s));
    EXPECT_LT((H + kappa * n).norm(), 1e-12) << "t=" << t;
  }
}

TEST(Generator, AnnihilatesConstantsAndConstraint) {
  const auto e = lss::make_ellipse(3.0);
  const Vec x = v2(3 * std::cos(1.3), std::sin(1.3));
  lss::TestFunction one{[](const Vec&) { return 1.0; }, {}, {}};
  EXPECT_EQ(lss::generator_apply(e.model, e.field, one, x), 0.0);
  lss::TestFunction xi{[&](const Vec& y) { return e.model.xi(y)[0]; }, {}, {}};
  EXPECT_LT(std::abs(lss::generator_apply(e.model, e.field, xi, x)), 1e-5);
}

TEST(Generator, EllipseMinorVertex) {
  const auto e = lss::make_ellipse(3.0);
  lss::TestFunction x2{[](const Vec& y) { return y[1]; }, {}, {}};
  EXPECT_NEAR(lss::generator_apply(e.model, e.field, x2, v2(0, 1)), -1.0 / 9.0, 1e-6);
}

TEST(Generator, LinearQuadraticHasClosedForm) {
  // On x1 = 0 with constant a and U = kappa|x_tail|^2/2, L(x2^2) is
  // -2 kappa x2 (a~ x_tail)_2 + 2 a~_22 / beta.
  Mat a(3, 3);
  a << 2.0, 1.0, 0.5, 1.0, 2.0, 0.3, 0.5, 0.3, 1.5;
  const double kappa = 1.7;
  const auto lin = lss::make_linear(3, 1, a, 1.0, kappa);
  const Vec x = v3(0.0, 0.4, -0.9);
  lss::TestFunction f{[](const Vec& y) { return y[1] * y[1]; }, {}, {}};
  const Mat& at = lin.a_reduced;
  const Vec tail = x.tail(2);
  const double expect = -2.0 * kappa * x[1] * (at * tail)[0] + 2.0 * at(0, 0);
  EXPECT_NEAR(lss::generator_apply(lin.model, lin.field, f, x), expect, 1e-6);
}

TEST(Metric, IdentityDetection) {
  const auto e = lss::make_ellipse(3.0);
  EXPECT_TRUE(lss::is_identity_metric(e.field, v2(3, 0)));
  const auto s = lss::make_sphere(3, true, 0.1);
  EXPECT_FALSE(lss::is_identity_metric(s.field, v3(1, 0, 0)));
}

}  // namespace
