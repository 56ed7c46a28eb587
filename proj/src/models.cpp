#include "lss/models.hpp"

#include <cmath>
#include <numbers>

#include "lss/error.hpp"

namespace lss {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Sphere tube: points with |x_d| / |x| above this are excluded because the
// latitude gradient is singular on the polar axis.
constexpr double kPolarCutoff = 0.99;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  return t < 0.0 ? t + kTwoPi : t;
}

}  // namespace

ModelPair make_ellipse(double c, double beta) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "ellipse needs c > 0");
  const double c2 = c * c, c4 = c2 * c2, c6 = c4 * c2;
  ModelPair out;
  ManifoldModel& m = out.model;
  m.name = "ellipse";
  m.d = 2;
  m.k = 1;
  m.xi = [c2](const Vec& x) {
    Vec r(1);
    r[0] = 0.5 * (x[0] * x[0] / c2 + x[1] * x[1] - 1.0);
    return r;
  };
  m.grad_xi = [c2](const Vec& x) {
    Mat g(2, 1);
    g << x[0] / c2, x[1];
    return g;
  };
  m.hess_xi = [c2](const Vec&) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 1.0 / c2;
    H(1, 1) = 1.0;
    return std::vector<Mat>{H};
  };
  Chart chart;
  chart.param_dim = 1;
  chart.lower = Vec::Constant(1, 0.0);
  chart.upper = Vec::Constant(1, kTwoPi);
  chart.point = [c](const Vec& p) {
    Vec x(2);
    x << c * std::cos(p[0]), std::sin(p[0]);
    return x;
  };
  chart.jacobian = [c](const Vec& p) {
    Mat J(2, 1);
    J << -c * std::sin(p[0]), std::cos(p[0]);
    return J;
  };
  chart.inverse = [c](const Vec& x) {
    return Vec::Constant(1, wrap_angle(std::atan2(x[1], x[0] / c)));
  };
  m.chart = chart;
  m.pi_chart_descent = true;
  // Row divergence of P = id - n n^T, n proportional to (x1, c^2 x2).
  m.div_pa_tag = "identity";
  m.div_pa = [c2, c4, c6](const Vec& x) {
    const double x1 = x[0], x2 = x[1];
    const double den = x1 * x1 + c4 * x2 * x2;
    const double den2 = den * den;
    Vec v(2);
    v << (c4 * (c2 - 2.0) * x1 * x2 * x2 - c2 * x1 * x1 * x1) / den2,
        (c2 * (1.0 - 2.0 * c2) * x1 * x1 * x2 - c6 * x2 * x2 * x2) / den2;
    return v;
  };
  m.start = Vec(2);
  m.start << c, 0.0;
  out.field = identity_field(2, beta);
  return out;
}

double sphere_latitude(const Vec& x) {
  const int d = static_cast<int>(x.size());
  return std::atan2(x[d - 1], x.head(d - 1).norm());
}

Vec sphere_latitude_grad(const Vec& x) {
  const int d = static_cast<int>(x.size());
  const double r = x.head(d - 1).norm();
  const double rho2 = x.squaredNorm();
  Vec g(d);
  g.head(d - 1) = -x.head(d - 1) * (x[d - 1] / (r * rho2));
  g[d - 1] = r / rho2;
  return g;
}

ModelPair make_sphere(int d, bool precond, double eps, double beta, bool potential) {
  if (d < 2) throw Error(ErrorKind::UnsupportedDimension, "sphere needs d >= 2");
  if (precond && d != 3) {
    throw Error(ErrorKind::UnsupportedDimension, "preconditioned sphere is defined for d = 3");
  }
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "sphere needs eps > 0");
  ModelPair out;
  ManifoldModel& m = out.model;
  m.name = precond ? "sphere_precond" : "sphere_id";
  m.d = d;
  m.k = 1;
  m.xi = [](const Vec& x) { return Vec::Constant(1, 0.5 * (x.squaredNorm() - 1.0)); };
  m.grad_xi = [](const Vec& x) { return Mat(x); };
  m.hess_xi = [d](const Vec&) { return std::vector<Mat>{Mat::Identity(d, d)}; };
  m.tube_guard = [d](const Vec& x) { return std::abs(x[d - 1]) <= kPolarCutoff * x.norm(); };
  if (d == 3) {
    // Parameters (latitude, longitude); latitude leads because it is the
    // observable the reference densities are written in.
    Chart chart;
    chart.param_dim = 2;
    chart.lower = Vec(2);
    chart.upper = Vec(2);
    chart.lower << -0.5 * std::numbers::pi, 0.0;
    chart.upper << 0.5 * std::numbers::pi, kTwoPi;
    chart.point = [](const Vec& p) {
      Vec x(3);
      x << std::cos(p[0]) * std::cos(p[1]), std::cos(p[0]) * std::sin(p[1]), std::sin(p[0]);
      return x;
    };
    chart.jacobian = [](const Vec& p) {
      Mat J(3, 2);
      J << -std::sin(p[0]) * std::cos(p[1]), -std::cos(p[0]) * std::sin(p[1]),
          -std::sin(p[0]) * std::sin(p[1]), std::cos(p[0]) * std::cos(p[1]), std::cos(p[0]), 0.0;
      return J;
    };
    chart.inverse = [](const Vec& x) {
      Vec p(2);
      p << sphere_latitude(x), wrap_angle(std::atan2(x[1], x[0]));
      return p;
    };
    m.chart = chart;
  }
  m.sample_sigma = [d](RandomStream& rng) {
    for (;;) {
      Vec g(d);
      for (int i = 0; i < d; ++i) g[i] = rng.normal();
      const double n = g.norm();
      if (n > 0.0 && std::abs(g[d - 1]) <= kPolarCutoff * n) return Vec(g / n);
    }
  };
  m.start = Vec::Zero(d);
  m.start[0] = 1.0;

  DiffusionField& f = out.field;
  if (!precond) {
    f = identity_field(d, beta);
  } else {
    f.tag = "sphere_precond";
    f.d = 3;
    f.beta = beta;
    f.sigma = [eps](const Vec& x) {
      const double r = x.head(2).norm();
      const double se = std::sqrt(eps);
      Mat s(3, 3);
      s << x[0], x[1], -se * x[0] * x[2] / r,
           x[1], -x[0], -se * x[1] * x[2] / r,
           x[2], 0.0, se * r;
      return s;
    };
    f.a = [eps](const Vec& x) {
      const double x1 = x[0], x2 = x[1], x3 = x[2];
      const double r2 = x1 * x1 + x2 * x2;
      Mat a(3, 3);
      a << r2 + eps * x1 * x1 * x3 * x3 / r2, eps * x1 * x2 * x3 * x3 / r2, (1.0 - eps) * x1 * x3,
           eps * x1 * x2 * x3 * x3 / r2, r2 + eps * x2 * x2 * x3 * x3 / r2, (1.0 - eps) * x2 * x3,
           (1.0 - eps) * x1 * x3, (1.0 - eps) * x2 * x3, x3 * x3 + eps * r2;
      return a;
    };
    f.div_a = [eps](const Vec& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      const double t = eps * x[2] * x[2] / r2;
      Vec v(3);
      v << (3.0 - eps) * x[0] + t * x[0], (3.0 - eps) * x[1] + t * x[1], (4.0 - 2.0 * eps) * x[2];
      return v;
    };
    // Eigenvalues are |x|^2, x1^2 + x2^2 and eps |x|^2; on the unit sphere
    // inside the polar cutoff the smallest is bounded below by this.
    f.min_eig = std::min(eps, 1.0 - kPolarCutoff * kPolarCutoff);
    // (Pa) = a - x x^T off the level set as well, so d_j (Pa)_ij = div a - (d + 1) x.
    m.div_pa_tag = f.tag;
    m.div_pa = [div_a = f.div_a](const Vec& x) { return Vec(div_a(x) - 4.0 * x); };
  }
  if (potential) {
    f.U = [eps](const Vec& x) {
      const double t = sphere_latitude(x);
      return t * t / (2.0 * eps);
    };
    f.grad_U = [eps](const Vec& x) { return Vec(sphere_latitude(x) / eps * sphere_latitude_grad(x)); };
  }
  return out;
}

LinearModel make_linear(int d, int k, const Mat& a, double beta, double kappa) {
  if (k < 1 || k >= d || d > kMaxDim) {
    throw Error(ErrorKind::UnsupportedDimension, "linear model needs 1 <= k < d <= 16");
  }
  if (a.rows() != d || a.cols() != d) {
    throw Error(ErrorKind::InvalidArgument, "linear model matrix must be d x d");
  }
  LinearModel out;
  ManifoldModel& m = out.model;
  m.name = "linear";
  m.d = d;
  m.k = k;
  m.compact = false;
  m.xi = [k](const Vec& x) { return Vec(x.head(k)); };
  Mat g = Mat::Zero(d, k);
  g.topRows(k) = Mat::Identity(k, k);
  m.grad_xi = [g](const Vec&) { return g; };
  m.hess_xi = [d, k](const Vec&) { return std::vector<Mat>(k, Mat::Zero(d, d)); };
  m.start = Vec::Zero(d);
  m.sample_sigma = [d, k](RandomStream& rng) {
    Vec x = Vec::Zero(d);
    for (int i = k; i < d; ++i) x[i] = rng.normal();
    return x;
  };

  out.field = constant_field(a, beta, "linear");
  const int r = d - k;
  const Mat A11 = a.topLeftCorner(k, k), A12 = a.topRightCorner(k, r);
  const Mat A21 = a.bottomLeftCorner(r, k), A22 = a.bottomRightCorner(r, r);
  out.a_reduced = A22 - A21 * A11.llt().solve(A12);
  Eigen::LLT<Mat> llt(out.a_reduced);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "reduced diffusion matrix is not SPD");
  }
  out.sigma_reduced = llt.matrixL();
  if (kappa != 0.0) {
    out.field.U = [k, r, kappa](const Vec& x) { return 0.5 * kappa * x.tail(r).squaredNorm(); };
    out.field.grad_U = [k, r, kappa](const Vec& x) {
      Vec gU = Vec::Zero(k + r);
      gU.tail(r) = kappa * x.tail(r);
      return gU;
    };
  }
  return out;
}

ModelPair make_builtin(const BuiltinSpec& s) {
  if (s.id == "ellipse") return make_ellipse(s.c, s.beta);
  if (s.id == "sphere_id") return make_sphere(s.d ? s.d : 3, false, s.eps, s.beta);
  if (s.id == "sphere_precond") return make_sphere(s.d ? s.d : 3, true, s.eps, s.beta);
  if (s.id == "linear") {
    const int d = s.d ? s.d : 2;
    const Mat a = s.a.size() ? s.a : Mat(Mat::Identity(d, d));
    return make_linear(d, s.k, a, s.beta, s.kappa);
  }
  throw Error(ErrorKind::UnknownModel, "unknown model '" + s.id + "'");
}

}  // namespace lss
