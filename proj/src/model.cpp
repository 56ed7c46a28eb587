#include "lss/model.hpp"

#include <utility>

#include "lss/error.hpp"
#include "lss/finite_diff.hpp"

namespace lss {

Mat DiffusionField::sigma_at(const Vec& x) const {
  if (sigma) return sigma(x);
  if (identity) return Mat::Identity(d, d);
  if (a && constant) {
    Eigen::LLT<Mat> llt(a(x));
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::NotPositiveDefinite, "diffusion matrix has no Cholesky factor");
    }
    return llt.matrixL();
  }
  throw Error(ErrorKind::InvalidArgument, "diffusion field '" + tag + "' has no sigma");
}

Mat DiffusionField::a_at(const Vec& x) const {
  if (a) return a(x);
  if (identity) return Mat::Identity(d, d);
  const Mat s = sigma_at(x);
  return s * s.transpose();
}

Vec DiffusionField::div_a_at(const Vec& x) const {
  if (div_a) return div_a(x);
  if (identity || constant) return Vec::Zero(d);
  return fd::row_divergence([this](const Vec& y) { return a_at(y); }, x, fd::step(x));
}

double DiffusionField::U_at(const Vec& x) const { return U ? U(x) : 0.0; }

Vec DiffusionField::grad_U_at(const Vec& x) const {
  if (grad_U) return grad_U(x);
  if (U) return fd::gradient(U, x, fd::step(x));
  return Vec::Zero(d);
}

DiffusionField identity_field(int d, double beta) {
  DiffusionField f;
  f.tag = "identity";
  f.d = d;
  f.beta = beta;
  f.identity = true;
  f.constant = true;
  f.min_eig = 1.0;
  return f;
}

DiffusionField constant_field(const Mat& a, double beta, std::string tag) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success || !a.isApprox(a.transpose(), 1e-14)) {
    throw Error(ErrorKind::NotPositiveDefinite, "constant diffusion matrix is not SPD");
  }
  const Mat L = llt.matrixL();
  DiffusionField f;
  f.tag = std::move(tag);
  f.d = static_cast<int>(a.rows());
  f.beta = beta;
  f.constant = true;
  f.min_eig = Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().minCoeff();
  f.a = [a](const Vec&) { return a; };
  f.sigma = [L](const Vec&) { return L; };
  return f;
}

double xi_norm(const ManifoldModel& model, const Vec& x) { return model.xi(x).norm(); }

bool in_tube(const ManifoldModel& model, const Vec& x) {
  if (!x.allFinite()) return false;
  if (xi_norm(model, x) > model.r_tube) return false;
  return !model.tube_guard || model.tube_guard(x);
}

Vec sample_params(const Chart& chart, RandomStream& rng) {
  Vec p(chart.param_dim);
  for (int i = 0; i < chart.param_dim; ++i) p[i] = rng.uniform(chart.lower[i], chart.upper[i]);
  return p;
}

Vec sample_on_sigma(const ManifoldModel& model, RandomStream& rng) {
  if (model.sample_sigma) return model.sample_sigma(rng);
  if (model.chart) return model.chart->point(sample_params(*model.chart, rng));
  throw Error(ErrorKind::InvalidArgument, "model '" + model.name + "' cannot sample its level set");
}

}  // namespace lss
