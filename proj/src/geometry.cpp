#include "lss/geometry.hpp"

#include <cmath>
#include <limits>

#include "lss/error.hpp"
#include "lss/finite_diff.hpp"

namespace lss {

void check_rank(const Mat& g) {
  double smin, smax;
  if (g.cols() == 1) {
    smin = smax = g.norm();
  } else {
    Eigen::JacobiSVD<Mat> svd(g);
    const auto& s = svd.singularValues();
    smax = s[0];
    smin = s[s.size() - 1];
  }
  if (!(smin >= kRankThreshold * smax) || !(smin > std::numeric_limits<double>::min())) {
    throw Error(ErrorKind::RankDeficient,
                "grad xi singular values " + std::to_string(smin) + " / " + std::to_string(smax));
  }
}

namespace {

struct Factored {
  Mat g;
  Mat a;
  Mat Psi;
  Eigen::LLT<Mat> llt;
};

Factored factor(const ManifoldModel& model, const DiffusionField& field, const Vec& x) {
  Factored out;
  out.g = model.grad_xi(x);
  check_rank(out.g);
  out.a = field.a_at(x);
  out.Psi = out.g.transpose() * out.a * out.g;
  out.llt.compute(out.Psi);
  if (out.llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "Gram matrix has no Cholesky factor");
  }
  return out;
}

}  // namespace

Mat eval_psi(const ManifoldModel& model, const DiffusionField& field, const Vec& x) {
  return factor(model, field, x).Psi;
}

ProjectionData eval_projection(const ManifoldModel& model, const DiffusionField& field,
                               const Vec& x) {
  Factored f = factor(model, field, x);
  const int d = static_cast<int>(x.size());
  const Mat ag = f.a * f.g;
  ProjectionData out;
  out.P = Mat::Identity(d, d) - ag * f.llt.solve(Mat(f.g.transpose()));
  out.Pa = f.a * out.P.transpose();
  out.Psi = std::move(f.Psi);
  out.at_point = x;
  return out;
}

Vec eval_pa_divergence_fd(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                          double fd_scale) {
  return fd::row_divergence([&](const Vec& y) { return eval_projection(model, field, y).Pa; }, x,
                            fd::step(x, fd_scale));
}

Vec eval_pa_divergence(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                       double fd_scale) {
  if (model.div_pa && model.div_pa_tag == field.tag) return model.div_pa(x);
  return eval_pa_divergence_fd(model, field, x, fd_scale);
}

std::vector<Mat> eval_xi_hessians(const ManifoldModel& model, const Vec& x) {
  if (model.hess_xi) return model.hess_xi(x);
  std::vector<Mat> out;
  const double h = fd::step(x);
  for (int alpha = 0; alpha < model.k; ++alpha) {
    Mat H = fd::jacobian([&](const Vec& y) { return Vec(model.grad_xi(y).col(alpha)); }, x, h);
    out.push_back(0.5 * (H + H.transpose()));
  }
  return out;
}

bool is_identity_metric(const DiffusionField& field, const Vec& x) {
  if (field.identity) return true;
  const int d = static_cast<int>(x.size());
  return max_abs(field.a_at(x) - Mat::Identity(d, d)) <= 1e-12;
}

Vec eval_mean_curvature_id(const ManifoldModel& model, const DiffusionField& field, const Vec& x) {
  if (!is_identity_metric(field, x)) {
    throw Error(ErrorKind::RequiresIdentityMetric, "mean curvature needs a = id");
  }
  const ProjectionData pd = eval_projection(model, field, x);
  const Mat g = model.grad_xi(x);
  const auto hess = eval_xi_hessians(model, x);
  Vec traces(model.k);
  for (int alpha = 0; alpha < model.k; ++alpha) {
    traces[alpha] = (pd.P.cwiseProduct(hess[alpha])).sum();
  }
  const Vec coeff = pd.Psi.llt().solve(traces);
  return -(g * coeff);
}

double generator_apply(const ManifoldModel& model, const DiffusionField& field,
                       const TestFunction& tf, const Vec& x) {
  const ProjectionData pd = eval_projection(model, field, x);
  const Vec grad = tf.grad ? tf.grad(x) : fd::gradient(tf.f, x, fd::step(x));
  const Mat hess =
      tf.hess ? tf.hess(x) : fd::hessian(tf.f, x, fd::step(x, fd::kSecondOrderScale));
  const Vec div = eval_pa_divergence(model, field, x);
  const Vec gU = field.grad_U_at(x);
  const double inv_beta = 1.0 / field.beta;
  return -(pd.Pa * gU).dot(grad) + inv_beta * div.dot(grad) +
         inv_beta * pd.Pa.cwiseProduct(hess).sum();
}

}  // namespace lss
