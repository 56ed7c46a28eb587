#include "lss/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lss/error.hpp"
#include "lss/finite_diff.hpp"
#include "lss/geometry.hpp"
#include "lss/random.hpp"

namespace lss {

FlowConfig VerifyOptions::derivative_check_flow() {
  FlowConfig f;
  f.eps_tol = 1e-10;
  f.gd_tol = 1e-12;
  f.max_iters = 100000;
  return f;
}

FlowConfig VerifyOptions::second_order_check_flow() {
  FlowConfig f = derivative_check_flow();
  f.eps_tol = 1e-12;
  return f;
}

std::vector<Vec> sample_sigma_points(const ManifoldModel& model, int count, std::uint64_t seed) {
  RandomStream rng(seed, 0xC0FFEEu);
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pts.push_back(sample_on_sigma(model, rng));
  return pts;
}

std::vector<Vec> sample_tube_points(const ManifoldModel& model, int count, std::uint64_t seed) {
  RandomStream rng(seed, 0xBEEFu);
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(pts.size()) < count) {
    const Vec y = sample_on_sigma(model, rng);
    const Mat g = model.grad_xi(y);
    Vec w(model.k);
    for (int a = 0; a < model.k; ++a) w[a] = rng.normal();
    const Vec v = (g * w).normalized();
    double t = rng.uniform(-0.2, 0.2);
    for (int tries = 0; tries < 8; ++tries, t *= 0.5) {
      const Vec x = y + t * v;
      if (in_tube(model, x)) {
        pts.push_back(x);
        break;
      }
    }
  }
  return pts;
}

namespace {

// |L - R| over max(|L|, |R|, floor) in the max norm.
template <class A, class B>
double rel_err(const A& L, const B& R, double floor) {
  return max_abs(L - R) / std::max({max_abs(L), max_abs(R), floor});
}

struct Tally {
  CheckResult r;
  explicit Tally(std::string name, double tol) {
    r.name = std::move(name);
    r.tolerance = tol;
  }
  void add(double abs_err, double rel) {
    r.max_abs_error = std::max(r.max_abs_error, abs_err);
    r.max_rel_error = std::max(r.max_rel_error, rel);
    ++r.points_tested;
  }
  void skip() { ++r.points_skipped; }
  CheckResult finish(bool use_rel) {
    const double e = use_rel ? r.max_rel_error : r.max_abs_error;
    r.pass = r.points_tested > 0 && std::isfinite(e) && e < r.tolerance;
    std::ostringstream os;
    os << (use_rel ? "relative" : "absolute") << " max-norm error";
    if (r.points_skipped > 0) os << ", " << r.points_skipped << " points skipped";
    r.detail = os.str();
    return r;
  }
};

Mat ones(int d) { return Mat::Ones(d, d); }

double log_det_psi(const ManifoldModel& model, const DiffusionField& field, const Vec& x) {
  return 2.0 * std::log(eval_psi(model, field, x).llt().matrixL().toDenseMatrix().diagonal().prod());
}

// Sum_m D^2 F[v_m, v_m] for the columns v_m of V, second central differences
// with one Richardson level.
template <class F>
Vec contracted_second_difference(F&& f, const Vec& x, const Mat& V, double s) {
  const Vec f0 = f(x);
  auto plain = [&](double t) {
    Vec acc = Vec::Zero(f0.size());
    for (int m = 0; m < V.cols(); ++m) {
      acc += (f(Vec(x + t * V.col(m))) - 2.0 * f0 + f(Vec(x - t * V.col(m)))) / (t * t);
    }
    return acc;
  };
  return (4.0 * plain(0.5 * s) - plain(s)) / 3.0;
}

double second_order_step(const Vec& x) { return 1e-3 * std::sqrt(1.0 + x.norm()); }

}  // namespace

CheckResult check_p_identities(const ManifoldModel& model, const DiffusionField& field,
                               const VerifyOptions& opts) {
  Tally t("p-identities/" + model.name + "/" + field.tag, kTolIdentity);
  for (const Vec& x : sample_tube_points(model, opts.samples, opts.seed)) {
    const ProjectionData pd = eval_projection(model, field, x);
    const Mat P = pd.P + opts.corruption * ones(model.d);
    const Mat a = field.a_at(x);
    const Mat g = model.grad_xi(x);
    const double e1 = max_abs(P * P - P);
    const double e2 = max_abs(a * P.transpose() - P * a);
    const double e3 = max_abs(P.transpose() * g);
    const double scale = std::max({1.0, max_abs(P), max_abs(a), max_abs(g)});
    const double e = std::max({e1, e2, e3});
    t.add(e, e / scale);
  }
  return t.finish(true);
}

CheckResult check_theta_jacobian(const ManifoldModel& model, const DiffusionField& field,
                                 const VerifyOptions& opts) {
  Tally t("theta-jacobian/" + model.name + "/" + field.tag, kTolJacobian);
  auto th = [&](const Vec& y) { return theta(model, field, y, opts.flow).point; };
  for (const Vec& x : sample_sigma_points(model, opts.samples, opts.seed)) {
    try {
      const Mat J = fd::jacobian(th, x, 1e-5);
      const Mat P = eval_projection(model, field, x).P + opts.corruption * ones(model.d);
      t.add(max_abs(J - P), rel_err(J, P, 1.0));
    } catch (const Error&) {
      t.skip();
    }
  }
  return t.finish(false);
}

CheckResult check_theta_hessian_contraction(const ManifoldModel& model,
                                            const DiffusionField& field,
                                            const VerifyOptions& opts) {
  Tally t("theta-hessian/" + model.name + "/" + field.tag, kTolHessian);
  auto th = [&](const Vec& y) { return theta(model, field, y, opts.second_order_flow).point; };
  for (const Vec& x : sample_sigma_points(model, opts.samples, opts.seed)) {
    try {
      const Vec L = contracted_second_difference(th, x, field.sigma_at(x), second_order_step(x));
      const ProjectionData pd = eval_projection(model, field, x);
      Vec R = eval_pa_divergence(model, field, x) - pd.P * field.div_a_at(x);
      R.array() += opts.corruption;
      t.add(max_abs(L - R), rel_err(L, R, 1e-3));
    } catch (const Error&) {
      t.skip();
    }
  }
  return t.finish(true);
}

std::vector<CheckResult> check_pi_derivatives(const ManifoldModel& model,
                                              const VerifyOptions& opts) {
  const DiffusionField id = identity_field(model.d);
  Tally first("pi-jacobian/" + model.name, kTolJacobian);
  Tally second("pi-laplacian/" + model.name, kTolHessian);
  auto pi = [&](const Vec& y) { return pi_nearest(model, y, opts.flow).point; };
  auto pi2 = [&](const Vec& y) { return pi_nearest(model, y, opts.second_order_flow).point; };
  const Mat I = Mat::Identity(model.d, model.d);
  for (const Vec& x : sample_sigma_points(model, opts.samples, opts.seed)) {
    try {
      const ProjectionData pd = eval_projection(model, id, x);
      const Mat J = fd::jacobian(pi, x, 1e-5);
      const Mat P = pd.P + opts.corruption * ones(model.d);
      first.add(max_abs(J - P), rel_err(J, P, 1.0));

      const Vec L = contracted_second_difference(pi2, x, I, second_order_step(x));
      const Vec grad_ld = fd::gradient([&](const Vec& y) { return log_det_psi(model, id, y); }, x,
                                       fd::step(x));
      Vec R = eval_pa_divergence(model, id, x) + 0.5 * pd.Pa * grad_ld;
      R.array() += opts.corruption;
      second.add(max_abs(L - R), rel_err(L, R, 1e-3));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonUnique && e.kind() != ErrorKind::MaxIters) throw;
      first.skip();
      second.skip();
    }
  }
  return {first.finish(false), second.finish(true)};
}

CheckResult check_surface_measure_ratio(const ManifoldModel& model, const DiffusionField& field,
                                        const VerifyOptions& opts) {
  Tally t("surface-ratio/" + model.name + "/" + field.tag, kTolSurfaceRatio);
  if (!model.chart) {
    t.r.detail = "model has no chart";
    return t.r;
  }
  const Chart& chart = *model.chart;
  RandomStream rng(opts.seed, 0x5eedu);
  for (int i = 0; i < opts.samples; ++i) {
    Vec p = sample_params(chart, rng);
    const Vec x = chart.point(p);
    if (!in_tube(model, x)) {
      --i;
      continue;
    }
    const Mat a = field.a_at(x);
    const Mat g = model.grad_xi(x);
    const Mat J = chart.jacobian(p);
    const double formula = std::sqrt(eval_psi(model, field, x).determinant() /
                                     (g.transpose() * g).determinant() / a.determinant());
    const double tangent = std::sqrt((J.transpose() * a.inverse() * J).determinant() /
                                     (J.transpose() * J).determinant()) +
                           opts.corruption;
    t.add(std::abs(formula - tangent), std::abs(formula - tangent) / std::abs(tangent));
  }
  return t.finish(true);
}

CheckResult check_divergence_identity(const ManifoldModel& model, const DiffusionField& field,
                                    const VerifyOptions& opts) {
  Tally t("divergence-identity/" + model.name + "/" + field.tag, kTolDivIdentity);
  const int d = model.d;
  auto a_inv = [&](const Vec& y) { return Mat(field.a_at(y).inverse()); };
  auto log_det_a = [&](const Vec& y) {
    return Mat::Constant(1, 1, std::log(field.a_at(y).determinant()));
  };
  auto log_det_psi_m = [&](const Vec& y) {
    return Mat::Constant(1, 1, log_det_psi(model, field, y));
  };
  auto P_of = [&](const Vec& y) { return eval_projection(model, field, y).P; };
  for (const Vec& x : sample_sigma_points(model, opts.samples, opts.seed)) {
    const double h = 1e-3 * (1.0 + x.norm());
    const ProjectionData pd = eval_projection(model, field, x);
    Vec v(d), grad_lda(d), grad_ldpsi(d), w = Vec::Zero(d);
    for (int r = 0; r < d; ++r) {
      v[r] = pd.Pa.cwiseProduct(fd::partial(a_inv, x, r, h)).sum();
      grad_lda[r] = fd::partial(log_det_a, x, r, h)(0, 0);
      grad_ldpsi[r] = fd::partial(log_det_psi_m, x, r, h)(0, 0);
      // w_r = d_l P_lr
      w += fd::partial(P_of, x, r, h).row(r).transpose();
    }
    const Vec L = 0.5 * (pd.Pa * v);
    const Vec T1 = -0.5 * (pd.Pa * grad_lda), T2 = pd.Pa * w, T3 = 0.5 * (pd.Pa * grad_ldpsi);
    Vec R = T1 + T2 + T3;
    R.array() += opts.corruption;
    // Relative to the largest individual term: for a = id both sides vanish
    // while the right-hand terms do not.
    const double scale = std::max({max_abs(L), max_abs(T1), max_abs(T2), max_abs(T3), 1e-12});
    t.add(max_abs(L - R), max_abs(L - R) / scale);
  }
  return t.finish(true);
}

CheckResult check_pa_divergence_override(const ManifoldModel& model, const DiffusionField& field,
                                         const VerifyOptions& opts) {
  Tally t("pa-divergence/" + model.name + "/" + field.tag, 1e-4);
  if (!model.div_pa || model.div_pa_tag != field.tag) {
    t.r.detail = "no analytic override for this field";
    t.r.pass = true;
    return t.r;
  }
  std::vector<Vec> pts = sample_sigma_points(model, opts.samples, opts.seed);
  const auto tube = sample_tube_points(model, opts.samples, opts.seed + 1);
  pts.insert(pts.end(), tube.begin(), tube.end());
  for (const Vec& x : pts) {
    Vec A = model.div_pa(x);
    A.array() += opts.corruption;
    const Vec F = eval_pa_divergence_fd(model, field, x);
    t.add(max_abs(A - F), rel_err(A, F, 1e-3));
  }
  return t.finish(true);
}

CheckResult check_generator_xi(const ManifoldModel& model, const DiffusionField& field,
                               const VerifyOptions& opts) {
  Tally t("generator-xi/" + model.name + "/" + field.tag, 1e-5);
  for (const Vec& x : sample_sigma_points(model, opts.samples, opts.seed)) {
    double worst = 0.0;
    for (int alpha = 0; alpha < model.k; ++alpha) {
      TestFunction f{[&, alpha](const Vec& y) { return model.xi(y)[alpha]; }, {}, {}};
      worst = std::max(worst, std::abs(generator_apply(model, field, f, x) + opts.corruption));
    }
    t.add(worst, worst);
  }
  return t.finish(false);
}

}  // namespace lss
