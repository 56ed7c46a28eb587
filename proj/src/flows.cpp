#include "lss/flows.hpp"

#include <cmath>
#include <numbers>

#include "lss/error.hpp"
#include "lss/finite_diff.hpp"
#include "lss/geometry.hpp"

namespace lss {

void FlowConfig::validate() const {
  if (!(dt0 > 0.0) || !(growth >= 1.0) || !(eps_tol > 0.0) || max_iters < 1 || !(gd_step > 0.0) ||
      !(gd_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "flow config needs dt0 > 0, growth >= 1, eps_tol > 0, max_iters >= 1, "
                "gd_step > 0, gd_tol > 0");
  }
}

void require_skew(const Mat& A) {
  const double scale = std::max(1.0, max_abs(A));
  if (A.rows() != A.cols() || max_abs(A + A.transpose()) > 1e-14 * scale) {
    throw Error(ErrorKind::NotSkewSymmetric, "A + A^T must vanish");
  }
}

namespace {

// Vector field -(a - A) grad_xi xi. A == nullptr is the gradient flow.
inline Vec flow_field(const ManifoldModel& model, const DiffusionField& field, const Mat* A,
                      const Vec& y) {
  const Vec gxi = model.grad_xi(y) * model.xi(y);
  if (field.identity && A == nullptr) return -gxi;
  Mat M = field.identity ? Mat(Mat::Identity(y.size(), y.size())) : field.a_at(y);
  if (A != nullptr) M -= *A;
  return -(M * gxi);
}

FlowResult integrate(const ManifoldModel& model, const DiffusionField& field, const Mat* A,
                     const Vec& x, const FlowConfig& cfg) {
  cfg.validate();
  FlowResult out;
  Vec y = x;
  double norm = xi_norm(model, y);
  if (cfg.record_trace) out.trace.push_back(0.5 * norm * norm);
  if (!std::isfinite(norm)) throw Error(ErrorKind::FlowDiverged, "non-finite start point");
  if (norm < cfg.eps_tol) {
    out.point = y;
    out.final_xi_norm = norm;
    return out;
  }
  double dt = cfg.dt0;
  int rising = 0;
  for (long i = 0; i < cfg.max_iters; ++i) {
    const Vec k1 = flow_field(model, field, A, y);
    const Vec k2 = flow_field(model, field, A, y + 0.5 * dt * k1);
    const Vec k3 = flow_field(model, field, A, y + 0.75 * dt * k2);
    y += dt * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3);
    dt *= cfg.growth;
    const double next = xi_norm(model, y);
    ++out.iters;
    if (cfg.record_trace) out.trace.push_back(0.5 * next * next);
    if (!std::isfinite(next) || !y.allFinite()) {
      throw Error(ErrorKind::FlowDiverged, "non-finite state after " + std::to_string(out.iters) +
                                               " steps");
    }
    if (next < cfg.eps_tol) {
      out.point = y;
      out.final_xi_norm = next;
      return out;
    }
    rising = next > norm ? rising + 1 : 0;
    if (rising >= kDivergenceRun) {
      throw Error(ErrorKind::FlowDiverged,
                  "|xi| grew for " + std::to_string(kDivergenceRun) + " consecutive steps");
    }
    norm = next;
  }
  throw Error(ErrorKind::FlowDiverged,
              "no convergence within " + std::to_string(cfg.max_iters) + " steps");
}

double dist2(const Vec& a, const Vec& b) { return (a - b).squaredNorm(); }

struct Descent {
  Vec params;
  Vec point;
  long iters = 0;
};

Descent chart_descent_from(const Chart& chart, const Vec& x, Vec p, const FlowConfig& cfg,
                           long budget) {
  Descent out;
  for (long i = 0;; ++i) {
    const Vec gam = chart.point(p);
    const Vec grad = -2.0 * chart.jacobian(p).transpose() * (x - gam);
    if (grad.norm() < cfg.gd_tol) {
      out.params = p;
      out.point = gam;
      out.iters = i;
      return out;
    }
    if (i >= budget || !grad.allFinite()) {
      throw Error(ErrorKind::MaxIters, "chart gradient descent did not reach |grad| < " +
                                           std::to_string(cfg.gd_tol));
    }
    p -= cfg.gd_step * grad;
  }
}

Mat objective_hessian(const Chart& chart, const Vec& x, const Vec& p) {
  auto grad = [&](const Vec& q) -> Vec {
    return -2.0 * chart.jacobian(q).transpose() * (x - chart.point(q));
  };
  Mat H = fd::jacobian(grad, p, fd::step(p));
  return 0.5 * (H + H.transpose());
}

void wrap_periodic(const Chart& chart, Vec& p) {
  // The built-in charts are periodic in their first parameter.
  const double lo = chart.lower[0], span = chart.upper[0] - chart.lower[0];
  p[0] = lo + std::fmod(std::fmod(p[0] - lo, span) + span, span);
}

}  // namespace

FlowResult theta(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                 const FlowConfig& cfg) {
  return integrate(model, field, nullptr, x, cfg);
}

FlowResult theta_skew(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                      const Mat& A, const FlowConfig& cfg) {
  require_skew(A);
  return integrate(model, field, &A, x, cfg);
}

ChartProjection pi_chart_descent(const ManifoldModel& model, const Vec& x, const FlowConfig& cfg) {
  cfg.validate();
  if (!model.chart) throw Error(ErrorKind::InvalidArgument, "model has no chart");
  const Chart& chart = *model.chart;
  Descent best = chart_descent_from(chart, x, chart.inverse(x), cfg, cfg.max_iters);
  long iters = best.iters;

  Eigen::SelfAdjointEigenSolver<Mat> eig(objective_hessian(chart, x, best.params));
  if (eig.eigenvalues()[0] <= 0.0) {
    // Stationary but not a strict minimum: restart on both sides along the
    // direction of negative curvature and keep the closer end point.
    const Vec v = eig.eigenvectors().col(0);
    Descent left = chart_descent_from(chart, x, best.params - 0.1 * v, cfg, cfg.max_iters);
    Descent right = chart_descent_from(chart, x, best.params + 0.1 * v, cfg, cfg.max_iters);
    iters += left.iters + right.iters;
    const double dl = std::sqrt(dist2(x, left.point)), dr = std::sqrt(dist2(x, right.point));
    if (std::abs(dl - dr) < 1e-9) {
      throw Error(ErrorKind::NonUnique, "two nearest points at equal distance");
    }
    best = dl < dr ? left : right;
  }
  wrap_periodic(chart, best.params);
  ChartProjection out;
  out.params = best.params;
  out.result.point = best.point;
  out.result.iters = iters;
  out.result.final_xi_norm = xi_norm(model, best.point);
  return out;
}

namespace {

struct KktSolution {
  Vec y;
  Vec lambda;
  long iters = 0;
};

Vec kkt_residual(const ManifoldModel& model, const Vec& x, const Vec& y, const Vec& lambda) {
  const int d = model.d, k = model.k;
  Vec r(d + k);
  r.head(d) = y - x - model.grad_xi(y) * lambda;
  r.tail(k) = model.xi(y);
  return r;
}

Mat lagrangian_hessian(const ManifoldModel& model, const Vec& y, const Vec& lambda) {
  Mat L = Mat::Identity(model.d, model.d);
  const auto hess = eval_xi_hessians(model, y);
  for (int a = 0; a < model.k; ++a) L -= lambda[a] * hess[a];
  return L;
}

KktSolution kkt_newton_from(const ManifoldModel& model, const Vec& x, const Vec& y0, long budget) {
  const int d = model.d, k = model.k;
  KktSolution s;
  s.y = y0;
  const Mat g0 = model.grad_xi(y0);
  s.lambda = (g0.transpose() * g0).ldlt().solve(g0.transpose() * (y0 - x));
  const double tol = 1e-13 * (1.0 + x.norm());
  Vec r = kkt_residual(model, x, s.y, s.lambda);
  for (long it = 0;; ++it) {
    if (max_abs(r) <= tol) {
      s.iters = it;
      return s;
    }
    if (it >= budget) throw Error(ErrorKind::MaxIters, "KKT Newton did not converge");
    Mat J = Mat::Zero(d + k, d + k);
    const Mat g = model.grad_xi(s.y);
    J.topLeftCorner(d, d) = lagrangian_hessian(model, s.y, s.lambda);
    J.topRightCorner(d, k) = -g;
    J.bottomLeftCorner(k, d) = g.transpose();
    const Vec delta = J.fullPivLu().solve(-r);
    const double merit = 0.5 * r.squaredNorm();
    double t = 1.0;
    Vec y_new, l_new, r_new;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      y_new = s.y + t * delta.head(d);
      l_new = s.lambda + t * delta.tail(k);
      r_new = kkt_residual(model, x, y_new, l_new);
      if (0.5 * r_new.squaredNorm() <= (1.0 - 1e-4 * t) * merit) break;
    }
    s.y = y_new;
    s.lambda = l_new;
    r = r_new;
  }
}

// Smallest eigenvalue of the Lagrangian Hessian on the tangent space, with
// the matching tangent eigenvector.
std::pair<double, Vec> tangent_curvature(const ManifoldModel& model, const Vec& y,
                                         const Vec& lambda) {
  const Mat g = model.grad_xi(y);
  Eigen::FullPivHouseholderQR<Mat> qr(g);
  const Mat Q = qr.matrixQ();
  const Mat T = Q.rightCols(model.d - model.k);
  Eigen::SelfAdjointEigenSolver<Mat> eig(T.transpose() * lagrangian_hessian(model, y, lambda) * T);
  return {eig.eigenvalues()[0], T * eig.eigenvectors().col(0)};
}

}  // namespace

FlowResult pi_kkt_newton(const ManifoldModel& model, const Vec& x, const FlowConfig& cfg) {
  cfg.validate();
  const DiffusionField id = identity_field(model.d);
  const Vec y0 = theta(model, id, x, cfg).point;
  KktSolution best = kkt_newton_from(model, x, y0, 100);
  long iters = best.iters;
  auto [curv, v] = tangent_curvature(model, best.y, best.lambda);
  if (curv <= 0.0) {
    // Not a strict local minimizer of the distance: restart from flow images
    // of points displaced along the offending tangent direction.
    const double step = 0.1 * (1.0 + (x - best.y).norm());
    KktSolution left = kkt_newton_from(model, x, theta(model, id, best.y - step * v, cfg).point, 100);
    KktSolution right = kkt_newton_from(model, x, theta(model, id, best.y + step * v, cfg).point, 100);
    iters += left.iters + right.iters;
    const double dl = (x - left.y).norm(), dr = (x - right.y).norm();
    if (std::abs(dl - dr) < 1e-9) {
      throw Error(ErrorKind::NonUnique, "two nearest points at equal distance");
    }
    best = dl < dr ? left : right;
  }
  FlowResult out;
  out.point = best.y;
  out.iters = iters;
  out.final_xi_norm = xi_norm(model, best.y);
  return out;
}

FlowResult pi_nearest(const ManifoldModel& model, const Vec& x, const FlowConfig& cfg) {
  if (model.pi_chart_descent && model.chart) return pi_chart_descent(model, x, cfg).result;
  return pi_kkt_newton(model, x, cfg);
}

}  // namespace lss
