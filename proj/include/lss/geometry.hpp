#pragma once

#include <functional>

#include "lss/linalg.hpp"
#include "lss/model.hpp"

namespace lss {

struct ProjectionData {
  Mat P;    // id - a grad_xi Psi^{-1} grad_xi^T
  Mat Psi;  // grad_xi^T a grad_xi
  Mat Pa;   // a P^T
  Vec at_point;
};

/// Scalar test function; grad and hess are optional and fall back to
/// finite differences.
struct TestFunction {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

inline constexpr double kRankThreshold = 1e-8;

/// Throws RankDeficient when the smallest singular value of grad xi is below
/// kRankThreshold times the largest.
void check_rank(const Mat& grad_xi);

Mat eval_psi(const ManifoldModel& model, const DiffusionField& field, const Vec& x);
ProjectionData eval_projection(const ManifoldModel& model, const DiffusionField& field,
                               const Vec& x);

/// d_j (Pa)_ij. Uses the model's analytic override when it matches the
/// field's tag, otherwise central differences with step fd_scale (1 + |x|).
Vec eval_pa_divergence(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                       double fd_scale = 1e-5);
Vec eval_pa_divergence_fd(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                          double fd_scale = 1e-5);

/// Second derivatives of each xi component, analytic when available.
std::vector<Mat> eval_xi_hessians(const ManifoldModel& model, const Vec& x);

/// Mean curvature vector for the Euclidean metric.
Vec eval_mean_curvature_id(const ManifoldModel& model, const DiffusionField& field, const Vec& x);

/// Generator of the intrinsic dynamics applied to f at x.
double generator_apply(const ManifoldModel& model, const DiffusionField& field,
                       const TestFunction& f, const Vec& x);

/// True when a(x) equals the identity to rounding.
bool is_identity_metric(const DiffusionField& field, const Vec& x);

}  // namespace lss
