#pragma once

#include <vector>

#include "lss/linalg.hpp"
#include "lss/model.hpp"

namespace lss {

struct FlowConfig {
  double dt0 = 0.1;
  double growth = 1.05;
  double eps_tol = 1e-7;
  long max_iters = 10000;
  double gd_step = 0.1;
  double gd_tol = 1e-7;
  bool record_trace = false;  // store F = |xi|^2 / 2 after every step

  void validate() const;
};

struct FlowResult {
  Vec point;
  long iters = 0;
  double final_xi_norm = 0.0;
  std::vector<double> trace;  // F(y_0), F(y_1), ... when requested
};

/// Number of consecutive |xi| increases after which a flow is declared
/// divergent.
inline constexpr int kDivergenceRun = 10;

/// Limit of the gradient flow y' = -a grad F, F = |xi|^2 / 2, integrated with
/// fixed-step Bogacki-Shampine RK3 on the geometric step sequence
/// dt0 * growth^i until |xi| < eps_tol.
FlowResult theta(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                 const FlowConfig& cfg);

/// Same integrator for y' = -(a - A) grad F. A must be skew-symmetric.
FlowResult theta_skew(const ManifoldModel& model, const DiffusionField& field, const Vec& x,
                      const Mat& A, const FlowConfig& cfg);

/// Throws NotSkewSymmetric unless A + A^T vanishes to rounding.
void require_skew(const Mat& A);

/// Euclidean nearest point on the level set. Models flagged for chart
/// descent use gradient descent on the parametrized distance; all others
/// use damped Newton on the KKT system started from theta(x).
FlowResult pi_nearest(const ManifoldModel& model, const Vec& x, const FlowConfig& cfg);

/// Minimizing chart parameters of the last chart-descent projection
/// (for angle observables), computed alongside pi_nearest.
struct ChartProjection {
  FlowResult result;
  Vec params;
};
ChartProjection pi_chart_descent(const ManifoldModel& model, const Vec& x, const FlowConfig& cfg);
FlowResult pi_kkt_newton(const ManifoldModel& model, const Vec& x, const FlowConfig& cfg);

}  // namespace lss
