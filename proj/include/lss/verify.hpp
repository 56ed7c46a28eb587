#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lss/flows.hpp"
#include "lss/model.hpp"

namespace lss {

struct CheckResult {
  std::string name;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  int points_tested = 0;
  int points_skipped = 0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  int samples = 100;
  std::uint64_t seed = 20240601;
  // Size of a deliberate perturbation of the claimed side of every identity;
  // nonzero values are negative controls and must make the check fail.
  double corruption = 0.0;
  FlowConfig flow = derivative_check_flow();
  // Second differences divide the flow's stopping error by the squared
  // stencil step, so those checks stop the flows two decades tighter.
  FlowConfig second_order_flow = second_order_check_flow();

  static FlowConfig derivative_check_flow();
  static FlowConfig second_order_check_flow();
};

inline constexpr double kTolIdentity = 1e-10;
inline constexpr double kTolJacobian = 1e-4;
inline constexpr double kTolHessian = 1e-3;
inline constexpr double kTolSurfaceRatio = 1e-8;
inline constexpr double kTolDivIdentity = 1e-6;

/// Points on the level set: chart samples when a chart exists, otherwise the
/// model's own sampler. Sphere charts stay away from the poles.
std::vector<Vec> sample_sigma_points(const ManifoldModel& model, int count, std::uint64_t seed);

/// Points in the tube: level-set points pushed off along the normal.
std::vector<Vec> sample_tube_points(const ManifoldModel& model, int count, std::uint64_t seed);

CheckResult check_p_identities(const ManifoldModel& model, const DiffusionField& field,
                               const VerifyOptions& opts);
CheckResult check_theta_jacobian(const ManifoldModel& model, const DiffusionField& field,
                                 const VerifyOptions& opts);
CheckResult check_theta_hessian_contraction(const ManifoldModel& model,
                                            const DiffusionField& field,
                                            const VerifyOptions& opts);
/// First and second derivative identities of the nearest-point map (a = id);
/// returns one result per identity.
std::vector<CheckResult> check_pi_derivatives(const ManifoldModel& model,
                                              const VerifyOptions& opts);
CheckResult check_surface_measure_ratio(const ManifoldModel& model, const DiffusionField& field,
                                        const VerifyOptions& opts);
CheckResult check_divergence_identity(const ManifoldModel& model, const DiffusionField& field,
                                    const VerifyOptions& opts);
/// Analytic d_j (Pa)_ij override against finite differences.
CheckResult check_pa_divergence_override(const ManifoldModel& model, const DiffusionField& field,
                                         const VerifyOptions& opts);
/// Generator applied to each xi component on the level set.
CheckResult check_generator_xi(const ManifoldModel& model, const DiffusionField& field,
                               const VerifyOptions& opts);

}  // namespace lss
