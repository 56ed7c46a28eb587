#pragma once

#include <string>

#include "lss/linalg.hpp"
#include "lss/model.hpp"

namespace lss {

struct ModelPair {
  ManifoldModel model;
  DiffusionField field;
};

struct LinearModel : ModelPair {
  Mat a_reduced;      // Schur complement of the constrained block
  Mat sigma_reduced;  // its lower Cholesky factor
};

/// Ellipse x1^2/c^2 + x2^2 = 1 with a = id and U = 0.
ModelPair make_ellipse(double c = 3.0, double beta = 1.0);

/// Unit sphere in R^d with U = theta^2 / (2 eps), theta the latitude
/// atan2(x_d, |x_{1..d-1}|). The preconditioned variant (d = 3 only) uses the
/// orthogonal frame (x, (x2, -x1, 0), sqrt(eps) rho^2 grad theta) as sigma.
ModelPair make_sphere(int d, bool precond, double eps, double beta = 1.0, bool potential = true);

/// xi(x) = (x_1, ..., x_k) with constant SPD a and U = kappa |x_{k+1..d}|^2 / 2.
LinearModel make_linear(int d, int k, const Mat& a, double beta = 1.0, double kappa = 0.0);

/// Latitude and its gradient on R^d minus the polar axis.
double sphere_latitude(const Vec& x);
Vec sphere_latitude_grad(const Vec& x);

struct BuiltinSpec {
  std::string id;  // linear, sphere_id, sphere_precond, ellipse
  int d = 0;       // 0 selects the model's default
  int k = 1;
  double c = 3.0;
  double eps = 0.1;
  double beta = 1.0;
  double kappa = 0.0;
  Mat a;  // linear model only; empty means identity
};

/// Builds a model by id; throws UnknownModel for anything else.
ModelPair make_builtin(const BuiltinSpec& spec);

}  // namespace lss
