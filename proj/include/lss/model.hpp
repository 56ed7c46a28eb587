#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lss/linalg.hpp"
#include "lss/random.hpp"

namespace lss {

/// Parametrization of the level set by a box of parameters. Used by the
/// built-in models for reference densities, test-point sampling and the
/// parametrized nearest-point search.
struct Chart {
  int param_dim = 0;
  Vec lower;
  Vec upper;
  std::function<Vec(const Vec&)> point;     // parameters -> point on the level set
  std::function<Mat(const Vec&)> jacobian;  // d x param_dim tangent frame
  std::function<Vec(const Vec&)> inverse;   // point near the level set -> parameters
};

/// Reaction coordinate xi: R^d -> R^k and the level set {xi = 0}.
struct ManifoldModel {
  std::string name;
  int d = 0;
  int k = 0;
  std::function<Vec(const Vec&)> xi;
  std::function<Mat(const Vec&)> grad_xi;  // d x k, column alpha is grad xi_alpha
  // Optional analytic second derivatives, one d x d matrix per component.
  std::function<std::vector<Mat>(const Vec&)> hess_xi;
  std::optional<Chart> chart;
  bool pi_chart_descent = false;  // nearest point by descent in chart parameters

  // Tubular neighbourhood: |xi(x)| <= r_tube, minus whatever tube_guard rejects.
  double r_tube = 0.5;
  std::function<bool(const Vec&)> tube_guard;

  // Analytic d_j (Pa)_ij. Only valid together with a field whose tag equals
  // div_pa_tag; other fields fall back to finite differences.
  std::function<Vec(const Vec&)> div_pa;
  std::string div_pa_tag;

  // Draws a point on the level set. Falls back to the chart when empty.
  std::function<Vec(RandomStream&)> sample_sigma;

  Vec start;  // default initial state on the level set
  bool compact = true;
};

/// Noise coefficient sigma, its square a = sigma sigma^T, the potential U
/// and the inverse temperature.
struct DiffusionField {
  std::string tag;
  int d = 0;
  double beta = 1.0;
  bool identity = false;  // sigma == a == id everywhere
  bool constant = false;  // sigma independent of x
  double min_eig = 0.0;   // declared lower bound for the spectrum of a

  std::function<Mat(const Vec&)> sigma;
  std::function<Mat(const Vec&)> a;       // optional; defaults to sigma sigma^T
  std::function<Vec(const Vec&)> div_a;   // optional analytic d_j a_ij
  std::function<double(const Vec&)> U;    // optional; empty means U == 0
  std::function<Vec(const Vec&)> grad_U;  // required when U is set

  Mat sigma_at(const Vec& x) const;
  Mat a_at(const Vec& x) const;
  Vec div_a_at(const Vec& x) const;
  double U_at(const Vec& x) const;
  Vec grad_U_at(const Vec& x) const;
};

DiffusionField identity_field(int d, double beta = 1.0);
DiffusionField constant_field(const Mat& a, double beta = 1.0, std::string tag = "constant");

/// |xi(x)| in the Euclidean norm of R^k.
double xi_norm(const ManifoldModel& model, const Vec& x);

bool in_tube(const ManifoldModel& model, const Vec& x);

/// A point on the level set drawn from the model's sampler or chart.
Vec sample_on_sigma(const ManifoldModel& model, RandomStream& rng);

/// Chart parameters drawn uniformly from the chart's box.
Vec sample_params(const Chart& chart, RandomStream& rng);

}  // namespace lss
