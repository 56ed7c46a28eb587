#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lss/dynamics.hpp"
#include "lss/model.hpp"

namespace lss {

class AngleHistogram {
 public:
  AngleHistogram(int bins, double lo, double hi);

  void add(double value);  // values outside [lo, hi) are wrapped onto the end bins
  void add(const std::vector<double>& values);

  int bins() const { return static_cast<int>(counts_.size()); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return (hi_ - lo_) / bins(); }
  double center(int b) const { return lo_ + (b + 0.5) * width(); }
  long total() const { return total_; }
  const std::vector<long>& counts() const { return counts_; }

  std::vector<double> probabilities() const;  // per-bin mass, sums to 1
  std::vector<double> density() const;        // mass / width

 private:
  double lo_, hi_;
  std::vector<long> counts_;
  long total_ = 0;
};

enum class Measure { Mu1, Mu2 };
const char* to_string(Measure m);
Measure measure_from_string(const std::string& name);

struct ReferenceParams {
  double c = 3.0;     // ellipse
  double beta = 1.0;  // sphere
  double eps = 0.1;   // sphere
};

/// Analytic density of the primary chart parameter of a built-in model,
/// normalized by adaptive Gauss-Kronrod quadrature.
class ReferenceDensity {
 public:
  ReferenceDensity(const std::string& model_id, Measure measure, ReferenceParams params = {});

  double operator()(double t) const { return weight(t) / norm_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double normalizer() const { return norm_; }

  /// Probability of each of the given number of equal bins on [lo, hi).
  std::vector<double> binned(int bins) const;

  /// Expectation of g(t) under the reference.
  double expectation(const std::function<double(double)>& g) const;

 private:
  double weight(double t) const;

  std::string model_id_;
  Measure measure_;
  ReferenceParams params_;
  double lo_ = 0.0, hi_ = 0.0, norm_ = 1.0;
};

/// Convenience wrapper for a single density value.
double reference_density(const std::string& model_id, Measure measure, double t,
                         ReferenceParams params = {});

/// Adaptive Gauss-Kronrod quadrature to the given relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// Reference expectation of a named built-in observable (const1, x1sq,
/// angle) for a chart-bearing built-in model. Throws UnknownModel otherwise.
double builtin_reference_mean(const std::string& model_id, Measure measure,
                              const std::string& observable, ReferenceParams params = {});

/// Half the l1 distance between two probability vectors.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

/// Total variation between the histogram's bin masses and the reference's.
/// Throws DomainMismatch unless the histogram spans the reference domain.
double density_distance(const AngleHistogram& hist, const ReferenceDensity& ref);

struct SweepCell {
  double h = 0.0;
  double T = 0.0;
  long n = 0;
  std::vector<double> replica_averages;
  double bias = 0.0;      // mean of replica averages minus the reference
  double variance = 0.0;  // sample variance across replicas
  double mse = 0.0;       // mean squared deviation from the reference
  double mean_flow_iters = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct ConvergenceReport {
  double reference = 0.0;
  int replicas = 0;
  std::vector<SweepCell> cells;
  double bias_slope = 0.0;  // log|bias| against log h at the largest T
  double mse_slope = 0.0;   // log MSE against log(1/T) at the smallest h
};

struct SweepPlan {
  std::vector<double> h_list;      // for the bias fit, run at max(T_list)...
  std::vector<double> T_list;      // ...and for the MSE fit, run at min(h_list)
  int replicas = 16;
  int threads = 1;
  double burn_in = 0.0;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Replica sweep over (h, T) cells: every h at the largest T and every T at
/// the smallest h, which is exactly what the two slope fits need.
ConvergenceReport error_sweep(const ManifoldModel& model, const DiffusionField& field,
                              const SchemeConfig& base, const Observable& f, double reference,
                              const SweepPlan& plan);

struct SoftRow {
  double eps = 0.0;
  double h = 0.0;
  long n = 0;
  double average = 0.0;
  double error = 0.0;    // |average - reference|
  double std_err = 0.0;  // across replicas
  bool aborted = false;
  std::string abort_reason;
};

struct SoftCheck {
  std::vector<SoftRow> rows;
  bool monotone = false;  // errors non-increasing up to twice the combined noise
};

/// Long soft-constraint runs for each eps with h = h_ratio * eps and n = T / h.
SoftCheck soft_convergence_check(const ManifoldModel& model, const DiffusionField& field,
                                 const Observable& f, double reference,
                                 const std::vector<double>& eps_list, double h_ratio, double T,
                                 int replicas, int threads, std::uint64_t seed);

}  // namespace lss
