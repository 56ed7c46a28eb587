#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lss/error.hpp"
#include "lss/flows.hpp"
#include "lss/linalg.hpp"
#include "lss/model.hpp"
#include "lss/random.hpp"

namespace lss {

enum class SchemeKind { Theta, ThetaSkew, Pi, EmIntrinsic, Soft };

const char* to_string(SchemeKind kind);
SchemeKind scheme_from_string(const std::string& name);

/// True for the schemes whose states are mapped back onto the level set.
bool is_constrained(SchemeKind kind);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::Theta;
  double h = 0.01;
  long n = 1000;
  double beta = 1.0;
  std::uint64_t seed = 0;
  Mat A;                            // theta_skew only
  std::optional<double> eps_soft;   // soft only
  FlowConfig flow;

  void validate(int d) const;
};

struct ChainState {
  Vec x;
  std::int64_t step_index = 0;
  NoiseKey key;
  long cum_flow_iters = 0;
};

ChainState initial_state(const Vec& x0, std::uint64_t seed, std::uint32_t chain_id);

/// Drift b_i = -a_ij d_j U + beta^{-1} d_j a_ij.
Vec drift(const ManifoldModel& model, const DiffusionField& field, const Vec& x, double beta);
inline Vec drift(const ManifoldModel& model, const DiffusionField& field, const Vec& x) {
  return drift(model, field, x, field.beta);
}

/// Blow-up radius of the soft scheme: the model's tube, widened to ten
/// standard deviations of |xi| under the penalized measure.
double soft_tube_radius(const ManifoldModel& model, double eps_soft);

/// One kernel application with caller-supplied standard normal noise eta.
struct StepOutcome {
  Vec x;
  Vec half;  // intermediate state before the constraint map
  long flow_iters = 0;
};
StepOutcome apply_kernel(const ManifoldModel& model, const DiffusionField& field,
                         const SchemeConfig& cfg, const Vec& x, const Vec& eta);

/// Draws eta for the state's current step from its noise key and advances.
ChainState step(const ChainState& s, const ManifoldModel& model, const DiffusionField& field,
                const SchemeConfig& cfg);
ChainState step_theta(const ChainState& s, const ManifoldModel& model, const DiffusionField& field,
                      const SchemeConfig& cfg);
ChainState step_theta_skew(const ChainState& s, const ManifoldModel& model,
                           const DiffusionField& field, const SchemeConfig& cfg);
ChainState step_pi(const ChainState& s, const ManifoldModel& model, const DiffusionField& field,
                   const SchemeConfig& cfg);
ChainState step_em_intrinsic(const ChainState& s, const ManifoldModel& model,
                             const DiffusionField& field, const SchemeConfig& cfg);
ChainState step_soft(const ChainState& s, const ManifoldModel& model, const DiffusionField& field,
                     const SchemeConfig& cfg);

struct Observable {
  std::string name;
  std::function<double(const Vec&)> f;
};

struct ChainOptions {
  std::vector<Observable> observables;
  std::optional<Vec> x0;           // defaults to model.start
  std::uint32_t chain_id = 0;
  double burn_in = 0.0;            // fraction of steps excluded from averages
  bool record_angles = false;      // primary chart parameter of every state
  // Called for x^{(0)}, ..., x^{(n)}, with the flow iterations of the step
  // that produced the state (0 for the initial one).
  std::function<void(std::int64_t, const Vec&, double, long)> on_state;
};

struct ChainReport {
  std::uint32_t chain_id = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> names;
  std::vector<double> averages;
  long steps = 0;      // completed steps
  long averaged = 0;   // states entering the averages
  double max_xi = 0.0;
  long total_flow_iters = 0;
  double mean_flow_iters = 0.0;
  std::vector<double> angles;
  Vec final_x;
  bool aborted = false;
  std::int64_t abort_step = -1;
  ErrorKind abort_kind = ErrorKind::FlowDiverged;
  std::string abort_reason;
};

/// Runs cfg.n steps. Observables are averaged over x^{(l)}, l = l0..n-1,
/// with l0 the burn-in cut. A kernel error stops the chain and is recorded in
/// the returned report instead of being thrown.
ChainReport run_chain(const ManifoldModel& model, const DiffusionField& field,
                      const SchemeConfig& cfg, const ChainOptions& opts);

/// Throws ChainAborted when the report carries an abort.
void throw_if_aborted(const ChainReport& report);

/// Independent replicas with chain ids first_id, first_id + 1, ... spread
/// over the given number of threads. Output is ordered by chain id.
std::vector<ChainReport> run_replicas(const ManifoldModel& model, const DiffusionField& field,
                                      const SchemeConfig& cfg, const ChainOptions& opts,
                                      int replicas, int threads, std::uint32_t first_id = 0);

/// Step-weighted combination; independent of the input order.
ChainReport merge_reports(std::vector<ChainReport> reports);

}  // namespace lss
