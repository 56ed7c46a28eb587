#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lss/dynamics.hpp"
#include "lss/estimators.hpp"
#include "lss/models.hpp"

namespace lss::app {

/// Anything wrong with a config file: syntax, unknown keys, bad values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  BuiltinSpec model;
  SchemeConfig scheme;
  std::vector<std::string> observables{"const1", "x1sq"};

  int replicas = 1;
  double burn_in = 0.0;
  int threads = 1;

  std::string out_dir = ".";
  bool write_samples = true;
  long sample_stride = 1;

  int bins = 100;

  std::vector<double> sweep_h;
  std::vector<double> sweep_T;
  int sweep_replicas = 16;
  std::string sweep_observable = "x1sq";
  std::optional<Measure> sweep_measure;  // defaults by scheme kind

  // FNV-1a of the canonical re-serialization, without [output], the seed and
  // the thread count.
  std::string hash;
};

RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Built-in observables by name: const1, x1sq and angle (the model's primary
/// chart parameter).
std::vector<Observable> make_observables(const std::vector<std::string>& names,
                                         const ManifoldModel& model);

/// The measure a scheme kind targets: mu2 for the projection scheme and mu1
/// for everything else.
Measure target_measure(SchemeKind kind);

ReferenceParams reference_params(const RunConfig& cfg);

}  // namespace lss::app
