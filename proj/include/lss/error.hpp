#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lss {

enum class ErrorKind {
  RankDeficient,
  NotPositiveDefinite,
  RequiresIdentityMetric,
  OutsideTube,
  FlowDiverged,
  NotSkewSymmetric,
  NonUnique,
  MaxIters,
  StiffnessBlowup,
  UnknownModel,
  DomainMismatch,
  UnsupportedDimension,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the chain runner when a kernel fails; carries the failing step.
class ChainAborted : public Error {
 public:
  ChainAborted(ErrorKind cause, std::int64_t step, const std::string& what)
      : Error(cause, "chain aborted at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace lss
