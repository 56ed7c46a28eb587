#include "lss/error.hpp"

namespace lss {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::RequiresIdentityMetric: return "RequiresIdentityMetric";
    case ErrorKind::OutsideTube: return "OutsideTube";
    case ErrorKind::FlowDiverged: return "FlowDiverged";
    case ErrorKind::NotSkewSymmetric: return "NotSkewSymmetric";
    case ErrorKind::NonUnique: return "NonUnique";
    case ErrorKind::MaxIters: return "MaxIters";
    case ErrorKind::StiffnessBlowup: return "StiffnessBlowup";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace lss
