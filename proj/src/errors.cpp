#include "landing/errors.hpp"

namespace landing {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::rank_deficient: return "RankDeficient";
    case ErrorKind::not_positive_definite: return "NotPositiveDefinite";
    case ErrorKind::metric_not_pd: return "MetricNotPD";
    case ErrorKind::invalid_projector: return "InvalidProjector";
    case ErrorKind::singular_hessian: return "SingularHessian";
    case ErrorKind::validation_failed: return "ValidationFailed";
    case ErrorKind::property_violated: return "PropertyViolated";
    case ErrorKind::config_error: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace landing
