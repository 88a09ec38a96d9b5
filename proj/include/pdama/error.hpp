#pragma once

#include <stdexcept>
#include <string>

namespace pdama {

enum class ErrorCode {
  dimension_mismatch,
  unsupported_b,
  unsupported_objective,
  unbounded_v,
  not_smoothable,
  non_convergence,
  unbounded_set,
  bad_bounds,
  not_strongly_convex,
  singular_b,
  unattained_min,
  step_too_small,
  invalid_config,
  too_large,
  infeasible,
  trace_variant_mismatch,
  unreachable,
  parse_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::unsupported_b: return "UnsupportedB";
    case ErrorCode::unsupported_objective: return "UnsupportedObjective";
    case ErrorCode::unbounded_v: return "UnboundedV";
    case ErrorCode::not_smoothable: return "NotSmoothable";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::unbounded_set: return "UnboundedSet";
    case ErrorCode::bad_bounds: return "BadBounds";
    case ErrorCode::not_strongly_convex: return "NotStronglyConvex";
    case ErrorCode::singular_b: return "SingularB";
    case ErrorCode::unattained_min: return "UnattainedMin";
    case ErrorCode::step_too_small: return "StepTooSmall";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::too_large: return "TooLarge";
    case ErrorCode::infeasible: return "Infeasible";
    case ErrorCode::trace_variant_mismatch: return "TraceVariantMismatch";
    case ErrorCode::unreachable: return "Unreachable";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pdama
