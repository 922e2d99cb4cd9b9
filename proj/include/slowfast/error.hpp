#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slowfast {

enum class ErrorKind {
  invalid_input,
  analysis_degenerate,
  internal_consistency,
  singular_expansion,
  no_exit,
  not_applicable,
  stiffness_failure,
  explosion_not_detected,
  invasion_infeasible,
  configuration,
  blow_up,
  front_not_found,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::analysis_degenerate: return "analysis-degenerate";
    case ErrorKind::internal_consistency: return "internal-consistency";
    case ErrorKind::singular_expansion: return "singular-expansion";
    case ErrorKind::no_exit: return "no-exit";
    case ErrorKind::not_applicable: return "not-applicable";
    case ErrorKind::stiffness_failure: return "stiffness-failure";
    case ErrorKind::explosion_not_detected: return "explosion-not-detected";
    case ErrorKind::invasion_infeasible: return "invasion-infeasible";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::front_not_found: return "front-not-found";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind so
/// callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Numerical failures (as opposed to bad input or configuration).
  bool numerical() const noexcept {
    return kind_ == ErrorKind::stiffness_failure || kind_ == ErrorKind::blow_up ||
           kind_ == ErrorKind::internal_consistency;
  }

 private:
  ErrorKind kind_;
};

}  // namespace slowfast
