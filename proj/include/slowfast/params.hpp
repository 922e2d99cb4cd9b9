#pragma once

#include <cmath>
#include <sstream>
#include <string_view>

#include "slowfast/error.hpp"

namespace slowfast {

enum class AlleeRegime { weak, strong, absent };

constexpr std::string_view to_string(AlleeRegime r) noexcept {
  switch (r) {
    case AlleeRegime::weak: return "weak";
    case AlleeRegime::strong: return "strong";
    case AlleeRegime::absent: return "absent";
  }
  return "unknown";
}

/// Dimensionless parameters of the slow-fast prey-predator model
///
///   du/dt = gamma u (1-u)(u+beta) - u v / (1 + alpha u)
///   dv/dt = epsilon v (u / (1 + alpha u) - delta)
///
/// plus the predator/prey diffusivity ratio `d` used by the spatial solver.
struct ModelParams {
  double alpha = 0.5;    ///< inverse saturation level of the functional response
  double beta = 0.22;    ///< weak Allee parameter
  double gamma = 3.0;    ///< characteristic prey growth rate
  double delta = 0.3;    ///< predator mortality
  double epsilon = 1.0;  ///< time-scale ratio
  double d = 1.0;        ///< diffusivity ratio (spatial model only)

  /// Throws ErrorKind::invalid_input when an invariant is violated.
  void validate() const {
    auto fail = [](std::string_view what, double value) {
      std::ostringstream os;
      os << what << " (got " << value << ")";
      throw Error(ErrorKind::invalid_input, os.str());
    };
    if (!std::isfinite(alpha) || alpha <= 0.0) fail("alpha must be positive", alpha);
    if (!std::isfinite(beta)) fail("beta must be finite", beta);
    if (!std::isfinite(gamma) || gamma <= 0.0) fail("gamma must be positive", gamma);
    if (!std::isfinite(delta) || delta <= 0.0) fail("delta must be positive", delta);
    if (!std::isfinite(epsilon) || epsilon <= 0.0 || epsilon > 1.0)
      fail("epsilon must lie in (0, 1]", epsilon);
    if (!std::isfinite(d) || d < 0.0) fail("d must be non-negative", d);
  }

  AlleeRegime allee_regime() const noexcept {
    if (beta < 0.0) return AlleeRegime::strong;
    if (beta >= 1.0) return AlleeRegime::absent;
    return AlleeRegime::weak;
  }

  ModelParams with_delta(double value) const {
    ModelParams p = *this;
    p.delta = value;
    return p;
  }

  ModelParams with_epsilon(double value) const {
    ModelParams p = *this;
    p.epsilon = value;
    return p;
  }
};

}  // namespace slowfast
