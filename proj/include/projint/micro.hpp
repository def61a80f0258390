#pragma once

#include <optional>
#include <string>

#include "projint/model.hpp"
#include "projint/rk.hpp"

namespace projint {

/// Explicit microsolver: `order_p` in {1, 2, 4}, step `dt_micro` > 0.
struct MicroConfig {
  int order_p = 1;
  double dt_micro = 0.0;
};

/// Throws ConfigError for an unusable configuration.
void validate_micro(const MicroConfig& cfg);

/// Warning text when dt_micro leaves the forward-Euler stability interval
/// 0 < dt < 2 eps / lambda_max. Only order 1 is checked.
std::optional<std::string> micro_stability_hint(const MicroConfig& cfg, const MultiscaleSystem& sys);

/// Runs the microsolver for m steps on the full stiff system, advancing t by m * dt.
/// m = 0 returns s0 unchanged. A non-finite state raises DivergenceError with the
/// 1-based step index.
FullState micro_flow(const MultiscaleSystem& sys, const FullState& s0, long m, const MicroConfig& cfg);

/// rho_p(-dt / eps)^m: contraction of the slowest (lambda = 1) fast mode over m microsteps.
double contraction_factor(const MicroConfig& cfg, const MultiscaleSystem& sys, long m);

namespace detail {

/// Packed-state relaxation shared with the macrosolvers. Returns the number of
/// full-field evaluations performed (m times the number of stages).
long relax(const MultiscaleSystem& sys, MutSpan z, long m, double dt, const RKTableau& tableau, RKWorkspace& ws);

}  // namespace detail

}  // namespace projint
