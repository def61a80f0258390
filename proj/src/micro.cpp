#include "projint/micro.hpp"

#include <cmath>
#include <iostream>

#include "projint/error.hpp"

namespace projint {

void validate_micro(const MicroConfig& cfg) {
  if (cfg.order_p != 1 && cfg.order_p != 2 && cfg.order_p != 4) {
    throw ConfigError("microsolver order must be 1, 2 or 4");
  }
  if (!(cfg.dt_micro > 0.0) || !std::isfinite(cfg.dt_micro)) throw ConfigError("dt_micro must be positive");
}

std::optional<std::string> micro_stability_hint(const MicroConfig& cfg, const MultiscaleSystem& sys) {
  if (cfg.order_p != 1) return std::nullopt;
  const double limit = 2.0 * sys.epsilon() / sys.lambda_max();
  if (cfg.dt_micro < limit) return std::nullopt;
  return "dt_micro = " + std::to_string(cfg.dt_micro) + " is outside the Euler stability interval (0, " +
         std::to_string(limit) + ")";
}

namespace detail {

long relax(const MultiscaleSystem& sys, MutSpan z, long m, double dt, const RKTableau& tableau, RKWorkspace& ws) {
  if (m <= 0) return 0;
  const FieldFn field = [&sys](ConstSpan s, MutSpan out) { sys.full_field(s, out); };
  for (long step = 1; step <= m; ++step) {
    try {
      rk_step_inplace(field, z, tableau, dt, ws);
    } catch (const IntegrationFailure&) {
      throw DivergenceError("microsolver diverged at step " + std::to_string(step), step);
    }
    for (double v : z) {
      if (!std::isfinite(v)) throw DivergenceError("microsolver diverged at step " + std::to_string(step), step);
    }
  }
  return m * tableau.order;
}

}  // namespace detail

FullState micro_flow(const MultiscaleSystem& sys, const FullState& s0, long m, const MicroConfig& cfg) {
  if (m < 0) throw ContractViolation("microstep count must be non-negative");
  validate_micro(cfg);
  if (s0.x().size() != sys.dim_fast() || s0.y().size() != sys.dim_slow()) {
    throw ContractViolation("state dimensions do not match system");
  }
  if (m == 0) return s0;
  if (auto hint = micro_stability_hint(cfg, sys)) std::cerr << "warning: " << *hint << '\n';

  Vector z = s0.packed();
  RKWorkspace ws(z.size());
  detail::relax(sys, z, m, cfg.dt_micro, tableau_for_order(cfg.order_p), ws);
  return FullState::from_packed(z, sys.dim_fast(), s0.t() + static_cast<double>(m) * cfg.dt_micro);
}

double contraction_factor(const MicroConfig& cfg, const MultiscaleSystem& sys, long m) {
  if (m < 0) throw ContractViolation("microstep count must be non-negative");
  validate_micro(cfg);
  return std::pow(amplification(cfg.order_p, -cfg.dt_micro / sys.epsilon()), static_cast<double>(m));
}

}  // namespace projint
