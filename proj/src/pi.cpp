#include "projint/pi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "projint/error.hpp"

namespace projint {

const char* scheme_name(Scheme s) noexcept { return s == Scheme::PI1 ? "PI1" : "PI2"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "PI1" || name == "pi1") return Scheme::PI1;
  if (name == "PI2" || name == "pi2") return Scheme::PI2;
  throw ConfigError("unknown scheme '" + name + "' (expected PI1 or PI2)");
}

namespace {

long node_allocation(double a, long budget, int node_index) {
  const double exact = a * static_cast<double>(budget);
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, std::abs(exact))) {
    throw ConfigError("a_" + std::to_string(node_index) + " * M = " + std::to_string(exact) +
                      " is not an integer");
  }
  return static_cast<long>(rounded);
}

}  // namespace

void validate_config(const PIConfig& cfg) {
  const auto issues = validate_tableau(cfg.tableau);
  if (!issues.empty()) throw ConfigError("invalid macrosolver tableau: " + issues.front());
  if (!(cfg.dt_macro > 0.0) || !std::isfinite(cfg.dt_macro)) throw ConfigError("dt_macro must be positive");
  validate_micro(cfg.micro);
  if (cfg.m_first < 0 || cfg.m_budget < 0) throw ConfigError("microstep counts must be non-negative");
  if (cfg.scheme == Scheme::PI2) {
    for (int j = 1; j < cfg.tableau.order; ++j) {
      const double a = cfg.tableau.nodes[static_cast<std::size_t>(j)];
      // The chord divides by a_j.
      if (a == 0.0) throw ConfigError("PI2 needs a_" + std::to_string(j + 1) + " > 0");
      node_allocation(a, cfg.m_budget, j + 1);
    }
  }
}

std::vector<long> allocate_microsteps(const PIConfig& cfg) {
  validate_config(cfg);
  const int P = cfg.tableau.order;
  std::vector<long> counts;
  counts.push_back(cfg.m_first);
  if (cfg.scheme == Scheme::PI1) {
    for (int j = 1; j < P; ++j) counts.push_back(cfg.m_budget);
  } else {
    for (int j = 1; j < P; ++j) {
      counts.push_back(node_allocation(cfg.tableau.nodes[static_cast<std::size_t>(j)], cfg.m_budget, j + 1));
    }
    counts.push_back(cfg.m_budget);  // a_{P+1} = 1
  }
  return counts;
}

double increment_span(const PIConfig& cfg) {
  if (cfg.scheme == Scheme::PI1) return cfg.dt_macro;
  return cfg.dt_macro + static_cast<double>(cfg.m_budget) * cfg.micro.dt_micro;
}

double macro_step_span(const PIConfig& cfg) {
  // PI1's intermediate relaxations do not advance the clock; only M_1 does.
  return increment_span(cfg) + static_cast<double>(cfg.m_first) * cfg.micro.dt_micro;
}

namespace {

/// Reusable buffers for one macrostep on packed states.
class MacroStepper {
 public:
  MacroStepper(const MultiscaleSystem& sys, const PIConfig& cfg)
      : sys_(sys),
        cfg_(cfg),
        micro_tab_(tableau_for_order(cfg.micro.order_p)),
        counts_(allocate_microsteps(cfg)),
        dim_(sys.packed_size()),
        ws_(dim_),
        base_(dim_),
        seed_(dim_),
        khat_(dim_),
        acc_(dim_),
        f_(dim_) {}

  /// Advances the packed state `z` by one macrostep.
  StepDiagnostics step(MutSpan z) {
    return cfg_.scheme == Scheme::PI1 ? step_pi1(z) : step_pi2(z);
  }

 private:
  long relax(MutSpan z, long m, int increment) {
    try {
      return detail::relax(sys_, z, m, cfg_.micro.dt_micro, micro_tab_, ws_);
    } catch (const DivergenceError& e) {
      throw StepFailure(std::string("increment ") + std::to_string(increment) + ": " + e.what(), increment);
    }
  }

  /// khat = dt_macro * F(z)
  void increment_from_field(ConstSpan z, int increment) {
    sys_.full_field(z, f_);
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!std::isfinite(f_[i])) {
        throw StepFailure("non-finite field at increment " + std::to_string(increment), increment);
      }
      khat_[i] = cfg_.dt_macro * f_[i];
    }
  }

  void check_finite(ConstSpan z, int increment) const {
    for (double v : z) {
      if (!std::isfinite(v)) throw StepFailure("non-finite state at increment " + std::to_string(increment), increment);
    }
  }

  StepDiagnostics step_pi1(MutSpan z) {
    const RKTableau& tab = cfg_.tableau;
    StepDiagnostics diag;
    diag.seed_deviations.reserve(static_cast<std::size_t>(tab.order));
    diag.seed_deviations.push_back(sys_.deviation(z));

    std::copy(z.begin(), z.end(), base_.begin());
    diag.micro_evals += relax(base_, counts_[0], 1);
    std::fill(acc_.begin(), acc_.end(), 0.0);

    for (int j = 0; j < tab.order; ++j) {
      const int inc = j + 1;
      if (j == 0) {
        increment_from_field(base_, inc);
      } else {
        const double a = tab.nodes[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < dim_; ++i) seed_[i] = base_[i] + a * khat_[i];
        check_finite(seed_, inc);
        diag.seed_deviations.push_back(sys_.deviation(seed_));
        diag.micro_evals += relax(seed_, counts_[static_cast<std::size_t>(j)], inc);
        increment_from_field(seed_, inc);
      }
      const double b = tab.weights[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < dim_; ++i) acc_[i] += b * khat_[i];
    }
    for (std::size_t i = 0; i < dim_; ++i) z[i] = base_[i] + acc_[i];
    check_finite(z, tab.order);
    diag.time_advance = macro_step_span(cfg_);
    return diag;
  }

  StepDiagnostics step_pi2(MutSpan z) {
    const RKTableau& tab = cfg_.tableau;
    const int P = tab.order;
    StepDiagnostics diag;
    diag.seed_deviations.reserve(static_cast<std::size_t>(P + 1));
    diag.seed_deviations.push_back(sys_.deviation(z));

    std::copy(z.begin(), z.end(), base_.begin());
    diag.micro_evals += relax(base_, counts_[0], 1);
    increment_from_field(base_, 1);
    std::fill(acc_.begin(), acc_.end(), 0.0);

    for (int j = 1; j <= P; ++j) {
      // Seed j+1 from the auxiliary increment khat_j, then relax it.
      const int inc = j + 1;
      const double a_next = j < P ? tab.nodes[static_cast<std::size_t>(j)] : 1.0;
      for (std::size_t i = 0; i < dim_; ++i) seed_[i] = base_[i] + a_next * khat_[i];
      check_finite(seed_, inc);
      diag.seed_deviations.push_back(sys_.deviation(seed_));
      diag.micro_evals += relax(seed_, counts_[static_cast<std::size_t>(j)], inc);

      // Chord k_j = (z^{n,j+1}_{M_{j+1}} - z^{n,1}_{M_1}) / a_{j+1}.
      const double b = tab.weights[static_cast<std::size_t>(j - 1)];
      for (std::size_t i = 0; i < dim_; ++i) acc_[i] += b * ((seed_[i] - base_[i]) / a_next);
      if (j < P) increment_from_field(seed_, inc);
    }
    for (std::size_t i = 0; i < dim_; ++i) z[i] = base_[i] + acc_[i];
    check_finite(z, P + 1);
    diag.time_advance = macro_step_span(cfg_);
    return diag;
  }

  const MultiscaleSystem& sys_;
  const PIConfig& cfg_;
  RKTableau micro_tab_;
  std::vector<long> counts_;
  std::size_t dim_;
  RKWorkspace ws_;
  Vector base_, seed_, khat_, acc_, f_;
};

void check_state(const MultiscaleSystem& sys, const FullState& s) {
  if (s.x().size() != sys.dim_fast() || s.y().size() != sys.dim_slow()) {
    throw ContractViolation("state dimensions do not match system");
  }
}

StepResult step_with(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg) {
  check_state(sys, s);
  MacroStepper stepper(sys, cfg);
  Vector z = s.packed();
  StepDiagnostics diag = stepper.step(z);
  return StepResult{FullState::from_packed(z, sys.dim_fast(), s.t() + diag.time_advance), std::move(diag)};
}

}  // namespace

StepResult pi1_step(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg) {
  if (cfg.scheme != Scheme::PI1) throw ContractViolation("pi1_step called with a PI2 configuration");
  return step_with(sys, s, cfg);
}

StepResult pi2_step(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg) {
  if (cfg.scheme != Scheme::PI2) throw ContractViolation("pi2_step called with a PI1 configuration");
  return step_with(sys, s, cfg);
}

StepResult pi_step(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg) {
  return step_with(sys, s, cfg);
}

TrajectoryRecord run(const MultiscaleSystem& sys, const FullState& s0, const PIConfig& cfg, long n_steps) {
  if (n_steps < 0) throw ContractViolation("n_steps must be non-negative");
  check_state(sys, s0);
  MacroStepper stepper(sys, cfg);

  TrajectoryRecord rec;
  const auto cap = static_cast<std::size_t>(n_steps) + 1;
  rec.times.reserve(cap);
  rec.states.reserve(cap);
  rec.deviations.reserve(cap);
  rec.dev_max.reserve(cap);
  rec.step_seed_max.reserve(cap - 1);

  Vector z = s0.packed();
  rec.times.push_back(s0.t());
  rec.states.push_back(s0);
  rec.deviations.push_back(sys.deviation(z));
  rec.dev_max.push_back(0.0);

  // Accumulate the clock as n * span rather than summing spans, so t^n hits T exactly.
  const double span = macro_step_span(cfg);
  double running_max = 0.0;
  for (long n = 0; n < n_steps; ++n) {
    StepDiagnostics diag;
    try {
      diag = stepper.step(z);
    } catch (const StepFailure& e) {
      throw StepFailure("macrostep " + std::to_string(n) + ": " + e.what(), e.increment(), n);
    }
    const double seed_max = *std::max_element(diag.seed_deviations.begin(), diag.seed_deviations.end());
    running_max = std::max(running_max, seed_max);
    rec.micro_eval_count += diag.micro_evals;

    const double t = s0.t() + static_cast<double>(n + 1) * span;
    rec.times.push_back(t);
    rec.states.push_back(FullState::from_packed(z, sys.dim_fast(), t));
    rec.deviations.push_back(sys.deviation(z));
    rec.dev_max.push_back(running_max);
    rec.step_seed_max.push_back(seed_max);
  }
  return rec;
}

}  // namespace projint
