#pragma once

#include <vector>

#include "projint/micro.hpp"
#include "projint/model.hpp"
#include "projint/rk.hpp"

namespace projint {

enum class Scheme { PI1, PI2 };

const char* scheme_name(Scheme s) noexcept;
/// Accepts "PI1"/"pi1"/"PI2"/"pi2"; ConfigError otherwise.
Scheme parse_scheme(const std::string& name);

/// Seamless projective-integration configuration.
///
/// PI1 evaluates the field after relaxing each increment seed; PI2 replaces
/// those evaluations by chords between relaxed endpoints, with the microstep
/// budget split as M_j = a_j M.
struct PIConfig {
  Scheme scheme = Scheme::PI1;
  RKTableau tableau = tableau_rk4();
  double dt_macro = 0.0;
  MicroConfig micro{};
  long m_first = 0;   // M_1, relaxation of z^n before the first increment
  long m_budget = 0;  // M
};

/// Throws ConfigError if the configuration cannot be integrated.
void validate_config(const PIConfig& cfg);

/// Microsteps before each increment: PI1 -> {M_1, M, ..., M} (P entries),
/// PI2 -> {M_1, a_2 M, ..., a_P M, M} (P + 1 entries).
std::vector<long> allocate_microsteps(const PIConfig& cfg);

/// Span of one PI2 increment, dt_macro + M dt_micro. PI1 increments span dt_macro.
double increment_span(const PIConfig& cfg);

/// Physical time covered by one macrostep: increment span plus the M_1 relaxation.
double macro_step_span(const PIConfig& cfg);

struct StepDiagnostics {
  /// |x - h0(y)| at every increment seed, seed 1 being z^n itself.
  std::vector<double> seed_deviations;
  long micro_evals = 0;
  double time_advance = 0.0;
};

struct StepResult {
  FullState state;
  StepDiagnostics diagnostics;
};

StepResult pi1_step(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg);
StepResult pi2_step(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg);
/// Dispatches on cfg.scheme.
StepResult pi_step(const MultiscaleSystem& sys, const FullState& s, const PIConfig& cfg);

struct TrajectoryRecord {
  // Indexed by macrostep n = 0..N; all four share length N + 1.
  std::vector<double> times;
  std::vector<FullState> states;
  std::vector<double> deviations;  // |d^n|
  std::vector<double> dev_max;     // max over seeds of steps i < n (0 at n = 0)

  // Indexed by macrostep i = 0..N-1.
  std::vector<double> step_seed_max;  // max seed deviation inside step i

  long micro_eval_count = 0;
};

/// Integrates n_steps macrosteps. A failing step is rethrown as StepFailure
/// tagged with its 0-based macrostep index.
TrajectoryRecord run(const MultiscaleSystem& sys, const FullState& s0, const PIConfig& cfg, long n_steps);

}  // namespace projint
