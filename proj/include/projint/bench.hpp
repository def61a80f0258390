#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "projint/analysis.hpp"
#include "projint/model.hpp"
#include "projint/pi.hpp"

namespace projint {

// ---------------------------------------------------------------------------
// Reference oracles
// ---------------------------------------------------------------------------

/// Dense RK4 solution of an autonomous ODE on [0, T]. Checkpoints are stored
/// every few steps; evaluation integrates from the preceding checkpoint with the
/// same step and finishes with one partial step.
class DenseSolution {
 public:
  using Field = std::function<void(ConstSpan, MutSpan)>;

  DenseSolution(Field field, Vector z0, double t_final, long n_steps);

  Vector operator()(double t) const;
  Vector final_state() const { return final_; }
  double t_final() const noexcept { return t_final_; }
  double step() const noexcept { return h_; }
  long steps() const noexcept { return n_steps_; }

 private:
  Field field_;
  double t_final_;
  long n_steps_;
  double h_;
  long stride_;
  std::vector<Vector> checkpoints_;
  Vector final_;
};

/// Reduced-dynamics oracle Y(t). Built twice (h and h/2); the finer run is kept
/// and the relative endpoint change is recorded.
class ReducedOracle {
 public:
  ReducedOracle(const ReducedSystem& red, const Vector& y0, double t_final, double resolution);

  Vector operator()(double t) const { return (*fine_)(t); }
  double richardson_change() const noexcept { return change_; }
  double step() const noexcept { return fine_->step(); }
  double t_final() const noexcept { return fine_->t_final(); }

 private:
  std::shared_ptr<const DenseSolution> fine_;
  double change_ = 0.0;
};

/// Full-system oracle (x(t), y(t)) by RK4 at step 0.1 eps, Richardson-checked.
class FullOracle {
 public:
  FullOracle(const MultiscaleSystem& sys, const FullState& s0, double t_final);

  FullState operator()(double t) const;
  double richardson_change() const noexcept { return change_; }
  double step() const noexcept { return fine_->step(); }

 private:
  std::size_t dim_fast_;
  double t0_;
  std::shared_ptr<const DenseSolution> fine_;
  double change_ = 0.0;
};

/// Largest step the reduced oracle may use for a grid whose smallest macrostep is min_dt.
double reduced_resolution(double min_dt, double t_final);

/// Tolerances enforced when the oracles are built.
inline constexpr double kReducedRichardsonTol = 1e-12;
inline constexpr double kFullRichardsonTol = 1e-10;
inline constexpr double kFullOracleMaxSteps = 1e7;

/// Throws InfeasibleOracle if the Richardson check fails.
ReducedOracle reference_reduced(const ReducedSystem& red, const Vector& y0, double t_final, double resolution);
/// Throws InfeasibleOracle for T / (0.1 eps) > 1e7 or a failed Richardson check.
FullOracle reference_full(const MultiscaleSystem& sys, const FullState& s0, double t_final);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class ExperimentId { ErrVsDtMacro, ErrVsDtMicro, ErrVsD0, DevVsDtMacro, SelfDiffVsDt };

/// CLI slug, e.g. "err-vs-dt-macro".
const char* experiment_slug(ExperimentId id) noexcept;
/// Upper-case name, e.g. "ERR_VS_DT_MACRO".
const char* experiment_name(ExperimentId id) noexcept;
/// Accepts either form; ConfigError otherwise.
ExperimentId parse_experiment(const std::string& s);
const std::vector<ExperimentId>& all_experiments();

/// One sweep over a single grid.
///
/// Grid semantics by experiment:
///   ErrVsDtMacro, DevVsDtMacro, SelfDiffVsDt: nominal macrostep; n = round(T / g),
///     and the macrostep is then shrunk so that n times the step span equals T.
///   ErrVsDtMicro: microstep dt_micro; n and T fixed, macrostep = T / n - span extras.
///   ErrVsD0: initial deviation x0 - h0(y0); n and dt_macro fixed.
struct ExperimentSpec {
  ExperimentId id = ExperimentId::ErrVsDtMacro;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<Scheme> schemes{Scheme::PI1, Scheme::PI2};
  int macro_order = 4;
  int micro_order = 1;
  long m_budget = 0;      // M
  long m_first = 0;       // M_1
  double dt_micro = 0.0;  // ignored by ErrVsDtMicro
  double dt_macro = 0.0;  // used by ErrVsD0 only
  long n_steps = 0;       // used by ErrVsDtMicro and ErrVsD0
  double t_final = 0.0;   // unused by ErrVsD0
  double y0 = 0.0;
  double x0_offset = 0.0;  // x0 = h0(y0) + offset; ErrVsD0 takes it from the grid
  std::vector<double> grid;
  BoundConstants constants;
};

/// Parameters of each figure; grids follow the documented defaults.
ExperimentSpec default_spec(ExperimentId id);

/// ConfigError for an unusable spec (unsorted grid, non-integral n, ...).
void validate_spec(const ExperimentSpec& spec);

/// Per-point classification used for the regression.
enum class Regime { Macro, Micro, Deviation, Diverged };
const char* regime_name(Regime r) noexcept;

struct PointRecord {
  Scheme scheme = Scheme::PI1;
  std::size_t grid_index = 0;
  double abscissa = 0.0;
  double error = 0.0;    // NaN when diverged
  double dev_max = 0.0;  // max seed deviation over the run; NaN when diverged
  long n_macro = 0;
  long micro_evals = 0;
  double dt_macro = 0.0;
  double dt_micro = 0.0;
  double t_final = 0.0;
  double sigma = 0.0;
  Regime regime = Regime::Macro;
  bool in_fit = false;
  std::string note;  // failure message or exclusion reason
};

struct SchemeSeries {
  Scheme scheme = Scheme::PI1;
  /// Full grid; slope/intercept/r2 come from the points flagged in_fit.
  ErrorSeries series;
  std::size_t fit_points = 0;
  bool gate_passed = false;  // fit exists and r2 >= kR2Gate
  std::vector<std::string> exclusions;
};

inline constexpr double kR2Gate = 0.98;

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<SchemeSeries> series;  // one per spec scheme, same order
  std::vector<PointRecord> points;   // scheme-major, grid order within a scheme
  bool any_diverged() const;
  const SchemeSeries& series_for(Scheme s) const;
  std::vector<PointRecord> points_for(Scheme s) const;
};

/// Worker count: PROJINT_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs every (scheme, grid point) pair, concurrently when allowed. Output is
/// independent of the number of workers.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned workers = 0);

// ---------------------------------------------------------------------------
// Output and configuration
// ---------------------------------------------------------------------------

enum class Format { CSV, JSON };
Format parse_format(const std::string& s);

void write_csv(const ExperimentResult& r, std::ostream& os);
void write_json(const ExperimentResult& r, std::ostream& os);
/// Writes to `path`, or stdout when path is empty or "-".
void emit(const ExperimentResult& r, Format fmt, const std::string& path);

/// Inverse of write_json.
ExperimentResult parse_result_json(const std::string& text);

/// JSON config: "id" is required, other keys default to default_spec(id).
/// Unknown keys raise ConfigError naming the key.
ExperimentSpec parse_spec_json(const std::string& text);
ExperimentSpec load_spec_file(const std::string& path);
std::string spec_to_json(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Studies outside the figure set
// ---------------------------------------------------------------------------

/// max_t |y_eps(t) - Y(t)| over `samples` equispaced times in (0, T], from an on-manifold start.
double max_reduction_error(double alpha, double epsilon, double y0, double t_final, int samples = 100);

/// Property suite; writes one "PASS name" / "FAIL name: detail" line per property.
bool run_selftest(std::ostream& os);

}  // namespace projint
