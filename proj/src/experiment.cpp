#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "projint/bench.hpp"
#include "projint/error.hpp"

namespace projint {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct IdNames {
  ExperimentId id;
  const char* slug;
  const char* name;
};

constexpr IdNames kIds[] = {
    {ExperimentId::ErrVsDtMacro, "err-vs-dt-macro", "ERR_VS_DT_MACRO"},
    {ExperimentId::ErrVsDtMicro, "err-vs-dt-micro", "ERR_VS_DT_MICRO"},
    {ExperimentId::ErrVsD0, "err-vs-d0", "ERR_VS_D0"},
    {ExperimentId::DevVsDtMacro, "dev-vs-dt-macro", "DEV_VS_DT_MACRO"},
    {ExperimentId::SelfDiffVsDt, "selfdiff-vs-dt", "SELFDIFF_VS_DT"},
};

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  }
  return out;
}

bool grid_is_macrostep(ExperimentId id) {
  return id == ExperimentId::ErrVsDtMacro || id == ExperimentId::DevVsDtMacro || id == ExperimentId::SelfDiffVsDt;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Everything needed to integrate one (scheme, grid point) pair.
struct PointSetup {
  PIConfig cfg;
  long n = 0;
  double x0_offset = 0.0;
};

PIConfig base_config(const ExperimentSpec& spec, Scheme scheme, double dt_micro) {
  PIConfig cfg;
  cfg.scheme = scheme;
  cfg.tableau = tableau_for_order(spec.macro_order);
  cfg.micro = MicroConfig{spec.micro_order, dt_micro};
  cfg.m_first = spec.m_first;
  cfg.m_budget = spec.m_budget;
  return cfg;
}

/// Time covered by a macrostep beyond dt_macro: M_1 dt, plus M dt for PI2.
double span_extra(const PIConfig& cfg) {
  PIConfig probe = cfg;
  probe.dt_macro = 0.0;
  return macro_step_span(probe);
}

long steps_for(double t_final, double nominal) {
  return std::max<long>(1, std::lround(t_final / nominal));
}

PointSetup setup_point(const ExperimentSpec& spec, Scheme scheme, double g) {
  PointSetup p;
  switch (spec.id) {
    case ExperimentId::ErrVsDtMacro:
    case ExperimentId::DevVsDtMacro:
    case ExperimentId::SelfDiffVsDt:
      p.cfg = base_config(spec, scheme, spec.dt_micro);
      p.n = steps_for(spec.t_final, g);
      p.cfg.dt_macro = spec.t_final / static_cast<double>(p.n) - span_extra(p.cfg);
      p.x0_offset = spec.x0_offset;
      break;
    case ExperimentId::ErrVsDtMicro:
      p.cfg = base_config(spec, scheme, g);
      p.n = spec.n_steps;
      p.cfg.dt_macro = spec.t_final / static_cast<double>(p.n) - span_extra(p.cfg);
      p.x0_offset = spec.x0_offset;
      break;
    case ExperimentId::ErrVsD0:
      p.cfg = base_config(spec, scheme, spec.dt_micro);
      p.n = spec.n_steps;
      p.cfg.dt_macro = spec.dt_macro;
      p.x0_offset = g;
      break;
  }
  return p;
}

double oracle_horizon(const ExperimentSpec& spec) {
  if (spec.id != ExperimentId::ErrVsD0) return spec.t_final;
  double t = 0.0;
  for (Scheme s : spec.schemes) {
    const PointSetup p = setup_point(spec, s, spec.grid.front());
    t = std::max(t, static_cast<double>(p.n) * macro_step_span(p.cfg));
  }
  return t;
}

double smallest_macrostep(const ExperimentSpec& spec) {
  double m = std::numeric_limits<double>::infinity();
  for (Scheme s : spec.schemes) {
    for (double g : spec.grid) m = std::min(m, setup_point(spec, s, g).cfg.dt_macro);
  }
  return m;
}

FullState initial_state(const MultiscaleSystem& sys, double y0, double offset) {
  Vector h(1);
  sys.manifold(Vector{y0}, h);
  return FullState({h[0] + offset}, {y0}, 0.0);
}

Regime classify(const ExperimentSpec& spec, const PIConfig& cfg, const StabilityReport& st, std::string& why) {
  const BoundConstants& k = spec.constants;
  const double span = increment_span(cfg);
  const double macro_term = k.CP_star * std::pow(span, cfg.tableau.order);
  const double micro_term = k.C2_star * static_cast<double>(st.m_min) * cfg.micro.dt_micro;
  switch (spec.id) {
    case ExperimentId::ErrVsDtMacro:
      if (macro_term > micro_term) return Regime::Macro;
      why = "microstep-dominated (C_P dt^P = " + fmt(macro_term) + " <= C_2 aM dt = " + fmt(micro_term) + ")";
      return Regime::Micro;
    case ExperimentId::ErrVsDtMicro:
      if (macro_term >= micro_term) {
        why = "macrostep-dominated (C_P dt^P = " + fmt(macro_term) + " >= C_2 aM dt = " + fmt(micro_term) + ")";
        return Regime::Macro;
      }
      if (!st.stable()) {
        why = "deviation-dominated (sigma = " + fmt(st.sigma) + " >= 1)";
        return Regime::Deviation;
      }
      return Regime::Micro;
    case ExperimentId::ErrVsD0:
    case ExperimentId::DevVsDtMacro:
      return Regime::Deviation;
    case ExperimentId::SelfDiffVsDt:
      return Regime::Macro;
  }
  return Regime::Macro;
}

/// The regime whose points enter the regression.
Regime fitted_regime(ExperimentId id) {
  switch (id) {
    case ExperimentId::ErrVsDtMacro:
    case ExperimentId::SelfDiffVsDt:
      return Regime::Macro;
    case ExperimentId::ErrVsDtMicro:
      return Regime::Micro;
    case ExperimentId::ErrVsD0:
    case ExperimentId::DevVsDtMacro:
      return Regime::Deviation;
  }
  return Regime::Macro;
}

struct Shared {
  MultiscaleSystem sys;
  ReducedOracle reduced;
};

PointRecord evaluate_point(const ExperimentSpec& spec, const Shared& sh, Scheme scheme, std::size_t gi) {
  const double g = spec.grid[gi];
  const PointSetup p = setup_point(spec, scheme, g);

  PointRecord rec;
  rec.scheme = scheme;
  rec.grid_index = gi;
  rec.abscissa = g;
  rec.n_macro = p.n;
  rec.dt_macro = p.cfg.dt_macro;
  rec.dt_micro = p.cfg.micro.dt_micro;
  rec.t_final = static_cast<double>(p.n) * macro_step_span(p.cfg);
  const StabilityReport st = stability_indicator(sh.sys, p.cfg);
  rec.sigma = st.sigma;
  rec.regime = classify(spec, p.cfg, st, rec.note);

  const FullState s0 = initial_state(sh.sys, spec.y0, p.x0_offset);
  try {
    const TrajectoryRecord tr = run(sh.sys, s0, p.cfg, p.n);
    rec.micro_evals = tr.micro_eval_count;
    rec.dev_max = tr.dev_max.back();
    rec.t_final = tr.times.back();
    switch (spec.id) {
      case ExperimentId::ErrVsDtMacro:
      case ExperimentId::ErrVsDtMicro:
      case ExperimentId::ErrVsD0:
        rec.error = std::abs(tr.states.back().y()[0] - sh.reduced(tr.times.back())[0]);
        break;
      case ExperimentId::DevVsDtMacro:
        // Deviation left at the end of the first macrostep.
        rec.error = tr.deviations[1];
        break;
      case ExperimentId::SelfDiffVsDt: {
        PIConfig half = p.cfg;
        half.dt_macro = spec.t_final / static_cast<double>(2 * p.n) - span_extra(p.cfg);
        const TrajectoryRecord tr2 = run(sh.sys, s0, half, 2 * p.n);
        rec.micro_evals += tr2.micro_eval_count;
        rec.error = std::abs(tr.states.back().y()[0] - tr2.states.back().y()[0]);
        break;
      }
    }
    if (!std::isfinite(rec.error)) throw NumericalError("non-finite error value");
  } catch (const NumericalError& e) {
    rec.error = kNaN;
    rec.dev_max = kNaN;
    rec.regime = Regime::Diverged;
    rec.note = std::string("diverged: ") + e.what();
  }
  return rec;
}

void fit_series(const ExperimentSpec& spec, Scheme scheme, const std::vector<PointRecord*>& pts, SchemeSeries& out) {
  out.scheme = scheme;
  std::vector<double> fx, fy;
  const Regime wanted = fitted_regime(spec.id);
  for (PointRecord* p : pts) {
    out.series.abscissa.push_back(p->abscissa);
    out.series.error.push_back(p->error);
    const std::string where = std::string(scheme_name(scheme)) + " grid[" + std::to_string(p->grid_index) +
                              "] = " + fmt(p->abscissa) + ": ";
    if (p->regime == Regime::Diverged) {
      out.exclusions.push_back(where + p->note);
    } else if (p->regime != wanted) {
      out.exclusions.push_back(where + p->note);
    } else if (!(p->error > 0.0)) {
      p->note = "error is exactly zero";
      out.exclusions.push_back(where + p->note);
    } else {
      p->in_fit = true;
      fx.push_back(p->abscissa);
      fy.push_back(p->error);
    }
  }
  out.fit_points = fx.size();
  if (fx.size() >= 2) {
    const SlopeFit f = loglog_slope(fx, fy);
    out.series.slope = f.slope;
    out.series.intercept = f.intercept;
    out.series.r2 = f.r2;
    out.gate_passed = f.r2 >= kR2Gate;
    if (!out.gate_passed) {
      out.exclusions.push_back(std::string(scheme_name(scheme)) + ": regression r2 = " + fmt(f.r2) + " below " +
                               fmt(kR2Gate) + " over " + std::to_string(fx.size()) + " points");
    }
  } else {
    out.series.slope = kNaN;
    out.series.intercept = kNaN;
    out.series.r2 = kNaN;
    out.gate_passed = false;
    out.exclusions.push_back(std::string(scheme_name(scheme)) + ": fewer than two points in the " +
                             regime_name(wanted) + " regime, no fit");
  }
}

}  // namespace

const char* experiment_slug(ExperimentId id) noexcept {
  for (const auto& e : kIds) {
    if (e.id == id) return e.slug;
  }
  return "?";
}

const char* experiment_name(ExperimentId id) noexcept {
  for (const auto& e : kIds) {
    if (e.id == id) return e.name;
  }
  return "?";
}

ExperimentId parse_experiment(const std::string& s) {
  for (const auto& e : kIds) {
    if (s == e.slug || s == e.name) return e.id;
  }
  throw ConfigError("unknown experiment '" + s + "'");
}

const std::vector<ExperimentId>& all_experiments() {
  static const std::vector<ExperimentId> ids = {ExperimentId::ErrVsDtMacro, ExperimentId::ErrVsDtMicro,
                                                ExperimentId::ErrVsD0, ExperimentId::DevVsDtMacro,
                                                ExperimentId::SelfDiffVsDt};
  return ids;
}

const char* regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::Macro:
      return "macro";
    case Regime::Micro:
      return "micro";
    case Regime::Deviation:
      return "deviation";
    case Regime::Diverged:
      return "diverged";
  }
  return "?";
}

ExperimentSpec default_spec(ExperimentId id) {
  ExperimentSpec s;
  s.id = id;
  s.macro_order = 4;
  s.micro_order = 1;
  switch (id) {
    case ExperimentId::ErrVsDtMacro:
    case ExperimentId::DevVsDtMacro:
    case ExperimentId::SelfDiffVsDt:
      s.alpha = 0.2;
      s.epsilon = 1e-9;
      s.m_budget = 40;
      s.m_first = 40;
      s.dt_micro = 0.4e-9;
      s.t_final = 1.0;
      s.y0 = 1.0;
      s.x0_offset = id == ExperimentId::DevVsDtMacro ? 1.0 : 0.0;
      s.grid = logspace(1e-5, 5e-2, 10);
      s.constants = BoundConstants{1.1, 1.0, 2.0, 2.0, 4.0, 8.0, 2.2, 1.0};
      if (id == ExperimentId::DevVsDtMacro) {
        s.constants.L_g = 5.0;
        s.constants.L_G = 10.0;
      }
      break;
    case ExperimentId::ErrVsDtMicro:
      s.alpha = 1.0;
      s.epsilon = 1e-5;
      s.micro_order = 2;
      s.m_budget = 100;
      s.m_first = 100;
      s.n_steps = 50;
      s.t_final = 0.18;
      s.y0 = 5.0;
      s.x0_offset = 0.0;
      // M dt_micro from 1e-5 to 3e-4.
      s.grid = logspace(1e-7, 3e-6, 12);
      s.constants = BoundConstants{11.0, 1.0, 2.0, 30.0, 50.0, 2000.0, 22.0, 1.0};
      break;
    case ExperimentId::ErrVsD0:
      s.alpha = 1.0;
      s.epsilon = 1e-4;
      s.m_budget = 100;
      s.m_first = 100;
      s.dt_micro = 1e-6;
      s.dt_macro = 1e-3;
      s.n_steps = 5;
      s.y0 = 1.0;
      s.grid = logspace(0.01, 1.0, 10);
      s.constants = BoundConstants{3.0, 1.0, 2.0, 2.0, 3.0, 24.0, 6.0, 1.0};
      break;
  }
  return s;
}

void validate_spec(const ExperimentSpec& spec) {
  auto bad = [](const std::string& m) { throw ConfigError(m); };
  if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon)) bad("epsilon must be positive");
  if (!std::isfinite(spec.alpha)) bad("alpha must be finite");
  if (!std::isfinite(spec.y0) || !std::isfinite(spec.x0_offset)) bad("initial condition must be finite");
  if (spec.schemes.empty()) bad("at least one scheme is required");
  for (std::size_t i = 0; i < spec.schemes.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.schemes.size(); ++j) {
      if (spec.schemes[i] == spec.schemes[j]) bad("scheme listed twice");
    }
  }
  tableau_for_order(spec.macro_order);
  tableau_for_order(spec.micro_order);
  if (spec.m_budget < 0 || spec.m_first < 0) bad("microstep counts must be non-negative");
  if (spec.grid.empty()) bad("grid must not be empty");
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    if (!(spec.grid[i] > 0.0) || !std::isfinite(spec.grid[i])) {
      bad("grid[" + std::to_string(i) + "] must be positive and finite");
    }
    if (i > 0 && !(spec.grid[i] > spec.grid[i - 1])) bad("grid must be strictly increasing");
  }
  validate_constants(spec.constants);

  if (grid_is_macrostep(spec.id) || spec.id == ExperimentId::ErrVsDtMicro) {
    if (!(spec.t_final > 0.0) || !std::isfinite(spec.t_final)) bad("T must be positive");
  }
  if (spec.id != ExperimentId::ErrVsDtMicro && !(spec.dt_micro > 0.0)) bad("dt_micro must be positive");
  if (spec.id == ExperimentId::ErrVsDtMicro || spec.id == ExperimentId::ErrVsD0) {
    if (spec.n_steps < 1) bad("n_steps must be at least 1");
  }
  if (spec.id == ExperimentId::ErrVsD0 && !(spec.dt_macro > 0.0)) bad("dt_macro must be positive");

  for (Scheme s : spec.schemes) {
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      const PointSetup p = setup_point(spec, s, spec.grid[i]);
      if (!(p.cfg.dt_macro > 0.0)) {
        bad(std::string(scheme_name(s)) + " grid[" + std::to_string(i) +
            "]: microsteps alone exceed the step span, macrostep would be " + fmt(p.cfg.dt_macro));
      }
      validate_config(p.cfg);
    }
  }
}

bool ExperimentResult::any_diverged() const {
  return std::any_of(points.begin(), points.end(), [](const PointRecord& p) { return p.regime == Regime::Diverged; });
}

const SchemeSeries& ExperimentResult::series_for(Scheme s) const {
  for (const auto& x : series) {
    if (x.scheme == s) return x;
  }
  throw ContractViolation(std::string("no series for ") + scheme_name(s));
}

std::vector<PointRecord> ExperimentResult::points_for(Scheme s) const {
  std::vector<PointRecord> out;
  for (const auto& p : points) {
    if (p.scheme == s) out.push_back(p);
  }
  return out;
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PROJINT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned workers) {
  validate_spec(spec);
  const MultiscaleSystem sys = make_toy_system(spec.alpha, spec.epsilon);
  const double horizon = oracle_horizon(spec);
  // SELFDIFF never consults the reduced oracle, but building it is cheap and keeps setup uniform.
  const double resolution = reduced_resolution(smallest_macrostep(spec), horizon);
  const Shared shared{sys, reference_reduced(reduce(sys), Vector{spec.y0}, horizon, resolution)};

  const std::size_t n_grid = spec.grid.size();
  const std::size_t n_tasks = spec.schemes.size() * n_grid;
  std::vector<PointRecord> records(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);

  if (workers == 0) workers = worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_tasks));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      try {
        records[t] = evaluate_point(spec, shared, spec.schemes[t / n_grid], t % n_grid);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  result.spec = spec;
  result.points = std::move(records);
  for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
    std::vector<PointRecord*> pts;
    for (std::size_t gi = 0; gi < n_grid; ++gi) pts.push_back(&result.points[si * n_grid + gi]);
    SchemeSeries ss;
    fit_series(spec, spec.schemes[si], pts, ss);
    result.series.push_back(std::move(ss));
  }
  return result;
}

double max_reduction_error(double alpha, double epsilon, double y0, double t_final, int samples) {
  if (samples < 1) throw ContractViolation("samples must be positive");
  const MultiscaleSystem sys = make_toy_system(alpha, epsilon);
  const FullState s0 = initial_state(sys, y0, 0.0);
  const FullOracle full = reference_full(sys, s0, t_final);
  const ReducedOracle red = reference_reduced(reduce(sys), Vector{y0}, t_final, t_final / 2000.0);
  std::vector<double> ts;
  for (int k = 1; k <= samples; ++k) ts.push_back(t_final * k / samples);
  const auto errs = reduction_error([&](double t) { return full(t); }, [&](double t) { return red(t); }, ts);
  return *std::max_element(errs.begin(), errs.end());
}

}  // namespace projint
