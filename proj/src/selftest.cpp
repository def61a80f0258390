#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "projint/bench.hpp"
#include "projint/error.hpp"

namespace projint {

namespace {

struct Check {
  const char* name;
  std::function<std::string()> body;  // empty string on success
};

std::string degenerate_matches_rk4() {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-2);
  const FieldFn field = [&sys](ConstSpan z, MutSpan out) { sys.full_field(z, out); };
  for (Scheme scheme : {Scheme::PI1, Scheme::PI2}) {
    PIConfig cfg;
    cfg.scheme = scheme;
    cfg.dt_macro = 1e-3;
    cfg.micro = MicroConfig{1, 1e-3};
    const FullState s0({std::sin(1.0) * std::sin(1.0) + 0.1}, {1.0});
    const TrajectoryRecord tr = run(sys, s0, cfg, 100);
    Vector z = s0.packed();
    RKWorkspace ws(z.size());
    for (int n = 0; n < 100; ++n) rk_step_inplace(field, z, tableau_rk4(), 1e-3, ws);
    const Vector got = tr.states.back().packed();
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (std::abs(got[i] - z[i]) > 1e-13 * std::abs(z[i])) {
        return std::string(scheme_name(scheme)) + " differs from RK4 in component " + std::to_string(i);
      }
    }
  }
  return {};
}

std::string amplification_is_taylor() {
  for (int p : {1, 2, 4}) {
    for (double eta : {-1.7, -0.4, 0.0, 0.3}) {
      double sum = 0.0, term = 1.0;
      for (int j = 0; j <= p; ++j) {
        sum += term;
        term *= eta / (j + 1);
      }
      if (std::abs(amplification(p, eta) - sum) > 1e-15) return "rho_" + std::to_string(p) + " mismatch";
    }
  }
  return {};
}

std::string matched_cost() {
  PIConfig cfg;
  cfg.dt_macro = 1e-3;
  cfg.micro = MicroConfig{1, 0.4e-9};
  cfg.m_first = 40;
  cfg.m_budget = 40;
  long totals[2] = {0, 0};
  for (Scheme s : {Scheme::PI1, Scheme::PI2}) {
    cfg.scheme = s;
    for (long m : allocate_microsteps(cfg)) totals[s == Scheme::PI2] += m;
  }
  if (totals[0] != 160 || totals[1] != 160) {
    return "microsteps per macrostep " + std::to_string(totals[0]) + " vs " + std::to_string(totals[1]);
  }
  return {};
}

std::string relaxation_contracts() {
  const double eps = 1e-3;
  const MultiscaleSystem sys = make_toy_system(0.2, eps);
  const MicroConfig mc{1, 0.1 * eps};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ydist(0.2, 1.5), ddist(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double y0 = ydist(rng);
    const double d0 = ddist(rng);
    FullState s({std::sin(y0) * std::sin(y0) + d0}, {y0});
    const FullState end = micro_flow(sys, s, 50, mc);
    const double bound = contraction_factor(mc, sys, 50) * std::abs(d0) + 4.0 * eps;
    if (sys.deviation(end.packed()) > bound) return "seed " + std::to_string(i) + " exceeds the decay bound";
  }
  return {};
}

std::string power_law_slope() {
  std::vector<double> x, y;
  for (int i = 0; i < 6; ++i) {
    x.push_back(std::pow(2.0, -i));
    y.push_back(3.0 * std::pow(x.back(), 4));
  }
  const SlopeFit f = loglog_slope(x, y);
  if (std::abs(f.slope - 4.0) > 1e-12 * 4.0) return "slope " + std::to_string(f.slope);
  return {};
}

std::string sigma_monotone() {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-6);
  PIConfig cfg;
  cfg.micro = MicroConfig{1, 0.4e-6};
  cfg.m_first = 10;
  cfg.m_budget = 10;
  double prev = 0.0;
  for (double dt : {1e-6, 1e-5, 1e-4, 1e-3}) {
    cfg.dt_macro = dt;
    const double s = stability_indicator(sys, cfg).sigma;
    if (!(s > prev)) return "sigma not increasing in dt";
    prev = s;
  }
  cfg.dt_macro = 1e-4;
  prev = INFINITY;
  for (long m : {10L, 20L, 40L}) {
    cfg.m_budget = m;
    const double s = stability_indicator(sys, cfg).sigma;
    if (!(s < prev)) return "sigma not decreasing in M";
    prev = s;
  }
  return {};
}

std::string oracles_converge() {
  const MultiscaleSystem sys = make_toy_system(1.0, 1e-3);
  const ReducedOracle red = reference_reduced(reduce(sys), Vector{1.0}, 1.0, 1e-3);
  const FullOracle full = reference_full(sys, FullState({std::sin(1.0) * std::sin(1.0)}, {1.0}), 0.1);
  if (!(red.richardson_change() < 1e-10)) return "reduced oracle change " + std::to_string(red.richardson_change());
  if (!(full.richardson_change() < 1e-10)) return "full oracle change " + std::to_string(full.richardson_change());
  return {};
}

std::string json_round_trip() {
  ExperimentResult r;
  r.spec = default_spec(ExperimentId::ErrVsD0);
  PointRecord p;
  p.abscissa = 0.1;
  p.error = 1.0 / 3.0;
  p.dev_max = std::nan("");
  p.regime = Regime::Diverged;
  r.points.push_back(p);
  std::ostringstream os;
  write_json(r, os);
  const ExperimentResult back = parse_result_json(os.str());
  const PointRecord& q = back.points.at(0);
  if (q.error != p.error || q.abscissa != p.abscissa || !std::isnan(q.dev_max) || q.regime != p.regime) {
    return "point changed in JSON round trip";
  }
  if (back.spec.grid != r.spec.grid) return "grid changed in JSON round trip";
  return {};
}

}  // namespace

bool run_selftest(std::ostream& os) {
  const Check checks[] = {
      {"degenerate_pi_matches_rk4", degenerate_matches_rk4},
      {"amplification_is_taylor_polynomial", amplification_is_taylor},
      {"pi1_pi2_matched_cost", matched_cost},
      {"microsolver_contracts_deviation", relaxation_contracts},
      {"loglog_slope_recovers_power_law", power_law_slope},
      {"sigma_monotone_in_dt_and_M", sigma_monotone},
      {"oracles_pass_step_halving", oracles_converge},
      {"json_round_trip", json_round_trip},
  };
  bool ok = true;
  for (const auto& c : checks) {
    std::string detail;
    try {
      detail = c.body();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    if (detail.empty()) {
      os << "PASS " << c.name << '\n';
    } else {
      os << "FAIL " << c.name << ": " << detail << '\n';
      ok = false;
    }
  }
  return ok;
}

}  // namespace projint
