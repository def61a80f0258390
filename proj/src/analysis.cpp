#include "projint/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "projint/error.hpp"

namespace projint {

namespace {

double distance(ConstSpan a, ConstSpan b) {
  if (a.size() != b.size()) throw ContractViolation("vector lengths differ");
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// sigma evaluated with an explicit lambda so the bounds can use the user's constants.
double sigma_for(const StabilityReport& r, const MultiscaleSystem& sys, double lambda) {
  return r.sigma / sys.lambda_max() * lambda;
}

double weighted_power_sum(const RKTableau& tab, double s) {
  double sum = 0.0;
  double pw = 1.0;
  for (int j = 0; j < tab.order; ++j) {
    pw *= s;
    sum += tab.weights[static_cast<std::size_t>(j)] * pw;
  }
  return sum;
}

}  // namespace

void validate_constants(const BoundConstants& k) {
  const double vals[] = {k.L_g, k.L_h, k.L_hprime, k.C_g, k.C2_star, k.CP_star, k.L_G};
  for (double v : vals) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("bound constants must be finite and non-negative");
  }
  if (!(k.lambda_max >= 1.0)) throw ConfigError("lambda_max must be >= 1");
  if (k.L_G > k.L_g * (1.0 + k.L_h) * (1.0 + 1e-12)) throw ConfigError("L_G must not exceed L_g (1 + L_h)");
}

StabilityReport stability_indicator(const MultiscaleSystem& sys, const PIConfig& cfg) {
  if (!(cfg.dt_macro >= 0.0)) throw ConfigError("dt_macro must be non-negative");
  // A zero macrostep is meaningful here (sigma = 0) even though it cannot be integrated.
  PIConfig probe = cfg;
  if (probe.dt_macro == 0.0) probe.dt_macro = 1.0;
  const auto counts = allocate_microsteps(probe);
  StabilityReport r;
  const RKTableau& tab = cfg.tableau;

  r.node_min = 1.0;
  for (int j = 1; j < tab.order; ++j) r.node_min = std::min(r.node_min, tab.nodes[static_cast<std::size_t>(j)]);
  if (counts.size() > 1) {
    r.m_min = *std::min_element(counts.begin() + 1, counts.end());
  } else {
    r.m_min = cfg.m_budget;
  }

  const double rho = std::abs(amplification(cfg.micro.order_p, -cfg.micro.dt_micro / sys.epsilon()));
  r.extrapolated = cfg.micro.order_p != 1;
  r.contraction = std::pow(rho, static_cast<double>(r.m_min));
  r.sigma = sys.lambda_max() * cfg.dt_macro / sys.epsilon() * r.contraction;
  if (cfg.scheme == Scheme::PI2) r.sigma2 = r.contraction / r.node_min * r.sigma;
  return r;
}

double pi1_deviation_bound(double d_prev, const MultiscaleSystem& sys, const PIConfig& cfg, const BoundConstants& k) {
  validate_constants(k);
  const StabilityReport r = stability_indicator(sys, cfg);
  const double s = sigma_for(r, sys, k.lambda_max);
  return weighted_power_sum(cfg.tableau, s) * d_prev + k.L_h * k.C_g * (1.0 + k.lambda_max) * cfg.dt_macro;
}

double pi2_deviation_bound(double d_prev, const MultiscaleSystem& sys, const PIConfig& cfg, const BoundConstants& k) {
  validate_constants(k);
  StabilityReport r = stability_indicator(sys, cfg);
  const double s = sigma_for(r, sys, k.lambda_max);
  const double span = increment_span(cfg);
  return r.contraction / r.node_min * weighted_power_sum(cfg.tableau, s) * d_prev +
         2.0 * k.L_hprime * k.C_g * k.C_g * span * span;
}

double seed_deviation_bound(double d_prev, const MultiscaleSystem& sys, const PIConfig& cfg, const BoundConstants& k) {
  validate_constants(k);
  const StabilityReport r = stability_indicator(sys, cfg);
  const double s = sigma_for(r, sys, k.lambda_max);
  const double drift = k.L_h * k.C_g * (1.0 + k.lambda_max) * cfg.dt_macro;
  double best = d_prev;  // seed 1 is z^n itself
  double pw = 1.0;
  double geometric = 0.0;
  for (int j = 1; j <= cfg.tableau.order; ++j) {
    geometric += pw;
    pw *= s;
    best = std::max(best, pw * d_prev + drift * geometric);
  }
  return best;
}

std::vector<double> discretization_error(const TrajectoryRecord& traj, const ReducedReference& reduced_ref) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const Vector Y = reduced_ref(traj.times[n]);
    out.push_back(distance(traj.states[n].y(), Y));
  }
  return out;
}

std::vector<double> reduction_error(const FullReference& full_ref, const ReducedReference& reduced_ref,
                                    const std::vector<double>& ts) {
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    const FullState s = full_ref(t);
    out.push_back(distance(s.y(), reduced_ref(t)));
  }
  return out;
}

SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ContractViolation("loglog_slope: series lengths differ");
  if (x.size() < 2) throw ContractViolation("loglog_slope: need at least two points");
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      throw DomainError("loglog_slope: abscissa[" + std::to_string(i) + "] is not positive", i);
    }
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw DomainError("loglog_slope: value[" + std::to_string(i) + "] is not positive", i);
    }
  }
  std::vector<double> lx(n), ly(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx;
    const double dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ContractViolation("loglog_slope: abscissa values are all equal");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

ErrorSeries make_error_series(std::vector<double> abscissa, std::vector<double> error) {
  const SlopeFit fit = loglog_slope(abscissa, error);
  return ErrorSeries{std::move(abscissa), std::move(error), fit.slope, fit.intercept, fit.r2};
}

}  // namespace projint
