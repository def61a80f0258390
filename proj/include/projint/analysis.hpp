#pragma once

#include <functional>
#include <vector>

#include "projint/model.hpp"
#include "projint/pi.hpp"

namespace projint {

/// Lipschitz and boundedness constants of a problem, supplied per experiment.
struct BoundConstants {
  double L_g = 0.0;
  double L_h = 0.0;
  double L_hprime = 0.0;
  double C_g = 0.0;
  double C2_star = 0.0;
  double CP_star = 0.0;
  double L_G = 0.0;
  double lambda_max = 1.0;
};

/// ConfigError on negative constants or L_G > L_g (1 + L_h).
void validate_constants(const BoundConstants& k);

struct StabilityReport {
  /// (lambda dt_macro / eps) * |rho|^{aM}, aM the smallest microstep count after the first.
  double sigma = 0.0;
  /// PI2 only: (|rho|^{aM} / a) * sigma. Zero for PI1.
  double sigma2 = 0.0;
  /// |rho_p(-dt_micro / eps)|^{aM}.
  double contraction = 0.0;
  double node_min = 0.0;  // a = min_{j>1} a_j
  long m_min = 0;         // aM
  /// True when the microsolver is not forward Euler and rho_p replaced (1 - dt/eps).
  bool extrapolated = false;
  bool stable() const noexcept { return sigma < 1.0; }
};

StabilityReport stability_indicator(const MultiscaleSystem& sys, const PIConfig& cfg);

/// Lowest-order deviation recurrences for |d^{n+1}| given |d^n| = d_prev.
double pi1_deviation_bound(double d_prev, const MultiscaleSystem& sys, const PIConfig& cfg, const BoundConstants& k);
double pi2_deviation_bound(double d_prev, const MultiscaleSystem& sys, const PIConfig& cfg, const BoundConstants& k);

/// Bound on the seed deviations inside one macrostep that starts at |d^n| = d_prev:
/// max_j [ s^j d_prev + L_h C_g (1 + lambda) dt sum_{k<j} s^k ], j = 1..P, s = sigma.
double seed_deviation_bound(double d_prev, const MultiscaleSystem& sys, const PIConfig& cfg, const BoundConstants& k);

using ReducedReference = std::function<Vector(double t)>;
using FullReference = std::function<FullState(double t)>;

/// |y^n - Y(t^n)| for every recorded macrostep.
std::vector<double> discretization_error(const TrajectoryRecord& traj, const ReducedReference& reduced_ref);

/// |y_eps(t) - Y(t)| at each requested time.
std::vector<double> reduction_error(const FullReference& full_ref, const ReducedReference& reduced_ref,
                                    const std::vector<double>& ts);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of ln y against ln x. Throws DomainError naming the
/// first non-positive entry; ContractViolation for fewer than two points.
SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ErrorSeries {
  std::vector<double> abscissa;
  std::vector<double> error;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

ErrorSeries make_error_series(std::vector<double> abscissa, std::vector<double> error);

}  // namespace projint
