#include <algorithm>
#include <cmath>
#include <sstream>

#include "projint/bench.hpp"
#include "projint/error.hpp"
#include "projint/rk.hpp"

namespace projint {

namespace {

constexpr long kMaxCheckpoints = 100000;

double relative_change(const Vector& fine, const Vector& coarse) {
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double scale = std::max(std::abs(fine[i]), 1e-300);
    worst = std::max(worst, std::abs(fine[i] - coarse[i]) / scale);
  }
  return worst;
}

}  // namespace

DenseSolution::DenseSolution(Field field, Vector z0, double t_final, long n_steps)
    : field_(std::move(field)), t_final_(t_final), n_steps_(n_steps) {
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ContractViolation("oracle horizon must be finite and >= 0");
  if (n_steps < 0 || (n_steps == 0 && t_final > 0.0)) throw ContractViolation("oracle needs at least one step");
  h_ = n_steps > 0 ? t_final / static_cast<double>(n_steps) : 0.0;
  stride_ = std::max<long>(1, (n_steps + kMaxCheckpoints - 1) / kMaxCheckpoints);

  const RKTableau tab = tableau_rk4();
  RKWorkspace ws(z0.size());
  checkpoints_.push_back(z0);
  Vector z = std::move(z0);
  for (long k = 1; k <= n_steps; ++k) {
    rk_step_inplace(field_, z, tab, h_, ws);
    if (k % stride_ == 0) checkpoints_.push_back(z);
  }
  final_ = z;
}

Vector DenseSolution::operator()(double t) const {
  if (n_steps_ == 0) return checkpoints_.front();
  const double slack = 1e-9 * std::max(1.0, t_final_);
  if (t < -slack || t > t_final_ + h_ + slack || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "oracle queried at t = " << t << " outside [0, " << t_final_ << "]";
    throw ContractViolation(msg.str());
  }
  t = std::max(t, 0.0);

  const RKTableau tab = tableau_rk4();
  RKWorkspace ws(final_.size());
  long k = std::min(static_cast<long>(std::floor(t / h_)), n_steps_);
  Vector z;
  if (k == n_steps_) {
    z = final_;
  } else {
    const long cp = k / stride_;
    z = checkpoints_[static_cast<std::size_t>(cp)];
    for (long j = cp * stride_; j < k; ++j) rk_step_inplace(field_, z, tab, h_, ws);
  }
  const double rest = t - static_cast<double>(k) * h_;
  if (rest > 0.0) rk_step_inplace(field_, z, tab, rest, ws);
  return z;
}

double reduced_resolution(double min_dt, double t_final) {
  // A hundredth of the finest macrostep, but never finer than T / 1e5: below
  // that RK4 truncation is far beneath roundoff and only memory grows.
  double h = std::min(min_dt / 100.0, t_final / 1000.0);
  return std::max(h, t_final / 1e5);
}

ReducedOracle::ReducedOracle(const ReducedSystem& red, const Vector& y0, double t_final, double resolution) {
  if (y0.size() != red.dim) throw ContractViolation("reduced oracle: y0 has the wrong dimension");
  if (!(resolution > 0.0)) throw ContractViolation("reduced oracle: resolution must be positive");
  auto field = [G = red.G](ConstSpan y, MutSpan out) { G(y, out); };
  const long n = t_final > 0.0 ? static_cast<long>(std::ceil(t_final / resolution)) : 0;
  if (n == 0) {
    fine_ = std::make_shared<DenseSolution>(field, y0, t_final, 0);
    return;
  }
  const DenseSolution coarse(field, y0, t_final, n);
  fine_ = std::make_shared<DenseSolution>(field, y0, t_final, 2 * n);
  change_ = relative_change(fine_->final_state(), coarse.final_state());
}

FullOracle::FullOracle(const MultiscaleSystem& sys, const FullState& s0, double t_final)
    : dim_fast_(sys.dim_fast()), t0_(s0.t()) {
  if (s0.x().size() != sys.dim_fast() || s0.y().size() != sys.dim_slow()) {
    throw ContractViolation("full oracle: state dimensions do not match system");
  }
  const double h = 0.1 * sys.epsilon() / sys.lambda_max();
  const double steps = t_final / h;
  if (steps > kFullOracleMaxSteps) {
    std::ostringstream msg;
    msg << "full oracle would need " << steps << " steps at 0.1 eps (limit " << kFullOracleMaxSteps << ")";
    throw InfeasibleOracle(msg.str());
  }
  auto field = [sys](ConstSpan z, MutSpan out) { sys.full_field(z, out); };
  const long n = t_final > 0.0 ? static_cast<long>(std::ceil(steps)) : 0;
  if (n == 0) {
    fine_ = std::make_shared<DenseSolution>(field, s0.packed(), t_final, 0);
    return;
  }
  const DenseSolution coarse(field, s0.packed(), t_final, n);
  fine_ = std::make_shared<DenseSolution>(field, s0.packed(), t_final, 2 * n);
  change_ = relative_change(fine_->final_state(), coarse.final_state());
}

FullState FullOracle::operator()(double t) const {
  const Vector z = (*fine_)(t - t0_);
  return FullState::from_packed(z, dim_fast_, t);
}

ReducedOracle reference_reduced(const ReducedSystem& red, const Vector& y0, double t_final, double resolution) {
  ReducedOracle oracle(red, y0, t_final, resolution);
  if (!(oracle.richardson_change() < kReducedRichardsonTol)) {
    std::ostringstream msg;
    msg << "reduced oracle failed step halving: relative change " << oracle.richardson_change();
    throw InfeasibleOracle(msg.str());
  }
  return oracle;
}

FullOracle reference_full(const MultiscaleSystem& sys, const FullState& s0, double t_final) {
  FullOracle oracle(sys, s0, t_final);
  if (!(oracle.richardson_change() < kFullRichardsonTol)) {
    std::ostringstream msg;
    msg << "full oracle failed step halving: relative change " << oracle.richardson_change();
    throw InfeasibleOracle(msg.str());
  }
  return oracle;
}

}  // namespace projint
