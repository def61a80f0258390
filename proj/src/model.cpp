#include "projint/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "projint/error.hpp"

namespace projint {

namespace {

void require_finite(ConstSpan v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ContractViolation(std::string(what) + "[" + std::to_string(i) + "] is not finite");
    }
  }
}

void require_dims(const MultiscaleSystem& sys, const FullState& s) {
  if (s.x().size() != sys.dim_fast() || s.y().size() != sys.dim_slow()) {
    throw ContractViolation("state dimensions (" + std::to_string(s.x().size()) + ", " +
                            std::to_string(s.y().size()) + ") do not match system (" +
                            std::to_string(sys.dim_fast()) + ", " + std::to_string(sys.dim_slow()) +
                            ")");
  }
}

}  // namespace

FullState::FullState(Vector x, Vector y, double t) : x_(std::move(x)), y_(std::move(y)), t_(t) {
  require_finite(x_, "x");
  require_finite(y_, "y");
  if (!std::isfinite(t_)) throw ContractViolation("t is not finite");
}

FullState FullState::from_packed(ConstSpan z, std::size_t dim_fast, double t) {
  if (dim_fast > z.size()) throw ContractViolation("packed state shorter than fast dimension");
  return FullState(Vector(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(dim_fast)),
                   Vector(z.begin() + static_cast<std::ptrdiff_t>(dim_fast), z.end()), t);
}

Vector FullState::packed() const {
  Vector z;
  z.reserve(x_.size() + y_.size());
  z.insert(z.end(), x_.begin(), x_.end());
  z.insert(z.end(), y_.begin(), y_.end());
  return z;
}

MultiscaleSystem MultiscaleSystem::create(std::size_t dim_slow, std::size_t dim_fast, double epsilon,
                                          Vector lambda_diag, SlowField slow_field, ManifoldMap h0) {
  if (dim_slow == 0 || dim_fast == 0) throw ConfigError("system dimensions must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive and finite");
  if (lambda_diag.size() != dim_fast) {
    throw ConfigError("lambda_diag has " + std::to_string(lambda_diag.size()) + " entries, expected " +
                      std::to_string(dim_fast));
  }
  for (double l : lambda_diag) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda_diag entries must be positive");
  }
  const auto [lo, hi] = std::minmax_element(lambda_diag.begin(), lambda_diag.end());
  // Time is scaled so the slowest fast rate is one.
  if (std::abs(*lo - 1.0) > 1e-12) throw ConfigError("min(lambda_diag) must equal 1");
  if (!slow_field || !h0) throw ConfigError("slow field and manifold map must be callable");

  const double lmax = *hi;
  auto impl = std::make_shared<const Impl>(
      Impl{dim_slow, dim_fast, epsilon, std::move(lambda_diag), lmax, std::move(slow_field), std::move(h0)});
  return MultiscaleSystem(std::move(impl));
}

void MultiscaleSystem::fast_field(ConstSpan z, MutSpan out) const {
  const std::size_t m = impl_->dim_fast;
  // h0(y) lands in `out` first, then is overwritten in place.
  impl_->h0(z.subspan(m), out.first(m));
  const double eps = impl_->epsilon;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = impl_->lambda[i] / eps * (-z[i] + out[i]);
  }
}

void MultiscaleSystem::full_field(ConstSpan z, MutSpan out) const {
  const std::size_t m = impl_->dim_fast;
  fast_field(z, out);
  impl_->g(z.first(m), z.subspan(m), out.subspan(m));
}

double MultiscaleSystem::deviation(ConstSpan z) const {
  const std::size_t m = impl_->dim_fast;
  Vector h(m);
  impl_->h0(z.subspan(m), h);
  if (m == 1) return std::abs(z[0] - h[0]);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = z[i] - h[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

MultiscaleSystem MultiscaleSystem::with_epsilon(double epsilon) const {
  return create(impl_->dim_slow, impl_->dim_fast, epsilon, impl_->lambda, impl_->g, impl_->h0);
}

Vector ReducedSystem::operator()(ConstSpan y) const {
  if (y.size() != dim) throw ContractViolation("reduced state has wrong dimension");
  Vector out(dim);
  G(y, out);
  return out;
}

Vector eval_fast(const MultiscaleSystem& sys, const FullState& s) {
  require_dims(sys, s);
  const Vector z = s.packed();
  Vector out(sys.dim_fast());
  sys.fast_field(z, out);
  return out;
}

Vector eval_slow(const MultiscaleSystem& sys, const FullState& s) {
  require_dims(sys, s);
  Vector out(sys.dim_slow());
  sys.slow_field(s.x(), s.y(), out);
  return out;
}

Vector eval_full(const MultiscaleSystem& sys, const FullState& s) {
  require_dims(sys, s);
  const Vector z = s.packed();
  Vector out(sys.packed_size());
  sys.full_field(z, out);
  return out;
}

ReducedSystem reduce(const MultiscaleSystem& sys) {
  const std::size_t m = sys.dim_fast();
  ReducedField G = [sys, m](ConstSpan y, MutSpan out) {
    Vector h(m);
    sys.manifold(y, h);
    sys.slow_field(h, y, out);
  };
  return ReducedSystem{sys.dim_slow(), std::move(G)};
}

MultiscaleSystem make_toy_system(double alpha, double epsilon) {
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  SlowField g = [alpha](ConstSpan x, ConstSpan y, MutSpan out) { out[0] = -x[0] * y[0] - alpha * y[0] * y[0]; };
  ManifoldMap h0 = [](ConstSpan y, MutSpan out) {
    const double s = std::sin(y[0]);
    out[0] = s * s;
  };
  return MultiscaleSystem::create(1, 1, epsilon, Vector{1.0}, std::move(g), std::move(h0));
}

}  // namespace projint
