#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace projint {

using Vector = std::vector<double>;
using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

/// g(x, y) written into `out` (length n).
using SlowField = std::function<void(ConstSpan x, ConstSpan y, MutSpan out)>;
/// h0(y) written into `out` (length m).
using ManifoldMap = std::function<void(ConstSpan y, MutSpan out)>;
/// G(Y) written into `out` (length n).
using ReducedField = std::function<void(ConstSpan y, MutSpan out)>;

/// Fast/slow state plus its time stamp. Entries are always finite.
class FullState {
 public:
  FullState(Vector x, Vector y, double t = 0.0);

  /// Splits a packed [x; y] vector.
  static FullState from_packed(ConstSpan z, std::size_t dim_fast, double t);

  const Vector& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  double t() const noexcept { return t_; }

  /// [x; y] in one contiguous vector, the layout every integrator works on.
  Vector packed() const;

 private:
  Vector x_;
  Vector y_;
  double t_;
};

/// Slow-fast system
///
///   dy/dt = g(x, y)
///   dx/dt = (Lambda / eps) (-x + h0(y))
///
/// with Lambda diagonal and positive, normalised so that min(Lambda) = 1.
/// Immutable once built; copies share the callables.
class MultiscaleSystem {
 public:
  static MultiscaleSystem create(std::size_t dim_slow, std::size_t dim_fast, double epsilon,
                                 Vector lambda_diag, SlowField slow_field, ManifoldMap h0);

  std::size_t dim_slow() const noexcept { return impl_->dim_slow; }
  std::size_t dim_fast() const noexcept { return impl_->dim_fast; }
  std::size_t packed_size() const noexcept { return impl_->dim_slow + impl_->dim_fast; }
  double epsilon() const noexcept { return impl_->epsilon; }
  const Vector& lambda_diag() const noexcept { return impl_->lambda; }
  double lambda_max() const noexcept { return impl_->lambda_max; }

  void slow_field(ConstSpan x, ConstSpan y, MutSpan out) const { impl_->g(x, y, out); }
  void manifold(ConstSpan y, MutSpan out) const { impl_->h0(y, out); }

  // Packed-state kernels used on the integration hot path. `z` is [x; y].
  void full_field(ConstSpan z, MutSpan out) const;
  void fast_field(ConstSpan z, MutSpan out) const;

  /// |x - h0(y)| (Euclidean) for a packed state.
  double deviation(ConstSpan z) const;

  /// Same system with a different scale separation.
  MultiscaleSystem with_epsilon(double epsilon) const;

 private:
  struct Impl {
    std::size_t dim_slow;
    std::size_t dim_fast;
    double epsilon;
    Vector lambda;
    double lambda_max;
    SlowField g;
    ManifoldMap h0;
  };
  explicit MultiscaleSystem(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Reduced slow dynamics dY/dt = G(Y).
struct ReducedSystem {
  std::size_t dim = 0;
  ReducedField G;

  Vector operator()(ConstSpan y) const;
};

Vector eval_fast(const MultiscaleSystem& sys, const FullState& s);
Vector eval_slow(const MultiscaleSystem& sys, const FullState& s);
/// [fast; slow] tangent, matching the packed state layout.
Vector eval_full(const MultiscaleSystem& sys, const FullState& s);

/// Zeroth-order reduction G(Y) = g(h0(Y), Y).
ReducedSystem reduce(const MultiscaleSystem& sys);

/// dy/dt = -x y - alpha y^2,  dx/dt = (-x + sin^2 y) / eps.
MultiscaleSystem make_toy_system(double alpha, double epsilon);

}  // namespace projint
