#pragma once

#include <functional>
#include <string>
#include <vector>

#include "projint/model.hpp"

namespace projint {

/// Explicit Runge-Kutta method in the restricted recursive form
///
///   k_j = h F(z + a_j k_{j-1}),   z_next = z + sum_j b_j k_j,
///
/// where every stage sees only the previous increment.
struct RKTableau {
  int order = 0;
  Vector nodes;    // a_1 .. a_P, a_1 = 0
  Vector weights;  // b_1 .. b_P, summing to one
};

RKTableau tableau_euler();
/// Heun's method, a = {0, 1}, b = {1/2, 1/2}.
RKTableau tableau_rk2();
/// Classic fourth-order method, a = {0, 1/2, 1/2, 1}, b = {1/6, 1/3, 1/3, 1/6}.
RKTableau tableau_rk4();
/// Tableau for order 1, 2 or 4; anything else is a ConfigError.
RKTableau tableau_for_order(int order);

/// Human-readable list of broken invariants; empty means the tableau is usable.
std::vector<std::string> validate_tableau(const RKTableau& t);

/// Truncated exponential sum_{j=0}^{p} eta^j / j!, the factor one step of an
/// order-p method applies to dx/dt = x when eta = h.
double amplification(int order_p, double eta);

using FieldFn = std::function<void(ConstSpan z, MutSpan dz)>;

/// Scratch buffers for allocation-free stepping.
class RKWorkspace {
 public:
  explicit RKWorkspace(std::size_t dim = 0) { resize(dim); }
  void resize(std::size_t dim) {
    k_.resize(dim);
    stage_.resize(dim);
    acc_.resize(dim);
    f_.resize(dim);
  }
  std::size_t dim() const noexcept { return k_.size(); }

 private:
  friend void rk_step_inplace(const FieldFn&, MutSpan, const RKTableau&, double, RKWorkspace&);
  Vector k_, stage_, acc_, f_;
};

/// One step, overwriting `z`. Throws IntegrationFailure (1-based stage) if the
/// field returns a non-finite value; `z` is left untouched in that case.
void rk_step_inplace(const FieldFn& field, MutSpan z, const RKTableau& tableau, double h, RKWorkspace& ws);

/// One step from `z`; h must be positive.
Vector rk_step(const FieldFn& field, ConstSpan z, const RKTableau& tableau, double h);

}  // namespace projint
