#include "projint/rk.hpp"

#include <cmath>
#include <numeric>

#include "projint/error.hpp"

namespace projint {

RKTableau tableau_euler() { return RKTableau{1, {0.0}, {1.0}}; }

RKTableau tableau_rk2() { return RKTableau{2, {0.0, 1.0}, {0.5, 0.5}}; }

RKTableau tableau_rk4() {
  return RKTableau{4, {0.0, 0.5, 0.5, 1.0}, {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}};
}

RKTableau tableau_for_order(int order) {
  switch (order) {
    case 1:
      return tableau_euler();
    case 2:
      return tableau_rk2();
    case 4:
      return tableau_rk4();
    default:
      throw ConfigError("no recursive tableau of order " + std::to_string(order) + " (use 1, 2 or 4)");
  }
}

std::vector<std::string> validate_tableau(const RKTableau& t) {
  std::vector<std::string> issues;
  if (t.order <= 0) issues.push_back("order must be positive");
  if (t.nodes.size() != static_cast<std::size_t>(std::max(t.order, 0)) ||
      t.weights.size() != static_cast<std::size_t>(std::max(t.order, 0))) {
    issues.push_back("nodes and weights must both have `order` entries");
  }
  if (!t.nodes.empty() && t.nodes.front() != 0.0) issues.push_back("first node a_1 must be 0");
  for (std::size_t j = 0; j < t.nodes.size(); ++j) {
    if (!(t.nodes[j] >= 0.0 && t.nodes[j] <= 1.0)) {
      issues.push_back("node a_" + std::to_string(j + 1) + " outside [0, 1]");
    }
  }
  const double wsum = std::accumulate(t.weights.begin(), t.weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-14) issues.push_back("weights must sum to 1");
  return issues;
}

double amplification(int order_p, double eta) {
  if (order_p < 0) throw ContractViolation("amplification order must be non-negative");
  // Horner form of sum eta^j / j!.
  double acc = 1.0;
  for (int j = order_p; j >= 1; --j) acc = 1.0 + acc * eta / j;
  return acc;
}

void rk_step_inplace(const FieldFn& field, MutSpan z, const RKTableau& tableau, double h, RKWorkspace& ws) {
  if (!(h > 0.0)) throw ContractViolation("step size must be positive");
  const std::size_t n = z.size();
  if (ws.dim() != n) ws.resize(n);

  for (std::size_t i = 0; i < n; ++i) ws.acc_[i] = 0.0;
  for (int j = 0; j < tableau.order; ++j) {
    const double a = tableau.nodes[static_cast<std::size_t>(j)];
    const double b = tableau.weights[static_cast<std::size_t>(j)];
    if (j == 0) {
      field(ConstSpan(z.data(), n), ws.f_);
    } else {
      for (std::size_t i = 0; i < n; ++i) ws.stage_[i] = z[i] + a * ws.k_[i];
      field(ws.stage_, ws.f_);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(ws.f_[i])) {
        throw IntegrationFailure("non-finite field value in stage " + std::to_string(j + 1), j + 1);
      }
      ws.k_[i] = h * ws.f_[i];
      ws.acc_[i] += b * ws.k_[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) z[i] += ws.acc_[i];
}

Vector rk_step(const FieldFn& field, ConstSpan z, const RKTableau& tableau, double h) {
  Vector out(z.begin(), z.end());
  RKWorkspace ws(out.size());
  rk_step_inplace(field, out, tableau, h, ws);
  return out;
}

}  // namespace projint
