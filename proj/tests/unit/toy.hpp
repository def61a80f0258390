// Scalar helpers shared by the unit tests. They spell the toy problem out by
// hand so that tests do not lean on the library's own field code.
#pragma once

#include <cmath>

namespace toy {

struct Z {
  double x, y;
};

inline double h0(double y) { return std::sin(y) * std::sin(y); }

inline Z field(Z z, double alpha, double eps) { return {(-z.x + h0(z.y)) / eps, -z.x * z.y - alpha * z.y * z.y}; }

inline Z euler_relax(Z z, long m, double dt, double alpha, double eps) {
  for (long i = 0; i < m; ++i) {
    const Z f = field(z, alpha, eps);
    z = {z.x + dt * f.x, z.y + dt * f.y};
  }
  return z;
}

}  // namespace toy
