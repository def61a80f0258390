#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "projint/analysis.hpp"
#include "projint/error.hpp"
#include "toy.hpp"

using namespace projint;

namespace {

PIConfig make_cfg(Scheme s, double dt_macro, double dt_micro, long m, int micro_order = 1) {
  PIConfig cfg;
  cfg.scheme = s;
  cfg.dt_macro = dt_macro;
  cfg.micro = MicroConfig{micro_order, dt_micro};
  cfg.m_first = m;
  cfg.m_budget = m;
  return cfg;
}

BoundConstants figure_constants() {
  BoundConstants k;
  k.L_g = 1.1;
  k.L_h = 1.0;
  k.L_hprime = 1.0;
  k.C_g = 2.0;
  k.L_G = 2.2;
  k.lambda_max = 1.0;
  return k;
}

}  // namespace

TEST_CASE("stability indicator at the macrostep-study parameters") {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-9);
  // 0.6^10 = 0.0060466176 exactly, so 0.6^20 = 3.65615844006297e-5.
  const double c20 = 0.0060466176 * 0.0060466176;
  const StabilityReport r2 = stability_indicator(sys, make_cfg(Scheme::PI2, 1e-3, 0.4e-9, 40));
  CHECK(r2.m_min == 20);
  CHECK(r2.node_min == 0.5);
  CHECK(r2.contraction == doctest::Approx(c20).epsilon(1e-12));
  CHECK(r2.sigma == doctest::Approx(1e6 * c20).epsilon(1e-12));
  CHECK(r2.sigma == doctest::Approx(36.5615844).epsilon(1e-9));
  CHECK_FALSE(r2.stable());
  CHECK(r2.sigma2 == doctest::Approx(c20 / 0.5 * r2.sigma).epsilon(1e-12));
  CHECK_FALSE(r2.extrapolated);

  const StabilityReport r1 = stability_indicator(sys, make_cfg(Scheme::PI1, 1e-3, 0.4e-9, 40));
  CHECK(r1.m_min == 40);
  CHECK(r1.sigma == doctest::Approx(1e6 * c20 * c20).epsilon(1e-12));
  CHECK(r1.stable());
  CHECK(r1.sigma2 == 0.0);
}

TEST_CASE("stability indicator edge cases") {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-6);
  CHECK(stability_indicator(sys, make_cfg(Scheme::PI1, 1e-3, 1e-6, 10)).sigma == 0.0);
  CHECK(stability_indicator(sys, make_cfg(Scheme::PI1, 0.0, 0.4e-6, 10)).sigma == 0.0);
  CHECK(stability_indicator(sys, make_cfg(Scheme::PI2, 0.0, 0.4e-6, 10)).sigma == 0.0);
  const StabilityReport r = stability_indicator(sys, make_cfg(Scheme::PI1, 1e-3, 0.4e-6, 10, 2));
  CHECK(r.extrapolated);
  CHECK(r.contraction == doctest::Approx(std::pow(amplification(2, -0.4), 10)));
}

TEST_CASE("stability indicator is monotone in dt and M") {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ratio(0.05, 0.95), dt(1e-5, 1e-1);
  for (int trial = 0; trial < 200; ++trial) {
    const double r = ratio(rng) * 1e-5;
    const double d1 = dt(rng), d2 = d1 * 1.5;
    for (Scheme s : {Scheme::PI1, Scheme::PI2}) {
      const double a = stability_indicator(sys, make_cfg(s, d1, r, 10)).sigma;
      const double b = stability_indicator(sys, make_cfg(s, d2, r, 10)).sigma;
      const double c = stability_indicator(sys, make_cfg(s, d1, r, 12)).sigma;
      CHECK(b > a);
      CHECK(c < a);
    }
  }
}

TEST_CASE("PI1 deviation recurrence") {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-9);
  const BoundConstants k = figure_constants();
  const PIConfig cfg = make_cfg(Scheme::PI1, 1e-3, 0.4e-9, 40);
  CHECK(pi1_deviation_bound(0.0, sys, cfg, k) == doctest::Approx(4e-3).epsilon(1e-14));
  const double s = 1e6 * std::pow(0.6, 40);
  const double expect = (s / 6 + s * s / 3 + s * s * s / 3 + s * s * s * s / 6) * 0.7 + 4e-3;
  CHECK(pi1_deviation_bound(0.7, sys, cfg, k) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(pi1_deviation_bound(0.0, sys, make_cfg(Scheme::PI1, 1e-12, 0.4e-9, 40), k) < 1e-11);
}

TEST_CASE("PI2 deviation recurrence") {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-9);
  const BoundConstants k = figure_constants();
  const PIConfig cfg = make_cfg(Scheme::PI2, 1e-3, 0.4e-9, 40);
  const double span = 1e-3 + 40 * 0.4e-9;
  CHECK(pi2_deviation_bound(0.0, sys, cfg, k) == doctest::Approx(8.0 * span * span).epsilon(1e-14));
  CHECK(pi2_deviation_bound(0.0, sys, cfg, k) == doctest::Approx(8e-6).epsilon(1e-4));
  // Strong relaxation drives the deviation-carrying term to zero.
  const double big = pi2_deviation_bound(1.0, sys, make_cfg(Scheme::PI2, 1e-3, 0.4e-9, 400), k);
  CHECK(big - pi2_deviation_bound(0.0, sys, make_cfg(Scheme::PI2, 1e-3, 0.4e-9, 400), k) < 1e-30);
}

TEST_CASE("seed deviation bound") {
  const MultiscaleSystem sys = make_toy_system(0.2, 1e-4);
  const BoundConstants k = figure_constants();
  const PIConfig cfg = make_cfg(Scheme::PI1, 1e-3, 0.2e-4, 20);
  for (double d : {0.0, 0.01, 0.5}) CHECK(seed_deviation_bound(d, sys, cfg, k) >= d);
  const double s = 10 * std::pow(0.8, 20), drift = 4e-3;
  for (double d : {1e-4, 0.1}) {
    const double seeds[] = {d, s * d + drift, s * s * d + drift * (1 + s), s * s * s * d + drift * (1 + s + s * s),
                            s * s * s * s * d + drift * (1 + s + s * s + s * s * s)};
    CHECK(seed_deviation_bound(d, sys, cfg, k) == doctest::Approx(*std::max_element(seeds, seeds + 5)).epsilon(1e-12));
  }
}

TEST_CASE("bound constants") {
  BoundConstants k = figure_constants();
  CHECK_NOTHROW(validate_constants(k));
  k.L_G = 2.3;
  CHECK_THROWS_AS(validate_constants(k), ConfigError);
  k = figure_constants();
  k.C_g = -1;
  CHECK_THROWS_AS(validate_constants(k), ConfigError);
  k = figure_constants();
  k.lambda_max = 0.5;
  CHECK_THROWS_AS(validate_constants(k), ConfigError);
  k = figure_constants();
  k.L_h = NAN;
  CHECK_THROWS_AS(validate_constants(k), ConfigError);
}

TEST_CASE("discretization error") {
  // G = 1 everywhere: every scheme integrates the slow variable exactly.
  const auto sys = MultiscaleSystem::create(
      1, 1, 1e-4, {1.0}, [](ConstSpan, ConstSpan, MutSpan out) { out[0] = 1.0; },
      [](ConstSpan y, MutSpan out) { out[0] = toy::h0(y[0]); });
  for (Scheme s : {Scheme::PI1, Scheme::PI2}) {
    const TrajectoryRecord tr = run(sys, FullState({0.3}, {0.5}), make_cfg(s, 1e-2, 0.3e-4, 10), 20);
    const auto err = discretization_error(tr, [](double t) { return Vector{0.5 + t}; });
    REQUIRE(err.size() == 21);
    for (double e : err) CHECK(e < 1e-13);
    const auto self = discretization_error(tr, [&](double t) {
      for (std::size_t n = 0; n < tr.times.size(); ++n) {
        if (tr.times[n] == t) return tr.states[n].y();
      }
      return Vector{NAN};
    });
    for (double e : self) CHECK(e == 0.0);
  }
}

TEST_CASE("reduction error") {
  const ReducedReference y = [](double t) { return Vector{std::exp(-t)}; };
  const FullReference same = [](double t) { return FullState({0.0}, {std::exp(-t)}, t); };
  const FullReference off = [](double t) { return FullState({0.0}, {std::exp(-t) + 0.5 * t}, t); };
  for (double e : reduction_error(same, y, {0.0, 0.5, 1.0})) CHECK(e == 0.0);
  const auto e = reduction_error(off, y, {0.2, 0.4});
  CHECK(e[0] == doctest::Approx(0.1));
  CHECK(e[1] == doctest::Approx(0.2));
}

TEST_CASE("log-log slope") {
  std::vector<double> x{0.1, 0.2, 0.4, 0.8, 1.6}, y4, y1;
  for (double v : x) {
    y4.push_back(v * v * v * v);
    y1.push_back(7.0 * v);
  }
  const SlopeFit f4 = loglog_slope(x, y4);
  CHECK(f4.slope == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f4.intercept == doctest::Approx(0.0).epsilon(1e-11));
  CHECK(f4.r2 == doctest::Approx(1.0).epsilon(1e-12));
  const SlopeFit f1 = loglog_slope(x, y1);
  CHECK(f1.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f1.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("log-log slope recovers random power laws") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> p(-3.0, 6.0), c(0.01, 100.0), x0(1e-8, 1e-2);
  for (int t = 0; t < 100; ++t) {
    const double k = p(rng), a = c(rng);
    std::vector<double> x, y;
    double v = x0(rng);
    for (int i = 0; i < 8; ++i, v *= 2.3) {
      x.push_back(v);
      y.push_back(a * std::pow(v, k));
    }
    CHECK(loglog_slope(x, y).slope == doctest::Approx(k).epsilon(1e-12));
  }
}

TEST_CASE("log-log slope rejects bad input") {
  try {
    loglog_slope({1.0, 2.0, 3.0}, {1.0, 0.0, 2.0});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.index() == 1);
  }
  try {
    loglog_slope({1.0, 2.0, -3.0}, {1.0, 1.0, 2.0});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.index() == 2);
  }
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), ContractViolation);
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0}), ContractViolation);
  CHECK_THROWS_AS(loglog_slope({2.0, 2.0}, {1.0, 3.0}), ContractViolation);
}

TEST_CASE("error series") {
  const ErrorSeries s = make_error_series({1e-3, 1e-2, 1e-1}, {2e-6, 2e-4, 2e-2});
  CHECK(s.abscissa.size() == 3);
  CHECK(s.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.r2 == doctest::Approx(1.0));
}
