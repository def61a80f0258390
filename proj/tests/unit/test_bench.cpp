#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "projint/bench.hpp"
#include "projint/error.hpp"
#include "toy.hpp"

using namespace projint;

namespace {

// Independent RK4 for the scalar reduced toy equation.
double reduced_rk4(double y, double alpha, double t, long n) {
  auto G = [alpha](double v) { return -v * toy::h0(v) - alpha * v * v; };
  const double h = t / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const double k1 = G(y), k2 = G(y + 0.5 * h * k1), k3 = G(y + 0.5 * h * k2), k4 = G(y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

}  // namespace

TEST_CASE("reduced oracle") {
  const ReducedSystem still{1, [](ConstSpan, MutSpan out) { out[0] = 0.0; }};
  const ReducedOracle flat(still, Vector{2.5}, 1.0, 0.01);
  CHECK(flat(0.37)[0] == 2.5);
  CHECK(flat(1.0)[0] == 2.5);

  const ReducedOracle zero(reduce(make_toy_system(0.2, 1e-9)), Vector{1.0}, 0.0, 0.01);
  CHECK(zero(0.0)[0] == 1.0);

  const ReducedOracle y = reference_reduced(reduce(make_toy_system(0.2, 1e-9)), Vector{1.0}, 1.0, 1e-3);
  CHECK(y.richardson_change() < kReducedRichardsonTol);
  CHECK(y(1.0)[0] == doctest::Approx(reduced_rk4(1.0, 0.2, 1.0, 20000)).epsilon(1e-13));
  // Off-node queries finish with a partial step.
  CHECK(y(0.12345)[0] == doctest::Approx(reduced_rk4(1.0, 0.2, 0.12345, 20000)).epsilon(1e-13));
  CHECK_THROWS_AS(y(2.0), ContractViolation);
}

TEST_CASE("full oracle") {
  const MultiscaleSystem rest = make_toy_system(1.0, 1e-4);
  const FullOracle fixed(rest, FullState({0.0}, {0.0}), 0.01);
  CHECK(fixed(0.005).x()[0] == 0.0);
  CHECK(fixed(0.005).y()[0] == 0.0);

  const MultiscaleSystem sys = make_toy_system(1.0, 1e-3);
  const FullState s0({toy::h0(1.0) + 0.5}, {1.0});
  const FullOracle at0(sys, s0, 0.0);
  CHECK(at0(0.0).x() == s0.x());

  const FullOracle full = reference_full(sys, s0, 0.1);
  CHECK(full.richardson_change() < kFullRichardsonTol);
  CHECK(full.step() == doctest::Approx(0.5e-4));
  for (double t : {0.02, 0.05, 0.1}) {
    const FullState s = full(t);
    CHECK(std::abs(s.x()[0] - toy::h0(s.y()[0])) < 10 * 1e-3);
  }
  CHECK_THROWS_AS(reference_full(make_toy_system(0.2, 1e-9), s0, 1.0), InfeasibleOracle);
}

TEST_CASE("reduced oracle resolution") {
  CHECK(reduced_resolution(1e-2, 1.0) == doctest::Approx(1e-4));
  CHECK(reduced_resolution(1.0, 1.0) == doctest::Approx(1e-3));
  CHECK(reduced_resolution(1e-9, 1.0) == doctest::Approx(1e-5));
}

TEST_CASE("experiment names") {
  for (ExperimentId id : all_experiments()) {
    CHECK(parse_experiment(experiment_slug(id)) == id);
    CHECK(parse_experiment(experiment_name(id)) == id);
    CHECK_NOTHROW(validate_spec(default_spec(id)));
  }
  CHECK(all_experiments().size() == 5);
  CHECK(parse_experiment("err-vs-dt-macro") == ExperimentId::ErrVsDtMacro);
  CHECK(parse_experiment("SELFDIFF_VS_DT") == ExperimentId::SelfDiffVsDt);
  CHECK_THROWS_AS(parse_experiment("err-vs-nothing"), ConfigError);
}

TEST_CASE("default specs") {
  const ExperimentSpec m = default_spec(ExperimentId::ErrVsDtMacro);
  CHECK(m.alpha == 0.2);
  CHECK(m.epsilon == 1e-9);
  CHECK(m.m_budget == 40);
  CHECK(m.dt_micro == doctest::Approx(0.4e-9));
  CHECK(m.grid.size() == 10);
  CHECK(m.grid.front() == doctest::Approx(1e-5));
  CHECK(m.grid.back() == doctest::Approx(5e-2));

  const ExperimentSpec u = default_spec(ExperimentId::ErrVsDtMicro);
  CHECK(u.micro_order == 2);
  CHECK(u.m_budget == 100);
  CHECK(u.n_steps == 50);
  CHECK(u.m_budget * u.grid.front() == doctest::Approx(1e-5));
  CHECK(u.m_budget * u.grid.back() == doctest::Approx(3e-4));

  const ExperimentSpec d = default_spec(ExperimentId::ErrVsD0);
  CHECK(d.n_steps == 5);
  CHECK(d.dt_macro == 1e-3);
  CHECK(d.dt_micro == doctest::Approx(1e-6));
  CHECK(d.grid.front() == doctest::Approx(0.01));
  CHECK(d.grid.back() == doctest::Approx(1.0));
}

TEST_CASE("spec validation") {
  ExperimentSpec s = default_spec(ExperimentId::ErrVsD0);
  s.grid = {0.1, 0.05};
  CHECK_THROWS_AS(validate_spec(s), ConfigError);
  s.grid = {0.0, 0.05};
  CHECK_THROWS_AS(validate_spec(s), ConfigError);
  s = default_spec(ExperimentId::ErrVsD0);
  s.schemes = {Scheme::PI1, Scheme::PI1};
  CHECK_THROWS_AS(validate_spec(s), ConfigError);
  s.schemes = {};
  CHECK_THROWS_AS(validate_spec(s), ConfigError);
  s = default_spec(ExperimentId::ErrVsDtMacro);
  s.m_budget = 41;
  CHECK_THROWS_AS(validate_spec(s), ConfigError);
}

TEST_CASE("CSV output") {
  ExperimentResult empty;
  empty.spec = default_spec(ExperimentId::ErrVsD0);
  CHECK(csv_of(empty) == "scheme,abscissa,error,dev_max,n_macro,micro_evals\n");

  ExperimentResult one = empty;
  PointRecord p;
  p.scheme = Scheme::PI2;
  p.abscissa = 0.1;
  p.error = 1.0 / 3.0;
  p.dev_max = 2.0;
  p.n_macro = 5;
  p.micro_evals = 2500;
  one.points.push_back(p);
  CHECK(csv_of(one) ==
        "scheme,abscissa,error,dev_max,n_macro,micro_evals\n"
        "PI2,0.10000000000000001,0.33333333333333331,2,5,2500\n");
}

TEST_CASE("figure run, JSON round trip and determinism") {
  const ExperimentSpec spec = default_spec(ExperimentId::ErrVsD0);
  const ExperimentResult a = run_experiment(spec, 1);
  const ExperimentResult b = run_experiment(spec, 3);
  CHECK(csv_of(a) == csv_of(b));
  REQUIRE(a.points.size() == 2 * spec.grid.size());
  REQUIRE(a.series.size() == 2);
  CHECK(a.series[0].series.abscissa.size() == spec.grid.size());
  CHECK_FALSE(a.any_diverged());
  for (const auto& p : a.points) {
    CHECK(p.n_macro == 5);
    CHECK(p.micro_evals > 0);
    CHECK(p.in_fit);
  }
  // Same microstep cost for both schemes at every grid point.
  const auto p1 = a.points_for(Scheme::PI1), p2 = a.points_for(Scheme::PI2);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].micro_evals == p2[i].micro_evals);

  std::ostringstream js;
  write_json(a, js);
  const ExperimentResult back = parse_result_json(js.str());
  CHECK(csv_of(back) == csv_of(a));
  std::ostringstream js2;
  write_json(back, js2);
  CHECK(js2.str() == js.str());
}

TEST_CASE("diverged points are reported, not fatal") {
  const ExperimentResult r = run_experiment(default_spec(ExperimentId::ErrVsDtMicro), 2);
  CHECK(r.any_diverged());
  bool saw_nan = false;
  for (const auto& p : r.points) {
    if (p.regime == Regime::Diverged) {
      saw_nan = std::isnan(p.error) && std::isnan(p.dev_max);
      CHECK_FALSE(p.in_fit);
      CHECK(p.note.find("diverged") != std::string::npos);
    }
  }
  CHECK(saw_nan);
  const std::string csv = csv_of(r);
  CHECK(csv.find(",nan,") != std::string::npos);
  CHECK(csv.find("# excluded,") != std::string::npos);
  CHECK(csv.find("# fit,PI1,slope=") != std::string::npos);
}

TEST_CASE("config parsing") {
  const ExperimentSpec s = parse_spec_json(R"({"id": "err-vs-d0", "grid": [0.1, 0.2, 0.4], "schemes": ["PI1"]})");
  CHECK(s.id == ExperimentId::ErrVsD0);
  CHECK(s.grid == std::vector<double>{0.1, 0.2, 0.4});
  CHECK(s.schemes == std::vector<Scheme>{Scheme::PI1});
  CHECK(s.n_steps == 5);

  const ExperimentSpec full = parse_spec_json(spec_to_json(default_spec(ExperimentId::ErrVsDtMicro)));
  CHECK(full.grid == default_spec(ExperimentId::ErrVsDtMicro).grid);
  CHECK(full.constants.CP_star == default_spec(ExperimentId::ErrVsDtMicro).constants.CP_star);

  try {
    parse_spec_json(R"({"id": "err-vs-d0", "gird": [0.1]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gird") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_spec_json(R"({"id": "err-vs-d0", "constants": {"Lg": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_spec_json(R"({"grid": [0.1]})"), ConfigError);
  CHECK_THROWS_AS(parse_spec_json(R"({"id": "err-vs-d0", "grid": "wide"})"), ConfigError);
  CHECK_THROWS_AS(parse_spec_json("{not json"), ConfigError);
  CHECK_THROWS_AS(load_spec_file("/nonexistent/spec.json"), ConfigError);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("reduction error is first order in epsilon") {
  const double a = max_reduction_error(1.0, 1e-3, 1.0, 0.1, 50);
  const double b = max_reduction_error(1.0, 5e-4, 1.0, 0.1, 50);
  CHECK(a / 1e-3 < 1.0);
  CHECK(a / b == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("selftest passes") {
  std::ostringstream os;
  CHECK(run_selftest(os));
  CHECK(os.str().find("FAIL") == std::string::npos);
}
