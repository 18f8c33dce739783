#include <doctest.h>

#include <cmath>

#include "oscerr/bseries.hpp"
#include "oscerr/errors.hpp"
#include "oscerr/integrator.hpp"
#include "oscerr/oscillators.hpp"

using namespace oscerr;

namespace {

Rational q(int n, int d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

OdeSystem exponential() {
  return {1, [](std::span<const double> y, std::span<double> out) { out[0] = y[0]; }, {}};
}

// y1' = y2, y2' = -y1: exact solution (cos t, -sin t) from (1, 0).
OdeSystem harmonic() {
  return {2, [](std::span<const double> y, std::span<double> out) {
            out[0] = y[1];
            out[1] = -y[0];
          }, {}};
}

double harmonic_error(const ButcherTableau& m, double h) {
  const std::vector<double> y0{1.0, 0.0};
  const auto traj = integrate(m, harmonic(), y0, 0.0, h, 10.0, 1);
  const auto y = traj.state(traj.size() - 1);
  return std::hypot(y[0] - std::cos(10.0), y[1] + std::sin(10.0));
}

}  // namespace

TEST_CASE("exact rationals") {
  CHECK(parse_rational("1e-3") == q(1, 1000));
  CHECK(parse_rational("2.5E4") == 25000);
  CHECK(parse_rational("-3/6") == q(-1, 2));
  CHECK(parse_rational("1.5") == q(3, 2));
  CHECK(parse_rational("7") == 7);
  for (const char* bad : {"", "1/0", "abc", "1e", "1.2.3", "1/2/3"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rational(bad), ArgumentError);
  }
  CHECK(to_string(q(-6, 4)) == "-3/2");
  CHECK(to_string(Rational(5)) == "5");
  CHECK(to_double(q(1, 1000)) == 0.001);
  CHECK(to_double(q(1, 3)) == 1.0 / 3.0);
  CHECK(to_double(q(-2, 3)) == -2.0 / 3.0);
  CHECK(to_double(q(1, 2000)) == 1.0 / 2000.0);
  CHECK(factorial(5) == 120);
}

TEST_CASE("single steps") {
  const std::vector<double> y{1.0};
  CHECK(step(find_method("runge2"), exponential(), y, 0.1)[0] == doctest::Approx(1.105).epsilon(1e-15));
  CHECK(step(find_method("rk4"), exponential(), y, 0.1)[0] ==
        doctest::Approx(1.0 + 0.1 + 0.005 + 0.1 * 0.1 * 0.1 / 6 + 0.1 * 0.1 * 0.1 * 0.1 / 24).epsilon(1e-15));
  for (const auto& m : builtin_methods()) CHECK(step(m, exponential(), y, 0.0)[0] == 1.0);
  CHECK_THROWS_AS(step(find_method("rk4"), exponential(), y, -0.1), ArgumentError);
}

TEST_CASE("builtin tableaux") {
  const auto tuned = find_method("tuned3");
  CHECK(tuned.c() == std::vector<Rational>{0, 1, q(3, 2)});
  CHECK(tuned.a(2, 0) == q(9, 4));
  CHECK(tuned.a(2, 1) == q(-3, 4));
  CHECK(tuned.b() == std::vector<Rational>{q(7, 18), q(5, 6), q(-2, 9)});

  const auto runge = find_method("runge2");
  CHECK(runge.c() == std::vector<Rational>{0, q(1, 2)});
  CHECK(runge.b() == std::vector<Rational>{0, 1});

  for (const auto& m : builtin_methods())
    for (int i = 0; i < m.stages(); ++i) {
      Rational row = 0;
      for (int j = 0; j < i; ++j) row += m.a(i, j);
      CHECK(row == m.c()[static_cast<std::size_t>(i)]);
      CHECK(m.c_double(i) == to_double(m.c()[static_cast<std::size_t>(i)]));
    }

  CHECK_THROWS_AS(find_method("rk5"), ArgumentError);
  CHECK_THROWS_AS(ButcherTableau("implicit", {{1}}, {1}, {1}), ArgumentError);
  CHECK_THROWS_AS(ButcherTableau("bad c", {{}, {q(1, 2)}}, {0, 1}, {0, 1}), ArgumentError);
  CHECK_THROWS_AS(ButcherTableau("empty", {}, {}, {}), ArgumentError);
}

TEST_CASE("tuned family") {
  const auto base = design_tuned_3stage(1);
  const auto tuned = find_method("tuned3");
  CHECK(base.c() == tuned.c());
  CHECK(base.b() == tuned.b());
  CHECK(base.a(2, 0) == tuned.a(2, 0));
  CHECK(base.a(2, 1) == tuned.a(2, 1));

  for (const Rational& c2 : {q(1, 3), q(-2, 1), q(3, 4), q(5, 1), q(1, 2)}) {
    CAPTURE(to_string(c2));
    const auto m = design_tuned_3stage(c2);
    const auto a = rk_bseries(m, 4);
    CHECK(method_order(a) == 3);
    const auto b = modified_equation_coeffs(a, 4);
    CHECK(order4_oscillator_combination(b) == 0);
    CHECK(m.c()[2] == 1 + 1 / (2 * c2));
  }
  for (const Rational& c2 : {q(0, 1), q(2, 3), q(-1, 2)}) CHECK_THROWS_AS(design_tuned_3stage(c2), DegenerateParameterError);
}

TEST_CASE("convergence orders") {
  std::vector<std::pair<ButcherTableau, int>> cases;
  for (const auto& m : builtin_methods()) cases.emplace_back(m, m.name() == "runge2" ? 2 : m.name() == "rk4" ? 4 : 3);
  cases.emplace_back(design_tuned_3stage(q(1, 3)), 3);
  for (const auto& [m, p] : cases) {
    CAPTURE(m.name());
    const double observed = std::log2(harmonic_error(m, 0.02) / harmonic_error(m, 0.01));
    CHECK(observed == doctest::Approx(p).epsilon(0.05));
  }
}

TEST_CASE("step counts and sampling") {
  CHECK(step_count(0.0, 0.1, 1.0) == 10);
  CHECK(step_count(0.0, 1e-3, 2000.0) == 2000000);
  CHECK(step_count(0.0, 1.0 / 2000, 2000.0) == 4000000);
  CHECK(step_count(0.0, 0.3, 1.0) == 3);
  CHECK(step_count(1.0, 0.1, 0.5) == 0);
  CHECK_THROWS_AS(step_count(0.0, 0.0, 1.0), ArgumentError);

  const std::vector<double> y0{1.0};
  const auto none = integrate(find_method("rk4"), exponential(), y0, 0.0, 0.1, 0.0);
  REQUIRE(none.size() == 1);
  CHECK(none(0, 0) == 1.0);

  const auto traj = integrate(find_method("rk4"), exponential(), y0, 0.0, 0.01, 1.0, 10);
  CHECK(traj.size() == 11);
  CHECK(traj.time(10) == doctest::Approx(1.0));
  CHECK(traj(10, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  CHECK_THROWS_AS(integrate(find_method("rk4"), exponential(), y0, 0.0, 0.01, 1.0, 0), ArgumentError);
  CHECK_THROWS_AS(integrate(find_method("rk4"), harmonic(), y0, 0.0, 0.01, 1.0), ArgumentError);
}

TEST_CASE("divergence is reported with its step") {
  const OdeSystem blowup{1, [](std::span<const double> y, std::span<double> out) { out[0] = y[0] * y[0]; }, {}};
  const std::vector<double> y0{1.0};
  try {
    integrate(find_method("runge2"), blowup, y0, 0.0, 0.5, 100.0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 1);
    CHECK(e.time() == doctest::Approx(0.5 * static_cast<double>(e.step())));
  }
}

TEST_CASE("Emden-Fowler run stays close to a fine reference") {
  const auto problem = EmdenFowlerProblem(3, 1.0);
  const auto ode = ef_system(problem);
  const auto y0 = problem.initial_state();
  const auto coarse = integrate(find_method("runge2"), ode, y0, 0.0, 1e-3, 50.0, 10);
  const auto fine = integrate(find_method("rk4"), ode, y0, 0.0, 1e-4, 50.0, 100);
  REQUIRE(coarse.size() == fine.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) worst = std::max(worst, std::abs(coarse(k, 0) - fine(k, 0)));
  CHECK(worst < 0.05);
  CHECK(worst > 0.0);
}

TEST_CASE("RK4 conserves the energy of u'' + u^3 = 0") {
  const OdeSystem quartic{2, [](std::span<const double> y, std::span<double> out) {
                            out[0] = y[1];
                            out[1] = -y[0] * y[0] * y[0];
                          }, {}};
  const std::vector<double> y0{0.0, 1.0};
  const auto traj = integrate(find_method("rk4"), quartic, y0, 0.0, 1e-4, 6.3, 100);
  double drift = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double u = traj(k, 0), v = traj(k, 1);
    drift = std::max(drift, std::abs(v * v + u * u * u * u / 2 - 1.0));
  }
  CHECK(drift < 1e-10);
}
