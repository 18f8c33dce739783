#include <algorithm>
#include <cmath>

#include "oscerr/errors.hpp"
#include "oscerr/oscillators.hpp"

namespace oscerr {

namespace {

struct State {
  double u, v;
};

// Classical RK4 step for u'' = -u^n.
State rk4(State s, double h, int n) {
  auto f = [n](State x) { return State{x.v, -std::pow(x.u, n)}; };
  const State k1 = f(s);
  const State k2 = f({s.u + 0.5 * h * k1.u, s.v + 0.5 * h * k1.v});
  const State k3 = f({s.u + 0.5 * h * k2.u, s.v + 0.5 * h * k2.v});
  const State k4 = f({s.u + h * k3.u, s.v + h * k3.v});
  return {s.u + h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
          s.v + h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

double hermite(double x, double f0, double d0, double f1, double d1) {
  const double x2 = x * x, x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * d0 + (-2 * x3 + 3 * x2) * f1 + (x3 - x2) * d1;
}

}  // namespace

double ReferenceOscillation::w(double x) const {
  const auto& tb = *table_;
  const std::size_t N = tb.w.size();
  const double dx = tb.period / static_cast<double>(N);
  double r = std::fmod(x, tb.period);
  if (r < 0) r += tb.period;
  auto k = static_cast<std::size_t>(r / dx);
  if (k >= N) k = N - 1;
  const double frac = (r - static_cast<double>(k) * dx) / dx;
  const std::size_t k1 = (k + 1) % N;
  return hermite(frac, tb.w[k], tb.wp[k] * dx, tb.w[k1], tb.wp[k1] * dx);
}

double ReferenceOscillation::wp(double x) const {
  const auto& tb = *table_;
  const std::size_t N = tb.w.size();
  const double dx = tb.period / static_cast<double>(N);
  double r = std::fmod(x, tb.period);
  if (r < 0) r += tb.period;
  auto k = static_cast<std::size_t>(r / dx);
  if (k >= N) k = N - 1;
  const double frac = (r - static_cast<double>(k) * dx) / dx;
  const std::size_t k1 = (k + 1) % N;
  const double a0 = -std::pow(tb.w[k], tb.n), a1 = -std::pow(tb.w[k1], tb.n);
  return hermite(frac, tb.wp[k], a0 * dx, tb.wp[k1], a1 * dx);
}

ReferenceOscillation wn_build(int n, std::size_t samples_per_period) {
  if (n < 3 || n % 2 == 0) throw ArgumentError("w_n requires an odd n >= 3");
  if (samples_per_period < 16) throw ArgumentError("too few samples per period");

  // Locate the half period 2K: the first downward zero of w.
  const double h0 = 1e-4;
  State s{0.0, 1.0};
  double t = 0.0;
  for (;;) {
    State next = rk4(s, h0, n);
    if (s.u > 0.0 && next.u <= 0.0) break;
    s = next;
    t += h0;
    if (t > 1e3) throw ResolutionError("w_n did not return to zero");
  }
  double delta = 0.0;
  for (int it = 0; it < 30; ++it) {
    const State x = rk4(s, delta, n);
    const double step = x.u / x.v;
    delta -= step;
    if (std::abs(step) < 1e-17) break;
  }
  const double period = 2.0 * (t + delta);

  const std::size_t N = samples_per_period;
  const int sub = std::max(1, static_cast<int>(std::ceil(period / static_cast<double>(N) / 2e-4)));
  const double h = period / static_cast<double>(N) / sub;

  auto table = std::make_shared<ReferenceOscillation::Table>();
  table->n = n;
  table->period = period;
  table->w.resize(N);
  table->wp.resize(N);
  State cur{0.0, 1.0};
  double residual = 0.0, chi = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    table->w[k] = cur.u;
    table->wp[k] = cur.v;
    residual = std::max(residual, std::abs(cur.v * cur.v + 2 * std::pow(cur.u, n + 1) / (n + 1) - 1.0));
    chi += cur.u * cur.u;
    for (int j = 0; j < sub; ++j) cur = rk4(cur, h, n);
  }
  // Closing the loop checks the period itself.
  residual = std::max(residual, std::abs(cur.u) + std::abs(cur.v - 1.0));
  if (residual > 1e-9)
    throw ResolutionError("w_n table energy drift " + std::to_string(residual) + " exceeds 1e-9");
  table->energy_residual = residual;
  table->chi = chi / static_cast<double>(N);
  table->max_w = std::pow((n + 1) / 2.0, 1.0 / (n + 1));

  ReferenceOscillation ref;
  ref.table_ = std::move(table);
  return ref;
}

}  // namespace oscerr
