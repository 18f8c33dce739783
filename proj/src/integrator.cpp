#include "oscerr/integrator.hpp"

#include <cmath>
#include <limits>

#include "oscerr/errors.hpp"

namespace oscerr {

std::vector<double> Trajectory::component(std::size_t i) const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)(k, i);
  return out;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
  return out;
}

RungeKuttaStepper::RungeKuttaStepper(ButcherTableau tableau, const OdeSystem& ode)
    : tableau_(std::move(tableau)), ode_(&ode) {
  stages_.resize(static_cast<std::size_t>(tableau_.stages()) * ode.dimension);
  work_.resize(ode.dimension);
}

void RungeKuttaStepper::step(std::span<double> y, double h, long long step_index) {
  const std::size_t d = ode_->dimension;
  const int s = tableau_.stages();
  for (int i = 0; i < s; ++i) {
    for (std::size_t m = 0; m < d; ++m) work_[m] = y[m];
    for (int j = 0; j < i; ++j) {
      const double aij = tableau_.a_double(i, j);
      if (aij == 0.0) continue;
      const double* kj = stages_.data() + static_cast<std::size_t>(j) * d;
      for (std::size_t m = 0; m < d; ++m) work_[m] += h * aij * kj[m];
    }
    std::span<double> ki(stages_.data() + static_cast<std::size_t>(i) * d, d);
    ode_->rhs(work_, ki);
  }
  for (int i = 0; i < s; ++i) {
    const double bi = tableau_.b_double(i);
    if (bi == 0.0) continue;
    const double* ki = stages_.data() + static_cast<std::size_t>(i) * d;
    for (std::size_t m = 0; m < d; ++m) y[m] += h * bi * ki[m];
  }
  for (std::size_t m = 0; m < d; ++m)
    if (!std::isfinite(y[m])) throw DivergenceError(step_index, std::numeric_limits<double>::quiet_NaN());
}

std::vector<double> step(const ButcherTableau& tableau, const OdeSystem& ode,
                         std::span<const double> y, double h) {
  if (!(h >= 0.0)) throw ArgumentError("step size must be non-negative");
  RungeKuttaStepper stepper(tableau, ode);
  std::vector<double> out(y.begin(), y.end());
  stepper.step(out, h);
  return out;
}

long long step_count(double t0, double h, double t_end) {
  if (!(h > 0.0)) throw ArgumentError("step size must be positive");
  const double n = (t_end - t0) / h;
  if (!std::isfinite(n) || n > 1e15) throw ArgumentError("too many integration steps");
  if (n <= 0.0) return 0;
  const double r = std::round(n);
  if (std::abs(n - r) <= 1e-9 * std::max(1.0, r)) return static_cast<long long>(r);
  return static_cast<long long>(std::floor(n));
}

Trajectory integrate(const ButcherTableau& tableau, const OdeSystem& ode,
                     std::span<const double> y0, double t0, double h, double t_end,
                     std::size_t stride) {
  if (y0.size() != ode.dimension) throw ArgumentError("initial state has wrong dimension");
  if (stride == 0) throw ArgumentError("stride must be positive");
  const long long n = step_count(t0, h, t_end);
  Trajectory traj(t0, h, stride, ode.dimension);
  std::vector<double> y(y0.begin(), y0.end());
  traj.push_back(y);
  RungeKuttaStepper stepper(tableau, ode);
  const auto st = static_cast<long long>(stride);
  for (long long k = 1; k <= n; ++k) {
    try {
      stepper.step(y, h, k);
    } catch (const DivergenceError&) {
      throw DivergenceError(k, t0 + static_cast<double>(k) * h);
    }
    if (k % st == 0) traj.push_back(y);
  }
  return traj;
}

}  // namespace oscerr
