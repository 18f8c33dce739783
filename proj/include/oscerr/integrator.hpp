#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "oscerr/tableau.hpp"

namespace oscerr {

/// Autonomous system y' = f(y). Time-dependent problems carry t as a state
/// component with derivative one.
struct OdeSystem {
  using Map = std::function<void(std::span<const double> y, std::span<double> out)>;

  std::size_t dimension = 0;
  Map rhs;
  /// Row-major d×d Jacobian of rhs; may be empty when not needed.
  Map jacobian;
};

/// Uniformly spaced samples y(t0 + k·h·stride), k = 0, 1, ...
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double t0, double h, std::size_t stride, std::size_t dimension)
      : t0_(t0), h_(h), stride_(stride), dimension_(dimension) {}

  double t0() const { return t0_; }
  double h() const { return h_; }
  std::size_t stride() const { return stride_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return dimension_ == 0 ? 0 : data_.size() / dimension_; }
  bool empty() const { return size() == 0; }

  double time(std::size_t k) const { return t0_ + static_cast<double>(k * stride_) * h_; }
  double sample_spacing() const { return h_ * static_cast<double>(stride_); }
  std::span<const double> state(std::size_t k) const {
    return {data_.data() + k * dimension_, dimension_};
  }
  double operator()(std::size_t k, std::size_t component) const {
    return data_[k * dimension_ + component];
  }
  void push_back(std::span<const double> y) { data_.insert(data_.end(), y.begin(), y.end()); }

  /// One component as a series.
  std::vector<double> component(std::size_t i) const;
  std::vector<double> times() const;

 private:
  double t0_ = 0.0;
  double h_ = 0.0;
  std::size_t stride_ = 1;
  std::size_t dimension_ = 0;
  std::vector<double> data_;
};

/// Reusable explicit Runge–Kutta stepper with preallocated stage storage.
class RungeKuttaStepper {
 public:
  RungeKuttaStepper(ButcherTableau tableau, const OdeSystem& ode);

  /// Advances y in place by one step of size h. Throws DivergenceError
  /// (with step index `step`) if any stage produces a non-finite value.
  void step(std::span<double> y, double h, long long step = 0);

  const ButcherTableau& tableau() const { return tableau_; }

 private:
  ButcherTableau tableau_;
  const OdeSystem* ode_;
  std::vector<double> stages_;  // s × d
  std::vector<double> work_;
};

std::vector<double> step(const ButcherTableau& tableau, const OdeSystem& ode,
                         std::span<const double> y, double h);

/// Number of steps of size h in [t0, t_end], rounding values within 1e-9 of an
/// integer to that integer.
long long step_count(double t0, double h, double t_end);

/// Fixed-step integration, recording every `stride`-th state (including y0).
Trajectory integrate(const ButcherTableau& tableau, const OdeSystem& ode,
                     std::span<const double> y0, double t0, double h, double t_end,
                     std::size_t stride = 1);

}  // namespace oscerr
