#pragma once

// Problem definitions for the oscillators y'' + t^ν y^n = 0 (Emden–Fowler)
// and y'' + g(t) y = 0, together with their large-t asymptotics.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "oscerr/integrator.hpp"
#include "oscerr/trees.hpp"

namespace oscerr {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 inverse(const Mat2& m);
Vec2 operator*(const Mat2& m, const Vec2& v);
Mat2 operator*(const Mat2& a, const Mat2& b);

/// How to treat derivatives with respect to the time component y3.
enum class TimeDerivatives {
  include,  // exact elementary differentials of the autonomous system
  neglect,  // large-t recurrences: y3-derivatives dropped
};

/// Scalar second-order equation y'' = force(y, t), autonomised as
///   y1' = y2,  y2' = force(y1, y3),  y3' = 1.
/// The force is described by its mixed partials ∂^a/∂y1^a ∂^b/∂y3^b.
class ScalarOscillator {
 public:
  using Partial = std::function<double(int a, int b, double y1, double y3)>;

  explicit ScalarOscillator(Partial partial) : partial_(std::move(partial)) {}

  double partial(int a, int b, double y1, double y3) const { return partial_(a, b, y1, y3); }

  OdeSystem system() const;

  /// F(τ)(y) for the three-dimensional autonomous field.
  Vec3 elementary_differential(const RootedTree& tree, std::span<const double> y,
                               TimeDerivatives mode = TimeDerivatives::include) const;

 private:
  Partial partial_;
};

/// Evaluates F(τ)(y) for a fixed list of trees in one pass, sharing subtrees.
class ElementaryDifferentialPlan {
 public:
  ElementaryDifferentialPlan(ScalarOscillator oscillator, std::vector<RootedTree> trees,
                             TimeDerivatives mode = TimeDerivatives::include);

  const std::vector<RootedTree>& trees() const { return requested_; }
  /// Writes 3 values per requested tree into out (size 3·trees().size()).
  void evaluate(std::span<const double> y, std::span<double> out) const;

 private:
  struct Entry {
    std::vector<std::size_t> children;
    int leaf_children = 0;
  };
  ScalarOscillator oscillator_;
  TimeDerivatives mode_;
  std::vector<RootedTree> requested_;
  std::vector<std::size_t> requested_slot_;
  std::vector<Entry> entries_;  // children before parents
  mutable std::vector<Vec3> values_;
};

// ---------------------------------------------------------------------------
// Emden–Fowler

struct EmdenFowlerProblem {
  int n = 3;
  double nu = 1.0;
  double y0 = 1.0;
  double y0p = 0.0;

  EmdenFowlerProblem() = default;
  /// Validates n odd >= 3 and ν > -(n+3)/2.
  EmdenFowlerProblem(int n, double nu, double y0 = 1.0, double y0p = 0.0);

  double gamma() const { return nu / (n + 3); }
  std::vector<double> initial_state() const { return {y0, y0p, 0.0}; }
};

ScalarOscillator ef_oscillator(const EmdenFowlerProblem& problem);

/// y1' = y2, y2' = -y3^ν y1^n, y3' = 1, with analytic Jacobian.
OdeSystem ef_system(const EmdenFowlerProblem& problem);

Vec3 elementary_differential(const EmdenFowlerProblem& problem, const RootedTree& tree,
                             std::span<const double> state,
                             TimeDerivatives mode = TimeDerivatives::include);

/// The periodic solution w_n of u'' + u^n = 0, u(0) = 0, u'(0) = 1, tabulated
/// over one period, plus the action-angle parameters (c1, c2) that place it
/// on a particular Emden–Fowler solution.
class ReferenceOscillation {
 public:
  int n() const { return table_->n; }
  double period() const { return table_->period; }
  /// Mean of w² over one period.
  double chi() const { return table_->chi; }
  double max_w() const { return table_->max_w; }
  std::size_t samples_per_period() const { return table_->w.size(); }
  /// Largest |w'^2 + 2 w^{n+1}/(n+1) - 1| over the stored samples.
  double energy_residual() const { return table_->energy_residual; }

  double c1 = 1.0;
  double c2 = 0.0;

  /// w_n(x) and w_n'(x) for any real x (periodic cubic Hermite interpolation).
  double w(double x) const;
  double wp(double x) const;
  /// Stored sample k (at x = k·period/N).
  double sample_w(std::size_t k) const { return table_->w[k]; }
  double sample_wp(std::size_t k) const { return table_->wp[k]; }

 private:
  friend ReferenceOscillation wn_build(int n, std::size_t samples_per_period);
  struct Table {
    int n = 3;
    double period = 0.0;
    double chi = 0.0;
    double max_w = 0.0;
    double energy_residual = 0.0;
    std::vector<double> w, wp;
  };
  std::shared_ptr<const Table> table_;
};

/// Integrates one period with RK4, locates 4K from the sign change of w and
/// computes χ by the periodic trapezoidal rule. Throws ResolutionError when
/// the energy drift exceeds 1e-9.
ReferenceOscillation wn_build(int n, std::size_t samples_per_period = std::size_t{1} << 14);

struct ActionAngle {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Fits (c1, c2) of the asymptotic form
///   y(t) ≈ (1+2γ)^{2/(n-1)} c1^{2/(n-1)} t^{-γ} w_n(c1 t^{1+2γ} + c2)
/// to a trajectory with components (y, y', ...). c1 comes from the energy of
/// the transformed oscillator averaged over the last three oscillations; c2
/// from the upward zero crossings in the final oscillation. c2 is reduced to
/// [0, 4K). Throws FitError if fewer than four oscillations are present.
ActionAngle fit_action_angle(const EmdenFowlerProblem& problem, const Trajectory& trajectory,
                             const ReferenceOscillation& ref);

struct XtMap {
  Vec2 value;
  Mat2 jacobian;  // ∂X_t/∂(c1, c2)
  Mat2 inverse;
};

/// The map from (c1, c2) to (y, y') at time t for the asymptotic solution.
/// Throws DomainError for t < t_min.
XtMap xt_map(const EmdenFowlerProblem& problem, const ReferenceOscillation& ref, double t,
             double t_min = 1.0);

/// θ̃ = c1 t^{1+2γ} + c2.
double ef_phase(const EmdenFowlerProblem& problem, const ReferenceOscillation& ref, double t);

/// Local amplitude of y: (1+2γ)^{2/(n-1)} c1^{2/(n-1)} t^{-γ} max|w_n|.
double ef_amplitude(const EmdenFowlerProblem& problem, const ReferenceOscillation& ref, double t);

// ---------------------------------------------------------------------------
// Linear oscillators y'' + g(t) y = 0

struct LinearOscillatorProblem {
  /// g^{(k)}(t).
  std::function<double(double t, int k)> g;
  /// θ(t) = ∫_0^t sqrt(g(s)) ds; when empty it is computed by quadrature.
  std::function<double(double t)> theta_closed_form;
  double y0 = 1.0;
  double y0p = 0.0;
  Vec2 s0{1.0, 0.0};
  double t_min = 1.0;

  double theta(double t) const;
  std::vector<double> initial_state() const { return {y0, y0p, 0.0}; }
};

/// y'' + t y = 0.
LinearOscillatorProblem airy_problem(double y0 = 1.0, double y0p = 0.0);

/// y'' + ω² y = 0.
LinearOscillatorProblem harmonic_problem(double omega, double y0 = 1.0, double y0p = 0.0);

ScalarOscillator linear_oscillator(const LinearOscillatorProblem& problem);
OdeSystem linear_system(const LinearOscillatorProblem& problem);

struct LiouvilleGreen {
  Vec2 y;   // Λ(t) R(θ(t)) s0
  Vec2 yR;  // Λ(t) R(θ(t) + π/2) s0
};

/// R(θ) = [[cos θ, sin θ], [-sin θ, cos θ]].
Mat2 rotation(double theta);

/// Λ(t) = diag(g^{-1/4}, g^{1/4}).
Mat2 lg_scaling(const LinearOscillatorProblem& problem, double t);

/// Throws DomainError if g(t) <= 0 or t < t_min.
LiouvilleGreen liouville_green(const LinearOscillatorProblem& problem, double t);

/// Least-squares s0 from trajectory samples with t >= t_from.
Vec2 fit_liouville_green(const LinearOscillatorProblem& problem, const Trajectory& trajectory,
                         double t_from);

}  // namespace oscerr
