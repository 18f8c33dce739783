#pragma once

// Global-error estimates: elementary integrals, the truncated error series,
// closed-form large-t estimates and the measured-vs-estimated machinery.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscerr/bseries.hpp"
#include "oscerr/integrator.hpp"
#include "oscerr/oscillators.hpp"

namespace oscerr {

/// Samples of I_τ(t) = ∫_{t0}^t DΦ_s^t F(τ)(y(s)) ds on a uniform grid.
struct ElementaryIntegralSample {
  RootedTree tree;
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<double> values;  // dimension entries per time

  std::span<const double> at(std::size_t k) const { return {values.data() + k * dimension, dimension}; }
  std::vector<double> component(std::size_t i) const;
};

struct ElementaryIntegralRun {
  Trajectory solution;
  std::vector<ElementaryIntegralSample> integrals;

  /// nullptr when the tree was not integrated.
  const ElementaryIntegralSample* find(const RootedTree& tree) const;
};

/// Batched F(τ)(y): writes dimension values per tree, trees in a fixed order.
using DifferentialEvaluator = std::function<void(std::span<const double> y, std::span<double> out)>;

/// Integrates y' = f(y) together with I_τ' = J(y) I_τ + F(τ)(y), I_τ(t0) = 0,
/// using classical RK4 with step h_fine, recording every `stride` steps.
ElementaryIntegralRun elementary_integrals(const OdeSystem& ode, const std::vector<RootedTree>& trees,
                                           const DifferentialEvaluator& differentials,
                                           std::span<const double> y0, double t0, double t_end,
                                           double h_fine, std::size_t stride);

/// Convenience overload for scalar oscillators (exact elementary differentials).
ElementaryIntegralRun elementary_integrals(const ScalarOscillator& oscillator,
                                           const std::vector<RootedTree>& trees,
                                           std::span<const double> y0, double t0, double t_end,
                                           double h_fine, std::size_t stride);

/// Single-tree form.
ElementaryIntegralSample elementary_integral_numeric(const OdeSystem& ode, const RootedTree& tree,
                                                     const DifferentialEvaluator& differential,
                                                     std::span<const double> y0, double t0,
                                                     double t_end, double h_fine,
                                                     std::size_t stride = 1);

/// Contribution of each power of h to Σ_{τ, 2<=ρ<=max_tree_order} h^{ρ-1} b(τ) α(τ)/ρ(τ)! I_τ
/// at sample k. Entry j holds the h^{j+1} part.
std::vector<std::vector<double>> error_series_terms(const CoefficientMap& b,
                                                    const ElementaryIntegralRun& run, double h,
                                                    std::size_t sample, int max_tree_order);

/// The full truncated series. Throws CoverageError if a tree with non-zero
/// b(τ) is missing from run or max_tree_order exceeds b's coverage.
std::vector<double> error_series(const CoefficientMap& b, const ElementaryIntegralRun& run, double h,
                                 std::size_t sample, int max_tree_order);

// ---------------------------------------------------------------------------
// Closed-form estimates for y'' + t y^3 = 0

/// Shape of the periodic factor multiplying a term, evaluated at θ̃ = c1 t^{4/3} + c2.
/// Terms are stated in the normalisation of the Jacobi function sd(·|½):
/// sd(x) = 2^{1/4} w3(2^{-1/4} x), so c1 and χ enter as 2^{1/4} c1 and √2 χ.
enum class PhaseShape { sd_prime, sd_cubed, generic };

struct EstimateTerm {
  int h_power = 0;
  Rational coefficient;  // multiplies sqrt(2)
  int c1_power = 0;
  bool uses_chi = false;
  Rational t_exponent;
  PhaseShape shape = PhaseShape::sd_prime;
};

struct ErrorEstimate {
  std::string method;
  std::array<std::vector<EstimateTerm>, 2> components;

  int leading_h_power() const;
  /// Signed estimate; terms with h_power > max_h_power are dropped.
  Vec2 evaluate(const ReferenceOscillation& ref, double h, double t, int max_h_power = 1 << 20) const;
  /// Amplitude of the oscillation, i.e. |Σ coefficients| times max |shape|.
  Vec2 envelope(const ReferenceOscillation& ref, double h, double t, int max_h_power = 1 << 20) const;
};

/// Built-in estimates for runge2, heun3 and tuned3 (n = 3, ν = 1).
ErrorEstimate ef_error_estimate(const std::string& method_id);

Vec2 closed_form_estimate_ef(const std::string& method_id, const ReferenceOscillation& ref, double h,
                             double t);

/// Growth exponents of the h^k term for y'' + t^ν y^n = 0 with γ = ν/(n+3):
/// k = 2r: (4γr+γ+1, 4γr+3γ+1); k = 2r+1: (4γr+5γ+2, 4γr+7γ+2).
Vec2 ef_growth_exponents(double gamma, int h_power);

// ---------------------------------------------------------------------------
// Linear oscillators

/// [Σ_{p<=2r<2p} (-1)^r b(τ_{2r+1})/(2r+1)! h^{2r} ∫ g^{r+1/2}] yR(t)
///   + [Σ_{p<=2r+1<2p} (-1)^{r+1} b(τ_{2r+2})/(2r+2)! h^{2r+1} ∫ g^{r+1}] y(t),
/// τ_k the tall tree of order k, integrals over [0, t].
Vec2 linosc_estimate(const LinearOscillatorProblem& problem, const CoefficientMap& b, int p, double h,
                     double t);

/// Scalar amplitudes (A, B) with E ≈ A yR + B y.
Vec2 linosc_amplitudes(const LinearOscillatorProblem& problem, const CoefficientMap& b, int p,
                       double h, double t);

/// One summand weight·∫_0^t g^{g_power}, multiplying yR (rotated) or y.
struct LinoscTerm {
  int h_power = 0;
  bool rotated = true;
  double weight = 0.0;  // includes the sign and h^{h_power}
  double g_power = 0.0;
};

/// The non-zero summands of linosc_amplitudes, for callers that accumulate
/// the integrals themselves.
std::vector<LinoscTerm> linosc_terms(const CoefficientMap& b, int p, double h);

// ---------------------------------------------------------------------------
// Measurement

struct ReferenceSpec {
  std::string method = "rk4";
  double h = 1e-4;
};

struct ErrorRun {
  Trajectory errors;                  // method - reference at shared sample times
  std::optional<double> failure_time;  // set when either run diverged
  std::string failure;
};

/// Runs `method` with step h and the reference with step h/m, where m is the
/// smallest integer with m >= 10 and h/m <= reference.h, and records their
/// difference every `stride` method steps.
ErrorRun measure_global_error(const ButcherTableau& method, const OdeSystem& ode,
                              std::span<const double> y0, double t0, double h, double t_end,
                              std::size_t stride, const ReferenceSpec& reference = {});

struct ParameterError {
  double t = 0.0;
  Vec2 value{};  // (action error, phase error)
  bool valid = false;
};

/// DX_t^{-1} E(t) for every sample with t >= t_min.
std::vector<ParameterError> parameter_space_error(const Trajectory& errors,
                                                  const ReferenceOscillation& ref,
                                                  const EmdenFowlerProblem& problem,
                                                  double t_min = 1.0);

struct Peak {
  double t = 0.0;
  double value = 0.0;
};

/// Largest |v| in each complete half-oscillation (between successive sign
/// changes) lying inside [t_from, t_to].
std::vector<Peak> oscillation_peaks(std::span<const double> times, std::span<const double> values,
                                    double t_from, double t_to);

struct EnvelopeFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  std::size_t peaks = 0;
};

/// Least-squares line through (log t, log |peak|). Throws FitError with fewer than 10 peaks.
EnvelopeFit envelope_fit(std::span<const double> times, std::span<const double> values,
                         double t_from, double t_to);

/// Least-squares power law through positive samples (t, v).
EnvelopeFit power_law_fit(std::span<const double> times, std::span<const double> values);

}  // namespace oscerr
