#pragma once

// B-series coefficient algebra.
//
// Coefficients follow the normalisation
//   B(a, y) = a(∅) y + Σ_τ h^ρ(τ)/ρ(τ)! · α(τ) a(τ) F(τ)(y),
// under which the exact flow has a(τ) = 1 and a Runge–Kutta method has
// a(τ) = γ(τ) φ(τ), φ being the elementary weight.

#include <memory>
#include <span>
#include <vector>

#include "oscerr/rational.hpp"
#include "oscerr/tableau.hpp"
#include "oscerr/trees.hpp"

namespace oscerr {

namespace detail {
struct TreeTable;
}

/// Exact coefficients on ∅ and every tree of order <= max_order.
class CoefficientMap {
 public:
  explicit CoefficientMap(int max_order);

  int max_order() const { return max_order_; }
  const Rational& empty_value() const { return empty_; }
  void set_empty_value(Rational v) { empty_ = std::move(v); }

  /// Throws CoverageError when the tree's order exceeds max_order().
  const Rational& at(const RootedTree& tree) const;
  const Rational& operator[](const RootedTree& tree) const { return at(tree); }
  void set(const RootedTree& tree, Rational value);

  /// Trees covered, ascending by order.
  std::span<const RootedTree> trees() const;

  // Position-based access, aligned with trees().
  const Rational& value(std::size_t index) const { return values_[index]; }
  Rational& value(std::size_t index) { return values_[index]; }
  std::size_t index_of(const RootedTree& tree) const;
  const detail::TreeTable& table() const { return *table_; }

  /// Same entries restricted to a smaller order.
  CoefficientMap truncated(int max_order) const;

  friend bool operator==(const CoefficientMap& x, const CoefficientMap& y);

 private:
  int max_order_;
  std::shared_ptr<const detail::TreeTable> table_;
  Rational empty_;
  std::vector<Rational> values_;
};

/// e(∅) = 1 and e(τ) = 1: the exact flow over one step.
CoefficientMap exact_solution_coeffs(int max_order);

/// φ(τ) = Σ_i b_i Φ_i(τ) with Φ_i([τ1..τk]) = Π_m Σ_j a_ij Φ_j(τm).
Rational elementary_weight(const ButcherTableau& tableau, const RootedTree& tree);

/// a(∅) = 1, a(τ) = γ(τ) φ(τ).
CoefficientMap rk_bseries(const ButcherTableau& tableau, int max_order);

/// Coefficients of d/dt B(c, y(t)) along y' = B(b, y). Requires b(∅) = 0.
/// The result covers min(b.max_order(), c.max_order()) and has empty value 0.
CoefficientMap lie_derivative(const CoefficientMap& b, const CoefficientMap& c);

/// Coefficients b of the modified equation z' = (1/h) B(b, z):
///   b(∅) = 0, b(•) = 1, b(τ) = a(τ) - Σ_{j=2}^{ρ(τ)} (1/j!) ∂_b^{j-1} b(τ).
/// Throws InconsistentMethodError unless a(•) = 1.
CoefficientMap modified_equation_coeffs(const CoefficientMap& a, int max_order);

/// Inverse of modified_equation_coeffs: the one-step map of the modified
/// equation, a(τ) = Σ_{j=1}^{ρ(τ)} (1/j!) ∂_b^{j-1} b(τ), a(∅) = 1.
CoefficientMap flow_coeffs(const CoefficientMap& b, int max_order);

/// Largest p with a(τ) = 1 for all ρ(τ) <= p. Throws CoverageError when
/// a agrees with the exact flow on every tree it covers.
int method_order(const CoefficientMap& a);

/// a - e on trees, 0 on ∅.
CoefficientMap local_error_coeffs(const CoefficientMap& a, int max_order);

/// 3 b([•,•,•]) - 3 b([•,[•]]) + b([[•,•]]) - 4 b([[[•]]]): the combination that
/// multiplies the common order-4 elementary integral for y'' + t y^3 = 0.
Rational order4_oscillator_combination(const CoefficientMap& b);

}  // namespace oscerr
