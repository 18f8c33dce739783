#pragma once

#include <string>
#include <vector>

#include "oscerr/rational.hpp"

namespace oscerr {

/// Explicit Runge–Kutta method with exact coefficients.
///
/// Invariants (checked on construction): A is strictly lower triangular and
/// every abscissa equals the corresponding row sum of A.
class ButcherTableau {
 public:
  ButcherTableau(std::string name, std::vector<std::vector<Rational>> a, std::vector<Rational> b,
                 std::vector<Rational> c);

  const std::string& name() const { return name_; }
  int stages() const { return static_cast<int>(b_.size()); }
  const Rational& a(int i, int j) const { return a_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  const std::vector<Rational>& b() const { return b_; }
  const std::vector<Rational>& c() const { return c_; }

  // binary64 copies used by the integrator
  double a_double(int i, int j) const { return ad_[static_cast<std::size_t>(i * stages() + j)]; }
  double b_double(int i) const { return bd_[static_cast<std::size_t>(i)]; }
  double c_double(int i) const { return cd_[static_cast<std::size_t>(i)]; }

 private:
  std::string name_;
  std::vector<std::vector<Rational>> a_;
  std::vector<Rational> b_;
  std::vector<Rational> c_;
  std::vector<double> ad_, bd_, cd_;
};

/// runge2, heun3, tuned3 and rk4 (the classical fourth-order method).
std::vector<ButcherTableau> builtin_methods();

/// Looks up a builtin by name; throws ArgumentError for unknown names.
ButcherTableau find_method(const std::string& name);

/// Member of the one-parameter family of explicit three-stage, third-order
/// methods whose modified equation satisfies
///   3 b([•,•,•]) - 3 b([•,[•]]) + b([[•,•]]) - 4 b([[[•]]]) = 0,
/// which removes the dominant h^3 term of the global error for y'' + t y^3 = 0.
/// The family is parametrised by the second abscissa c2; c2 = 1 gives
/// c = (0, 1, 3/2). Throws DegenerateParameterError for c2 in {0, 2/3, -1/2}.
ButcherTableau design_tuned_3stage(const Rational& c2);

}  // namespace oscerr
