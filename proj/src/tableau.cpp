#include "oscerr/tableau.hpp"

#include "oscerr/bseries.hpp"
#include "oscerr/errors.hpp"

namespace oscerr {

ButcherTableau::ButcherTableau(std::string name, std::vector<std::vector<Rational>> a,
                               std::vector<Rational> b, std::vector<Rational> c)
    : name_(std::move(name)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  const std::size_t s = b_.size();
  if (s == 0) throw ArgumentError("tableau needs at least one stage");
  if (c_.size() != s || a_.size() != s) throw ArgumentError("tableau dimensions disagree");
  for (std::size_t i = 0; i < s; ++i) {
    if (a_[i].size() > s) throw ArgumentError("tableau row too long");
    a_[i].resize(s, Rational(0));
    Rational row = 0;
    for (std::size_t j = 0; j < s; ++j) {
      if (j >= i && a_[i][j] != 0) throw ArgumentError("tableau " + name_ + " is not explicit");
      row += a_[i][j];
    }
    if (row != c_[i]) throw ArgumentError("tableau " + name_ + ": c does not equal the row sums of A");
  }
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) ad_.push_back(to_double(a_[i][j]));
    bd_.push_back(to_double(b_[i]));
    cd_.push_back(to_double(c_[i]));
  }
}

namespace {

Rational q(long p, long r = 1) {
  Rational x(p, r);
  x.canonicalize();
  return x;
}

}  // namespace

std::vector<ButcherTableau> builtin_methods() {
  std::vector<ButcherTableau> out;
  out.emplace_back("runge2", std::vector<std::vector<Rational>>{{}, {q(1, 2)}},
                   std::vector<Rational>{0, 1}, std::vector<Rational>{0, q(1, 2)});
  out.emplace_back("heun3", std::vector<std::vector<Rational>>{{}, {q(1, 3)}, {0, q(2, 3)}},
                   std::vector<Rational>{q(1, 4), 0, q(3, 4)},
                   std::vector<Rational>{0, q(1, 3), q(2, 3)});
  out.emplace_back("tuned3", std::vector<std::vector<Rational>>{{}, {1}, {q(9, 4), q(-3, 4)}},
                   std::vector<Rational>{q(7, 18), q(5, 6), q(-2, 9)},
                   std::vector<Rational>{0, 1, q(3, 2)});
  out.emplace_back("rk4",
                   std::vector<std::vector<Rational>>{{}, {q(1, 2)}, {0, q(1, 2)}, {0, 0, 1}},
                   std::vector<Rational>{q(1, 6), q(1, 3), q(1, 3), q(1, 6)},
                   std::vector<Rational>{0, q(1, 2), q(1, 2), 1});
  return out;
}

ButcherTableau find_method(const std::string& name) {
  for (auto& m : builtin_methods())
    if (m.name() == name) return m;
  throw ArgumentError("unknown method '" + name + "' (expected runge2, heun3, tuned3 or rk4)");
}

// Third order fixes b and a32 in terms of (c2, c3). Substituting into the
// tuning condition, with a([[[•]]]) = 0 for any three-stage explicit method,
// leaves 6 c2 (1 - c3) = -3, i.e. c3 = 1 + 1/(2 c2).
ButcherTableau design_tuned_3stage(const Rational& c2) {
  if (c2 == 0 || c2 == q(2, 3) || c2 == q(-1, 2))
    throw DegenerateParameterError("c2 = " + to_string(c2) + " does not define a tuned method");
  const Rational c3 = 1 + 1 / (2 * c2);
  if (c3 == c2) throw DegenerateParameterError("c2 = c3 for c2 = " + to_string(c2));

  const Rational b2 = (3 * c3 - 2) / (6 * c2 * (c3 - c2));
  const Rational b3 = (2 - 3 * c2) / (6 * c3 * (c3 - c2));
  const Rational b1 = 1 - b2 - b3;
  const Rational a32 = 1 / (6 * b3 * c2);
  const Rational a31 = c3 - a32;

  ButcherTableau tab("tuned3(c2=" + to_string(c2) + ")",
                     std::vector<std::vector<Rational>>{{}, {c2}, {a31, a32}},
                     std::vector<Rational>{b1, b2, b3}, std::vector<Rational>{0, c2, c3});

  auto b = modified_equation_coeffs(rk_bseries(tab, 4), 4);
  bool ok = b.at(RootedTree::tall(1)) == 1 && b.at(RootedTree::tall(2)) == 0 && b.at(RootedTree::bushy(2)) == 0 &&
            b.at(RootedTree::tall(3)) == 0 && order4_oscillator_combination(b) == 0;
  if (!ok) throw std::logic_error("tuned tableau failed its own order conditions");
  return tab;
}

}  // namespace oscerr
