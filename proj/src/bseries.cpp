#include "oscerr/bseries.hpp"

#include <map>
#include <mutex>

#include "oscerr/errors.hpp"
#include "tree_table.hpp"

namespace oscerr {

namespace detail {

std::shared_ptr<const TreeTable> TreeTable::get(int max_order) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const TreeTable>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(max_order); it != cache.end()) return it->second;

  auto table = std::make_shared<TreeTable>();
  table->max_order = max_order;
  table->order_begin.assign(2, 0);
  for (auto& level : enumerate_trees(max_order)) {
    table->trees.insert(table->trees.end(), level.begin(), level.end());
    table->order_begin.push_back(table->trees.size());
  }
  for (std::size_t i = 0; i < table->trees.size(); ++i) {
    table->index.emplace(table->trees[i], i);
    table->gamma.emplace_back(static_cast<long>(table->trees[i].stats().gamma));
  }
  table->cuts.resize(table->trees.size());
  for (std::size_t i = 0; i < table->trees.size(); ++i)
    for (auto& cut : edge_cuts(table->trees[i]))
      table->cuts[i].push_back({table->index.at(cut.remainder), table->index.at(cut.pendant)});
  cache.emplace(max_order, table);
  return table;
}

}  // namespace detail

CoefficientMap::CoefficientMap(int max_order)
    : max_order_(max_order), table_(detail::TreeTable::get(max_order)), empty_(0) {
  values_.resize(table_->trees.size());
}

std::span<const RootedTree> CoefficientMap::trees() const { return table_->trees; }

std::size_t CoefficientMap::index_of(const RootedTree& tree) const {
  if (tree.order() > max_order_)
    throw CoverageError("tree " + tree.to_string() + " of order " + std::to_string(tree.order()) +
                        " exceeds coefficient coverage " + std::to_string(max_order_));
  return table_->index.at(tree);
}

const Rational& CoefficientMap::at(const RootedTree& tree) const { return values_[index_of(tree)]; }

void CoefficientMap::set(const RootedTree& tree, Rational value) {
  values_[index_of(tree)] = std::move(value);
}

CoefficientMap CoefficientMap::truncated(int max_order) const {
  if (max_order > max_order_) throw CoverageError("cannot extend coefficient coverage by truncation");
  CoefficientMap out(max_order);
  out.empty_ = empty_;
  for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] = values_[i];
  return out;
}

bool operator==(const CoefficientMap& x, const CoefficientMap& y) {
  return x.max_order_ == y.max_order_ && x.empty_ == y.empty_ && x.values_ == y.values_;
}

CoefficientMap exact_solution_coeffs(int max_order) {
  if (max_order < 1) throw ArgumentError("max_order must be at least 1");
  CoefficientMap e(max_order);
  e.set_empty_value(1);
  for (std::size_t i = 0; i < e.trees().size(); ++i) e.value(i) = 1;
  return e;
}

namespace {

// Φ_i(τ) for every stage i.
std::vector<Rational> stage_weights(const ButcherTableau& tab, const RootedTree& tree) {
  const int s = tab.stages();
  std::vector<Rational> phi(static_cast<std::size_t>(s), Rational(1));
  for (const auto& child : tree.children()) {
    auto inner = stage_weights(tab, child);
    for (int i = 0; i < s; ++i) {
      Rational sum = 0;
      for (int j = 0; j < i; ++j) sum += tab.a(i, j) * inner[static_cast<std::size_t>(j)];
      phi[static_cast<std::size_t>(i)] *= sum;
    }
  }
  return phi;
}

}  // namespace

Rational elementary_weight(const ButcherTableau& tableau, const RootedTree& tree) {
  auto phi = stage_weights(tableau, tree);
  Rational sum = 0;
  for (int i = 0; i < tableau.stages(); ++i) sum += tableau.b()[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
  return sum;
}

CoefficientMap rk_bseries(const ButcherTableau& tableau, int max_order) {
  CoefficientMap a(max_order);
  a.set_empty_value(1);
  for (std::size_t i = 0; i < a.trees().size(); ++i)
    a.value(i) = a.table().gamma[i] * elementary_weight(tableau, a.trees()[i]);
  return a;
}

// The edge-cut form of the Lie derivative holds for the coefficients divided
// by the density, ĉ(τ) = c(τ)/γ(τ) (the 1/σ normalisation of B-series):
//   (∂_b c)^(τ) = c(∅) b̂(τ) + Σ_{cuts of τ} ĉ(remainder) b̂(pendant).
CoefficientMap lie_derivative(const CoefficientMap& b, const CoefficientMap& c) {
  if (b.empty_value() != 0) throw ArgumentError("lie_derivative requires b(∅) = 0");
  const int order = std::min(b.max_order(), c.max_order());
  CoefficientMap out(order);
  const auto& table = out.table();
  // Tables of lower order are prefixes of larger ones, so indices agree.
  for (std::size_t i = 0; i < table.trees.size(); ++i) {
    Rational acc = c.empty_value() * b.value(i) / table.gamma[i];
    for (const auto& cut : table.cuts[i])
      acc += (c.value(cut.remainder) / table.gamma[cut.remainder]) *
             (b.value(cut.pendant) / table.gamma[cut.pendant]);
    out.value(i) = acc * table.gamma[i];
  }
  return out;
}

namespace {

void require_consistent(const CoefficientMap& a) {
  if (a.at(RootedTree()) != 1)
    throw InconsistentMethodError("method is not consistent: a(•) = " + to_string(a.at(RootedTree())));
}

}  // namespace

CoefficientMap modified_equation_coeffs(const CoefficientMap& a, int max_order) {
  if (max_order < 1) throw ArgumentError("max_order must be at least 1");
  if (max_order > a.max_order()) throw CoverageError("a does not cover the requested order");
  require_consistent(a);

  CoefficientMap b(max_order);
  const auto& table = b.table();
  const std::size_t n = table.trees.size();
  // powers[k][τ] holds (∂_b^k b)^(τ) (density-normalised). ∂_b raises the
  // lowest order present by one, so on order m only k <= m-1 is non-zero,
  // and every term on order m only uses values on lower orders.
  std::vector<std::vector<Rational>> powers(static_cast<std::size_t>(max_order),
                                            std::vector<Rational>(n));
  std::vector<Rational> inv_fact(static_cast<std::size_t>(max_order) + 1);
  for (int j = 0; j <= max_order; ++j) inv_fact[static_cast<std::size_t>(j)] = 1 / factorial(j);

  for (int m = 1; m <= max_order; ++m) {
    for (std::size_t i = table.order_begin[static_cast<std::size_t>(m)];
         i < table.order_begin[static_cast<std::size_t>(m) + 1]; ++i) {
      for (int k = 1; k < m; ++k) {
        Rational acc = 0;
        for (const auto& cut : table.cuts[i])
          acc += powers[static_cast<std::size_t>(k - 1)][cut.remainder] * powers[0][cut.pendant];
        powers[static_cast<std::size_t>(k)][i] = acc;
      }
      Rational bhat = a.value(i) / table.gamma[i];
      for (int j = 2; j <= m; ++j)
        bhat -= inv_fact[static_cast<std::size_t>(j)] * powers[static_cast<std::size_t>(j - 1)][i];
      if (m == 1) bhat = 1;
      powers[0][i] = bhat;
      b.value(i) = bhat * table.gamma[i];
    }
  }
  return b;
}

CoefficientMap flow_coeffs(const CoefficientMap& b, int max_order) {
  if (max_order > b.max_order()) throw CoverageError("b does not cover the requested order");
  if (b.empty_value() != 0) throw ArgumentError("flow_coeffs requires b(∅) = 0");
  CoefficientMap bb = b.truncated(max_order);
  CoefficientMap a(max_order);
  a.set_empty_value(1);
  CoefficientMap term = bb;
  for (int j = 1; j <= max_order; ++j) {
    Rational w = 1 / factorial(j);
    for (std::size_t i = 0; i < a.trees().size(); ++i) a.value(i) += w * term.value(i);
    if (j < max_order) term = lie_derivative(bb, term);
  }
  return a;
}

int method_order(const CoefficientMap& a) {
  const auto& table = a.table();
  for (int m = 1; m <= a.max_order(); ++m)
    for (std::size_t i = table.order_begin[static_cast<std::size_t>(m)];
         i < table.order_begin[static_cast<std::size_t>(m) + 1]; ++i)
      if (a.value(i) != 1) return m - 1;
  throw CoverageError("coefficients agree with the exact flow up to order " +
                      std::to_string(a.max_order()) + "; order cannot be determined");
}

CoefficientMap local_error_coeffs(const CoefficientMap& a, int max_order) {
  if (max_order > a.max_order()) throw CoverageError("a does not cover the requested order");
  CoefficientMap d(max_order);
  d.set_empty_value(0);
  for (std::size_t i = 0; i < d.trees().size(); ++i) d.value(i) = a.value(i) - 1;
  return d;
}

Rational order4_oscillator_combination(const CoefficientMap& b) {
  const RootedTree bushy4 = RootedTree::bushy(3);
  const RootedTree mixed4 = RootedTree::parse("[[][[]]]");
  const RootedTree stem4 = RootedTree::parse("[[[][]]]");
  const RootedTree tall4 = RootedTree::tall(4);
  return 3 * b.at(bushy4) - 3 * b.at(mixed4) + b.at(stem4) - 4 * b.at(tall4);
}

}  // namespace oscerr
