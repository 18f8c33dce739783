#include "oscerr/trees.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "oscerr/errors.hpp"

namespace oscerr {

struct RootedTree::Node {
  std::vector<RootedTree> children;
  std::vector<std::uint8_t> levels;
  TreeStats stats;
};

namespace {

std::int64_t int_factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

RootedTree::RootedTree() : RootedTree(std::vector<RootedTree>{}) {}

RootedTree::RootedTree(std::vector<RootedTree> children) {
  std::sort(children.begin(), children.end(), [](const RootedTree& a, const RootedTree& b) {
    return a.level_sequence() > b.level_sequence();
  });

  auto node = std::make_shared<Node>();
  node->levels.push_back(0);
  TreeStats& s = node->stats;
  s.rho = 1;
  s.gamma = 1;
  s.sigma = 1;
  int odd = 0;
  for (std::size_t i = 0; i < children.size(); ++i) {
    const auto& child = children[i];
    for (auto d : child.level_sequence()) node->levels.push_back(static_cast<std::uint8_t>(d + 1));
    const TreeStats& cs = child.stats();
    s.rho += cs.rho;
    s.gamma *= cs.gamma;
    s.sigma *= cs.sigma;
    // Vertices at even depth inside the child sit at odd depth here.
    odd += cs.rho - cs.d_prime;
  }
  // Identical children are adjacent after sorting; each run of m copies
  // contributes m! automorphisms.
  for (std::size_t i = 0; i < children.size();) {
    std::size_t j = i;
    while (j < children.size() && children[j] == children[i]) ++j;
    s.sigma *= int_factorial(static_cast<int>(j - i));
    i = j;
  }
  s.gamma *= s.rho;
  s.d_prime = odd;
  s.alpha = int_factorial(s.rho) / (s.sigma * s.gamma);
  node->children = std::move(children);
  node_ = std::move(node);
}

RootedTree RootedTree::parse(std::string_view text) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  std::function<RootedTree(int)> parse_node = [&](int depth) -> RootedTree {
    if (depth > 64) throw ArgumentError("tree nesting too deep");
    skip();
    if (pos >= text.size() || text[pos] != '[')
      throw ArgumentError("expected '[' at position " + std::to_string(pos) + " in tree '" +
                          std::string(text) + "'");
    ++pos;
    std::vector<RootedTree> kids;
    for (;;) {
      skip();
      if (pos >= text.size()) throw ArgumentError("unterminated tree '" + std::string(text) + "'");
      if (text[pos] == ']') {
        ++pos;
        break;
      }
      kids.push_back(parse_node(depth + 1));
    }
    return RootedTree(std::move(kids));
  };
  RootedTree t = parse_node(0);
  skip();
  if (pos != text.size()) throw ArgumentError("trailing characters in tree '" + std::string(text) + "'");
  return t;
}

RootedTree RootedTree::from_level_sequence(const std::vector<int>& depths) {
  if (depths.empty() || depths[0] != 0) throw ArgumentError("level sequence must start with 0");
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] < 1 || depths[i] > depths[i - 1] + 1)
      throw ArgumentError("invalid level sequence");
  std::function<RootedTree(std::size_t, std::size_t)> build = [&](std::size_t begin,
                                                                   std::size_t end) {
    std::vector<RootedTree> kids;
    int child_depth = depths[begin] + 1;
    std::size_t i = begin + 1;
    while (i < end) {
      std::size_t j = i + 1;
      while (j < end && depths[j] > child_depth) ++j;
      kids.push_back(build(i, j));
      i = j;
    }
    return RootedTree(std::move(kids));
  };
  return build(0, depths.size());
}

RootedTree RootedTree::tall(int order) {
  if (order < 1) throw ArgumentError("tree order must be positive");
  RootedTree t;
  for (int k = 1; k < order; ++k) t = RootedTree(std::vector<RootedTree>{t});
  return t;
}

RootedTree RootedTree::bushy(int leaves) {
  if (leaves < 0) throw ArgumentError("negative leaf count");
  return RootedTree(std::vector<RootedTree>(static_cast<std::size_t>(leaves), RootedTree()));
}

const std::vector<RootedTree>& RootedTree::children() const { return node_->children; }
int RootedTree::order() const { return node_->stats.rho; }
const TreeStats& RootedTree::stats() const { return node_->stats; }
const std::vector<std::uint8_t>& RootedTree::level_sequence() const { return node_->levels; }

std::string RootedTree::to_string() const {
  std::string out = "[";
  for (const auto& c : children()) out += c.to_string();
  out += "]";
  return out;
}

bool operator==(const RootedTree& a, const RootedTree& b) {
  return a.node_ == b.node_ || a.node_->levels == b.node_->levels;
}

std::strong_ordering operator<=>(const RootedTree& a, const RootedTree& b) {
  if (auto c = a.order() <=> b.order(); c != 0) return c;
  const auto& x = a.level_sequence();
  const auto& y = b.level_sequence();
  return std::lexicographical_compare_three_way(x.begin(), x.end(), y.begin(), y.end());
}

namespace {

// Every tree obtained by attaching one new leaf to some vertex of t.
void grow(const RootedTree& t, std::vector<RootedTree>& out) {
  auto kids = t.children();
  kids.emplace_back();
  out.emplace_back(std::move(kids));
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    if (i > 0 && t.children()[i] == t.children()[i - 1]) continue;
    std::vector<RootedTree> grown;
    grow(t.children()[i], grown);
    for (auto& g : grown) {
      auto replaced = t.children();
      replaced[i] = std::move(g);
      out.emplace_back(std::move(replaced));
    }
  }
}

}  // namespace

std::vector<std::vector<RootedTree>> enumerate_trees(int max_order) {
  if (max_order < 1 || max_order > 10)
    throw ArgumentError("max_order must lie in [1, 10], got " + std::to_string(max_order));
  std::vector<std::vector<RootedTree>> by_order;
  by_order.push_back({RootedTree()});
  for (int k = 2; k <= max_order; ++k) {
    std::set<RootedTree> next;
    for (const auto& t : by_order.back()) {
      std::vector<RootedTree> grown;
      grow(t, grown);
      next.insert(grown.begin(), grown.end());
    }
    by_order.emplace_back(next.begin(), next.end());
  }
  return by_order;
}

std::vector<RootedTree> trees_up_to(int max_order) {
  std::vector<RootedTree> out;
  for (auto& level : enumerate_trees(max_order)) out.insert(out.end(), level.begin(), level.end());
  return out;
}

std::vector<EdgeCut> edge_cuts(const RootedTree& tree) {
  std::vector<EdgeCut> cuts;
  const auto& kids = tree.children();
  for (std::size_t i = 0; i < kids.size(); ++i) {
    auto others = kids;
    others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
    cuts.push_back({RootedTree(others), kids[i]});
    for (auto& inner : edge_cuts(kids[i])) {
      auto replaced = kids;
      replaced[i] = inner.remainder;
      cuts.push_back({RootedTree(std::move(replaced)), inner.pendant});
    }
  }
  return cuts;
}

}  // namespace oscerr

std::size_t std::hash<oscerr::RootedTree>::operator()(const oscerr::RootedTree& t) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (auto d : t.level_sequence()) {
    h ^= d;
    h *= 1099511628211ull;
  }
  return h;
}
