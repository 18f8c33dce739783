#pragma once

// Unlabelled rooted trees in canonical form, and the combinatorial
// statistics consumed by B-series formulas.
//
// A tree is stored as its level sequence: the depth of every vertex in
// depth-first order, with the children of each vertex sorted in descending
// lexicographic order of their own level sequences. Two trees are isomorphic
// exactly when their level sequences are equal.

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace oscerr {

struct TreeStats {
  int rho = 1;                 // number of vertices
  std::int64_t alpha = 1;      // monotone labellings, rho!/(sigma*gamma)
  std::int64_t sigma = 1;      // order of the automorphism group
  std::int64_t gamma = 1;      // density
  int d_prime = 0;             // vertices at odd distance from the root
};

class RootedTree {
 public:
  /// The single-vertex tree.
  RootedTree();

  /// Root with the given subtrees attached; the children are canonicalised.
  explicit RootedTree(std::vector<RootedTree> children);

  /// Bracket notation: "[]" is a single vertex, "[[][]]" the root with two leaves.
  static RootedTree parse(std::string_view text);

  /// Depth-first depths, e.g. {0,1,2} for the chain of three vertices.
  static RootedTree from_level_sequence(const std::vector<int>& depths);

  /// Chain of `order` vertices (the branchless "tall" tree).
  static RootedTree tall(int order);

  /// Root with `leaves` leaf children.
  static RootedTree bushy(int leaves);

  const std::vector<RootedTree>& children() const;
  int order() const;
  const TreeStats& stats() const;
  const std::vector<std::uint8_t>& level_sequence() const;
  bool is_leaf() const { return children().empty(); }

  /// Bracket notation, the inverse of parse().
  std::string to_string() const;

  friend bool operator==(const RootedTree& a, const RootedTree& b);
  /// Total order: by number of vertices, then lexicographically by level sequence.
  friend std::strong_ordering operator<=>(const RootedTree& a, const RootedTree& b);

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
};

/// Result of deleting one edge: `pendant` is the subtree that hung below it.
struct EdgeCut {
  RootedTree remainder;
  RootedTree pendant;
};

/// All trees with 1..max_order vertices, one per isomorphism class.
/// Element k of the result holds the trees of order k+1, in ascending order.
/// Requires 1 <= max_order <= 10.
std::vector<std::vector<RootedTree>> enumerate_trees(int max_order);

/// Flattened enumerate_trees().
std::vector<RootedTree> trees_up_to(int max_order);

inline const TreeStats& stats(const RootedTree& tree) { return tree.stats(); }

/// One entry per edge of the tree; empty for the single vertex.
std::vector<EdgeCut> edge_cuts(const RootedTree& tree);

}  // namespace oscerr

template <>
struct std::hash<oscerr::RootedTree> {
  std::size_t operator()(const oscerr::RootedTree& t) const noexcept;
};
