#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "oscerr/rational.hpp"
#include "oscerr/trees.hpp"

namespace oscerr::detail {

/// Indexed enumeration of all trees up to a given order with their edge cuts
/// resolved to indices. Shared between coefficient maps of the same order.
struct TreeTable {
  struct Cut {
    std::size_t remainder;
    std::size_t pendant;
  };

  int max_order = 0;
  std::vector<RootedTree> trees;
  std::unordered_map<RootedTree, std::size_t> index;
  std::vector<Rational> gamma;
  std::vector<std::vector<Cut>> cuts;
  // Trees of order k occupy [order_begin[k], order_begin[k+1]).
  std::vector<std::size_t> order_begin;

  static std::shared_ptr<const TreeTable> get(int max_order);
};

}  // namespace oscerr::detail
