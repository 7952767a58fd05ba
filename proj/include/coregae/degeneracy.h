#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "coregae/graph.h"

namespace coregae {

struct CoreDecomposition {
  std::vector<std::uint32_t> core_number;  // c(v) per node
  std::uint32_t degeneracy = 0;            // max core number (0 if no edges)
  std::size_t source_n = 0;
  std::size_t source_m = 0;

  // Nodes with c(v) >= k, ascending.
  std::vector<NodeId> core_nodes(std::uint32_t k) const;
};

// Batagelj-Zaversnik peeling with bin-sorted degrees: O(n + m) time and
// space. Edge weights are ignored; isolated nodes get core number 0.
CoreDecomposition core_numbers(const Graph& g);

// Induced subgraph on {v : c(v) >= k}; empty when k exceeds the degeneracy.
std::pair<Graph, NodeMapping> k_core(const Graph& g, std::uint32_t k);
std::pair<Graph, NodeMapping> k_core(const Graph& g,
                                     const CoreDecomposition& cores,
                                     std::uint32_t k);

struct CoreSizeRow {
  std::uint32_t k = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;

  friend bool operator==(const CoreSizeRow&, const CoreSizeRow&) = default;
};

// One row per k in [0, degeneracy].
std::vector<CoreSizeRow> core_size_table(const Graph& g);
std::vector<CoreSizeRow> core_size_table(const Graph& g,
                                         const CoreDecomposition& cores);

}  // namespace coregae
