#include "coregae/degeneracy.h"

#include <algorithm>

namespace coregae {

std::vector<NodeId> CoreDecomposition::core_nodes(std::uint32_t k) const {
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < core_number.size(); ++v) {
    if (core_number[v] >= k) nodes.push_back(v);
  }
  return nodes;
}

CoreDecomposition core_numbers(const Graph& g) {
  const std::size_t n = g.num_nodes();
  CoreDecomposition result;
  result.source_n = n;
  result.source_m = g.num_edges();
  result.core_number.assign(n, 0);
  if (n == 0) return result;

  std::vector<std::uint32_t> degree(n);
  std::uint32_t max_degree = 0;
  for (NodeId v = 0; v < n; ++v) {
    degree[v] = static_cast<std::uint32_t>(g.degree(v));
    max_degree = std::max(max_degree, degree[v]);
  }

  // bin_start[d] = first slot in `order` holding a node of current degree d.
  std::vector<std::uint32_t> bin_start(max_degree + 1, 0);
  for (NodeId v = 0; v < n; ++v) ++bin_start[degree[v]];
  std::uint32_t start = 0;
  for (std::uint32_t d = 0; d <= max_degree; ++d) {
    const std::uint32_t count = bin_start[d];
    bin_start[d] = start;
    start += count;
  }
  // Filling in id order keeps ties in ascending node id.
  std::vector<NodeId> order(n);
  std::vector<std::uint32_t> position(n);
  for (NodeId v = 0; v < n; ++v) {
    position[v] = bin_start[degree[v]]++;
    order[position[v]] = v;
  }
  for (std::uint32_t d = max_degree; d > 0; --d) bin_start[d] = bin_start[d - 1];
  bin_start[0] = 0;

  constexpr std::size_t kAhead = 4;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = order[i];
    if (i + kAhead < n) {
      const NodeId ahead = order[i + kAhead];
      __builtin_prefetch(g.neighbors(ahead).data());
      __builtin_prefetch(&degree[ahead]);
    }
    if (i + 1 < n) {
      for (NodeId u : g.neighbors(order[i + 1])) __builtin_prefetch(&degree[u]);
    }
    for (NodeId u : g.neighbors(v)) {
      if (degree[u] <= degree[v]) continue;
      // Move u to the front of its bin, then shrink the bin by one.
      const std::uint32_t du = degree[u];
      const std::uint32_t pu = position[u];
      const std::uint32_t pw = bin_start[du];
      const NodeId w = order[pw];
      if (u != w) {
        order[pu] = w;
        position[w] = pu;
        order[pw] = u;
        position[u] = pw;
      }
      ++bin_start[du];
      --degree[u];
    }
  }

  result.core_number = std::move(degree);
  result.degeneracy =
      *std::max_element(result.core_number.begin(), result.core_number.end());
  return result;
}

std::pair<Graph, NodeMapping> k_core(const Graph& g,
                                     const CoreDecomposition& cores,
                                     std::uint32_t k) {
  const std::vector<NodeId> nodes = cores.core_nodes(k);
  return induced_subgraph(g, nodes);
}

std::pair<Graph, NodeMapping> k_core(const Graph& g, std::uint32_t k) {
  return k_core(g, core_numbers(g), k);
}

std::vector<CoreSizeRow> core_size_table(const Graph& g,
                                         const CoreDecomposition& cores) {
  const std::uint32_t top = cores.degeneracy;
  std::vector<std::size_t> nodes_at(top + 2, 0);
  std::vector<std::size_t> edges_at(top + 2, 0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    ++nodes_at[cores.core_number[v]];
    for (NodeId u : g.neighbors(v)) {
      if (u > v) {
        ++edges_at[std::min(cores.core_number[u], cores.core_number[v])];
      }
    }
  }
  std::vector<CoreSizeRow> table(top + 1);
  std::size_t node_total = 0;
  std::size_t edge_total = 0;
  for (std::int64_t k = top; k >= 0; --k) {
    node_total += nodes_at[k];
    edge_total += edges_at[k];
    table[k] = {static_cast<std::uint32_t>(k), node_total, edge_total};
  }
  return table;
}

std::vector<CoreSizeRow> core_size_table(const Graph& g) {
  return core_size_table(g, core_numbers(g));
}

}  // namespace coregae
