#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coregae/dense.h"
#include "coregae/graph.h"
#include "coregae/rng.h"
#include "coregae/sparse.h"

namespace coregae {

struct PropagationConfig {
  int iterations = 10;
  std::uint64_t seed = 0;
  double init_lo = -1.0;
  double init_hi = 1.0;

  void validate() const;
};

// One layer of the averaging system z_v = weighted mean of neighbor vectors
// for v in V2, with V1 vectors fixed.
struct BlockSystem {
  std::vector<NodeId> v1;
  std::vector<NodeId> v2;
  SparseMatrix a1;  // |V2| x |V1|, row-normalized part toward V1
  SparseMatrix a2;  // |V2| x |V2|, row-normalized part within V2
};

// Nodes outside `embedded` with at least one embedded neighbor, ascending.
std::vector<NodeId> frontier(const Graph& g, std::span<const NodeId> embedded);

// Rows of (A1^T | A2) divided by their sums, using edge weights. Throws
// std::logic_error if a V2 node has no V1 neighbor.
BlockSystem build_blocks(const Graph& g, std::span<const NodeId> v1,
                         std::span<const NodeId> v2);

// Z2 <- A1 Z1 + A2 Z2 repeated `iterations` times from `z2`.
DenseMatrix iterate_blocks(const BlockSystem& blocks, const DenseMatrix& z1,
                           DenseMatrix z2, int iterations);

// Uniform [init_lo, init_hi] start drawn from `rng` (rows in V2 order), then
// cfg.iterations steps.
DenseMatrix propagate_layer(const BlockSystem& blocks, const DenseMatrix& z1,
                            const PropagationConfig& cfg, Rng& rng);
DenseMatrix propagate_layer(const BlockSystem& blocks, const DenseMatrix& z1,
                            const PropagationConfig& cfg);

// Fixed point (I - A2)^{-1} A1 Z1 by Gaussian elimination with partial
// pivoting. Throws ValidationError above `max_size` frontier nodes and
// NumericError on a singular system.
DenseMatrix exact_solve(const BlockSystem& blocks, const DenseMatrix& z1,
                        std::size_t max_size = 2000);

struct LayerStats {
  std::size_t v1_size = 0;
  std::size_t v2_size = 0;
  // max over V2 rows of |row sum of (A1 | A2) - 1|
  double row_sum_error = 0.0;
};

struct PropagationResult {
  DenseMatrix z;  // n x f, row v = node v
  std::vector<LayerStats> layers;
  std::size_t unreachable = 0;  // nodes given random vectors
};

// Layered propagation from the core outward until no frontier remains;
// nodes never reached get uniform random vectors. Row i of `z_core` belongs
// to core_nodes[i].
PropagationResult propagate_all(const Graph& g, std::span<const NodeId> core_nodes,
                                const DenseMatrix& z_core,
                                const PropagationConfig& cfg);

}  // namespace coregae
