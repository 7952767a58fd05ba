#include "coregae/propagation.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "coregae/error.h"

namespace coregae {
namespace {

constexpr std::int64_t kAbsent = -1;

// position[v] is v's row in V1 (tag 1) or V2 (tag 2); tags let one scratch
// array serve both sets.
struct Slot {
  std::int64_t index = kAbsent;
  int set = 0;
};

BlockSystem build_with_slots(const Graph& g, std::span<const NodeId> v1,
                             std::span<const NodeId> v2, std::vector<Slot>& slots) {
  for (std::size_t i = 0; i < v1.size(); ++i) slots[v1[i]] = {static_cast<std::int64_t>(i), 1};
  for (std::size_t i = 0; i < v2.size(); ++i) {
    if (slots[v2[i]].set == 1) {
      throw ValidationError("build_blocks: node " + std::to_string(v2[i]) +
                            " is in both V1 and V2");
    }
    slots[v2[i]] = {static_cast<std::int64_t>(i), 2};
  }
  std::vector<Triplet> t1;
  std::vector<Triplet> t2;
  for (std::size_t r = 0; r < v2.size(); ++r) {
    const NodeId v = v2[r];
    auto nbrs = g.neighbors(v);
    auto w = g.neighbor_weights(v);
    double total = 0.0;
    bool touches_v1 = false;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const Slot s = slots[nbrs[k]];
      if (s.set == 0) continue;
      total += w[k];
      touches_v1 = touches_v1 || s.set == 1;
    }
    if (!touches_v1) {
      throw std::logic_error("build_blocks: frontier node " + std::to_string(v) +
                             " has no neighbor in V1");
    }
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const Slot s = slots[nbrs[k]];
      if (s.set == 0) continue;
      Triplet t{r, static_cast<std::size_t>(s.index), w[k] / total};
      (s.set == 1 ? t1 : t2).push_back(t);
    }
  }
  for (NodeId v : v1) slots[v] = {};
  for (NodeId v : v2) slots[v] = {};
  BlockSystem b;
  b.v1.assign(v1.begin(), v1.end());
  b.v2.assign(v2.begin(), v2.end());
  b.a1 = SparseMatrix::from_triplets(v2.size(), v1.size(), std::move(t1));
  b.a2 = SparseMatrix::from_triplets(v2.size(), v2.size(), std::move(t2));
  return b;
}

double row_sum_error(const BlockSystem& b) {
  double worst = 0.0;
  for (std::size_t r = 0; r < b.v2.size(); ++r) {
    worst = std::max(worst, std::abs(b.a1.row_sum(r) + b.a2.row_sum(r) - 1.0));
  }
  return worst;
}

void check_z1(const BlockSystem& blocks, const DenseMatrix& z1) {
  if (z1.rows() != blocks.v1.size()) {
    throw ValidationError("Z1 has " + std::to_string(z1.rows()) +
                          " rows but V1 has " + std::to_string(blocks.v1.size()) +
                          " nodes");
  }
}

}  // namespace

void PropagationConfig::validate() const {
  if (iterations < 1) throw ValidationError("propagation needs at least one iteration");
  if (!(init_lo <= init_hi)) throw ValidationError("propagation init range is empty");
}

std::vector<NodeId> frontier(const Graph& g, std::span<const NodeId> embedded) {
  const std::size_t n = g.num_nodes();
  std::vector<char> in(n, 0);
  for (NodeId v : embedded) {
    if (v >= n) throw ValidationError("frontier: node id out of range");
    in[v] = 1;
  }
  std::vector<char> mark(n, 0);
  std::vector<NodeId> out;
  for (NodeId v : embedded) {
    for (NodeId u : g.neighbors(v)) {
      if (!in[u] && !mark[u]) {
        mark[u] = 1;
        out.push_back(u);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

BlockSystem build_blocks(const Graph& g, std::span<const NodeId> v1,
                         std::span<const NodeId> v2) {
  std::vector<Slot> slots(g.num_nodes());
  for (NodeId v : v1)
    if (v >= g.num_nodes()) throw ValidationError("build_blocks: V1 id out of range");
  for (NodeId v : v2)
    if (v >= g.num_nodes()) throw ValidationError("build_blocks: V2 id out of range");
  return build_with_slots(g, v1, v2, slots);
}

DenseMatrix iterate_blocks(const BlockSystem& blocks, const DenseMatrix& z1,
                           DenseMatrix z2, int iterations) {
  check_z1(blocks, z1);
  if (z2.rows() != blocks.v2.size() || z2.cols() != z1.cols()) {
    throw ValidationError("Z2 shape does not match the block system");
  }
  const DenseMatrix fixed = spmm(blocks.a1, z1);
  for (int it = 0; it < iterations; ++it) {
    DenseMatrix next = fixed;
    spmm_accumulate(blocks.a2, z2, 1.0, next);
    z2 = std::move(next);
  }
  return z2;
}

DenseMatrix propagate_layer(const BlockSystem& blocks, const DenseMatrix& z1,
                            const PropagationConfig& cfg, Rng& rng) {
  cfg.validate();
  check_z1(blocks, z1);
  DenseMatrix z2 = uniform_matrix(blocks.v2.size(), z1.cols(), cfg.init_lo,
                                  cfg.init_hi, rng);
  return iterate_blocks(blocks, z1, std::move(z2), cfg.iterations);
}

DenseMatrix propagate_layer(const BlockSystem& blocks, const DenseMatrix& z1,
                            const PropagationConfig& cfg) {
  Rng rng(cfg.seed);
  return propagate_layer(blocks, z1, cfg, rng);
}

DenseMatrix exact_solve(const BlockSystem& blocks, const DenseMatrix& z1,
                        std::size_t max_size) {
  check_z1(blocks, z1);
  const std::size_t n = blocks.v2.size();
  if (n > max_size) {
    throw ValidationError("exact_solve: " + std::to_string(n) +
                          " frontier nodes exceed the cap of " +
                          std::to_string(max_size));
  }
  const std::size_t f = z1.cols();
  DenseMatrix a(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    a(r, r) = 1.0;
    auto cols = blocks.a2.row_cols(r);
    auto vals = blocks.a2.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) a(r, cols[k]) -= vals[k];
  }
  DenseMatrix b = spmm(blocks.a1, z1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (!(std::abs(a(pivot, col)) > 1e-300)) {
      throw NumericError("exact_solve: singular system at column " +
                         std::to_string(col));
    }
    if (pivot != col) {
      std::swap_ranges(a.row(col).begin(), a.row(col).end(), a.row(pivot).begin());
      std::swap_ranges(b.row(col).begin(), b.row(col).end(), b.row(pivot).begin());
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(r, col) * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
      for (std::size_t c = 0; c < f; ++c) b(r, c) -= factor * b(col, c);
    }
  }
  DenseMatrix x(n, f);
  for (std::size_t r = n; r-- > 0;) {
    for (std::size_t c = 0; c < f; ++c) {
      double acc = b(r, c);
      for (std::size_t k = r + 1; k < n; ++k) acc -= a(r, k) * x(k, c);
      x(r, c) = acc / a(r, r);
    }
  }
  require_finite(x, "exact_solve solution");
  return x;
}

PropagationResult propagate_all(const Graph& g, std::span<const NodeId> core_nodes,
                                const DenseMatrix& z_core,
                                const PropagationConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  if (core_nodes.empty()) throw ValidationError("propagation needs a non-empty core");
  if (z_core.rows() != core_nodes.size()) {
    throw ValidationError("core embedding has " + std::to_string(z_core.rows()) +
                          " rows for " + std::to_string(core_nodes.size()) +
                          " core nodes");
  }
  const std::size_t f = z_core.cols();
  PropagationResult result;
  result.z = DenseMatrix(n, f);
  std::vector<char> embedded(n, 0);
  for (std::size_t i = 0; i < core_nodes.size(); ++i) {
    const NodeId v = core_nodes[i];
    if (v >= n) throw ValidationError("core node id out of range");
    if (embedded[v]) throw ValidationError("duplicate core node " + std::to_string(v));
    embedded[v] = 1;
    std::copy(z_core.row(i).begin(), z_core.row(i).end(), result.z.row(v).begin());
  }

  Rng rng(cfg.seed);
  std::vector<Slot> slots(n);
  std::vector<NodeId> v1(core_nodes.begin(), core_nodes.end());
  DenseMatrix z1 = z_core;
  std::vector<char> mark(n, 0);
  while (true) {
    std::vector<NodeId> v2;
    for (NodeId v : v1) {
      for (NodeId u : g.neighbors(v)) {
        if (!embedded[u] && !mark[u]) {
          mark[u] = 1;
          v2.push_back(u);
        }
      }
    }
    if (v2.empty()) break;
    std::sort(v2.begin(), v2.end());
    BlockSystem blocks = build_with_slots(g, v1, v2, slots);
    result.layers.push_back({v1.size(), v2.size(), row_sum_error(blocks)});
    DenseMatrix z2 = propagate_layer(blocks, z1, cfg, rng);
    for (std::size_t i = 0; i < v2.size(); ++i) {
      embedded[v2[i]] = 1;
      mark[v2[i]] = 0;
      std::copy(z2.row(i).begin(), z2.row(i).end(), result.z.row(v2[i]).begin());
    }
    v1 = std::move(blocks.v2);
    z1 = std::move(z2);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (embedded[v]) continue;
    ++result.unreachable;
    for (double& x : result.z.row(v)) x = rng.uniform(cfg.init_lo, cfg.init_hi);
  }
  require_finite(result.z, "propagated embedding");
  return result;
}

}  // namespace coregae
