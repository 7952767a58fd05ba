#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coregae/dense.h"

namespace coregae {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;
};

// Unordered node pair, stored with first < second.
struct NodePair {
  NodeId first = 0;
  NodeId second = 0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

// Immutable undirected graph in compressed adjacency form. Every undirected
// edge is stored twice (once per endpoint); neighbor lists are sorted and
// free of duplicates and self-loops.
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  // Builds from an edge list over nodes [0, n). Self-loops are dropped and
  // repeated pairs (in either direction) are merged: weights are summed when
  // `weighted`, otherwise the pair is kept once with weight 1.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          bool weighted = false);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return targets_.size() / 2; }
  bool weighted() const { return weighted_; }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets_.data() + offsets_[v], degree(v)};
  }

  // Weights parallel to neighbors(v); all ones for unweighted graphs.
  std::span<const double> neighbor_weights(NodeId v) const {
    return {weights_.data() + offsets_[v], degree(v)};
  }

  // Sum of incident edge weights (the degree for unweighted graphs).
  double weighted_degree(NodeId v) const;

  bool has_edge(NodeId u, NodeId v) const;

  // Each undirected edge once, as (u, v) with u < v, in ascending order.
  std::vector<Edge> edge_list() const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> targets() const { return targets_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> weights_;
  bool weighted_ = false;
};

std::vector<std::size_t> degrees(const Graph& g);

// Bijection between a subgraph's local ids and its parent's ids.
struct NodeMapping {
  std::vector<NodeId> to_parent;           // local id -> parent id
  std::vector<std::int64_t> from_parent;   // parent id -> local id, or -1

  std::size_t size() const { return to_parent.size(); }
  bool contains_parent(NodeId parent) const {
    return parent < from_parent.size() && from_parent[parent] >= 0;
  }
};

// Subgraph induced by `nodes` (any order, duplicates ignored). Local ids
// follow ascending parent id.
std::pair<Graph, NodeMapping> induced_subgraph(const Graph& g,
                                               std::span<const NodeId> nodes);

struct LoadStats {
  std::size_t data_lines = 0;     // non-comment, non-blank lines
  std::size_t self_loops = 0;     // dropped
  std::size_t duplicate_edges = 0;  // merged into an earlier edge
  std::size_t edges = 0;          // undirected edges after deduplication
};

// Graph whose dense ids are the ranks of the original (file) ids.
struct LoadedGraph {
  Graph graph;
  std::vector<std::uint64_t> original_ids;  // dense id -> original id
  LoadStats stats;

  // Dense id for an original id; throws ValidationError when absent.
  NodeId dense_id(std::uint64_t original) const;
};

LoadedGraph load_edge_list(const std::filesystem::path& path,
                           bool weighted = false);
LoadedGraph parse_edge_list(std::string_view text, bool weighted = false);

// Writes one line per undirected edge using original ids (or dense ids when
// `original_ids` is empty). Isolated nodes are written as a self-loop line so
// that reloading keeps them.
void store_edge_list(const std::filesystem::path& path, const Graph& g,
                     std::span<const std::uint64_t> original_ids = {});

// "original_id<TAB>dense_id" sidecar.
void write_id_map(const std::filesystem::path& path,
                  std::span<const std::uint64_t> original_ids);
std::vector<std::uint64_t> read_id_map(const std::filesystem::path& path);

struct NodeFeatures {
  std::size_t n = 0;
  std::size_t d = 0;
  DenseMatrix values;      // empty when identity
  bool identity = false;   // implicit n x n identity, never materialized

  static NodeFeatures identity_of(std::size_t n) {
    return NodeFeatures{n, n, DenseMatrix(), true};
  }

  // Rows for the given nodes; identity features stay identity of the subset.
  NodeFeatures select_rows(std::span<const NodeId> nodes) const;
};

// TSV with n rows of d numeric cells.
NodeFeatures load_features(const std::filesystem::path& path, std::size_t n);
// Identity features when `path` is empty or does not exist.
NodeFeatures load_features_or_identity(const std::filesystem::path& path,
                                       std::size_t n);

struct NodeLabels {
  std::vector<int> labels;  // per node, in [0, num_classes)
  int num_classes = 0;
};

// One integer label per row, row i = dense node i. Labels are re-indexed to
// [0, K) in ascending order of their file values.
NodeLabels load_labels(const std::filesystem::path& path, std::size_t n);

struct EdgeSplit {
  Graph train_graph;
  std::vector<NodePair> val_pos;
  std::vector<NodePair> val_neg;
  std::vector<NodePair> test_pos;
  std::vector<NodePair> test_neg;
  std::uint64_t seed = 0;
};

// Link-prediction masking: floor(val_frac*m) and floor(test_frac*m) edges are
// removed uniformly at random, and as many non-edges of `g` are sampled for
// each set (no repeats, val and test negatives disjoint).
EdgeSplit split_edges(const Graph& g, double val_frac, double test_frac,
                      std::uint64_t seed);

std::vector<NodePair> read_pairs(const std::filesystem::path& path,
                                 const LoadedGraph& ids);
void write_pairs(const std::filesystem::path& path,
                 std::span<const NodePair> pairs,
                 std::span<const std::uint64_t> original_ids);

}  // namespace coregae
