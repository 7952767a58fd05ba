#include "coregae/graph.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "coregae/error.h"
#include "coregae/rng.h"
#include "text_io.h"

namespace coregae {
using namespace detail;


Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        bool weighted) {
  struct Directed {
    NodeId src;
    NodeId dst;
    double weight;
  };
  std::vector<Directed> directed;
  directed.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw ValidationError("edge (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ") outside [0, " +
                            std::to_string(n) + ")");
    }
    if (e.u == e.v) continue;
    const double w = weighted ? e.weight : 1.0;
    if (weighted && !(w > 0.0 && std::isfinite(w))) {
      throw ValidationError("edge weights must be positive and finite");
    }
    directed.push_back({e.u, e.v, w});
    directed.push_back({e.v, e.u, w});
  }
  std::sort(directed.begin(), directed.end(),
            [](const Directed& a, const Directed& b) {
              return a.src != b.src ? a.src < b.src : a.dst < b.dst;
            });

  Graph g;
  g.weighted_ = weighted;
  g.offsets_.assign(n + 1, 0);
  g.targets_.reserve(directed.size());
  g.weights_.reserve(directed.size());
  for (std::size_t i = 0; i < directed.size(); ++i) {
    const Directed& d = directed[i];
    if (i > 0 && directed[i - 1].src == d.src && directed[i - 1].dst == d.dst) {
      if (weighted) g.weights_.back() += d.weight;
      continue;
    }
    g.targets_.push_back(d.dst);
    g.weights_.push_back(d.weight);
    ++g.offsets_[d.src + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  return g;
}

double Graph::weighted_degree(NodeId v) const {
  double total = 0.0;
  for (double w : neighbor_weights(v)) total += w;
  return total;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return false;
  auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    auto nbrs = neighbors(u);
    auto ws = neighbor_weights(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (nbrs[i] > u) edges.push_back({u, nbrs[i], ws[i]});
    }
  }
  return edges;
}

std::vector<std::size_t> degrees(const Graph& g) {
  std::vector<std::size_t> out(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) out[v] = g.degree(v);
  return out;
}

std::pair<Graph, NodeMapping> induced_subgraph(const Graph& g,
                                               std::span<const NodeId> nodes) {
  NodeMapping mapping;
  mapping.from_parent.assign(g.num_nodes(), -1);
  for (NodeId v : nodes) {
    if (v >= g.num_nodes()) {
      throw ValidationError("induced_subgraph: node " + std::to_string(v) +
                            " outside [0, " + std::to_string(g.num_nodes()) +
                            ")");
    }
    mapping.from_parent[v] = 0;
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (mapping.from_parent[v] < 0) continue;
    mapping.from_parent[v] = static_cast<std::int64_t>(mapping.to_parent.size());
    mapping.to_parent.push_back(v);
  }

  std::vector<Edge> edges;
  for (NodeId local = 0; local < mapping.to_parent.size(); ++local) {
    const NodeId parent = mapping.to_parent[local];
    auto nbrs = g.neighbors(parent);
    auto ws = g.neighbor_weights(parent);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const std::int64_t other = mapping.from_parent[nbrs[i]];
      if (other > static_cast<std::int64_t>(local)) {
        edges.push_back({local, static_cast<NodeId>(other), ws[i]});
      }
    }
  }
  Graph sub = Graph::from_edges(mapping.to_parent.size(), edges, g.weighted());
  return {std::move(sub), std::move(mapping)};
}

NodeId LoadedGraph::dense_id(std::uint64_t original) const {
  auto it = std::lower_bound(original_ids.begin(), original_ids.end(), original);
  if (it == original_ids.end() || *it != original) {
    throw ValidationError("unknown node id " + std::to_string(original));
  }
  return static_cast<NodeId>(it - original_ids.begin());
}

LoadedGraph parse_edge_list(std::string_view text, bool weighted) {
  struct RawEdge {
    std::uint64_t u;
    std::uint64_t v;
    double weight;
  };
  std::vector<RawEdge> raw;
  LoadStats stats;
  for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(line_error(line_no, "expected 2 or 3 fields", line));
    }
    RawEdge e{0, 0, 1.0};
    if (!parse_number(fields[0], e.u) || !parse_number(fields[1], e.v)) {
      throw ParseError(
          line_error(line_no, "node ids must be non-negative integers", line));
    }
    if (fields.size() == 3) {
      if (!parse_number(fields[2], e.weight) || !std::isfinite(e.weight)) {
        throw ParseError(line_error(line_no, "invalid weight", line));
      }
      if (e.weight < 0.0) {
        throw ValidationError(line_error(line_no, "negative weight", line));
      }
    }
    ++stats.data_lines;
    raw.push_back(e);
  });

  LoadedGraph out;
  out.original_ids.reserve(raw.size() * 2);
  for (const RawEdge& e : raw) {
    out.original_ids.push_back(e.u);
    out.original_ids.push_back(e.v);
  }
  std::sort(out.original_ids.begin(), out.original_ids.end());
  out.original_ids.erase(
      std::unique(out.original_ids.begin(), out.original_ids.end()),
      out.original_ids.end());

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const RawEdge& e : raw) {
    if (e.u == e.v) {
      ++stats.self_loops;
      continue;
    }
    if (weighted && e.weight == 0.0) {
      continue;
    }
    edges.push_back({out.dense_id(e.u), out.dense_id(e.v), e.weight});
  }
  out.graph = Graph::from_edges(out.original_ids.size(), edges, weighted);
  stats.edges = out.graph.num_edges();
  stats.duplicate_edges = edges.size() - stats.edges;
  out.stats = stats;
  return out;
}

LoadedGraph load_edge_list(const std::filesystem::path& path, bool weighted) {
  const std::string text = read_file(path);
  try {
    return parse_edge_list(text, weighted);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void store_edge_list(const std::filesystem::path& path, const Graph& g,
                     std::span<const std::uint64_t> original_ids) {
  if (!original_ids.empty() && original_ids.size() != g.num_nodes()) {
    throw ValidationError("store_edge_list: id map size differs from node count");
  }
  auto id = [&](NodeId v) -> std::uint64_t {
    return original_ids.empty() ? v : original_ids[v];
  };
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    auto nbrs = g.neighbors(u);
    auto ws = g.neighbor_weights(u);
    if (nbrs.empty()) {
      out << id(u) << '\t' << id(u) << '\n';
      continue;
    }
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (nbrs[i] < u) continue;
      out << id(u) << '\t' << id(nbrs[i]);
      if (g.weighted()) out << '\t' << format_double(ws[i]);
      out << '\n';
    }
  }
}

void write_id_map(const std::filesystem::path& path,
                  std::span<const std::uint64_t> original_ids) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (std::size_t i = 0; i < original_ids.size(); ++i) {
    out << original_ids[i] << '\t' << i << '\n';
  }
}

std::vector<std::uint64_t> read_id_map(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> rows;
  for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    std::pair<std::uint64_t, std::uint64_t> row;
    if (fields.size() != 2 || !parse_number(fields[0], row.first) ||
        !parse_number(fields[1], row.second)) {
      throw ParseError(path.string() + ": " +
                       line_error(line_no, "expected original_id<TAB>dense_id", line));
    }
    rows.push_back(row);
  });
  std::vector<std::uint64_t> ids(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [original, dense] : rows) {
    if (dense >= rows.size() || seen[dense]) {
      throw ValidationError(path.string() + ": dense ids must be a permutation of [0, n)");
    }
    seen[dense] = true;
    ids[dense] = original;
  }
  return ids;
}

NodeFeatures NodeFeatures::select_rows(std::span<const NodeId> nodes) const {
  if (identity) return identity_of(nodes.size());
  NodeFeatures out{nodes.size(), d, DenseMatrix(nodes.size(), d), false};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= n) throw ValidationError("select_rows: node out of range");
    auto src = values.row(nodes[i]);
    std::copy(src.begin(), src.end(), out.values.row(i).begin());
  }
  return out;
}

NodeFeatures load_features(const std::filesystem::path& path, std::size_t n) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_number(fields[i], row[i]) || !std::isfinite(row[i])) {
        throw ParseError(path.string() + ": " +
                         line_error(line_no, "non-numeric feature cell", line));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path.string() + ": " +
                       line_error(line_no, "ragged feature row", line));
    }
    rows.push_back(std::move(row));
  });
  if (rows.size() != n) {
    throw ValidationError(path.string() + ": expected " + std::to_string(n) +
                          " feature rows, found " + std::to_string(rows.size()));
  }
  const std::size_t d = n == 0 ? 0 : rows.front().size();
  NodeFeatures features{n, d, DenseMatrix(n, d), false};
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(rows[i].begin(), rows[i].end(), features.values.row(i).begin());
  }
  return features;
}

NodeFeatures load_features_or_identity(const std::filesystem::path& path,
                                       std::size_t n) {
  if (path.empty() || !std::filesystem::exists(path)) {
    return NodeFeatures::identity_of(n);
  }
  return load_features(path, n);
}

NodeLabels load_labels(const std::filesystem::path& path, std::size_t n) {
  const std::string text = read_file(path);
  std::vector<long long> raw;
  for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    long long value = 0;
    if (fields.size() != 1 || !parse_number(fields[0], value)) {
      throw ParseError(path.string() + ": " +
                       line_error(line_no, "expected one integer label", line));
    }
    raw.push_back(value);
  });
  if (raw.size() != n) {
    throw ValidationError(path.string() + ": expected " + std::to_string(n) +
                          " labels, found " + std::to_string(raw.size()));
  }
  std::vector<long long> classes = raw;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  NodeLabels labels;
  labels.num_classes = static_cast<int>(classes.size());
  labels.labels.reserve(n);
  for (long long v : raw) {
    labels.labels.push_back(static_cast<int>(
        std::lower_bound(classes.begin(), classes.end(), v) - classes.begin()));
  }
  return labels;
}

EdgeSplit split_edges(const Graph& g, double val_frac, double test_frac,
                      std::uint64_t seed) {
  if (!(val_frac >= 0.0) || !(test_frac >= 0.0) || !(val_frac + test_frac < 1.0)) {
    throw ValidationError("split_edges: need 0 <= val_frac + test_frac < 1");
  }
  const std::size_t m = g.num_edges();
  const std::size_t n = g.num_nodes();
  const auto num_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(m)));
  const auto num_test = static_cast<std::size_t>(std::floor(test_frac * static_cast<double>(m)));
  const std::size_t removed = num_val + num_test;
  if (removed > 0 && removed >= m) {
    throw ValidationError("split_edges: removing " + std::to_string(removed) +
                          " of " + std::to_string(m) +
                          " edges leaves an empty training graph");
  }
  const std::uint64_t all_pairs =
      static_cast<std::uint64_t>(n) * (n > 0 ? n - 1 : 0) / 2;
  if (all_pairs - m < removed) {
    throw ValidationError("split_edges: not enough non-edges to sample " +
                          std::to_string(removed) + " negatives");
  }

  Rng rng(seed);
  std::vector<Edge> edges = g.edge_list();
  // Fisher-Yates.
  for (std::size_t i = edges.size(); i > 1; --i) {
    std::swap(edges[i - 1], edges[rng.uniform_index(i)]);
  }

  EdgeSplit split;
  split.seed = seed;
  auto pair_of = [](const Edge& e) {
    return NodePair{std::min(e.u, e.v), std::max(e.u, e.v)};
  };
  for (std::size_t i = 0; i < num_test; ++i) split.test_pos.push_back(pair_of(edges[i]));
  for (std::size_t i = num_test; i < removed; ++i) split.val_pos.push_back(pair_of(edges[i]));
  std::vector<Edge> train(edges.begin() + static_cast<std::ptrdiff_t>(removed), edges.end());
  split.train_graph = Graph::from_edges(n, train, g.weighted());

  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(removed * 2);
  auto sample_negatives = [&](std::size_t count, std::vector<NodePair>& out) {
    out.reserve(count);
    while (out.size() < count) {
      const auto a = static_cast<NodeId>(rng.uniform_index(n));
      const auto b = static_cast<NodeId>(rng.uniform_index(n));
      if (a == b) continue;
      const NodePair p{std::min(a, b), std::max(a, b)};
      if (g.has_edge(p.first, p.second)) continue;
      const std::uint64_t key = (static_cast<std::uint64_t>(p.first) << 32) | p.second;
      if (!chosen.insert(key).second) continue;
      out.push_back(p);
    }
  };
  sample_negatives(num_test, split.test_neg);
  sample_negatives(num_val, split.val_neg);
  return split;
}

std::vector<NodePair> read_pairs(const std::filesystem::path& path,
                                 const LoadedGraph& ids) {
  const std::string text = read_file(path);
  std::vector<NodePair> pairs;
  for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    std::uint64_t a = 0, b = 0;
    if (fields.size() != 2 || !parse_number(fields[0], a) ||
        !parse_number(fields[1], b)) {
      throw ParseError(path.string() + ": " +
                       line_error(line_no, "expected two node ids", line));
    }
    const NodeId u = ids.dense_id(a);
    const NodeId v = ids.dense_id(b);
    pairs.push_back({std::min(u, v), std::max(u, v)});
  });
  return pairs;
}

void write_pairs(const std::filesystem::path& path,
                 std::span<const NodePair> pairs,
                 std::span<const std::uint64_t> original_ids) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const NodePair& p : pairs) {
    out << original_ids[p.first] << '\t' << original_ids[p.second] << '\n';
  }
}

}  // namespace coregae
