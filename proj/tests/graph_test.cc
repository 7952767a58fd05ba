#include "coregae/graph.h"

#include <fstream>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "coregae/error.h"
#include "test_util.h"

namespace coregae {
namespace {

using testing::erdos_renyi;
using testing::make_graph;
using testing::TempDir;

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(LoadEdgeList, Triangle) {
  LoadedGraph lg = parse_edge_list("0 1\n1 2\n2 0");
  EXPECT_EQ(lg.graph.num_nodes(), 3u);
  EXPECT_EQ(lg.graph.num_edges(), 3u);
  EXPECT_TRUE(lg.graph.has_edge(0, 2));
}

TEST(LoadEdgeList, CommentSelfLoopAndCompaction) {
  LoadedGraph lg = parse_edge_list("# comment\n5 5\n5 7");
  EXPECT_EQ(lg.graph.num_nodes(), 2u);
  EXPECT_EQ(lg.graph.num_edges(), 1u);
  EXPECT_EQ(lg.original_ids, (std::vector<std::uint64_t>{5, 7}));
  EXPECT_EQ(lg.stats.self_loops, 1u);
  EXPECT_EQ(lg.dense_id(7), 1u);
}

TEST(LoadEdgeList, ReverseDuplicateCollapses) {
  LoadedGraph lg = parse_edge_list("0 1\n1 0");
  EXPECT_EQ(lg.graph.num_nodes(), 2u);
  EXPECT_EQ(lg.graph.num_edges(), 1u);
  EXPECT_EQ(lg.stats.duplicate_edges, 1u);
  EXPECT_EQ(lg.stats.data_lines, 2u);
}

TEST(LoadEdgeList, MixedWhitespaceAndBlankLines) {
  LoadedGraph lg = parse_edge_list("\n10\t 20\n\n  20   30  \n# x\n");
  EXPECT_EQ(lg.graph.num_nodes(), 3u);
  EXPECT_EQ(lg.graph.num_edges(), 2u);
}

TEST(LoadEdgeList, WeightsSummedWhenWeighted) {
  LoadedGraph lg = parse_edge_list("0 1 0.5\n1 0 1.5\n1 2 2", true);
  ASSERT_EQ(lg.graph.num_edges(), 2u);
  EXPECT_DOUBLE_EQ(lg.graph.neighbor_weights(0)[0], 2.0);
  EXPECT_DOUBLE_EQ(lg.graph.weighted_degree(1), 4.0);
}

TEST(LoadEdgeList, MalformedLineReportsLineNumber) {
  try {
    parse_edge_list("0 1\n1 x\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_edge_list("0 1 2 3\n"), ParseError);
  EXPECT_THROW(parse_edge_list("7\n"), ParseError);
}

TEST(LoadEdgeList, NegativeWeightIsValidationError) {
  EXPECT_THROW(parse_edge_list("0 1 -1\n", true), ValidationError);
}

TEST(LoadEdgeList, MissingFile) {
  EXPECT_THROW(load_edge_list("/nonexistent/graph.txt"), ValidationError);
}

TEST(Graph, Invariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = erdos_renyi(30, 0.2, seed);
    std::size_t directed = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      auto nb = g.neighbors(v);
      directed += nb.size();
      EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
      EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
      for (NodeId u : nb) {
        EXPECT_NE(u, v);
        EXPECT_TRUE(g.has_edge(u, v));
      }
    }
    EXPECT_EQ(directed, 2 * g.num_edges());
  }
}

TEST(Degrees, Examples) {
  EXPECT_EQ(degrees(make_graph(3, {{0, 1}, {1, 2}, {2, 0}})),
            (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_EQ(degrees(make_graph(4, {{0, 1}, {0, 2}, {0, 3}})),
            (std::vector<std::size_t>{3, 1, 1, 1}));
  EXPECT_TRUE(degrees(Graph()).empty());
}

TEST(Degrees, SumIsTwiceEdges) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = erdos_renyi(40, 0.1, seed);
    auto d = degrees(g);
    EXPECT_EQ(std::accumulate(d.begin(), d.end(), std::size_t{0}), 2 * g.num_edges());
  }
}

TEST(RoundTrip, LoadStoreLoadIsIdentical) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph g = erdos_renyi(25, 0.15, seed);  // may contain isolated nodes
    std::vector<std::uint64_t> ids(g.num_nodes());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = 3 * i + 11;
    store_edge_list(dir / "g.txt", g, ids);
    LoadedGraph a = load_edge_list(dir / "g.txt");
    EXPECT_EQ(a.graph, g);
    EXPECT_EQ(a.original_ids, ids);
    store_edge_list(dir / "g2.txt", a.graph, a.original_ids);
    LoadedGraph b = load_edge_list(dir / "g2.txt");
    EXPECT_EQ(a.graph, b.graph);
  }
}

TEST(RoundTrip, WeightedGraph) {
  TempDir dir;
  LoadedGraph a = parse_edge_list("1 2 0.25\n2 3 1e-3\n3 1 7", true);
  store_edge_list(dir / "w.txt", a.graph, a.original_ids);
  LoadedGraph b = load_edge_list(dir / "w.txt", true);
  EXPECT_EQ(a.graph, b.graph);
}

TEST(IdMap, RoundTrip) {
  TempDir dir;
  std::vector<std::uint64_t> ids = {4, 9, 1000000000000ULL};
  write_id_map(dir / "m.tsv", ids);
  EXPECT_EQ(read_id_map(dir / "m.tsv"), ids);
}

TEST(Features, LoadShapes) {
  TempDir dir;
  write_file(dir / "f.tsv", "1\t2\n3\t4\n5\t6\n");
  NodeFeatures f = load_features(dir / "f.tsv", 3);
  EXPECT_EQ(f.n, 3u);
  EXPECT_EQ(f.d, 2u);
  EXPECT_FALSE(f.identity);
  EXPECT_DOUBLE_EQ(f.values(2, 1), 6.0);
  EXPECT_THROW(load_features(dir / "f.tsv", 4), ValidationError);
  write_file(dir / "bad.tsv", "1\tx\n");
  EXPECT_THROW(load_features(dir / "bad.tsv", 1), ParseError);
}

TEST(Features, MissingFileMeansIdentity) {
  NodeFeatures f = load_features_or_identity("/nonexistent/features.tsv", 5);
  EXPECT_TRUE(f.identity);
  EXPECT_EQ(f.d, 5u);
  EXPECT_TRUE(f.values.empty());
}

TEST(Labels, Reindexed) {
  TempDir dir;
  write_file(dir / "l.tsv", "7\n3\n7\n9\n");
  NodeLabels l = load_labels(dir / "l.tsv", 4);
  EXPECT_EQ(l.num_classes, 3);
  EXPECT_EQ(l.labels, (std::vector<int>{1, 0, 1, 2}));
  EXPECT_THROW(load_labels(dir / "l.tsv", 5), ValidationError);
}

TEST(InducedSubgraph, Examples) {
  Graph tri = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  std::vector<NodeId> two = {1, 0};
  auto [sub, map] = induced_subgraph(tri, two);
  EXPECT_EQ(sub.num_nodes(), 2u);
  EXPECT_EQ(sub.num_edges(), 1u);
  EXPECT_EQ(map.to_parent, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(map.from_parent[2], -1);

  std::vector<NodeId> all = {0, 1, 2};
  auto [full, idmap] = induced_subgraph(tri, all);
  EXPECT_EQ(full, tri);

  auto [empty, emap] = induced_subgraph(tri, std::vector<NodeId>{});
  EXPECT_EQ(empty.num_nodes(), 0u);
  EXPECT_EQ(empty.num_edges(), 0u);

  std::vector<NodeId> bad = {5};
  EXPECT_THROW(induced_subgraph(tri, bad), ValidationError);
}

TEST(SplitEdges, Counts) {
  // 100 edges on a ring of 100 nodes
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 100; ++i) edges.push_back({i, static_cast<NodeId>((i + 1) % 100), 1.0});
  Graph g = Graph::from_edges(100, edges);
  EdgeSplit s = split_edges(g, 0.05, 0.10, 42);
  EXPECT_EQ(s.val_pos.size(), 5u);
  EXPECT_EQ(s.test_pos.size(), 10u);
  EXPECT_EQ(s.val_neg.size(), 5u);
  EXPECT_EQ(s.test_neg.size(), 10u);
  EXPECT_EQ(s.train_graph.num_edges(), 85u);
  EXPECT_EQ(s.train_graph.num_nodes(), 100u);
}

TEST(SplitEdges, ZeroFractionsKeepGraph) {
  Graph g = erdos_renyi(20, 0.3, 1);
  EdgeSplit s = split_edges(g, 0.0, 0.0, 1);
  EXPECT_EQ(s.train_graph, g);
  EXPECT_TRUE(s.val_pos.empty() && s.val_neg.empty());
  EXPECT_TRUE(s.test_pos.empty() && s.test_neg.empty());
}

TEST(SplitEdges, Deterministic) {
  Graph g = erdos_renyi(50, 0.1, 3);
  EdgeSplit a = split_edges(g, 0.05, 0.1, 9);
  EdgeSplit b = split_edges(g, 0.05, 0.1, 9);
  EXPECT_EQ(a.train_graph, b.train_graph);
  EXPECT_EQ(a.val_pos, b.val_pos);
  EXPECT_EQ(a.val_neg, b.val_neg);
  EXPECT_EQ(a.test_pos, b.test_pos);
  EXPECT_EQ(a.test_neg, b.test_neg);
  EdgeSplit c = split_edges(g, 0.05, 0.1, 10);
  EXPECT_NE(a.test_pos, c.test_pos);
}

TEST(SplitEdges, PartitionProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = erdos_renyi(40, 0.15, seed + 100);
    EdgeSplit s = split_edges(g, 0.1, 0.2, seed);
    std::set<NodePair> original;
    for (const Edge& e : g.edge_list()) original.insert({e.u, e.v});
    std::set<NodePair> rebuilt;
    for (const Edge& e : s.train_graph.edge_list()) EXPECT_TRUE(rebuilt.insert({e.u, e.v}).second);
    for (const NodePair& p : s.val_pos) EXPECT_TRUE(rebuilt.insert(p).second);
    for (const NodePair& p : s.test_pos) EXPECT_TRUE(rebuilt.insert(p).second);
    EXPECT_EQ(rebuilt, original);
    std::set<NodePair> negatives;
    for (const auto* list : {&s.val_neg, &s.test_neg}) {
      for (const NodePair& p : *list) {
        EXPECT_LT(p.first, p.second);
        EXPECT_FALSE(original.count(p));
        EXPECT_TRUE(negatives.insert(p).second);
      }
    }
  }
}

TEST(SplitEdges, RejectsBadFractions) {
  Graph g = erdos_renyi(20, 0.3, 1);
  EXPECT_THROW(split_edges(g, 0.5, 0.5, 1), ValidationError);
  EXPECT_THROW(split_edges(g, -0.1, 0.2, 1), ValidationError);
  Graph k4 = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  EXPECT_THROW(split_edges(k4, 0.0, 0.5, 1), ValidationError);
}

TEST(Pairs, RoundTripWithOriginalIds) {
  TempDir dir;
  LoadedGraph lg = parse_edge_list("10 20\n20 30\n");
  std::vector<NodePair> pairs = {{0, 2}, {1, 2}};
  write_pairs(dir / "p.txt", pairs, lg.original_ids);
  EXPECT_EQ(read_pairs(dir / "p.txt", lg), pairs);
}

}  // namespace
}  // namespace coregae
