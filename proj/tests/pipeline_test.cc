#include "coregae/pipeline.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "coregae/degeneracy.h"
#include "coregae/embedding_io.h"
#include "coregae/error.h"
#include "json.hpp"
#include "test_util.h"

namespace coregae {
namespace {

using testing::make_graph;
using testing::planted_partition;
using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COREGAE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Planted partition written as an edge list with shifted ids, plus labels.
std::filesystem::path write_dataset(const TempDir& dir) {
  std::vector<int> labels;
  Graph g = planted_partition(3, 30, 0.4, 0.01, 7, &labels);
  std::vector<std::uint64_t> ids(g.num_nodes());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = 1000 + 2 * i;
  store_edge_list(dir / "graph.txt", g, ids);
  std::ofstream l(dir / "labels.tsv");
  for (int x : labels) l << x << "\n";
  return dir / "graph.txt";
}

TEST(Config, ParsesKeysAndOverrides) {
  PipelineConfig cfg = parse_pipeline_config(
      "# experiment\n"
      "graph = data/cora/edges.txt\n"
      "task=node_clustering\n"
      "labels = l.tsv\n"
      "k = max-tractable\n"
      "model = deepvgae\n"
      "dim = 8\n"
      "runs = 3\n"
      "seed = 42\n");
  EXPECT_EQ(cfg.graph, "data/cora/edges.txt");
  EXPECT_EQ(cfg.task, Task::kNodeClustering);
  EXPECT_FALSE(cfg.k.has_value());
  EXPECT_EQ(cfg.model.variant, Variant::kDeepVgae);
  EXPECT_EQ(cfg.model.hidden_dims, (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(cfg.model.latent_dim, 8u);
  EXPECT_EQ(cfg.runs, 3);
  EXPECT_EQ(cfg.seed, 42u);
  cfg.set("k", "3");
  EXPECT_EQ(cfg.k, 3u);
  cfg.set("hidden", "16,8");
  cfg.set("model", "gae");
  EXPECT_EQ(cfg.model.hidden_dims, (std::vector<std::size_t>{16, 8}));
  EXPECT_THROW(cfg.set("colour", "blue"), ValidationError);
  EXPECT_THROW(cfg.set("runs", "many"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("graph\n"), ParseError);
}

TEST(Config, Validation) {
  PipelineConfig cfg;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.graph = "g.txt";
  EXPECT_NO_THROW(cfg.validate());
  cfg.runs = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.runs = 1;
  cfg.task = Task::kNodeClustering;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(SelectCoreK, Examples) {
  // K5 (core 4) attached to a 6-cycle (core 2) and a pendant (core 1)
  Graph g = make_graph(12, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4},
                            {2, 3}, {2, 4}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8},
                            {8, 9}, {9, 10}, {10, 5}, {10, 11}});
  auto table = core_size_table(g);
  EXPECT_EQ(select_core_k(g, 1000), 2u);
  EXPECT_EQ(select_core_k(g, table[2].nodes), 2u);
  EXPECT_EQ(select_core_k(g, table[2].nodes - 1), 3u);
  EXPECT_EQ(select_core_k(g, 1), 4u);
}

TEST(Aggregate, MeanAndStandardError) {
  Aggregate one = aggregate({0.7});
  EXPECT_EQ(one.mean, 0.7);
  EXPECT_EQ(one.se, 0.0);
  Aggregate a = aggregate({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(a.mean, 2.5);
  EXPECT_DOUBLE_EQ(a.se, std::sqrt(5.0 / 3.0) / 2.0);
}

TEST(Pipeline, LinkPredictionEndToEnd) {
  TempDir dir;
  PipelineConfig cfg;
  cfg.graph = write_dataset(dir);
  cfg.model = ModelSpec::for_variant(Variant::kGae);
  cfg.model.epochs = 100;
  cfg.k = 2;
  cfg.runs = 2;
  cfg.seed = 5;
  cfg.out = dir / "out";
  RunSummary s = run_pipeline(cfg);
  ASSERT_EQ(s.runs.size(), 2u);
  EXPECT_GT(s.metrics.at("auc").mean, 0.8);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "run_5" / "embedding.gaez"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "run_6" / "metrics.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.tsv"));
  Embedding e = read_embedding(dir / "out" / "run_5" / "embedding.gaez");
  EXPECT_EQ(e.z.rows(), 90u);
  EXPECT_EQ(e.ids.front(), 1000u);
  for (const RunRecord& r : s.runs) {
    EXPECT_GE(r.timing.total_seconds,
              r.timing.kcore_seconds + r.timing.train_seconds + r.timing.propagation_seconds);
    EXPECT_TRUE(r.val.has_value());
  }
}

TEST(Pipeline, ClusteringWithSmallerCore) {
  TempDir dir;
  PipelineConfig cfg;
  cfg.graph = write_dataset(dir);
  cfg.labels = dir / "labels.tsv";
  cfg.task = Task::kNodeClustering;
  cfg.k = 8;
  cfg.model.epochs = 100;
  RunSummary s = run_pipeline(cfg);
  EXPECT_LT(s.runs[0].core_nodes, 90u);
  EXPECT_GT(s.metrics.at("nmi").mean, 0.5);
}

TEST(Pipeline, EmptyCoreNamesDegeneracy) {
  TempDir dir;
  PipelineConfig cfg;
  cfg.graph = write_dataset(dir);
  cfg.k = 60;
  try {
    run_pipeline(cfg);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("degeneracy"), std::string::npos);
  }
}

TEST(Pipeline, MetricReportIsDeterministic) {
  TempDir dir;
  PipelineConfig cfg;
  cfg.graph = write_dataset(dir);
  cfg.model = ModelSpec::for_variant(Variant::kVgae);
  cfg.model.epochs = 30;
  cfg.runs = 2;
  cfg.out = dir / "a";
  run_pipeline(cfg);
  cfg.out = dir / "b";
  run_pipeline(cfg);
  EXPECT_EQ(slurp(dir / "a" / "metrics.json"), slurp(dir / "b" / "metrics.json"));
  EXPECT_EQ(slurp(dir / "a" / "run_0" / "embedding.gaez"),
            slurp(dir / "b" / "run_0" / "embedding.gaez"));
}

TEST(Report, JsonAndTsvAgree) {
  RunSummary s;
  s.dataset = "toy";
  s.model = "vgae";
  s.core_k = "2";
  for (int i = 0; i < 3; ++i) {
    RunRecord r;
    r.seed = i;
    r.core_nodes = 10 + i;
    r.test = LinkPredReport{0.8 + 0.01 * i, 0.7 + 0.013 * i, "test", 0};
    r.timing.total_seconds = 1.0 / (i + 3);
    s.runs.push_back(r);
  }
  summarize(s);
  auto j = nlohmann::json::parse(report_json(s, true));
  std::istringstream tsv(report_tsv(s));
  std::string header, row;
  std::getline(tsv, header);
  std::getline(tsv, row);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) out.push_back(cell);
    return out;
  };
  auto h = split(header), v = split(row);
  ASSERT_EQ(h.size(), v.size());
  std::size_t checked = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const std::string& col = h[i];
    for (const char* suffix : {"_mean", "_se"}) {
      const std::string sfx(suffix);
      if (col.size() > sfx.size() && col.compare(col.size() - sfx.size(), sfx.size(), sfx) == 0) {
        const std::string metric = col.substr(0, col.size() - sfx.size());
        EXPECT_EQ(std::stod(v[i]), j["summary"][metric][sfx.substr(1)].get<double>()) << col;
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 6u);
  EXPECT_EQ(header.find("speed_gain"), std::string::npos);
  EXPECT_FALSE(j.contains("speed_gain"));
  s.speed_gain = 2.5;
  EXPECT_NE(report_tsv(s).find("speed_gain"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(report_json(s, true))["speed_gain"], 2.5);
  EXPECT_EQ(report_json(s, false).find("total_s"), std::string::npos);
}

TEST(Report, SingleRunHasZeroStandardError) {
  RunSummary s;
  RunRecord r;
  r.cluster = ClusterReport{0.4, 3, 1, 2.0};
  s.runs.push_back(r);
  summarize(s);
  EXPECT_EQ(s.metrics.at("nmi").se, 0.0);
}

TEST(EmbeddingIo, RoundTrips) {
  TempDir dir;
  Rng rng(1);
  DenseMatrix z = uniform_matrix(5, 3, -1e3, 1e3, rng);
  z(0, 0) = 1e-310;
  std::vector<std::uint64_t> ids = {9, 8, 7, 100, 5};
  write_embedding(dir / "z.gaez", z, ids);
  Embedding b = read_embedding(dir / "z.gaez");
  EXPECT_EQ(b.z, z);
  EXPECT_EQ(b.ids, ids);
  write_embedding(dir / "z.tsv", z, ids);
  Embedding t = read_embedding(dir / "z.tsv");
  EXPECT_EQ(t.z, z);
  EXPECT_EQ(t.ids, ids);
  const std::string bytes = slurp(dir / "z.gaez");
  EXPECT_EQ(bytes.substr(0, 4), "GAEZ");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes.size(), 4u + 1 + 8 + 8 + 15 * 8);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 5u);  // n, little endian
  std::ofstream(dir / "bad.gaez", std::ios::binary) << "GAEZ\x01\x05";
  EXPECT_THROW(read_embedding_gaez(dir / "bad.gaez"), ParseError);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write_dataset(dir);
  const std::string g = (dir / "graph.txt").string();
  EXPECT_EQ(run_cli("decompose --graph " + g), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("decompose"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("decompose --graph /nonexistent.txt"), 2);
  std::ofstream(dir / "bad.txt") << "1 2\nthree four\n";
  EXPECT_EQ(run_cli("decompose --graph " + (dir / "bad.txt").string()), 2);
  std::ofstream(dir / "huge.tsv") << "";
  {
    std::ofstream f(dir / "huge.tsv");
    for (int i = 0; i < 90; ++i) f << "1e300\t1e300\n";
  }
  EXPECT_EQ(run_cli("train --graph " + g + " --features " + (dir / "huge.tsv").string() +
                    " --epochs 2 --out " + (dir / "z.tsv").string()),
            3);
  EXPECT_EQ(run_cli("train --graph " + g + " --max-nodes 10 --out " +
                    (dir / "z.tsv").string()),
            2);
}

TEST(Cli, StepByStepWorkflow) {
  TempDir dir;
  write_dataset(dir);
  const std::string d = dir.path().string();
  ASSERT_EQ(run_cli("split --graph " + d + "/graph.txt --seed 3 --out " + d + "/split"), 0);
  ASSERT_EQ(run_cli("decompose --graph " + d + "/split/train.txt --format json --out " + d +
                    "/cores.json"),
            0);
  auto cores = nlohmann::json::parse(slurp(dir / "cores.json"));
  EXPECT_EQ(cores["nodes"], 90);
  ASSERT_EQ(run_cli("train --graph " + d + "/split/train.txt --k 3 --epochs 80 --seed 3 --out " +
                    d + "/core.gaez"),
            0);
  ASSERT_EQ(run_cli("propagate --graph " + d + "/split/train.txt --embedding " + d +
                    "/core.gaez --out " + d + "/full.tsv"),
            0);
  ASSERT_EQ(run_cli("eval --graph " + d + "/graph.txt --embedding " + d + "/full.tsv --pos " +
                    d + "/split/test_pos.txt --neg " + d + "/split/test_neg.txt --labels " + d +
                    "/labels.tsv --out " + d + "/eval.json"),
            0);
  auto ev = nlohmann::json::parse(slurp(dir / "eval.json"));
  EXPECT_GT(ev["auc"].get<double>(), 0.7);
  EXPECT_GT(ev["nmi"].get<double>(), 0.3);
}

TEST(Cli, PipelineConfigFileWithOverrides) {
  TempDir dir;
  write_dataset(dir);
  const std::string d = dir.path().string();
  std::ofstream(dir / "exp.cfg") << "graph = " << d << "/graph.txt\nmodel = vgae\nepochs = 20\n"
                                 << "runs = 2\nout = " << d << "/out\n";
  ASSERT_EQ(run_cli("pipeline --config " + d + "/exp.cfg --seed 9 --k 2"), 0);
  auto m = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
  EXPECT_EQ(m["model"], "vgae");
  EXPECT_EQ(m["core_k"], "2");
  EXPECT_EQ(m["per_run"][0]["seed"], 9);
  EXPECT_EQ(run_cli("pipeline --config " + d + "/exp.cfg --model graphite"), 2);
}

}  // namespace
}  // namespace coregae
