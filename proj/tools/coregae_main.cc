// coregae: k-core training and propagation for graph autoencoders.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coregae/autoencoder.h"
#include "coregae/degeneracy.h"
#include "coregae/embedding_io.h"
#include "coregae/error.h"
#include "coregae/evaluation.h"
#include "coregae/graph.h"
#include "coregae/pipeline.h"
#include "coregae/propagation.h"

namespace fs = std::filesystem;
using namespace coregae;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct DecomposeArgs {
  std::string graph;
  bool weighted = false;
  std::string format = "tsv";
  std::string out;
  std::optional<std::uint32_t> k;
  std::string core_out;
};

int run_decompose(const DecomposeArgs& a) {
  const LoadedGraph data = load_edge_list(a.graph, a.weighted);
  const CoreDecomposition cores = core_numbers(data.graph);
  const auto table = core_size_table(data.graph, cores);
  std::string text;
  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["nodes"] = data.graph.num_nodes();
    j["edges"] = data.graph.num_edges();
    j["raw_edge_lines"] = data.stats.data_lines;
    j["self_loops"] = data.stats.self_loops;
    j["duplicate_edges"] = data.stats.duplicate_edges;
    j["degeneracy"] = cores.degeneracy;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const CoreSizeRow& r : table)
      rows.push_back({{"k", r.k}, {"nodes", r.nodes}, {"edges", r.edges}});
    j["cores"] = std::move(rows);
    text = j.dump(2) + "\n";
  } else {
    text = "k\tnodes\tedges\n";
    for (const CoreSizeRow& r : table) {
      text += std::to_string(r.k) + "\t" + std::to_string(r.nodes) + "\t" +
              std::to_string(r.edges) + "\n";
    }
  }
  write_output(text, a.out);
  if (a.k) {
    if (a.core_out.empty()) throw ValidationError("--k needs --core-out");
    if (*a.k > cores.degeneracy) {
      throw ValidationError("the " + std::to_string(*a.k) +
                            "-core is empty; the graph's degeneracy is " +
                            std::to_string(cores.degeneracy));
    }
    auto [core, mapping] = k_core(data.graph, cores, *a.k);
    std::vector<std::uint64_t> ids;
    ids.reserve(mapping.size());
    for (NodeId v : mapping.to_parent) ids.push_back(data.original_ids[v]);
    store_edge_list(a.core_out, core, ids);
    std::cerr << "k=" << *a.k << " core: " << core.num_nodes() << " nodes, "
              << core.num_edges() << " edges -> " << a.core_out << "\n";
  }
  return kExitOk;
}

struct SplitArgs {
  std::string graph;
  bool weighted = false;
  double val = 0.05;
  double test = 0.10;
  std::uint64_t seed = 0;
  std::string out;
};

int run_split(const SplitArgs& a) {
  const LoadedGraph data = load_edge_list(a.graph, a.weighted);
  const EdgeSplit split = split_edges(data.graph, a.val, a.test,
                                      derive_seed(a.seed, streams::kSplit));
  const fs::path dir(a.out);
  fs::create_directories(dir);
  store_edge_list(dir / "train.txt", split.train_graph, data.original_ids);
  write_pairs(dir / "val_pos.txt", split.val_pos, data.original_ids);
  write_pairs(dir / "val_neg.txt", split.val_neg, data.original_ids);
  write_pairs(dir / "test_pos.txt", split.test_pos, data.original_ids);
  write_pairs(dir / "test_neg.txt", split.test_neg, data.original_ids);
  std::cerr << "train edges " << split.train_graph.num_edges() << ", val "
            << split.val_pos.size() << ", test " << split.test_pos.size() << "\n";
  return kExitOk;
}

struct ModelArgs {
  std::string model = "gae";
  std::size_t dim = 16;
  std::string hidden;
  int epochs = 200;
  double lr = 0.01;
  std::size_t max_nodes = 50000;

  ModelSpec spec(std::uint64_t seed) const {
    ModelSpec s = ModelSpec::for_variant(parse_variant(model));
    s.latent_dim = dim;
    if (!hidden.empty()) {
      PipelineConfig tmp;
      tmp.set("hidden", hidden);
      s.hidden_dims = tmp.model.hidden_dims;
    }
    s.epochs = epochs;
    s.learning_rate = lr;
    s.max_nodes = max_nodes;
    s.seed = seed;
    return s;
  }
};

struct TrainArgs {
  std::string graph;
  std::string features;
  bool weighted = false;
  std::uint32_t k = 0;
  ModelArgs model;
  std::uint64_t seed = 0;
  std::string out;
  std::string loss_out;
};

int run_train(const TrainArgs& a) {
  const LoadedGraph data = load_edge_list(a.graph, a.weighted);
  const NodeFeatures features =
      load_features_or_identity(a.features, data.graph.num_nodes());
  const CoreDecomposition cores = core_numbers(data.graph);
  if (a.k > cores.degeneracy) {
    throw ValidationError("the " + std::to_string(a.k) +
                          "-core is empty; the graph's degeneracy is " +
                          std::to_string(cores.degeneracy));
  }
  auto [core, mapping] = k_core(data.graph, cores, a.k);
  const ModelSpec spec = a.model.spec(a.seed);
  const TrainResult result = train(core, features.select_rows(mapping.to_parent), spec);
  std::vector<std::uint64_t> ids;
  for (NodeId v : mapping.to_parent) ids.push_back(data.original_ids[v]);
  write_embedding(a.out, result.report.embedding, ids);
  if (!a.loss_out.empty()) {
    std::string text = "epoch\treconstruction\tkl\ttotal\n";
    const auto& h = result.report.loss_history;
    for (std::size_t e = 0; e < h.size(); ++e) {
      text += std::to_string(e + 1) + "\t" + number(h[e].reconstruction) + "\t" +
              number(h[e].kl) + "\t" + number(h[e].total) + "\n";
    }
    write_output(text, a.loss_out);
  }
  std::cerr << variant_name(spec.variant) << " on " << core.num_nodes()
            << " nodes, final loss "
            << (result.report.loss_history.empty()
                    ? 0.0
                    : result.report.loss_history.back().total)
            << ", " << result.report.train_seconds << " s\n";
  return kExitOk;
}

struct PropagateArgs {
  std::string graph;
  bool weighted = false;
  std::string embedding;
  std::string map;
  int iterations = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int run_propagate(const PropagateArgs& a) {
  const LoadedGraph data = load_edge_list(a.graph, a.weighted);
  Embedding core = read_embedding(a.embedding);
  if (!a.map.empty()) {
    core.ids = read_id_map(a.map);
    if (core.ids.size() != core.z.rows()) {
      throw ValidationError("id map has " + std::to_string(core.ids.size()) +
                            " entries for " + std::to_string(core.z.rows()) +
                            " embedding rows");
    }
  }
  std::vector<NodeId> nodes;
  nodes.reserve(core.ids.size());
  for (std::uint64_t id : core.ids) nodes.push_back(data.dense_id(id));
  PropagationConfig cfg;
  cfg.iterations = a.iterations;
  cfg.seed = derive_seed(a.seed, streams::kPropagation);
  const PropagationResult result = propagate_all(data.graph, nodes, core.z, cfg);
  write_embedding(a.out, result.z, data.original_ids);
  std::cerr << "propagated " << data.graph.num_nodes() - nodes.size() << " nodes in "
            << result.layers.size() << " layers, " << result.unreachable
            << " unreachable\n";
  return kExitOk;
}

struct EvalArgs {
  std::string graph;
  bool weighted = false;
  std::string embedding;
  std::string pos;
  std::string neg;
  std::string labels;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const LoadedGraph data = load_edge_list(a.graph, a.weighted);
  const Embedding emb = read_embedding(a.embedding);
  const std::size_t n = data.graph.num_nodes();
  DenseMatrix z(n, emb.z.cols());
  std::vector<char> seen(n, 0);
  for (std::size_t r = 0; r < emb.ids.size(); ++r) {
    const NodeId v = data.dense_id(emb.ids[r]);
    seen[v] = 1;
    std::copy(emb.z.row(r).begin(), emb.z.row(r).end(), z.row(v).begin());
  }
  nlohmann::ordered_json j;
  if (!a.pos.empty() || !a.neg.empty()) {
    if (a.pos.empty() || a.neg.empty()) throw ValidationError("--pos and --neg go together");
    const auto pos = read_pairs(a.pos, data);
    const auto neg = read_pairs(a.neg, data);
    for (const auto* list : {&pos, &neg})
      for (const NodePair& p : *list)
        if (!seen[p.first] || !seen[p.second])
          throw ValidationError("pair references a node without an embedding");
    const LinkPredReport r = evaluate_pairs(z, pos, neg);
    j["auc"] = r.auc;
    j["ap"] = r.ap;
  }
  if (!a.labels.empty()) {
    for (std::size_t v = 0; v < n; ++v)
      if (!seen[v]) throw ValidationError("clustering needs an embedding for every node");
    const NodeLabels labels = load_labels(a.labels, n);
    const KMeansResult km =
        kmeans(z, labels.num_classes, derive_seed(a.seed, streams::kKMeans));
    j["nmi"] = nmi(km.labels, labels.labels);
    j["clusters"] = labels.num_classes;
    j["inertia"] = km.inertia;
  }
  if (j.empty()) throw ValidationError("eval needs --pos/--neg or --labels");
  std::string text;
  if (a.format == "json") {
    text = j.dump(2) + "\n";
  } else {
    std::string header, row;
    for (const auto& [key, value] : j.items()) {
      header += (header.empty() ? "" : "\t") + key;
      row += (row.empty() ? "" : "\t") + value.dump();
    }
    text = header + "\n" + row + "\n";
  }
  write_output(text, a.out);
  return kExitOk;
}

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model", m.model, "gae, vgae, deepgae, deepvgae, chebgae, chebvgae")
      ->capture_default_str();
  cmd->add_option("--dim", m.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--hidden", m.hidden, "hidden widths, comma separated");
  cmd->add_option("--epochs", m.epochs)->capture_default_str();
  cmd->add_option("--lr", m.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--max-nodes", m.max_nodes, "refuse to train above this size")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph autoencoders trained on k-cores with embedding propagation"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* decompose = app.add_subcommand("decompose", "k-core size table");
  decompose->add_option("--graph", dec.graph, "edge list")->required();
  decompose->add_flag("--weighted", dec.weighted);
  decompose->add_option("--format", dec.format)->check(CLI::IsMember({"tsv", "json"}));
  decompose->add_option("--out", dec.out, "output file (default stdout)");
  decompose->add_option("--k", dec.k, "also extract this core");
  decompose->add_option("--core-out", dec.core_out, "edge list for the --k core");

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "mask edges for link prediction");
  split->add_option("--graph", sp.graph)->required();
  split->add_flag("--weighted", sp.weighted);
  split->add_option("--val", sp.val, "validation fraction")->capture_default_str();
  split->add_option("--test", sp.test, "test fraction")->capture_default_str();
  split->add_option("--seed", sp.seed)->capture_default_str();
  split->add_option("--out", sp.out, "output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train an autoencoder on a k-core");
  train_cmd->add_option("--graph", tr.graph)->required();
  train_cmd->add_option("--features", tr.features, "TSV features (default identity)");
  train_cmd->add_flag("--weighted", tr.weighted);
  train_cmd->add_option("--k", tr.k, "core index (0 = whole graph)")->capture_default_str();
  add_model_options(train_cmd, tr.model);
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--out", tr.out, "embedding file (.gaez or TSV)")->required();
  train_cmd->add_option("--loss-out", tr.loss_out, "per-epoch loss TSV");

  PropagateArgs pr;
  auto* propagate = app.add_subcommand("propagate", "extend a core embedding");
  propagate->add_option("--graph", pr.graph)->required();
  propagate->add_flag("--weighted", pr.weighted);
  propagate->add_option("--embedding", pr.embedding, "core embedding")->required();
  propagate->add_option("--map", pr.map, "id map for the embedding rows");
  propagate->add_option("--iterations", pr.iterations)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  propagate->add_option("--seed", pr.seed)->capture_default_str();
  propagate->add_option("--out", pr.out, "output embedding")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "score an embedding");
  eval->add_option("--graph", ev.graph, "graph defining node ids")->required();
  eval->add_flag("--weighted", ev.weighted);
  eval->add_option("--embedding", ev.embedding)->required();
  eval->add_option("--pos", ev.pos, "positive pairs");
  eval->add_option("--neg", ev.neg, "negative pairs");
  eval->add_option("--labels", ev.labels, "node labels for clustering");
  eval->add_option("--seed", ev.seed)->capture_default_str();
  eval->add_option("--format", ev.format)->check(CLI::IsMember({"tsv", "json"}));
  eval->add_option("--out", ev.out);

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  auto* pipeline = app.add_subcommand("pipeline", "full experiment over several seeds");
  pipeline->add_option("--config", config_path, "key=value config file");
  for (const char* key : {"graph", "features", "labels", "dataset", "task", "k",
                          "node_budget", "model", "dim", "hidden", "epochs", "lr",
                          "max_nodes", "cheb_order", "val_frac", "test_frac", "runs",
                          "seed", "iterations", "out", "format", "reference",
                          "weighted", "write_embeddings"}) {
    std::string flags = std::string("--") + key;
    if (std::string dashed = key; dashed.find('_') != std::string::npos) {
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      flags += ",--" + dashed;
    }
    pipeline->add_option_function<std::string>(
        flags,
        [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*decompose) return run_decompose(dec);
    if (*split) return run_split(sp);
    if (*train_cmd) return run_train(tr);
    if (*propagate) return run_propagate(pr);
    if (*eval) return run_eval(ev);
    if (*pipeline) {
      PipelineConfig cfg =
          config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
      for (const auto& [key, value] : overrides) cfg.set(key, value);
      const RunSummary summary = run_pipeline(cfg);
      if (cfg.format == "json") {
        std::cout << report_json(summary, true);
      } else {
        std::cout << report_tsv(summary);
      }
      return kExitOk;
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
