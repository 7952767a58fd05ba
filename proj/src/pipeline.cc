#include "coregae/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "json.hpp"

#include "coregae/degeneracy.h"
#include "coregae/embedding_io.h"
#include "coregae/error.h"
#include "coregae/propagation.h"
#include "coregae/rng.h"
#include "text_io.h"

namespace coregae {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && detail::is_space(s[b])) ++b;
  while (e > b && detail::is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_value(std::string_view key, std::string_view value) {
  T out{};
  if (!detail::parse_number(value, out)) {
    throw ValidationError("invalid value for " + std::string(key) + ": '" +
                          std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ValidationError("invalid boolean for " + std::string(key) + ": '" +
                        std::string(value) + "'");
}

std::vector<std::size_t> parse_dims(std::string_view key, std::string_view value) {
  std::vector<std::size_t> dims;
  if (value.empty() || value == "none") return dims;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t end = value.find(',', pos);
    if (end == std::string_view::npos) end = value.size();
    dims.push_back(parse_value<std::size_t>(key, trim(value.substr(pos, end - pos))));
    pos = end + 1;
  }
  return dims;
}

void add_metric(json& obj, const char* name, const Aggregate& a) {
  obj[name] = {{"mean", a.mean}, {"se", a.se}};
}

json run_json(const RunSummary& s, const RunRecord& r, bool include_timings) {
  json j;
  j["dataset"] = s.dataset;
  j["model"] = s.model;
  j["core_k"] = r.core_k;
  j["seed"] = r.seed;
  j["core_nodes"] = r.core_nodes;
  j["core_edges"] = r.core_edges;
  if (r.test) {
    j["auc"] = r.test->auc;
    j["ap"] = r.test->ap;
  }
  if (r.val) {
    j["val_auc"] = r.val->auc;
    j["val_ap"] = r.val->ap;
  }
  if (r.cluster) {
    j["nmi"] = r.cluster->nmi;
    j["clusters"] = r.cluster->k;
    j["inertia"] = r.cluster->inertia;
  }
  j["final_loss"] = r.final_loss;
  j["propagation_layers"] = r.propagation_layers;
  j["unreachable"] = r.unreachable;
  if (include_timings) {
    j["timings"] = {{"kcore_s", r.timing.kcore_seconds},
                    {"train_s", r.timing.train_seconds},
                    {"propagate_s", r.timing.propagation_seconds},
                    {"total_s", r.timing.total_seconds}};
  }
  return j;
}

bool is_timing_metric(const std::string& name) {
  return name.size() > 2 && name.compare(name.size() - 2, 2, "_s") == 0;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace

std::string_view task_name(Task t) {
  return t == Task::kLinkPrediction ? "link_prediction" : "node_clustering";
}

Task parse_task(std::string_view name) {
  if (name == "link_prediction" || name == "link-prediction" || name == "lp") {
    return Task::kLinkPrediction;
  }
  if (name == "node_clustering" || name == "node-clustering" || name == "clustering") {
    return Task::kNodeClustering;
  }
  throw ValidationError("unknown task '" + std::string(name) +
                        "' (expected link_prediction or node_clustering)");
}

void PipelineConfig::set(std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (key == "graph") {
    graph = value;
  } else if (key == "features") {
    features = value;
  } else if (key == "labels") {
    labels = value;
  } else if (key == "dataset") {
    dataset = value;
  } else if (key == "weighted") {
    weighted = parse_bool(key, value);
  } else if (key == "task") {
    task = parse_task(value);
  } else if (key == "k" || key == "core_k") {
    if (value == "max-tractable" || value == "max_tractable" || value == "auto") {
      k.reset();
    } else {
      k = parse_value<std::uint32_t>(key, value);
    }
  } else if (key == "node_budget") {
    node_budget = parse_value<std::size_t>(key, value);
  } else if (key == "model") {
    const Variant v = parse_variant(value);
    if (!hidden_set) model.hidden_dims = ModelSpec::for_variant(v).hidden_dims;
    model.variant = v;
  } else if (key == "dim" || key == "latent_dim") {
    model.latent_dim = parse_value<std::size_t>(key, value);
  } else if (key == "hidden" || key == "hidden_dims") {
    model.hidden_dims = parse_dims(key, value);
    hidden_set = true;
  } else if (key == "epochs") {
    model.epochs = parse_value<int>(key, value);
  } else if (key == "lr" || key == "learning_rate") {
    model.learning_rate = parse_value<double>(key, value);
  } else if (key == "cheb_order") {
    model.cheb_order = parse_value<int>(key, value);
  } else if (key == "max_nodes") {
    model.max_nodes = parse_value<std::size_t>(key, value);
  } else if (key == "val_frac") {
    val_frac = parse_value<double>(key, value);
  } else if (key == "test_frac") {
    test_frac = parse_value<double>(key, value);
  } else if (key == "runs") {
    runs = parse_value<int>(key, value);
  } else if (key == "seed") {
    seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "iterations") {
    iterations = parse_value<int>(key, value);
  } else if (key == "out") {
    out = value;
  } else if (key == "format") {
    format = value;
  } else if (key == "reference") {
    reference = value;
  } else if (key == "write_embeddings") {
    write_embeddings = parse_bool(key, value);
  } else {
    throw ValidationError("unknown config key '" + std::string(key) + "'");
  }
}

void PipelineConfig::validate() const {
  if (graph.empty()) throw ValidationError("no graph given");
  if (task == Task::kNodeClustering && labels.empty()) {
    throw ValidationError("node clustering needs a labels file");
  }
  if (runs < 1) throw ValidationError("runs must be >= 1");
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (node_budget < 1) throw ValidationError("node_budget must be >= 1");
  if (!(val_frac >= 0.0) || !(test_frac >= 0.0) || !(val_frac + test_frac < 1.0)) {
    throw ValidationError("split fractions must satisfy 0 <= val + test < 1");
  }
  if (task == Task::kLinkPrediction && test_frac <= 0.0) {
    throw ValidationError("link prediction needs test_frac > 0");
  }
  if (format != "json" && format != "tsv") {
    throw ValidationError("format must be json or tsv");
  }
  model.validate();
  if (model.epochs < 1) throw ValidationError("epochs must be >= 1");
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  detail::for_each_data_line(text, [&](std::size_t line_no, std::string_view line) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(detail::line_error(line_no, "expected key=value", line));
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(detail::line_error(line_no, "empty key", line));
    cfg.set(key, line.substr(eq + 1));
  });
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(detail::read_file(path));
}

std::uint32_t select_core_k(const Graph& g, std::size_t node_budget) {
  if (node_budget < 1) throw ValidationError("node budget must be >= 1");
  const auto table = core_size_table(g);
  for (const CoreSizeRow& row : table) {
    if (row.k >= 2 && row.nodes <= node_budget) return row.k;
  }
  return table.empty() ? 0 : table.back().k;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

RunRecord run_once(const PipelineConfig& cfg, const LoadedGraph& data,
                   const NodeFeatures& features, const NodeLabels* labels,
                   std::uint64_t seed) {
  const auto start = Clock::now();
  RunRecord rec;
  rec.seed = seed;
  const bool link = cfg.task == Task::kLinkPrediction;

  std::optional<EdgeSplit> split;
  if (link) {
    split = split_edges(data.graph, cfg.val_frac, cfg.test_frac,
                        derive_seed(seed, streams::kSplit));
  }
  const Graph& base = link ? split->train_graph : data.graph;

  auto t = Clock::now();
  const CoreDecomposition cores = core_numbers(base);
  rec.core_k = cfg.k ? *cfg.k : select_core_k(base, cfg.node_budget);
  if (rec.core_k > cores.degeneracy) {
    throw ValidationError("the " + std::to_string(rec.core_k) +
                          "-core is empty; the graph's degeneracy is " +
                          std::to_string(cores.degeneracy));
  }
  auto [core, mapping] = k_core(base, cores, rec.core_k);
  rec.core_nodes = core.num_nodes();
  rec.core_edges = core.num_edges();
  rec.timing.kcore_seconds = seconds_since(t);

  t = Clock::now();
  ModelSpec spec = cfg.model;
  spec.seed = seed;
  const NodeFeatures core_features = features.select_rows(mapping.to_parent);
  TrainResult trained = train(core, core_features, spec);
  rec.final_loss = trained.report.loss_history.empty()
                       ? 0.0
                       : trained.report.loss_history.back().total;
  rec.timing.train_seconds = seconds_since(t);

  t = Clock::now();
  PropagationConfig pcfg;
  pcfg.iterations = cfg.iterations;
  pcfg.seed = derive_seed(seed, streams::kPropagation);
  PropagationResult prop =
      propagate_all(base, mapping.to_parent, trained.report.embedding, pcfg);
  rec.propagation_layers = prop.layers.size();
  rec.unreachable = prop.unreachable;
  rec.timing.propagation_seconds = seconds_since(t);

  if (link) {
    rec.test = link_prediction_eval(prop.z, *split, false);
    if (!split->val_pos.empty()) rec.val = link_prediction_eval(prop.z, *split, true);
  } else {
    ClusterReport cr;
    cr.k = labels->num_classes;
    cr.kmeans_seed = derive_seed(seed, streams::kKMeans);
    KMeansResult km = kmeans(prop.z, cr.k, cr.kmeans_seed);
    cr.inertia = km.inertia;
    cr.nmi = nmi(km.labels, labels->labels);
    rec.cluster = cr;
  }
  rec.timing.total_seconds = seconds_since(start);

  if (!cfg.out.empty() && cfg.write_embeddings) {
    const auto dir = cfg.out / ("run_" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    write_embedding(dir / "embedding.gaez", prop.z, data.original_ids);
  }
  return rec;
}

void summarize(RunSummary& s) {
  s.metrics.clear();
  auto collect = [&](const char* name, auto&& get) {
    std::vector<double> v;
    for (const RunRecord& r : s.runs) {
      if (auto x = get(r)) v.push_back(*x);
    }
    if (!v.empty()) s.metrics[name] = aggregate(v);
  };
  using Opt = std::optional<double>;
  collect("core_size", [](const RunRecord& r) -> Opt { return double(r.core_nodes); });
  collect("core_edges", [](const RunRecord& r) -> Opt { return double(r.core_edges); });
  collect("auc", [](const RunRecord& r) -> Opt {
    return r.test ? Opt(r.test->auc) : std::nullopt;
  });
  collect("ap", [](const RunRecord& r) -> Opt {
    return r.test ? Opt(r.test->ap) : std::nullopt;
  });
  collect("val_auc", [](const RunRecord& r) -> Opt {
    return r.val ? Opt(r.val->auc) : std::nullopt;
  });
  collect("val_ap", [](const RunRecord& r) -> Opt {
    return r.val ? Opt(r.val->ap) : std::nullopt;
  });
  collect("nmi", [](const RunRecord& r) -> Opt {
    return r.cluster ? Opt(r.cluster->nmi) : std::nullopt;
  });
  collect("kcore_s", [](const RunRecord& r) -> Opt { return r.timing.kcore_seconds; });
  collect("train_s", [](const RunRecord& r) -> Opt { return r.timing.train_seconds; });
  collect("propagate_s",
          [](const RunRecord& r) -> Opt { return r.timing.propagation_seconds; });
  collect("total_s", [](const RunRecord& r) -> Opt { return r.timing.total_seconds; });
}

RunSummary run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const LoadedGraph data = load_edge_list(cfg.graph, cfg.weighted);
  const std::size_t n = data.graph.num_nodes();
  const NodeFeatures features = cfg.features.empty()
                                    ? NodeFeatures::identity_of(n)
                                    : load_features(cfg.features, n);
  std::optional<NodeLabels> labels;
  if (cfg.task == Task::kNodeClustering) labels = load_labels(cfg.labels, n);

  RunSummary s;
  s.dataset = cfg.dataset.empty() ? cfg.graph.stem().string() : cfg.dataset;
  s.model = std::string(variant_name(cfg.model.variant));
  s.task = cfg.task;
  s.core_k = cfg.k ? std::to_string(*cfg.k) : "max-tractable";
  for (int r = 0; r < cfg.runs; ++r) {
    s.runs.push_back(run_once(cfg, data, features, labels ? &*labels : nullptr,
                              cfg.seed + static_cast<std::uint64_t>(r)));
  }
  summarize(s);
  if (!cfg.reference.empty()) {
    const double ref = read_reference_total(cfg.reference);
    const double mine = s.metrics.at("total_s").mean;
    if (mine > 0.0) s.speed_gain = ref / mine;
  }

  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    for (const RunRecord& r : s.runs) {
      RunSummary one = s;
      one.runs = {r};
      one.speed_gain.reset();
      summarize(one);
      const auto dir = cfg.out / ("run_" + std::to_string(r.seed));
      std::filesystem::create_directories(dir);
      write_text(dir / "metrics.json", report_json(one, false));
    }
    write_text(cfg.out / "metrics.json", report_json(s, false));
    emit_report(s, "json", cfg.out / "report.json");
    emit_report(s, "tsv", cfg.out / "report.tsv");
  }
  return s;
}

std::string report_json(const RunSummary& s, bool include_timings) {
  json j;
  j["dataset"] = s.dataset;
  j["model"] = s.model;
  j["task"] = std::string(task_name(s.task));
  j["core_k"] = s.core_k;
  j["runs"] = s.runs.size();
  json metrics = json::object();
  for (const auto& [name, agg] : s.metrics) {
    if (!include_timings && is_timing_metric(name)) continue;
    add_metric(metrics, name.c_str(), agg);
  }
  j["summary"] = std::move(metrics);
  if (include_timings && s.speed_gain) j["speed_gain"] = *s.speed_gain;
  json runs = json::array();
  for (const RunRecord& r : s.runs) runs.push_back(run_json(s, r, include_timings));
  j["per_run"] = std::move(runs);
  return j.dump(2) + "\n";
}

std::string report_tsv(const RunSummary& s) {
  std::vector<std::string> header = {"dataset", "model", "task", "core_k", "runs"};
  std::vector<std::string> row = {s.dataset, s.model, std::string(task_name(s.task)),
                                  s.core_k, std::to_string(s.runs.size())};
  auto add = [&](const std::string& name) {
    auto it = s.metrics.find(name);
    if (it == s.metrics.end()) return;
    if (is_timing_metric(name)) {
      header.push_back(name);
      row.push_back(detail::format_double(it->second.mean));
      return;
    }
    header.push_back(name + "_mean");
    row.push_back(detail::format_double(it->second.mean));
    header.push_back(name + "_se");
    row.push_back(detail::format_double(it->second.se));
  };
  for (const char* name : {"core_size", "core_edges", "auc", "ap", "val_auc", "val_ap",
                           "nmi", "kcore_s", "train_s", "propagate_s", "total_s"}) {
    add(name);
  }
  if (s.speed_gain) {
    header.push_back("speed_gain");
    row.push_back(detail::format_double(*s.speed_gain));
  }
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "\t" : "") + header[i];
  out += '\n';
  for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + row[i];
  out += '\n';
  return out;
}

void emit_report(const RunSummary& summary, std::string_view format,
                 const std::filesystem::path& path) {
  if (format == "json") {
    write_text(path, report_json(summary, true));
  } else if (format == "tsv") {
    write_text(path, report_tsv(summary));
  } else {
    throw ValidationError("unknown report format '" + std::string(format) + "'");
  }
}

double read_reference_total(const std::filesystem::path& report) {
  const std::string text = detail::read_file(report);
  try {
    const json j = json::parse(text);
    return j.at("summary").at("total_s").at("mean").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(report.string() + ": not a report with summary.total_s (" +
                     e.what() + ")");
  }
}

}  // namespace coregae
