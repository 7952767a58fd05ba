#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coregae/autoencoder.h"
#include "coregae/evaluation.h"
#include "coregae/graph.h"

namespace coregae {

enum class Task { kLinkPrediction, kNodeClustering };

std::string_view task_name(Task t);
Task parse_task(std::string_view name);

// Keys of the key=value config file match these field names; `k` accepts an
// integer or "max-tractable", `hidden` a comma-separated list.
struct PipelineConfig {
  std::filesystem::path graph;
  std::filesystem::path features;  // empty: featureless
  std::filesystem::path labels;    // required for clustering
  std::string dataset;             // report label; defaults to the graph stem
  bool weighted = false;
  Task task = Task::kLinkPrediction;
  std::optional<std::uint32_t> k = 0;  // nullopt: max-tractable
  std::size_t node_budget = 50000;     // used by max-tractable
  ModelSpec model;
  double val_frac = 0.05;
  double test_frac = 0.10;
  int runs = 1;
  std::uint64_t seed = 0;
  int iterations = 10;
  std::filesystem::path out;           // empty: nothing written
  std::string format = "json";         // report format: tsv or json
  std::filesystem::path reference;     // report.json of a reference run
  bool write_embeddings = true;
  bool hidden_set = false;  // hidden given explicitly; model keeps it

  // Applies one key=value setting; throws ValidationError on unknown keys.
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Smallest k >= 2 whose k-core has at most `node_budget` nodes, otherwise
// the degeneracy.
std::uint32_t select_core_k(const Graph& g, std::size_t node_budget);

struct RunRecord {
  std::uint64_t seed = 0;
  std::uint32_t core_k = 0;
  std::size_t core_nodes = 0;
  std::size_t core_edges = 0;
  std::optional<LinkPredReport> test;
  std::optional<LinkPredReport> val;
  std::optional<ClusterReport> cluster;
  TimingReport timing;
  double final_loss = 0.0;
  std::size_t propagation_layers = 0;
  std::size_t unreachable = 0;
};

struct Aggregate {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(runs); 0 for one run
};

Aggregate aggregate(const std::vector<double>& values);

struct RunSummary {
  std::string dataset;
  std::string model;
  Task task = Task::kLinkPrediction;
  std::string core_k;  // requested k or "max-tractable"
  std::vector<RunRecord> runs;
  std::map<std::string, Aggregate> metrics;  // e.g. "auc", "core_size", "total_s"
  std::optional<double> speed_gain;
};

RunRecord run_once(const PipelineConfig& cfg, const LoadedGraph& data,
                   const NodeFeatures& features, const NodeLabels* labels,
                   std::uint64_t seed);

// Runs cfg.runs seeds (cfg.seed, cfg.seed + 1, ...). When cfg.out is set,
// writes run_<seed>/ embeddings and metrics plus report.{json,tsv} and
// metrics.json (report without timings).
RunSummary run_pipeline(const PipelineConfig& cfg);

// Recomputes the aggregates of `summary` from its runs.
void summarize(RunSummary& summary);

std::string report_json(const RunSummary& summary, bool include_timings);
std::string report_tsv(const RunSummary& summary);
void emit_report(const RunSummary& summary, std::string_view format,
                 const std::filesystem::path& path);

// Mean total seconds recorded in a report.json.
double read_reference_total(const std::filesystem::path& report);

}  // namespace coregae
