#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coregae/dense.h"
#include "coregae/graph.h"

namespace coregae {

// P(score(pos) > score(neg)) with ties counted as 1/2.
double roc_auc(std::span<const double> pos, std::span<const double> neg);

// Sum over distinct score thresholds (descending) of
// (recall_k - recall_{k-1}) * precision_k; equal scores form one group.
double average_precision(std::span<const double> pos, std::span<const double> neg);

struct LinkPredReport {
  double auc = 0.0;
  double ap = 0.0;
  std::string split;  // "val" or "test"
  std::uint64_t run_seed = 0;
};

LinkPredReport evaluate_pairs(const DenseMatrix& z, std::span<const NodePair> pos,
                              std::span<const NodePair> neg);

// Scores the test pairs, or the validation pairs when `validation` is set.
LinkPredReport link_prediction_eval(const DenseMatrix& z, const EdgeSplit& split,
                                    bool validation = false);

struct KMeansResult {
  std::vector<int> labels;
  DenseMatrix centroids;
  double inertia = 0.0;
  int iterations = 0;
  // inertia after each assignment step of the kept restart
  std::vector<double> inertia_history;
};

// k-means++ seeding then Lloyd iterations until the assignment is stable or
// max_iter is reached; the restart with lowest inertia is kept.
KMeansResult kmeans(const DenseMatrix& z, int k, std::uint64_t seed,
                    int max_iter = 300, int n_init = 10);

// MI(U, V) / ((H(U) + H(V)) / 2), natural logs.
double nmi(std::span<const int> pred, std::span<const int> truth);

struct ClusterReport {
  double nmi = 0.0;
  int k = 0;
  std::uint64_t kmeans_seed = 0;
  double inertia = 0.0;
};

struct TimingReport {
  double kcore_seconds = 0.0;
  double train_seconds = 0.0;
  double propagation_seconds = 0.0;
  double total_seconds = 0.0;
  std::optional<double> speed_gain;
};

}  // namespace coregae
