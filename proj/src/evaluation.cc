#include "coregae/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "coregae/autoencoder.h"
#include "coregae/error.h"
#include "coregae/rng.h"

namespace coregae {
namespace {

void require_non_empty(std::span<const double> pos, std::span<const double> neg,
                       const char* what) {
  if (pos.empty() || neg.empty()) {
    throw ValidationError(std::string(what) +
                          " needs non-empty positive and negative scores");
  }
  for (double s : pos)
    if (std::isnan(s)) throw NumericError(std::string(what) + ": NaN score");
  for (double s : neg)
    if (std::isnan(s)) throw NumericError(std::string(what) + ": NaN score");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

DenseMatrix seed_centroids(const DenseMatrix& z, int k, Rng& rng) {
  const std::size_t n = z.rows();
  DenseMatrix c(k, z.cols());
  std::size_t first = rng.uniform_index(n);
  std::copy(z.row(first).begin(), z.row(first).end(), c.row(0).begin());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(z.row(i), c.row(0));
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = rng.uniform_index(n);
    }
    std::copy(z.row(pick).begin(), z.row(pick).end(), c.row(j).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(z.row(i), c.row(j)));
  }
  return c;
}

KMeansResult lloyd(const DenseMatrix& z, DenseMatrix centroids, int max_iter) {
  const std::size_t n = z.rows();
  const std::size_t f = z.cols();
  const int k = static_cast<int>(centroids.rows());
  KMeansResult r;
  r.labels.assign(n, -1);
  std::vector<std::size_t> counts(k);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = squared_distance(z.row(i), centroids.row(j));
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (r.labels[i] != best) changed = true;
      r.labels[i] = best;
      inertia += best_d;
    }
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = it + 1;
    if (!changed) break;
    DenseMatrix sums(k, f);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(r.labels[i]);
      auto x = z.row(i);
      for (std::size_t c = 0; c < f; ++c) s[c] += x[c];
      ++counts[r.labels[i]];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      auto dst = centroids.row(j);
      auto s = sums.row(j);
      for (std::size_t c = 0; c < f; ++c) dst[c] = s[c] / static_cast<double>(counts[j]);
    }
  }
  r.centroids = std::move(centroids);
  return r;
}

double entropy(const std::vector<std::size_t>& counts, double n) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<int> compact(std::span<const int> labels, int& num) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  num = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(ids[l]);
  return out;
}

}  // namespace

double roc_auc(std::span<const double> pos, std::span<const double> neg) {
  require_non_empty(pos, neg, "roc_auc");
  std::vector<double> sorted(neg.begin(), neg.end());
  std::sort(sorted.begin(), sorted.end());
  // 2 * (#greater) + #ties, an exact integer
  std::uint64_t twice = 0;
  for (double p : pos) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
    auto hi = std::upper_bound(lo, sorted.end(), p);
    twice += 2 * static_cast<std::uint64_t>(lo - sorted.begin()) +
             static_cast<std::uint64_t>(hi - lo);
  }
  const double pairs = static_cast<double>(pos.size()) * static_cast<double>(neg.size());
  return static_cast<double>(twice) / (2.0 * pairs);
}

double average_precision(std::span<const double> pos, std::span<const double> neg) {
  require_non_empty(pos, neg, "average_precision");
  struct Scored {
    double score;
    bool positive;
  };
  std::vector<Scored> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.push_back({s, true});
  for (double s : neg) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.score > b.score; });
  const double total_pos = static_cast<double>(pos.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  double ap = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t group_tp = 0;
    const double s = all[i].score;
    while (i < all.size() && all[i].score == s) {
      if (all[i].positive) {
        ++group_tp;
      } else {
        ++fp;
      }
      ++i;
    }
    tp += group_tp;
    if (group_tp == 0) continue;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (static_cast<double>(group_tp) / total_pos) * precision;
  }
  return ap;
}

LinkPredReport evaluate_pairs(const DenseMatrix& z, std::span<const NodePair> pos,
                              std::span<const NodePair> neg) {
  const std::vector<double> ps = decode_scores(z, pos);
  const std::vector<double> ns = decode_scores(z, neg);
  LinkPredReport r;
  r.auc = roc_auc(ps, ns);
  r.ap = average_precision(ps, ns);
  return r;
}

LinkPredReport link_prediction_eval(const DenseMatrix& z, const EdgeSplit& split,
                                    bool validation) {
  LinkPredReport r = validation ? evaluate_pairs(z, split.val_pos, split.val_neg)
                                : evaluate_pairs(z, split.test_pos, split.test_neg);
  r.split = validation ? "val" : "test";
  r.run_seed = split.seed;
  return r;
}

KMeansResult kmeans(const DenseMatrix& z, int k, std::uint64_t seed, int max_iter,
                    int n_init) {
  if (k < 1) throw ValidationError("kmeans: k must be positive");
  if (static_cast<std::size_t>(k) > z.rows()) {
    throw ValidationError("kmeans: k = " + std::to_string(k) + " exceeds " +
                          std::to_string(z.rows()) + " points");
  }
  if (max_iter < 1 || n_init < 1) {
    throw ValidationError("kmeans: max_iter and n_init must be positive");
  }
  require_finite(z, "kmeans input");
  Rng rng(seed);
  KMeansResult best;
  for (int run = 0; run < n_init; ++run) {
    KMeansResult r = lloyd(z, seed_centroids(z, k, rng), max_iter);
    if (run == 0 || r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ValidationError("nmi: label vectors differ in length (" +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw ValidationError("nmi: empty labelings");
  int ku = 0;
  int kv = 0;
  const std::vector<int> u = compact(pred, ku);
  const std::vector<int> v = compact(truth, kv);
  const double n = static_cast<double>(u.size());
  std::vector<std::size_t> cu(ku), cv(kv), joint(static_cast<std::size_t>(ku) * kv);
  for (std::size_t i = 0; i < u.size(); ++i) {
    ++cu[u[i]];
    ++cv[v[i]];
    ++joint[static_cast<std::size_t>(u[i]) * kv + v[i]];
  }
  const double hu = entropy(cu, n);
  const double hv = entropy(cv, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;
  if (hu == 0.0 || hv == 0.0) return 0.0;
  double mi = 0.0;
  for (int a = 0; a < ku; ++a) {
    for (int b = 0; b < kv; ++b) {
      const std::size_t c = joint[static_cast<std::size_t>(a) * kv + b];
      if (c == 0) continue;
      const double pab = static_cast<double>(c) / n;
      mi += pab * std::log(static_cast<double>(c) * n /
                           (static_cast<double>(cu[a]) * static_cast<double>(cv[b])));
    }
  }
  return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

}  // namespace coregae
