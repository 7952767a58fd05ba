#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "coregae/dense.h"
#include "coregae/graph.h"
#include "coregae/sparse.h"

namespace coregae {

enum class Variant { kGae, kVgae, kDeepGae, kDeepVgae, kChebGae, kChebVgae };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
bool is_variational(Variant v);
bool is_chebyshev(Variant v);

struct ModelSpec {
  Variant variant = Variant::kGae;
  std::vector<std::size_t> hidden_dims = {32};
  std::size_t latent_dim = 16;
  int epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  int cheb_order = 3;
  double lambda_max = 2.0;
  // Training refuses graphs with more nodes than this.
  std::size_t max_nodes = 50000;

  // Defaults for a variant: one 32-wide hidden layer, two for Deep variants.
  static ModelSpec for_variant(Variant v);
  void validate() const;
};

// Graph operator used by every encoder layer. A GCN layer computes
// A_norm (H W); a Chebyshev layer computes sum_p T_p(L_scaled) (H W_p).
// Both operators are symmetric, which the backward pass relies on.
class GraphFilter {
 public:
  static GraphFilter gcn(const Graph& g);
  static GraphFilter chebyshev(const Graph& g, int order, double lambda_max);
  static GraphFilter for_spec(const Graph& g, const ModelSpec& spec);
  static GraphFilter from_normalized(SparseMatrix normalized);
  static GraphFilter from_laplacian(SparseMatrix scaled_laplacian, int order);

  bool is_chebyshev() const { return chebyshev_; }
  int order() const { return order_; }
  std::size_t num_terms() const { return chebyshev_ ? order_ + 1 : 1; }
  std::size_t num_nodes() const { return op_.rows(); }
  const SparseMatrix& op() const { return op_; }

  // sum_p T_p Y_p, evaluated with Clenshaw's recurrence for Chebyshev.
  DenseMatrix combine(std::span<const DenseMatrix> terms) const;
  // {T_0 x, ..., T_P x} via the three-term recurrence.
  std::vector<DenseMatrix> expand(const DenseMatrix& x) const;

 private:
  bool chebyshev_ = false;
  int order_ = 0;
  SparseMatrix op_;
};

// One weight matrix per filter term.
using Layer = std::vector<DenseMatrix>;

struct ModelParams {
  // Hidden layers followed by the output layer (the mean head for VAEs).
  std::vector<Layer> layers;
  // log-sigma head, VAE only; shares every earlier layer with the mean head.
  Layer log_sigma;

  std::vector<DenseMatrix*> tensors();
  std::vector<const DenseMatrix*> tensors() const;
  ModelParams zeros_like() const;
};

ModelParams init_params(const ModelSpec& spec, std::size_t input_dim,
                        std::size_t filter_terms, std::uint64_t seed);

struct EncoderOutput {
  DenseMatrix z;
  DenseMatrix mu;         // VAE only
  DenseMatrix log_sigma;  // VAE only
};

// With `noise` (n x f standard normal draws) a VAE returns the
// reparameterized sample mu + exp(log_sigma) * noise; without it Z = mu.
EncoderOutput encode(const ModelParams& params, const ModelSpec& spec,
                     const GraphFilter& filter, const NodeFeatures& x,
                     const DenseMatrix* noise = nullptr);

double decode_score(const DenseMatrix& z, NodeId i, NodeId j);
std::vector<double> decode_scores(const DenseMatrix& z,
                                  std::span<const NodePair> pairs);

struct LossAndGradient {
  double value = 0.0;
  DenseMatrix gradient;
};

// Weighted cross-entropy of sigmoid(Z Z^T) against the adjacency over all
// n^2 ordered pairs (diagonal counted as non-edges). Positive entries are
// weighted by (n^2 - 2m) / 2m and the mean is scaled by n^2 / (2 (n^2 - 2m)).
// Runs in O(n^2 f) time and O(n f) memory; no n x n buffer is allocated.
LossAndGradient reconstruction_loss(const DenseMatrix& z, const Graph& target);

struct KlResult {
  double value = 0.0;
  DenseMatrix grad_mu;
  DenseMatrix grad_log_sigma;
};

// KL(N(mu, sigma^2) || N(0, I)) summed over dimensions, averaged over nodes.
KlResult kl_term(const DenseMatrix& mu, const DenseMatrix& log_sigma);

struct LossTerms {
  double reconstruction = 0.0;
  double kl = 0.0;     // kl_term value (0 for AE variants)
  double total = 0.0;  // reconstruction + kl / n
};

// Training objective at `params` and, when `grads` is non-null, its exact
// gradient (grads must have the shape of params). VAEs require `noise`.
LossTerms objective(const ModelParams& params, const ModelSpec& spec,
                    const GraphFilter& filter, const NodeFeatures& x,
                    const Graph& target, const DenseMatrix* noise,
                    ModelParams* grads);

struct TrainReport {
  std::vector<LossTerms> loss_history;  // one entry per epoch
  double train_seconds = 0.0;
  DenseMatrix embedding;  // inference embedding (mu for VAEs)
  DenseMatrix mu;
  DenseMatrix log_sigma;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Full-batch Adam on the reconstruction loss (AE) or negative ELBO (VAE).
// Throws ValidationError above spec.max_nodes and NumericError on a
// non-finite loss.
TrainResult train(const Graph& g, const NodeFeatures& x, const ModelSpec& spec);

}  // namespace coregae
