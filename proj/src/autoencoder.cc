#include "coregae/autoencoder.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "coregae/adam.h"
#include "coregae/error.h"
#include "coregae/rng.h"

namespace coregae {
namespace {

struct VariantInfo {
  Variant variant;
  std::string_view name;
};

constexpr VariantInfo kVariants[] = {
    {Variant::kGae, "gae"},         {Variant::kVgae, "vgae"},
    {Variant::kDeepGae, "deepgae"}, {Variant::kDeepVgae, "deepvgae"},
    {Variant::kChebGae, "chebgae"}, {Variant::kChebVgae, "chebvgae"},
};

// Dense linear map of the layer input. `h` is null for identity features.
DenseMatrix project(const DenseMatrix* h, const DenseMatrix& w) {
  return h == nullptr ? w : matmul(*h, w);
}

DenseMatrix apply_layer(const GraphFilter& filter, const DenseMatrix* h,
                        const Layer& layer) {
  std::vector<DenseMatrix> terms;
  terms.reserve(layer.size());
  for (const DenseMatrix& w : layer) terms.push_back(project(h, w));
  return filter.combine(terms);
}

// Accumulates weight gradients for one layer given the gradient of its
// output; returns the gradient of the layer input when `need_input`.
DenseMatrix backward_layer(const GraphFilter& filter, const DenseMatrix* h,
                           const Layer& layer, const DenseMatrix& d_out,
                           Layer& d_layer, bool need_input) {
  std::vector<DenseMatrix> c = filter.expand(d_out);
  DenseMatrix d_in;
  for (std::size_t p = 0; p < layer.size(); ++p) {
    if (h == nullptr) {
      d_layer[p] += c[p];
    } else {
      d_layer[p] += matmul_tn(*h, c[p]);
    }
    if (need_input) {
      DenseMatrix part = matmul_nt(c[p], layer[p]);
      if (d_in.empty()) {
        d_in = std::move(part);
      } else {
        d_in += part;
      }
    }
  }
  return d_in;
}

struct ForwardCache {
  std::vector<DenseMatrix> inputs;  // inputs[l] feeds layer l (l >= 1)
  std::vector<DenseMatrix> pre;     // pre-activations of hidden layers
  DenseMatrix mu;
  DenseMatrix log_sigma;
};

const DenseMatrix* layer_input(const ForwardCache& cache, const NodeFeatures& x,
                               std::size_t l) {
  if (l == 0) return x.identity ? nullptr : &x.values;
  return &cache.inputs[l];
}

ForwardCache forward(const ModelParams& params, const ModelSpec& spec,
                     const GraphFilter& filter, const NodeFeatures& x) {
  if (x.n != filter.num_nodes()) {
    throw ValidationError("features have " + std::to_string(x.n) +
                          " rows but the graph has " +
                          std::to_string(filter.num_nodes()) + " nodes");
  }
  const std::size_t hidden = params.layers.size() - 1;
  ForwardCache cache;
  cache.inputs.resize(hidden + 1);
  for (std::size_t l = 0; l < hidden; ++l) {
    cache.pre.push_back(
        apply_layer(filter, layer_input(cache, x, l), params.layers[l]));
    cache.inputs[l + 1] = relu(cache.pre.back());
  }
  const DenseMatrix* h = layer_input(cache, x, hidden);
  cache.mu = apply_layer(filter, h, params.layers[hidden]);
  if (is_variational(spec.variant)) {
    cache.log_sigma = apply_layer(filter, h, params.log_sigma);
  }
  return cache;
}

DenseMatrix sample_z(const ForwardCache& cache, const DenseMatrix& noise) {
  if (!noise.same_shape(cache.mu)) {
    throw ValidationError("noise shape does not match the latent shape");
  }
  DenseMatrix z = cache.mu;
  auto zv = z.data();
  auto ls = cache.log_sigma.data();
  auto e = noise.data();
  for (std::size_t i = 0; i < zv.size(); ++i) zv[i] += std::exp(ls[i]) * e[i];
  return z;
}

Layer zeros_like(const Layer& layer) {
  Layer out;
  out.reserve(layer.size());
  for (const DenseMatrix& w : layer) out.emplace_back(w.rows(), w.cols());
  return out;
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& info : kVariants)
    if (info.variant == v) return info.name;
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  lower.erase(std::remove(lower.begin(), lower.end(), '-'), lower.end());
  lower.erase(std::remove(lower.begin(), lower.end(), '_'), lower.end());
  for (const auto& info : kVariants)
    if (info.name == lower) return info.variant;
  throw ValidationError("unknown model variant '" + std::string(name) +
                        "' (expected gae, vgae, deepgae, deepvgae, chebgae or "
                        "chebvgae)");
}

bool is_variational(Variant v) {
  return v == Variant::kVgae || v == Variant::kDeepVgae ||
         v == Variant::kChebVgae;
}

bool is_chebyshev(Variant v) {
  return v == Variant::kChebGae || v == Variant::kChebVgae;
}

ModelSpec ModelSpec::for_variant(Variant v) {
  ModelSpec spec;
  spec.variant = v;
  if (v == Variant::kDeepGae || v == Variant::kDeepVgae) spec.hidden_dims = {32, 32};
  return spec;
}

void ModelSpec::validate() const {
  if (latent_dim == 0) throw ValidationError("latent dimension must be positive");
  for (std::size_t h : hidden_dims)
    if (h == 0) throw ValidationError("hidden dimensions must be positive");
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning rate must be positive");
  if (is_chebyshev(variant)) {
    if (cheb_order < 0) throw ValidationError("Chebyshev order must be >= 0");
    if (!(lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
  }
  if (max_nodes == 0) throw ValidationError("node cap must be positive");
}

GraphFilter GraphFilter::gcn(const Graph& g) {
  return from_normalized(normalized_adjacency(g));
}

GraphFilter GraphFilter::chebyshev(const Graph& g, int order,
                                   double lambda_max) {
  return from_laplacian(scaled_laplacian(g, lambda_max), order);
}

GraphFilter GraphFilter::for_spec(const Graph& g, const ModelSpec& spec) {
  if (coregae::is_chebyshev(spec.variant)) {
    return chebyshev(g, spec.cheb_order, spec.lambda_max);
  }
  return gcn(g);
}

GraphFilter GraphFilter::from_normalized(SparseMatrix normalized) {
  GraphFilter f;
  f.op_ = std::move(normalized);
  return f;
}

GraphFilter GraphFilter::from_laplacian(SparseMatrix scaled_laplacian,
                                        int order) {
  if (order < 0) throw ValidationError("Chebyshev order must be >= 0");
  GraphFilter f;
  f.chebyshev_ = true;
  f.order_ = order;
  f.op_ = std::move(scaled_laplacian);
  return f;
}

DenseMatrix GraphFilter::combine(std::span<const DenseMatrix> terms) const {
  if (terms.size() != num_terms()) {
    throw ValidationError("filter expects " + std::to_string(num_terms()) +
                          " terms, got " + std::to_string(terms.size()));
  }
  if (!chebyshev_) return spmm(op_, terms[0]);
  const std::size_t p_max = terms.size() - 1;
  if (p_max == 0) return terms[0];
  // b_k = Y_k + 2 L b_{k+1} - b_{k+2};  result = Y_0 + L b_1 - b_2
  DenseMatrix b1 = terms[p_max];
  DenseMatrix b2(b1.rows(), b1.cols());
  for (std::size_t k = p_max - 1; k >= 1; --k) {
    DenseMatrix b = terms[k];
    spmm_accumulate(op_, b1, 2.0, b);
    b -= b2;
    b2 = std::move(b1);
    b1 = std::move(b);
  }
  DenseMatrix out = terms[0];
  spmm_accumulate(op_, b1, 1.0, out);
  out -= b2;
  return out;
}

std::vector<DenseMatrix> GraphFilter::expand(const DenseMatrix& x) const {
  std::vector<DenseMatrix> out;
  if (!chebyshev_) {
    out.push_back(spmm(op_, x));
    return out;
  }
  out.reserve(order_ + 1);
  out.push_back(x);
  if (order_ >= 1) out.push_back(spmm(op_, x));
  for (int p = 2; p <= order_; ++p) {
    DenseMatrix next = out[p - 2];
    next *= -1.0;
    spmm_accumulate(op_, out[p - 1], 2.0, next);
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<DenseMatrix*> ModelParams::tensors() {
  std::vector<DenseMatrix*> out;
  for (Layer& layer : layers)
    for (DenseMatrix& w : layer) out.push_back(&w);
  for (DenseMatrix& w : log_sigma) out.push_back(&w);
  return out;
}

std::vector<const DenseMatrix*> ModelParams::tensors() const {
  std::vector<const DenseMatrix*> out;
  for (const Layer& layer : layers)
    for (const DenseMatrix& w : layer) out.push_back(&w);
  for (const DenseMatrix& w : log_sigma) out.push_back(&w);
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams out;
  for (const Layer& layer : layers) out.layers.push_back(coregae::zeros_like(layer));
  out.log_sigma = coregae::zeros_like(log_sigma);
  return out;
}

ModelParams init_params(const ModelSpec& spec, std::size_t input_dim,
                        std::size_t filter_terms, std::uint64_t seed) {
  if (input_dim == 0) throw ValidationError("input dimension must be positive");
  if (filter_terms == 0) throw ValidationError("filter needs at least one term");
  Rng rng(seed);
  ModelParams params;
  std::size_t in = input_dim;
  auto make_layer = [&](std::size_t out) {
    Layer layer;
    for (std::size_t p = 0; p < filter_terms; ++p)
      layer.push_back(glorot_init(in, out, rng));
    return layer;
  };
  for (std::size_t h : spec.hidden_dims) {
    params.layers.push_back(make_layer(h));
    in = h;
  }
  params.layers.push_back(make_layer(spec.latent_dim));
  if (is_variational(spec.variant)) params.log_sigma = make_layer(spec.latent_dim);
  return params;
}

EncoderOutput encode(const ModelParams& params, const ModelSpec& spec,
                     const GraphFilter& filter, const NodeFeatures& x,
                     const DenseMatrix* noise) {
  ForwardCache cache = forward(params, spec, filter, x);
  EncoderOutput out;
  if (is_variational(spec.variant)) {
    out.z = noise == nullptr ? cache.mu : sample_z(cache, *noise);
    out.mu = std::move(cache.mu);
    out.log_sigma = std::move(cache.log_sigma);
  } else {
    out.z = std::move(cache.mu);
  }
  return out;
}

double decode_score(const DenseMatrix& z, NodeId i, NodeId j) {
  auto a = z.row(i);
  auto b = z.row(j);
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return 1.0 / (1.0 + std::exp(-dot));
}

std::vector<double> decode_scores(const DenseMatrix& z,
                                  std::span<const NodePair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const NodePair& p : pairs) {
    if (p.first >= z.rows() || p.second >= z.rows()) {
      throw ValidationError("pair references a node outside the embedding");
    }
    out.push_back(decode_score(z, p.first, p.second));
  }
  return out;
}

LossAndGradient reconstruction_loss(const DenseMatrix& z, const Graph& target) {
  const std::size_t n = z.rows();
  const std::size_t f = z.cols();
  if (n == 0) throw ValidationError("reconstruction loss on an empty graph");
  if (target.num_nodes() != n) {
    throw ValidationError("embedding rows do not match the target graph");
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const double pos = 2.0 * static_cast<double>(target.num_edges());
  const double pos_weight = pos > 0.0 ? (n2 - pos) / pos : 1.0;
  const double norm = n2 / (2.0 * (n2 - pos));
  const double scale = norm / n2;

  LossAndGradient result;
  result.gradient = DenseMatrix(n, f);
  std::vector<double> dots(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* zi = z.row(i).data();
    for (std::size_t j = i; j < n; ++j) {
      const double* zj = z.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < f; ++k) acc += zi[k] * zj[k];
      dots[j] = acc;
    }
    auto nbrs = target.neighbors(static_cast<NodeId>(i));
    auto next = std::lower_bound(nbrs.begin(), nbrs.end(), static_cast<NodeId>(i));
    double row_loss = 0.0;
    double* gi = result.gradient.row(i).data();
    for (std::size_t j = i; j < n; ++j) {
      const double x = dots[j];
      const bool edge = next != nbrs.end() && *next == j;
      if (edge) ++next;
      const double e = std::exp(-std::abs(x));
      const double l1p = std::log1p(e);
      const double sig = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      double loss;
      double dl;
      if (edge) {
        loss = pos_weight * (std::max(-x, 0.0) + l1p);
        dl = pos_weight * (sig - 1.0);
      } else {
        loss = std::max(x, 0.0) + l1p;
        dl = sig;
      }
      const double g = 2.0 * scale * dl;
      const double* zj = z.row(j).data();
      if (j == i) {
        row_loss += loss;
        for (std::size_t k = 0; k < f; ++k) gi[k] += g * zi[k];
      } else {
        row_loss += 2.0 * loss;
        double* gj = result.gradient.row(j).data();
        for (std::size_t k = 0; k < f; ++k) {
          gi[k] += g * zj[k];
          gj[k] += g * zi[k];
        }
      }
    }
    total += row_loss;
  }
  result.value = scale * total;
  return result;
}

KlResult kl_term(const DenseMatrix& mu, const DenseMatrix& log_sigma) {
  if (!mu.same_shape(log_sigma)) {
    throw ValidationError("kl_term: mu and log_sigma shapes differ");
  }
  if (mu.rows() == 0) throw ValidationError("kl_term on an empty embedding");
  const double inv_n = 1.0 / static_cast<double>(mu.rows());
  KlResult out;
  out.grad_mu = DenseMatrix(mu.rows(), mu.cols());
  out.grad_log_sigma = DenseMatrix(mu.rows(), mu.cols());
  auto m = mu.data();
  auto ls = log_sigma.data();
  auto gm = out.grad_mu.data();
  auto gl = out.grad_log_sigma.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double var = std::exp(2.0 * ls[i]);
    acc += m[i] * m[i] + var - 1.0 - 2.0 * ls[i];
    gm[i] = m[i] * inv_n;
    gl[i] = (var - 1.0) * inv_n;
  }
  out.value = 0.5 * acc * inv_n;
  return out;
}

LossTerms objective(const ModelParams& params, const ModelSpec& spec,
                    const GraphFilter& filter, const NodeFeatures& x,
                    const Graph& target, const DenseMatrix* noise,
                    ModelParams* grads) {
  const bool vae = is_variational(spec.variant);
  if (vae && noise == nullptr) {
    throw ValidationError("variational objective requires a noise sample");
  }
  ForwardCache cache = forward(params, spec, filter, x);
  const DenseMatrix z = vae ? sample_z(cache, *noise) : cache.mu;
  LossAndGradient recon = reconstruction_loss(z, target);

  LossTerms terms;
  terms.reconstruction = recon.value;
  KlResult kl;
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  if (vae) {
    kl = kl_term(cache.mu, cache.log_sigma);
    terms.kl = kl.value;
  }
  terms.total = terms.reconstruction + terms.kl * inv_n;
  if (grads == nullptr) return terms;

  const std::size_t hidden = params.layers.size() - 1;
  const DenseMatrix* h_last = layer_input(cache, x, hidden);
  const bool need_input = hidden > 0;
  DenseMatrix d_h;
  if (vae) {
    DenseMatrix d_mu = recon.gradient;
    DenseMatrix d_ls = recon.gradient;
    auto dl = d_ls.data();
    auto ls = cache.log_sigma.data();
    auto e = noise->data();
    auto gm = kl.grad_mu.data();
    auto gl = kl.grad_log_sigma.data();
    auto dm = d_mu.data();
    for (std::size_t i = 0; i < dl.size(); ++i) {
      dl[i] = dl[i] * e[i] * std::exp(ls[i]) + gl[i] * inv_n;
      dm[i] += gm[i] * inv_n;
    }
    d_h = backward_layer(filter, h_last, params.layers[hidden], d_mu,
                         grads->layers[hidden], need_input);
    DenseMatrix d_h2 = backward_layer(filter, h_last, params.log_sigma, d_ls,
                                      grads->log_sigma, need_input);
    if (need_input) d_h += d_h2;
  } else {
    d_h = backward_layer(filter, h_last, params.layers[hidden], recon.gradient,
                         grads->layers[hidden], need_input);
  }
  for (std::size_t l = hidden; l-- > 0;) {
    DenseMatrix d_pre = relu_backward(d_h, cache.pre[l]);
    d_h = backward_layer(filter, layer_input(cache, x, l), params.layers[l],
                         d_pre, grads->layers[l], l > 0);
  }
  return terms;
}

TrainResult train(const Graph& g, const NodeFeatures& x, const ModelSpec& spec) {
  spec.validate();
  const std::size_t n = g.num_nodes();
  if (n == 0) throw ValidationError("cannot train on an empty graph");
  if (n > spec.max_nodes) {
    throw ValidationError(
        "training graph has " + std::to_string(n) + " nodes, above the cap of " +
        std::to_string(spec.max_nodes) + "; choose a larger core index k");
  }
  if (x.n != n) {
    throw ValidationError("features have " + std::to_string(x.n) +
                          " rows but the graph has " + std::to_string(n) +
                          " nodes");
  }
  const auto start = std::chrono::steady_clock::now();
  const GraphFilter filter = GraphFilter::for_spec(g, spec);
  TrainResult result;
  result.params = init_params(spec, x.d, filter.num_terms(),
                              derive_seed(spec.seed, streams::kInit));
  Rng noise_rng(derive_seed(spec.seed, streams::kNoise));
  AdamState adam;
  adam.learning_rate = spec.learning_rate;
  const bool vae = is_variational(spec.variant);
  result.report.loss_history.reserve(spec.epochs);
  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    DenseMatrix noise;
    if (vae) noise = normal_matrix(n, spec.latent_dim, noise_rng);
    ModelParams grads = result.params.zeros_like();
    LossTerms terms = objective(result.params, spec, filter, x, g,
                                vae ? &noise : nullptr, &grads);
    if (!std::isfinite(terms.reconstruction)) {
      throw NumericError("epoch " + std::to_string(epoch) +
                         ": reconstruction loss is not finite");
    }
    if (!std::isfinite(terms.kl)) {
      throw NumericError("epoch " + std::to_string(epoch) +
                         ": KL term is not finite");
    }
    for (const DenseMatrix* gm : grads.tensors()) {
      if (!gm->all_finite()) {
        throw NumericError("epoch " + std::to_string(epoch) +
                           ": gradient is not finite");
      }
    }
    auto p = result.params.tensors();
    auto gp = std::as_const(grads).tensors();
    adam_step(adam, p, gp);
    result.report.loss_history.push_back(terms);
  }
  EncoderOutput out = encode(result.params, spec, filter, x);
  require_finite(out.z, "trained embedding");
  result.report.embedding = std::move(out.z);
  result.report.mu = std::move(out.mu);
  result.report.log_sigma = std::move(out.log_sigma);
  result.report.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace coregae
