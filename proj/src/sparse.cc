#include "coregae/sparse.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "coregae/error.h"
#include "coregae/rng.h"

namespace coregae {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw ValidationError("from_triplets: entry (" + std::to_string(t.row) +
                            ", " + std::to_string(t.col) + ") out of range");
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  SparseMatrix s;
  s.rows_ = rows;
  s.cols_ = cols;
  s.row_ptr_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const Triplet& t = triplets[i];
    if (i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
      s.values_.back() += t.value;
      continue;
    }
    s.col_idx_.push_back(static_cast<std::uint32_t>(t.col));
    s.values_.push_back(t.value);
    ++s.row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) s.row_ptr_[r + 1] += s.row_ptr_[r];
  return s;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::row_sum(std::size_t r) const {
  double total = 0.0;
  for (double v : row_values(r)) total += v;
  return total;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto cols = row_cols(r);
    auto vals = row_values(r);
    for (std::size_t i = 0; i < cols.size(); ++i) d(r, cols[i]) += vals[i];
  }
  return d;
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  SparseMatrix out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

void spmm_accumulate(const SparseMatrix& s, const DenseMatrix& d, double scale,
                     DenseMatrix& out) {
  if (s.cols() != d.rows()) {
    throw ValidationError("spmm: sparse has " + std::to_string(s.cols()) +
                          " columns, dense has " + std::to_string(d.rows()) +
                          " rows");
  }
  if (out.rows() != s.rows() || out.cols() != d.cols()) {
    throw ValidationError("spmm: output shape mismatch");
  }
  const std::size_t width = d.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    auto cols = s.row_cols(r);
    auto vals = s.row_values(r);
    double* out_row = out.row(r).data();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const double a = scale * vals[i];
      const double* src = d.row(cols[i]).data();
      for (std::size_t j = 0; j < width; ++j) out_row[j] += a * src[j];
    }
  }
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
  if (s.cols() != d.rows()) {
    throw ValidationError("spmm: sparse has " + std::to_string(s.cols()) +
                          " columns, dense has " + std::to_string(d.rows()) +
                          " rows");
  }
  DenseMatrix out(s.rows(), d.cols());
  spmm_accumulate(s, d, 1.0, out);
  return out;
}

SparseMatrix normalized_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeId v = 0; v < n; ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(g.weighted_degree(v) + 1.0);
  }
  std::vector<Triplet> t;
  t.reserve(n + 2 * g.num_edges());
  for (NodeId v = 0; v < n; ++v) {
    auto nbrs = g.neighbors(v);
    auto ws = g.neighbor_weights(v);
    bool diagonal_done = false;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (!diagonal_done && nbrs[i] > v) {
        t.push_back({v, v, inv_sqrt[v] * inv_sqrt[v]});
        diagonal_done = true;
      }
      t.push_back({v, nbrs[i], ws[i] * inv_sqrt[v] * inv_sqrt[nbrs[i]]});
    }
    if (!diagonal_done) t.push_back({v, v, inv_sqrt[v] * inv_sqrt[v]});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix scaled_laplacian(const Graph& g, double lambda_max) {
  if (!(lambda_max > 0.0)) {
    throw ValidationError("scaled_laplacian: lambda_max must be positive");
  }
  const std::size_t n = g.num_nodes();
  const double scale = 2.0 / lambda_max;
  std::vector<double> inv_sqrt(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    const double d = g.weighted_degree(v);
    inv_sqrt[v] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  std::vector<Triplet> t;
  t.reserve(n + 2 * g.num_edges());
  for (NodeId v = 0; v < n; ++v) {
    t.push_back({v, v, scale - 1.0});
    auto nbrs = g.neighbors(v);
    auto ws = g.neighbor_weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      t.push_back({v, nbrs[i], -scale * ws[i] * inv_sqrt[v] * inv_sqrt[nbrs[i]]});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

double spectral_radius_estimate(const SparseMatrix& s, int iterations,
                                std::uint64_t seed) {
  if (s.rows() != s.cols()) {
    throw ValidationError("spectral_radius_estimate: matrix must be square");
  }
  const std::size_t n = s.rows();
  if (n == 0 || s.nnz() == 0) return 0.0;
  Rng rng(seed);
  DenseMatrix x(n, 1);
  // Strictly positive start so the Perron component is present.
  for (double& v : x.data()) v = 0.5 + rng.uniform01();
  x *= 1.0 / frobenius_norm(x);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    DenseMatrix y = spmm(s, x);
    DenseMatrix z = spmm(s, y);
    const double norm_z = frobenius_norm(z);
    if (norm_z == 0.0) return 0.0;
    const double next = std::sqrt(norm_z);  // ||x|| == 1
    z *= 1.0 / norm_z;
    x = std::move(z);
    const bool converged = it > 10 && std::abs(next - estimate) <= 1e-14 * next;
    estimate = next;
    if (converged) break;
  }
  return estimate;
}

}  // namespace coregae
