#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "coregae/dense.h"
#include "coregae/graph.h"

namespace coregae {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Compressed sparse row matrix. Column indices are sorted within each row.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}

  // Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::uint32_t> row_cols(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  double row_sum(std::size_t r) const;
  DenseMatrix to_dense() const;
  SparseMatrix scaled(double factor) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

// s * d with a fixed per-row accumulation order.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d);
// out += scale * (s * d)
void spmm_accumulate(const SparseMatrix& s, const DenseMatrix& d, double scale,
                     DenseMatrix& out);

// D^{-1/2} (A + I) D^{-1/2}, D the (weighted) degree matrix of A + I.
SparseMatrix normalized_adjacency(const Graph& g);

// (2 / lambda_max) * L_sym - I with L_sym = I - D^{-1/2} A D^{-1/2};
// isolated nodes have an L_sym row equal to the unit diagonal.
SparseMatrix scaled_laplacian(const Graph& g, double lambda_max);

// Power-iteration estimate of the spectral radius of a square matrix with
// non-negative entries. Uses the two-step growth ratio so period-2
// oscillation (bipartite structure) does not bias the estimate.
double spectral_radius_estimate(const SparseMatrix& s, int iterations = 1000,
                                std::uint64_t seed = 7);

}  // namespace coregae
