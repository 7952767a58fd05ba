#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace coregae {

class Rng;

// Row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;
  void fill(double value);

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double scale);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);

// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix relu(const DenseMatrix& x);
// grad * 1[pre > 0]
DenseMatrix relu_backward(const DenseMatrix& grad, const DenseMatrix& pre);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);

// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const DenseMatrix& m, const char* what);

// Glorot/Xavier uniform on [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))].
DenseMatrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng);
DenseMatrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, double lo,
                           double hi, Rng& rng);
DenseMatrix normal_matrix(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace coregae
