#include <cmath>

#include <gtest/gtest.h>

#include "coregae/adam.h"
#include "coregae/dense.h"
#include "coregae/error.h"
#include "coregae/rng.h"
#include "coregae/sparse.h"
#include "test_util.h"

namespace coregae {
namespace {

using testing::dense_product;
using testing::erdos_renyi;
using testing::make_graph;

SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density,
                           Rng& rng) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (rng.uniform01() < density) t.push_back({i, j, rng.uniform(-2.0, 2.0)});
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

TEST(Rng, ReproducibleStreams) {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng d(5);
  EXPECT_NE(d.next_u64(), c.next_u64());
  EXPECT_NE(derive_seed(1, streams::kInit), derive_seed(1, streams::kNoise));
  EXPECT_NE(derive_seed(1, streams::kInit), derive_seed(2, streams::kInit));
}

TEST(Rng, UniformIndexInRange) {
  Rng r(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = r.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.04);
}

TEST(Dense, Products) {
  DenseMatrix a = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  DenseMatrix b = DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(matmul(a, b), DenseMatrix::from_rows({{4, 5}, {10, 11}}));
  EXPECT_EQ(matmul_tn(a, a), matmul(transpose(a), a));
  EXPECT_EQ(matmul_nt(a, a), matmul(a, transpose(a)));
  EXPECT_THROW(matmul(a, a), ValidationError);
  EXPECT_THROW(a += b, ValidationError);
}

TEST(Dense, ReluAndBackward) {
  DenseMatrix x = DenseMatrix::from_rows({{-1, 0, 2}});
  EXPECT_EQ(relu(x), DenseMatrix::from_rows({{0, 0, 2}}));
  DenseMatrix g = DenseMatrix::from_rows({{5, 6, 7}});
  EXPECT_EQ(relu_backward(g, x), DenseMatrix::from_rows({{0, 0, 7}}));
}

TEST(Dense, RequireFinite) {
  DenseMatrix m(2, 2);
  EXPECT_NO_THROW(require_finite(m, "m"));
  m(1, 1) = std::nan("");
  EXPECT_THROW(require_finite(m, "m"), NumericError);
}

TEST(Glorot, BoundsDeterminismAndMean) {
  DenseMatrix w = glorot_init(100, 100, 17);
  const double bound = std::sqrt(6.0 / 200.0);
  for (double v : w.data()) {
    EXPECT_GE(v, -bound);
    EXPECT_LE(v, bound);
  }
  EXPECT_EQ(w, glorot_init(100, 100, 17));
  double sum = 0.0;
  for (double v : w.data()) sum += v;
  // uniform(-b, b) has sd b / sqrt(3); mean of 1e4 draws within 3 sd / 100
  const double se = bound / std::sqrt(3.0) / 100.0;
  EXPECT_LT(std::abs(sum / 1e4), 3.0 * se);
  EXPECT_THROW(glorot_init(0, 3, 1), ValidationError);
}

TEST(Sparse, FromTripletsSumsDuplicatesAndSorts) {
  SparseMatrix s = SparseMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}});
  ASSERT_EQ(s.nnz(), 2u);
  EXPECT_EQ(s.row_cols(0)[0], 0u);
  EXPECT_EQ(s.row_cols(0)[1], 2u);
  EXPECT_DOUBLE_EQ(s.row_values(0)[1], 1.5);
}

TEST(Spmm, IdentityAndZero) {
  Rng rng(1);
  DenseMatrix d = uniform_matrix(6, 4, -1, 1, rng);
  EXPECT_EQ(spmm(SparseMatrix::identity(6), d), d);
  SparseMatrix zero = SparseMatrix::from_triplets(6, 6, {});
  EXPECT_EQ(spmm(zero, d), DenseMatrix(6, 4));
  EXPECT_THROW(spmm(SparseMatrix::identity(5), d), ValidationError);
}

TEST(Spmm, MatchesDenseOracle) {
  Rng rng(2);
  for (std::size_t r = 1; r <= 32; r += 3) {
    for (std::size_t c = 1; c <= 32; c += 5) {
      SparseMatrix s = random_sparse(r, c, 0.3, rng);
      DenseMatrix d = uniform_matrix(c, 1 + (r + c) % 7, -1, 1, rng);
      DenseMatrix expect = dense_product(s.to_dense(), d);
      DenseMatrix got = spmm(s, d);
      EXPECT_LT(max_abs(got - expect), 1e-12);
    }
  }
}

TEST(Spmm, DistributesOverAddition) {
  Rng rng(4);
  SparseMatrix s = random_sparse(20, 15, 0.2, rng);
  DenseMatrix a = uniform_matrix(15, 3, -1, 1, rng);
  DenseMatrix b = uniform_matrix(15, 3, -1, 1, rng);
  EXPECT_LT(max_abs(spmm(s, a + b) - (spmm(s, a) + spmm(s, b))), 1e-12);
  DenseMatrix acc = spmm(s, a);
  spmm_accumulate(s, b, -2.0, acc);
  DenseMatrix b2 = b;
  b2 *= -2.0;
  EXPECT_LT(max_abs(acc - (spmm(s, a) + spmm(s, b2))), 1e-12);
}

TEST(NormalizedAdjacency, SingleEdge) {
  DenseMatrix a = normalized_adjacency(make_graph(2, {{0, 1}})).to_dense();
  EXPECT_LT(max_abs(a - DenseMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})), 1e-15);
}

TEST(NormalizedAdjacency, IsolatedNode) {
  DenseMatrix a = normalized_adjacency(make_graph(1, {})).to_dense();
  EXPECT_EQ(a, DenseMatrix::from_rows({{1.0}}));
}

TEST(NormalizedAdjacency, RowSumBoundCanFail) {
  // star with three leaves: hub row is 1/4 + 3/sqrt(8) > 1
  SparseMatrix s = normalized_adjacency(make_graph(4, {{0, 1}, {0, 2}, {0, 3}}));
  EXPECT_NEAR(s.row_sum(0), 0.25 + 3.0 / std::sqrt(8.0), 1e-15);
  EXPECT_GT(s.row_sum(0), 1.0);
  EXPECT_LE(spectral_radius_estimate(s), 1.0 + 1e-9);
}

TEST(NormalizedAdjacency, SymmetricPositiveAndSpectralRadius) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = erdos_renyi(40, 0.1, seed);
    SparseMatrix s = normalized_adjacency(g);
    DenseMatrix d = s.to_dense();
    EXPECT_EQ(d, transpose(d));
    for (std::size_t r = 0; r < s.rows(); ++r) {
      EXPECT_GT(s.row_sum(r), 0.0);
    }
    // A_norm D^{1/2} 1 = D^{1/2} 1 with D the degrees of A + I
    DenseMatrix root(g.num_nodes(), 1);
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      root(v, 0) = std::sqrt(g.weighted_degree(v) + 1.0);
    EXPECT_LT(max_abs(spmm(s, root) - root), 1e-12);
    EXPECT_LE(spectral_radius_estimate(s), 1.0 + 1e-9);
    EXPECT_GE(spectral_radius_estimate(s), 1.0 - 1e-6);
  }
}

TEST(ScaledLaplacian, SingleEdge) {
  DenseMatrix l = scaled_laplacian(make_graph(2, {{0, 1}}), 2.0).to_dense();
  // L_sym uses the degrees of A, so D = I and the off-diagonals are -1
  EXPECT_LT(max_abs(l - DenseMatrix::from_rows({{0.0, -1.0}, {-1.0, 0.0}})), 1e-15);
}

TEST(ScaledLaplacian, IsolatedNodesGiveZero) {
  DenseMatrix l = scaled_laplacian(make_graph(3, {}), 2.0).to_dense();
  EXPECT_EQ(max_abs(l), 0.0);
  DenseMatrix l4 = scaled_laplacian(make_graph(2, {}), 4.0).to_dense();
  EXPECT_EQ(l4, DenseMatrix::from_rows({{-0.5, 0.0}, {0.0, -0.5}}));
}

TEST(ScaledLaplacian, RegularGraphSpectrumInUnitInterval) {
  // cycle C_8 is 2-regular; |L~| entries are non-negative after abs, and the
  // spectral radius of L~ is bounded by that of |L~|.
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 8; ++i) edges.push_back({i, static_cast<NodeId>((i + 1) % 8), 1.0});
  SparseMatrix l = scaled_laplacian(Graph::from_edges(8, edges), 2.0);
  std::vector<Triplet> abs_t;
  for (std::size_t r = 0; r < l.rows(); ++r)
    for (std::size_t k = 0; k < l.row_cols(r).size(); ++k)
      abs_t.push_back({r, l.row_cols(r)[k], std::abs(l.row_values(r)[k])});
  SparseMatrix a = SparseMatrix::from_triplets(8, 8, abs_t);
  EXPECT_LE(spectral_radius_estimate(a), 1.0 + 1e-9);
}

TEST(Adam, ZeroGradientLeavesParams) {
  AdamState st;
  DenseMatrix p = DenseMatrix::from_rows({{1, -2}});
  DenseMatrix g(1, 2);
  DenseMatrix* ps[] = {&p};
  const DenseMatrix* gs[] = {&g};
  for (int i = 0; i < 5; ++i) adam_step(st, ps, gs);
  EXPECT_EQ(p, DenseMatrix::from_rows({{1, -2}}));
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
  AdamState st;
  DenseMatrix p = DenseMatrix::from_rows({{1, -2, 0}});
  DenseMatrix g = DenseMatrix::from_rows({{3, -0.5, 1e-3}});
  DenseMatrix* ps[] = {&p};
  const DenseMatrix* gs[] = {&g};
  adam_step(st, ps, gs);
  // m_hat = g, v_hat = g^2  =>  step = lr * g / (|g| + eps)
  EXPECT_NEAR(p(0, 0), 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p(0, 1), -2.0 + 0.01, 1e-9);
  EXPECT_NEAR(p(0, 2), -0.01 * 1e-3 / (1e-3 + 1e-8), 1e-12);
}

TEST(Adam, ShapeMismatchAndDeterminism) {
  AdamState st;
  DenseMatrix p(2, 2), g(2, 3);
  DenseMatrix* ps[] = {&p};
  const DenseMatrix* gs[] = {&g};
  EXPECT_THROW(adam_step(st, ps, gs), ValidationError);

  auto run = [] {
    AdamState s;
    DenseMatrix x = DenseMatrix::from_rows({{0.3, -0.7}});
    DenseMatrix* xs[] = {&x};
    for (int i = 0; i < 50; ++i) {
      DenseMatrix grad = x;  // minimize |x|^2 / 2
      const DenseMatrix* gs2[] = {&grad};
      adam_step(s, xs, gs2);
    }
    return x;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace coregae
