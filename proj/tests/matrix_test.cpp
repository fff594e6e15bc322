#include "gnnsafe/matrix.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "gnnsafe/rng.hpp"
#include "test_support.hpp"

using namespace gnnsafe;
using testsupport::densify;

namespace {

SparseMatrix random_csr(Rng& rng, std::size_t rows, std::size_t cols, double density) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (rng.uniform() < density) t.push_back({i, j, rng.uniform(-2.0, 2.0)});
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

DenseMatrix random_dense(Rng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix d(rows, cols);
  for (double& v : d.data()) v = rng.uniform(-2.0, 2.0);
  return d;
}

}  // namespace

TEST(SparseMatrix, FromTripletsSortsAndSumsDuplicates) {
  const SparseMatrix m = SparseMatrix::from_triplets(
      2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 1, -1.0}});
  m.validate();
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(m.at(0, 2), 1.5);
  EXPECT_DOUBLE_EQ(m.at(1, 1), -1.0);
  EXPECT_DOUBLE_EQ(m.at(1, 0), 0.0);
}

TEST(SparseMatrix, FromTripletsRejectsOutOfBounds) {
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 2, 1.0}}), std::invalid_argument);
}

TEST(DenseMatrix, FromRowsRejectsRagged) {
  EXPECT_THROW(DenseMatrix::from_rows({{1.0, 2.0}, {3.0}}), std::invalid_argument);
}

TEST(Spmm, IdentityReturnsInput) {
  Rng rng(7);
  const DenseMatrix d = random_dense(rng, 4, 3);
  const DenseMatrix out = spmm(SparseMatrix::identity(4), d);
  EXPECT_EQ(out, d);
}

TEST(Spmm, EmptySparseGivesZeroMatrix) {
  Rng rng(8);
  const DenseMatrix d = random_dense(rng, 4, 3);
  const SparseMatrix zero = SparseMatrix::from_triplets(5, 4, {});
  const DenseMatrix out = spmm(zero, d);
  ASSERT_EQ(out.rows(), 5u);
  ASSERT_EQ(out.cols(), 3u);
  for (const double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Spmm, MatchesDensifiedProduct) {
  Rng rng(9);
  const SparseMatrix s = random_csr(rng, 5, 5, 0.4);
  const DenseMatrix d = random_dense(rng, 5, 3);
  const DenseMatrix got = spmm(s, d);
  const DenseMatrix want = matmul(densify(s), d);
  for (std::size_t i = 0; i < got.rows(); ++i)
    for (std::size_t j = 0; j < got.cols(); ++j)
      EXPECT_NEAR(got(i, j), want(i, j), 1e-12);
}

TEST(Spmm, MatchesDensifiedProductOnRandomSizes) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t r = 1 + rng.bounded(8), c = 1 + rng.bounded(8), k = 1 + rng.bounded(5);
    const SparseMatrix s = random_csr(rng, r, c, 0.5);
    const DenseMatrix d = random_dense(rng, c, k);
    const DenseMatrix got = spmm(s, d);
    const DenseMatrix want = matmul(densify(s), d);
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got.data()[i], want.data()[i], 1e-12);
  }
}

TEST(Spmm, RejectsDimensionMismatch) {
  EXPECT_THROW(spmm(SparseMatrix::identity(3), DenseMatrix(4, 2)), std::invalid_argument);
}

TEST(Spmv, MatchesDenseOracleBothDirections) {
  Rng rng(11);
  const SparseMatrix s = random_csr(rng, 6, 4, 0.5);
  std::vector<double> x(4), y(6);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : y) v = rng.uniform(-1.0, 1.0);
  const DenseMatrix d = densify(s);
  const std::vector<double> got = spmv(s, x);
  for (std::size_t i = 0; i < 6; ++i) {
    double want = 0.0;
    for (std::size_t j = 0; j < 4; ++j) want += d(i, j) * x[j];
    EXPECT_NEAR(got[i], want, 1e-12);
  }
  const std::vector<double> got_t = spmv_transposed(s, y);
  for (std::size_t j = 0; j < 4; ++j) {
    double want = 0.0;
    for (std::size_t i = 0; i < 6; ++i) want += d(i, j) * y[i];
    EXPECT_NEAR(got_t[j], want, 1e-12);
  }
}

TEST(SymNormalize, SingleNodeSelfLoopIsOne) {
  const SparseMatrix adj = SparseMatrix::from_triplets(1, 1, {});
  const SparseMatrix norm = sym_normalize(adj, true);
  EXPECT_DOUBLE_EQ(norm.at(0, 0), 1.0);
}

TEST(SymNormalize, TwoNodeSingleEdgeAllHalves) {
  const SparseMatrix adj = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const SparseMatrix norm = sym_normalize(adj, true);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(norm.at(i, j), 0.5);
}

TEST(SymNormalize, PathWithoutSelfLoops) {
  // 3-node path 0-1-2; degrees 1, 2, 1; entry (0,1) = 1/sqrt(1*2).
  const SparseMatrix adj = SparseMatrix::from_triplets(
      3, 3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
  const SparseMatrix norm = sym_normalize(adj, false);
  EXPECT_DOUBLE_EQ(norm.at(0, 1), 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(norm.at(0, 0), 0.0);
}

TEST(SymNormalize, RejectsNonSquareAndAsymmetric) {
  EXPECT_THROW(sym_normalize(SparseMatrix::from_triplets(2, 3, {}), true),
               std::invalid_argument);
  EXPECT_THROW(sym_normalize(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}}), true),
               std::invalid_argument);
}

TEST(SymNormalize, OutputStaysSymmetric) {
  Rng rng(12);
  const auto g = testsupport::random_graph(rng, 12, 0.3, 3, 2);
  const SparseMatrix norm = sym_normalize(g->adjacency, true);
  EXPECT_TRUE(norm.is_symmetric());
  const SparseMatrix norm_plain = sym_normalize(g->adjacency, false);
  EXPECT_TRUE(norm_plain.is_symmetric());
}

TEST(RowNormalize, TwoNeighborsGiveHalves) {
  const SparseMatrix adj = SparseMatrix::from_triplets(
      3, 3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}});
  const SparseMatrix norm = row_normalize(adj);
  EXPECT_DOUBLE_EQ(norm.at(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(norm.at(0, 2), 0.5);
}

TEST(RowNormalize, ZeroRowStaysZero) {
  const SparseMatrix adj = SparseMatrix::from_triplets(3, 3, {{1, 2, 1.0}, {2, 1, 1.0}});
  const SparseMatrix norm = row_normalize(adj);
  EXPECT_EQ(norm.row_ptr()[0], norm.row_ptr()[1]);  // row 0 empty
  EXPECT_DOUBLE_EQ(norm.at(1, 2), 1.0);
}

TEST(RowNormalize, RowSumsAreZeroOrOne) {
  Rng rng(13);
  const auto g = testsupport::random_graph(rng, 15, 0.2, 3, 2);
  const SparseMatrix norm = row_normalize(g->adjacency);
  const std::vector<double> sums = row_sums(norm);
  for (const double s : sums) {
    if (s != 0.0) EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LogsumexpRows, ZerosGiveLogC) {
  const DenseMatrix m(2, 7, 0.0);
  const std::vector<double> out = logsumexp_rows(m);
  EXPECT_NEAR(out[0], std::log(7.0), 1e-15);
  EXPECT_NEAR(out[1], std::log(7.0), 1e-15);
}

TEST(LogsumexpRows, MaxShiftAvoidsOverflow) {
  const DenseMatrix m = DenseMatrix::from_rows({{1000.0, 1000.0}});
  const std::vector<double> out = logsumexp_rows(m);
  EXPECT_NEAR(out[0], 1000.0 + std::log(2.0), 1e-12);
}

TEST(LogsumexpRows, MatchesExtendedPrecisionOracle) {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix m(1, 6);
    for (double& v : m.data()) v = rng.uniform(-30.0, 30.0);
    long double acc = 0.0L;
    for (const double v : m.data()) acc += expl(static_cast<long double>(v));
    const double want = static_cast<double>(logl(acc));
    EXPECT_NEAR(logsumexp_rows(m)[0], want, 1e-12);
  }
}

TEST(LogsumexpRows, ShiftEquivariant) {
  Rng rng(15);
  DenseMatrix m(3, 5);
  for (double& v : m.data()) v = rng.uniform(-4.0, 4.0);
  const std::vector<double> base = logsumexp_rows(m);
  const double c = 2.75;
  DenseMatrix shifted = m;
  for (double& v : shifted.data()) v += c;
  const std::vector<double> out = logsumexp_rows(shifted);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], base[i] + c, 1e-12);
}

TEST(SoftmaxRows, UniformRow) {
  const DenseMatrix m(1, 4, 0.0);
  const DenseMatrix s = softmax_rows(m);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(s(0, j), 0.25);
}

TEST(SoftmaxRows, LargeGapSaturates) {
  const DenseMatrix m = DenseMatrix::from_rows({{0.0, 200.0}});
  const DenseMatrix s = softmax_rows(m);
  EXPECT_NEAR(s(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(s(0, 1), 1.0, 1e-12);
}

TEST(SoftmaxRows, MatchesExpSumOracleAndSumsToOne) {
  Rng rng(16);
  DenseMatrix m(4, 5);
  for (double& v : m.data()) v = rng.uniform(-5.0, 5.0);
  const DenseMatrix s = softmax_rows(m);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) z += std::exp(m(i, j));
    double row_sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      EXPECT_NEAR(s(i, j), std::exp(m(i, j)) / z, 1e-12);
      EXPECT_GE(s(i, j), 0.0);
      row_sum += s(i, j);
    }
    EXPECT_NEAR(row_sum, 1.0, 1e-12);
  }
}

TEST(SoftmaxRows, ShiftInvariantWithStableArgmax) {
  Rng rng(17);
  DenseMatrix m(3, 4);
  for (double& v : m.data()) v = rng.uniform(-3.0, 3.0);
  DenseMatrix shifted = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) shifted(i, j) += 1.5 * static_cast<double>(i);
  const DenseMatrix a = softmax_rows(m), b = softmax_rows(shifted);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::size_t arg_logit = 0, arg_soft = 0;
    for (std::size_t j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, arg_logit)) arg_logit = j;
      if (a(i, j) > a(i, arg_soft)) arg_soft = j;
    }
    EXPECT_EQ(arg_logit, arg_soft);
  }
}

TEST(DenseHelpers, TransposedProductsMatchNaive) {
  Rng rng(18);
  const DenseMatrix a = random_dense(rng, 4, 3), b = random_dense(rng, 4, 5);
  const DenseMatrix atb = matmul_transa(a, b);  // 3x5
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 4; ++k) want += a(k, i) * b(k, j);
      EXPECT_NEAR(atb(i, j), want, 1e-12);
    }
  const DenseMatrix c = random_dense(rng, 6, 3);
  const DenseMatrix act = matmul_transb(a, c);  // 4x6
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 3; ++k) want += a(i, k) * c(j, k);
      EXPECT_NEAR(act(i, j), want, 1e-12);
    }
}

TEST(DenseHelpers, AddRowVectorAndColumnSums) {
  DenseMatrix m = DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  add_row_vector(m, {10.0, 20.0});
  EXPECT_DOUBLE_EQ(m(0, 0), 11.0);
  EXPECT_DOUBLE_EQ(m(1, 1), 24.0);
  const std::vector<double> cs = column_sums(m);
  EXPECT_DOUBLE_EQ(cs[0], 24.0);  // (1+10) + (3+10)
  EXPECT_DOUBLE_EQ(cs[1], 46.0);  // (2+20) + (4+20)
}
