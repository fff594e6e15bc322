#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnnsafe {

/// Row-major dense matrix of 64-bit floats.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    DenseMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != m.cols_) throw std::invalid_argument("from_rows: ragged row lengths");
      std::size_t j = 0;
      for (const double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const {
    for (const double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row, col;
  double value;
};

/// Sparse matrix in CSR form. Column indices are sorted and unique within
/// each row; construction sorts and merges duplicates by summing, so
/// iteration order (and therefore floating-point results) is deterministic.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}

  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries) {
    for (const Triplet& t : entries) {
      if (t.row >= rows || t.col >= cols)
        throw std::invalid_argument("from_triplets: entry out of bounds");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    m.col_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t row_start = m.col_idx_.size();
      while (k < entries.size() && entries[k].row == i) {
        if (m.col_idx_.size() > row_start && m.col_idx_.back() == entries[k].col) {
          m.values_.back() += entries[k].value;  // duplicate entry: sum
        } else {
          m.col_idx_.push_back(entries[k].col);
          m.values_.push_back(entries[k].value);
        }
        ++k;
      }
      m.row_ptr_[i + 1] = m.col_idx_.size();
    }
    return m;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double at(std::size_t i, std::size_t j) const {
    const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  /// Structural CSR validity: monotone row_ptr, sorted unique in-range columns.
  void validate() const {
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != nnz())
      throw std::invalid_argument("SparseMatrix: bad row_ptr");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1])
        throw std::invalid_argument("SparseMatrix: row_ptr not non-decreasing");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (col_idx_[k] >= cols_) throw std::invalid_argument("SparseMatrix: column out of range");
        if (k > row_ptr_[i] && col_idx_[k - 1] >= col_idx_[k])
          throw std::invalid_argument("SparseMatrix: columns not sorted/unique");
      }
    }
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        if (at(col_idx_[k], i) != values_[k]) return false;
    return true;
  }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_ptr_ == b.row_ptr_ &&
           a.col_idx_ == b.col_idx_ && a.values_ == b.values_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Sparse-dense product: result[i,j] = sum_k s[i,k] * d[k,j].
inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
  if (s.cols() != d.rows()) throw std::invalid_argument("spmm: dimension mismatch");
  DenseMatrix out(s.rows(), d.cols());
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_idx();
  const auto& vv = s.values();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double* out_row = out.row(i);
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const double v = vv[k];
      const double* d_row = d.row(ci[k]);
      for (std::size_t j = 0; j < d.cols(); ++j) out_row[j] += v * d_row[j];
    }
  }
  return out;
}

inline std::vector<double> spmv(const SparseMatrix& s, const std::vector<double>& x) {
  if (s.cols() != x.size()) throw std::invalid_argument("spmv: dimension mismatch");
  std::vector<double> out(s.rows(), 0.0);
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_idx();
  const auto& vv = s.values();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) acc += vv[k] * x[ci[k]];
    out[i] = acc;
  }
  return out;
}

/// Transposed product s^T * x without materializing the transpose.
inline std::vector<double> spmv_transposed(const SparseMatrix& s, const std::vector<double>& x) {
  if (s.rows() != x.size()) throw std::invalid_argument("spmv_transposed: dimension mismatch");
  std::vector<double> out(s.cols(), 0.0);
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_idx();
  const auto& vv = s.values();
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) out[ci[k]] += vv[k] * x[i];
  return out;
}

/// Row sums (weighted degrees for an adjacency matrix).
inline std::vector<double> row_sums(const SparseMatrix& s) {
  std::vector<double> deg(s.rows(), 0.0);
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k) deg[i] += s.values()[k];
  return deg;
}

/// Symmetric normalization D^{-1/2} A D^{-1/2}, optionally on A + I.
/// Zero-degree rows (only possible without self-loops) stay all-zero.
inline SparseMatrix sym_normalize(const SparseMatrix& adj, bool add_self_loops) {
  if (adj.rows() != adj.cols()) throw std::invalid_argument("sym_normalize: matrix not square");
  if (!adj.is_symmetric()) throw std::invalid_argument("sym_normalize: matrix not symmetric");
  SparseMatrix a = adj;
  if (add_self_loops) {
    std::vector<Triplet> t;
    t.reserve(adj.nnz() + adj.rows());
    for (std::size_t i = 0; i < adj.rows(); ++i) {
      t.push_back({i, i, 1.0});
      for (std::size_t k = adj.row_ptr()[i]; k < adj.row_ptr()[i + 1]; ++k)
        t.push_back({i, adj.col_idx()[k], adj.values()[k]});
    }
    a = SparseMatrix::from_triplets(adj.rows(), adj.cols(), std::move(t));
  }
  const std::vector<double> deg = row_sums(a);
  std::vector<double> inv_sqrt(deg.size(), 0.0);
  for (std::size_t i = 0; i < deg.size(); ++i)
    if (deg[i] > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      a.values()[k] *= inv_sqrt[i] * inv_sqrt[a.col_idx()[k]];
  return a;
}

/// Row-stochastic normalization D^{-1} A. Zero rows stay all-zero.
inline SparseMatrix row_normalize(const SparseMatrix& adj) {
  if (adj.rows() != adj.cols()) throw std::invalid_argument("row_normalize: matrix not square");
  SparseMatrix a = adj;
  const std::vector<double> deg = row_sums(a);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (deg[i] == 0.0) continue;
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) a.values()[k] /= deg[i];
  }
  return a;
}

/// Per-row log(sum(exp(.))) with max-shift stabilization.
inline std::vector<double> logsumexp_rows(const DenseMatrix& m) {
  if (m.empty()) throw std::invalid_argument("logsumexp_rows: empty matrix");
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, r[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += std::exp(r[j] - mx);
    out[i] = mx + std::log(acc);
  }
  return out;
}

/// Row-wise softmax (shift-invariant per row).
inline DenseMatrix softmax_rows(const DenseMatrix& m) {
  if (m.empty()) throw std::invalid_argument("softmax_rows: empty matrix");
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i);
    double* o = out.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, r[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      o[j] = std::exp(r[j] - mx);
      acc += o[j];
    }
    for (std::size_t j = 0; j < m.cols(); ++j) o[j] /= acc;
  }
  return out;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      const double* br = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += v * br[j];
    }
  }
  return out;
}

/// a^T * b
inline DenseMatrix matmul_transa(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_transa: dimension mismatch");
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ar = a.row(k);
    const double* br = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double* o = out.row(i);
      const double v = ar[i];
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += v * br[j];
    }
  }
  return out;
}

/// a * b^T
inline DenseMatrix matmul_transb(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_transb: dimension mismatch");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  }
  return out;
}

inline void add_row_vector(DenseMatrix& m, const std::vector<double>& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("add_row_vector: dimension mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] += v[j];
  }
}

inline std::vector<double> column_sums(const DenseMatrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += r[j];
  }
  return out;
}

}  // namespace gnnsafe
