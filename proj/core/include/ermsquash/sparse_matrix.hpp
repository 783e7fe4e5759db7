// Copyright 2026 The ermsquash Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ERMSQUASH_SPARSE_MATRIX_HPP_
#define ERMSQUASH_SPARSE_MATRIX_HPP_

#include <cstddef>
#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ermsquash {

using RowMajorSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

// Compressed-sparse-row matrix. Column indices are strictly increasing within
// a row. Explicit zeros may be stored and behave exactly like absent entries
// in every sum computed by this library.
//
// Instances are immutable. The column-major mirror is built on first use and
// shared between copies; building it is thread-safe.
class SparseMatrix {
 public:
  struct Triplet {
    int row;
    int col;
    double value;
  };

  struct ColumnMajor {
    std::vector<int> col_ptr;
    std::vector<int> row_idx;
    std::vector<double> values;
  };

  SparseMatrix() : SparseMatrix(0, 0) {}
  SparseMatrix(int n_rows, int n_cols);

  // Validates the CSR invariants.
  static SparseMatrix from_csr(int n_rows, int n_cols, std::vector<int> row_ptr,
                               std::vector<int> col_idx, std::vector<double> values);
  // Duplicate coordinates are summed.
  static SparseMatrix from_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets);
  // keep_zeros stores every entry, which is how kernel matrices are held.
  static SparseMatrix from_dense(const Eigen::Ref<const Eigen::MatrixXd>& dense,
                                 bool keep_zeros = false);

  int rows() const noexcept { return n_rows_; }
  int cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const int> row_indices(int i) const {
    return {col_idx_.data() + row_ptr_[i], col_idx_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_values(int i) const {
    return {values_.data() + row_ptr_[i], values_.data() + row_ptr_[i + 1]};
  }
  std::span<const int> row_ptr() const noexcept { return row_ptr_; }
  std::span<const int> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  const ColumnMajor& column_major() const;
  bool has_column_major() const;

  double coeff(int i, int j) const;
  Eigen::MatrixXd to_dense() const;
  Eigen::Map<const RowMajorSparse> eigen() const;

  Eigen::VectorXd multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd transpose_multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Exact value symmetry; absent entries count as zero.
  bool is_symmetric() const;
  bool all_finite() const;

  // Rows scaled by `factors` (diag(factors) * A).
  SparseMatrix scale_rows(const Eigen::Ref<const Eigen::VectorXd>& factors) const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ &&
           a.row_ptr_ == b.row_ptr_ && a.col_idx_ == b.col_idx_ &&
           a.values_ == b.values_;
  }

 private:
  struct ColumnCache {
    std::once_flag once;
    std::atomic<bool> built{false};
    ColumnMajor data;
  };

  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
  std::shared_ptr<ColumnCache> column_cache_;
};

}  // namespace ermsquash

#endif  // ERMSQUASH_SPARSE_MATRIX_HPP_
