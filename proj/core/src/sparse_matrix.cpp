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

#include "ermsquash/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ermsquash/error.hpp"

namespace ermsquash {

SparseMatrix::SparseMatrix(int n_rows, int n_cols)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(static_cast<std::size_t>(std::max(n_rows, 0)) + 1, 0),
      column_cache_(std::make_shared<ColumnCache>()) {
  require(n_rows >= 0 && n_cols >= 0, ErrorKind::kDimension,
          "negative matrix dimensions");
}

SparseMatrix SparseMatrix::from_csr(int n_rows, int n_cols, std::vector<int> row_ptr,
                                    std::vector<int> col_idx,
                                    std::vector<double> values) {
  SparseMatrix m(n_rows, n_cols);
  require(row_ptr.size() == static_cast<std::size_t>(n_rows) + 1 && row_ptr.front() == 0,
          ErrorKind::kStructure, "csr: row_ptr must have rows+1 entries starting at 0");
  require(col_idx.size() == values.size() &&
              static_cast<std::size_t>(row_ptr.back()) == values.size(),
          ErrorKind::kStructure, "csr: index/value arrays disagree with row_ptr");
  for (int i = 0; i < n_rows; ++i) {
    require(row_ptr[i] <= row_ptr[i + 1], ErrorKind::kStructure,
            "csr: row_ptr must be nondecreasing");
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      require(col_idx[p] >= 0 && col_idx[p] < n_cols, ErrorKind::kStructure,
              "csr: column index out of range in row " + std::to_string(i));
      require(p == row_ptr[i] || col_idx[p - 1] < col_idx[p], ErrorKind::kStructure,
              "csr: column indices must be strictly increasing in row " +
                  std::to_string(i));
    }
  }
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    require(t.row >= 0 && t.row < n_rows && t.col >= 0 && t.col < n_cols,
            ErrorKind::kDimension, "triplet outside matrix bounds");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> row_ptr(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  for (int i = 0; i < n_rows; ++i) row_ptr[i + 1] += row_ptr[i];
  return from_csr(n_rows, n_cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::from_dense(const Eigen::Ref<const Eigen::MatrixXd>& dense,
                                      bool keep_zeros) {
  const int n_rows = static_cast<int>(dense.rows());
  const int n_cols = static_cast<int>(dense.cols());
  std::vector<int> row_ptr(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_cols; ++j) {
      const double x = dense(i, j);
      if (keep_zeros || x != 0.0) {
        col_idx.push_back(j);
        values.push_back(x);
      }
    }
    row_ptr[i + 1] = static_cast<int>(values.size());
  }
  return from_csr(n_rows, n_cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

const SparseMatrix::ColumnMajor& SparseMatrix::column_major() const {
  std::call_once(column_cache_->once, [this] {
    ColumnMajor& c = column_cache_->data;
    c.col_ptr.assign(static_cast<std::size_t>(n_cols_) + 1, 0);
    for (int j : col_idx_) ++c.col_ptr[j + 1];
    for (int j = 0; j < n_cols_; ++j) c.col_ptr[j + 1] += c.col_ptr[j];
    c.row_idx.resize(values_.size());
    c.values.resize(values_.size());
    std::vector<int> next(c.col_ptr.begin(), c.col_ptr.end() - 1);
    // Rows are visited in ascending order, so each column lists rows ascending.
    for (int i = 0; i < n_rows_; ++i) {
      for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        const int dst = next[col_idx_[p]]++;
        c.row_idx[dst] = i;
        c.values[dst] = values_[p];
      }
    }
    column_cache_->built.store(true, std::memory_order_release);
  });
  return column_cache_->data;
}

bool SparseMatrix::has_column_major() const {
  return column_cache_->built.load(std::memory_order_acquire);
}

double SparseMatrix::coeff(int i, int j) const {
  const auto idx = row_indices(i);
  const auto it = std::lower_bound(idx.begin(), idx.end(), j);
  if (it == idx.end() || *it != j) return 0.0;
  return row_values(i)[it - idx.begin()];
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_rows_, n_cols_);
  for (int i = 0; i < n_rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) = values_[p];
  }
  return d;
}

Eigen::Map<const RowMajorSparse> SparseMatrix::eigen() const {
  return Eigen::Map<const RowMajorSparse>(n_rows_, n_cols_,
                                          static_cast<Eigen::Index>(values_.size()),
                                          row_ptr_.data(), col_idx_.data(), values_.data());
}

Eigen::VectorXd SparseMatrix::multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == n_cols_, ErrorKind::kDimension, "multiply: length mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_rows_);
  for (int i = 0; i < n_rows_; ++i) {
    double acc = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) acc += values_[p] * x[col_idx_[p]];
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd SparseMatrix::transpose_multiply(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == n_rows_, ErrorKind::kDimension, "transpose_multiply: length mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_cols_);
  for (int i = 0; i < n_rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out[col_idx_[p]] += values_[p] * x[i];
  }
  return out;
}

bool SparseMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  for (int i = 0; i < n_rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (coeff(col_idx_[p], i) != values_[p]) return false;
    }
  }
  return true;
}

bool SparseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

SparseMatrix SparseMatrix::scale_rows(const Eigen::Ref<const Eigen::VectorXd>& factors) const {
  require(factors.size() == n_rows_, ErrorKind::kDimension, "scale_rows: length mismatch");
  std::vector<double> values = values_;
  for (int i = 0; i < n_rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) values[p] *= factors[i];
  }
  return from_csr(n_rows_, n_cols_, row_ptr_, col_idx_, std::move(values));
}

}  // namespace ermsquash
