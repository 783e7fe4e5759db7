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

#ifndef ERMSQUASH_TESTS_FIXTURES_HPP_
#define ERMSQUASH_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/coloring.hpp"
#include "ermsquash/sparse_matrix.hpp"

namespace ermsquash::testing {

// The 5x3 linear-regression instance with compression but no symmetry.
inline Eigen::MatrixXd no_symmetry_x() {
  Eigen::MatrixXd x(5, 3);
  x << 3, 1, 0,
       1, 3, 0,
       4, 2, 2,
       2, 4, 2,
       3, 3, 1;
  return x;
}

inline Eigen::VectorXd no_symmetry_y() {
  Eigen::VectorXd y(5);
  y << 0, 1, 1, 0, 7;
  return y;
}

inline SparseMatrix no_symmetry_matrix() { return SparseMatrix::from_dense(no_symmetry_x()); }

inline Coloring labels(std::initializer_list<int> l) {
  std::vector<int> v(l);
  return Coloring::from_labels(v);
}

inline Eigen::VectorXd vec(std::initializer_list<double> l) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(l.size()));
  Eigen::Index i = 0;
  for (double x : l) v[i++] = x;
  return v;
}

inline Eigen::MatrixXd random_int_dense(std::mt19937_64& rng, int rows, int cols, int max_value,
                                        double density = 1.0) {
  std::uniform_int_distribution<int> value(0, max_value);
  std::bernoulli_distribution keep(density);
  Eigen::MatrixXd d(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) d(i, j) = keep(rng) ? value(rng) : 0;
  }
  return d;
}

inline Coloring random_coloring(std::mt19937_64& rng, int n, int max_colors) {
  std::uniform_int_distribution<int> pick(0, std::max(0, max_colors - 1));
  std::vector<int> l(n);
  for (auto& x : l) x = pick(rng);
  return Coloring::from_labels(l);
}

inline std::vector<int> random_permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Relabels index i as perm[i].
inline Coloring permute(const Coloring& c, const std::vector<int>& perm) {
  std::vector<int> l(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) l[perm[i]] = c[i];
  return Coloring::from_labels(l);
}

// Partition equality irrespective of label order.
inline bool same_partition(const Coloring& a, const Coloring& b) {
  return a.refines(b) && b.refines(a);
}

// Random instance with exact redundancy: the last `feature_copies` columns
// repeat base columns and the last `row_copies` rows repeat base rows, then
// rows and columns are shuffled. num_classes == 0 gives regression targets.
// Copied rows keep their label with probability 0.7.
struct PlantedInstance {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd v;
};

inline PlantedInstance planted_instance(std::mt19937_64& rng, int n, int d, int feature_copies,
                                        int row_copies, int num_classes,
                                        bool integer_weights = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d_base = d - feature_copies, n_base = n - row_copies;
  Eigen::MatrixXd base(n, d);
  for (int i = 0; i < n_base; ++i) {
    for (int j = 0; j < d_base; ++j) base(i, j) = g(rng);
  }
  for (int j = d_base; j < d; ++j) {
    base.col(j) = base.col(static_cast<int>(rng() % static_cast<unsigned>(d_base)));
  }
  std::vector<int> source(n);
  for (int i = 0; i < n; ++i) {
    source[i] = i < n_base ? i : static_cast<int>(rng() % static_cast<unsigned>(n_base));
    if (i >= n_base) base.row(i) = base.row(source[i]);
  }

  const int k = std::max(num_classes, 1);
  Eigen::MatrixXd beta(d, k);
  for (int j = 0; j < d; ++j) {
    for (int c = 0; c < k; ++c) beta(j, c) = 0.7 * g(rng);
  }
  const Eigen::MatrixXd z = base * beta;
  Eigen::VectorXd y(n), v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = integer_weights ? 1.0 + static_cast<double>(rng() % 3) : 1.0;
    if (i >= n_base) v[i] = v[source[i]];
    if (num_classes == 0) {
      y[i] = z(i, 0) + 0.3 * g(rng);
      continue;
    }
    if (i >= n_base && u(rng) < 0.7) {
      y[i] = y[source[i]];
      continue;
    }
    if (num_classes == 2) {
      y[i] = u(rng) < 1.0 / (1.0 + std::exp(-z(i, 0))) ? 1.0 : 0.0;
    } else {
      Eigen::VectorXd pr = (z.row(i).array() - z.row(i).maxCoeff()).exp().matrix().transpose();
      pr /= pr.sum();
      double r = u(rng);
      int c = 0;
      while (c + 1 < num_classes && r >= pr[c]) r -= pr[c++];
      y[i] = c;
    }
  }

  const std::vector<int> rows = random_permutation(rng, n);
  const std::vector<int> cols = random_permutation(rng, d);
  PlantedInstance out{Eigen::MatrixXd(n, d), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) out.x(rows[i], cols[j]) = base(i, j);
    out.y[rows[i]] = y[i];
    out.v[rows[i]] = v[i];
  }
  return out;
}

}  // namespace ermsquash::testing

#endif  // ERMSQUASH_TESTS_FIXTURES_HPP_
