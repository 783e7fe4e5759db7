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

#include "ermsquash/refinement.hpp"

#include <cmath>
#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace ermsquash {
namespace {

using testing::labels;
using testing::no_symmetry_matrix;

TEST(CoarsestEquitableTest, NoSymmetryFixture) {
  const SparseMatrix x = no_symmetry_matrix();
  const EquitablePair pair = coarsest_equitable(x, unit_coloring(5), labels({0, 0, 1}));
  EXPECT_EQ(pair.rows, labels({0, 0, 1, 1, 2}));
  EXPECT_EQ(pair.cols, labels({0, 0, 1}));
  EXPECT_TRUE(is_equitable(x, pair.rows, pair.cols));
}

TEST(CoarsestEquitableTest, ConstantMatrixStaysUnit) {
  const SparseMatrix ones = SparseMatrix::from_dense(Eigen::MatrixXd::Ones(4, 4));
  const EquitablePair pair = coarsest_equitable(ones, unit_coloring(4), unit_coloring(4));
  EXPECT_TRUE(pair.rows.is_unit());
  EXPECT_TRUE(pair.cols.is_unit());
}

TEST(CoarsestEquitableTest, DimensionMismatch) {
  EXPECT_THROW(coarsest_equitable(no_symmetry_matrix(), unit_coloring(4), unit_coloring(3)),
               Error);
}

TEST(CoarsestEquitableTest, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 100; ++seed) {
    const int m = 1 + static_cast<int>(rng() % 5);
    const int n = 1 + static_cast<int>(rng() % 5);
    const SparseMatrix a = SparseMatrix::from_dense(testing::random_int_dense(rng, m, n, 2));
    const Coloring p0 = testing::random_coloring(rng, m, 2);
    const Coloring q0 = testing::random_coloring(rng, n, 2);
    EXPECT_EQ(coarsest_equitable(a, p0, q0), brute_force_coarsest(a, p0, q0))
        << "seed " << seed;
  }
}

TEST(CoarsestEquitableTest, Idempotent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const SparseMatrix a = SparseMatrix::from_dense(testing::random_int_dense(rng, 8, 6, 1));
    const EquitablePair first = coarsest_equitable(a, unit_coloring(8), unit_coloring(6));
    EXPECT_EQ(coarsest_equitable(a, first.rows, first.cols), first);
  }
}

TEST(CoarsestEquitableTest, MonotoneInInitialColorings) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const SparseMatrix a = SparseMatrix::from_dense(testing::random_int_dense(rng, 9, 7, 2, 0.6));
    const Coloring p_fine = testing::random_coloring(rng, 9, 3);
    const Coloring q_fine = testing::random_coloring(rng, 7, 3);
    const EquitablePair coarse = coarsest_equitable(a, unit_coloring(9), unit_coloring(7));
    const EquitablePair fine = coarsest_equitable(a, p_fine, q_fine);
    EXPECT_TRUE(fine.rows.refines(p_fine));
    EXPECT_TRUE(fine.cols.refines(q_fine));
    EXPECT_TRUE(fine.rows.refines(coarse.rows));
    EXPECT_TRUE(fine.cols.refines(coarse.cols));
  }
}

TEST(CoarsestEquitableTest, PermutationEquivariant) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 10, n = 8;
    const Eigen::MatrixXd d = testing::random_int_dense(rng, m, n, 2, 0.5);
    const Coloring p0 = testing::random_coloring(rng, m, 2);
    const Coloring q0 = testing::random_coloring(rng, n, 2);
    const auto pi = testing::random_permutation(rng, m);
    const auto sigma = testing::random_permutation(rng, n);
    Eigen::MatrixXd permuted(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) permuted(pi[i], sigma[j]) = d(i, j);
    }
    const EquitablePair base = coarsest_equitable(SparseMatrix::from_dense(d), p0, q0);
    const EquitablePair moved = coarsest_equitable(SparseMatrix::from_dense(permuted),
                                                   testing::permute(p0, pi),
                                                   testing::permute(q0, sigma));
    EXPECT_EQ(moved.rows, testing::permute(base.rows, pi));
    EXPECT_EQ(moved.cols, testing::permute(base.cols, sigma));
  }
}

TEST(CoarsestEquitableTest, ExplicitZerosMatchAbsentEntries) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd d = testing::random_int_dense(rng, 7, 6, 2, 0.5);
    const SparseMatrix compact = SparseMatrix::from_dense(d);
    const SparseMatrix padded = SparseMatrix::from_dense(d, /*keep_zeros=*/true);
    ASSERT_GT(padded.nnz(), compact.nnz());
    EXPECT_EQ(coarsest_equitable(compact, unit_coloring(7), unit_coloring(6)),
              coarsest_equitable(padded, unit_coloring(7), unit_coloring(6)));
  }
}

TEST(CoarsestEquitableTest, RealValuedDataEndsEquitable) {
  // Values that are not exactly representable sums; the result must still
  // pass the exact check.
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> pick(0, 3);
  const double values[] = {0.1, 0.2, 0.3, 0.7};
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd d(12, 9);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 9; ++j) d(i, j) = values[pick(rng)];
    }
    const SparseMatrix a = SparseMatrix::from_dense(d);
    const EquitablePair pair = coarsest_equitable(a, unit_coloring(12), unit_coloring(9));
    EXPECT_TRUE(is_equitable(a, pair.rows, pair.cols));
  }
}

TEST(CoarsestEquitableTest, QuantizationMergesNearlyEqualSums) {
  Eigen::MatrixXd d(2, 2);
  d << 1.0, 1.0, 1.0 + 1e-12, 1.0;
  const SparseMatrix a = SparseMatrix::from_dense(d);
  const EquitablePair exact = coarsest_equitable(a, unit_coloring(2), unit_coloring(2));
  EXPECT_EQ(exact.rows.num_colors(), 2);
  const FloatKeyPolicy coarse{6};
  const EquitablePair quantized =
      coarsest_equitable(a, unit_coloring(2), unit_coloring(2), coarse);
  EXPECT_TRUE(quantized.rows.is_unit());
  EXPECT_TRUE(quantized.cols.is_unit());
  EXPECT_TRUE(is_equitable(a, quantized.rows, quantized.cols, coarse));
  EXPECT_FALSE(is_equitable(a, quantized.rows, quantized.cols));
}

TEST(CoarsestEquitableTest, WorkScalesWithNonzeros) {
  // Entries touched / (nnz * (log m + log n)) stays within a factor of 4
  // across a 16x size sweep.
  std::mt19937_64 rng(12);
  std::vector<double> ratios;
  for (int m : {500, 1000, 2000, 4000, 8000}) {
    const int n = m / 2;
    std::vector<SparseMatrix::Triplet> t;
    std::uniform_int_distribution<int> col(0, n - 1);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < 4; ++k) t.push_back({i, col(rng), 1.0});
    }
    const SparseMatrix a = SparseMatrix::from_triplets(m, n, t);
    RefinementStats stats;
    coarsest_equitable(a, unit_coloring(m), unit_coloring(n), {}, &stats);
    const double bound = static_cast<double>(a.nnz()) * (std::log2(m) + std::log2(n));
    ratios.push_back(static_cast<double>(stats.entries_touched) / bound);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LE(*hi / *lo, 4.0) << "ratios " << ::testing::PrintToString(ratios);
}

TEST(EquitabilityTest, Witnesses) {
  const SparseMatrix x = no_symmetry_matrix();
  EXPECT_TRUE(is_equitable(x, labels({0, 0, 1, 1, 2}), labels({0, 0, 1})));
  const auto w = equitability_witness(x, unit_coloring(5), labels({0, 0, 1}));
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->direction, EquitabilityWitness::Direction::kRowSums);
  EXPECT_EQ(w->col_color, 0);
  EXPECT_EQ(w->first_index, 0);
  EXPECT_EQ(w->second_index, 2);
  EXPECT_EQ(w->first_sum, 4.0);
  EXPECT_EQ(w->second_sum, 6.0);
  EXPECT_FALSE(w->describe().empty());
}

TEST(EquitabilityTest, DiscreteIsAlwaysEquitable) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const SparseMatrix a = SparseMatrix::from_dense(testing::random_int_dense(rng, 6, 4, 9));
    EXPECT_TRUE(is_equitable(a, Coloring::discrete(6), Coloring::discrete(4)));
  }
}

TEST(SymmetricRefinementTest, IdentityStaysUnit) {
  const SparseMatrix eye = SparseMatrix::from_dense(Eigen::MatrixXd::Identity(5, 5));
  EXPECT_TRUE(symmetric_coarsest_equitable(eye, unit_coloring(5)).is_unit());
}

TEST(SymmetricRefinementTest, DistinctDiagonalIsDiscrete) {
  const SparseMatrix diag =
      SparseMatrix::from_dense(Eigen::Vector4d(1, 2, 3, 4).asDiagonal().toDenseMatrix());
  EXPECT_TRUE(symmetric_coarsest_equitable(diag, unit_coloring(4)).is_discrete());
}

TEST(SymmetricRefinementTest, DuplicatedSamplesShareAColor) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 0, 1, 1, 2, 3, 1;
  const SparseMatrix k = SparseMatrix::from_dense(x * x.transpose());
  const Coloring q = symmetric_coarsest_equitable(k, unit_coloring(4));
  EXPECT_EQ(q[0], q[2]);
  EXPECT_EQ(q, brute_force_symmetric_coarsest(k, unit_coloring(4)));
}

TEST(SymmetricRefinementTest, AgreesWithBruteForce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd d = testing::random_int_dense(rng, n, n, 2);
    d = (d + d.transpose()).eval();
    const SparseMatrix k = SparseMatrix::from_dense(d);
    const Coloring q0 = testing::random_coloring(rng, n, 2);
    const Coloring q = symmetric_coarsest_equitable(k, q0);
    EXPECT_EQ(q, brute_force_symmetric_coarsest(k, q0)) << "trial " << trial;
    EXPECT_TRUE(is_equitable(k, q, q));
  }
}

TEST(SymmetricRefinementTest, RejectsAsymmetricOrNonSquare) {
  Eigen::MatrixXd d(2, 2);
  d << 1, 2, 3, 1;
  try {
    symmetric_coarsest_equitable(SparseMatrix::from_dense(d), unit_coloring(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kStructure);
  }
  EXPECT_THROW(symmetric_coarsest_equitable(no_symmetry_matrix(), unit_coloring(5)), Error);
}

TEST(BruteForceTest, Examples) {
  const SparseMatrix x = no_symmetry_matrix();
  EXPECT_EQ(brute_force_coarsest(x, unit_coloring(5), labels({0, 0, 1})),
            coarsest_equitable(x, unit_coloring(5), labels({0, 0, 1})));
  const SparseMatrix eye = SparseMatrix::from_dense(Eigen::MatrixXd::Identity(2, 2));
  const EquitablePair pair = brute_force_coarsest(eye, unit_coloring(2), unit_coloring(2));
  EXPECT_TRUE(pair.rows.is_unit());
  EXPECT_TRUE(pair.cols.is_unit());
}

TEST(BruteForceTest, RefusesLargeInputs) {
  const SparseMatrix big = SparseMatrix::from_dense(Eigen::MatrixXd::Ones(8, 3));
  try {
    brute_force_coarsest(big, unit_coloring(8), unit_coloring(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLimit);
  }
}

TEST(EquitablePairJsonTest, Layout) {
  const EquitablePair pair{labels({0, 0, 1, 1, 2}), labels({0, 0, 1})};
  const std::string json = to_json(pair);
  EXPECT_THAT(json, ::testing::HasSubstr(R"("rows":3)"));
  EXPECT_THAT(json, ::testing::HasSubstr(R"("cols":2)"));
  EXPECT_THAT(json, ::testing::HasSubstr(R"("row_sizes":[2,2,1])"));
}

}  // namespace
}  // namespace ermsquash
