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

#include "ermsquash/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "ermsquash/error.hpp"
#include "fixtures.hpp"

namespace ermsquash {
namespace {

using ::testing::ElementsAre;
using testing::labels;
using testing::no_symmetry_matrix;
using testing::no_symmetry_x;
using testing::no_symmetry_y;
using testing::vec;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Weighted binary cross-entropy written from its definition.
double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& w, double b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z = x.row(i).dot(w) + b;
    total += v[i] * (y[i] * softplus(-z) + (1.0 - y[i]) * softplus(z));
  }
  return total;
}

double squared_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& w, double b) {
  const Eigen::VectorXd r = (x * w).array() + b - y.array();
  return (v.array() * r.array().square()).sum();
}

double softmax_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets,
                    const Eigen::VectorXd& v, const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd z = (x.row(i) * w).transpose() + b;
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    for (Eigen::Index c = 0; c < z.size(); ++c) total -= v[i] * targets(i, c) * (z[c] - lse);
  }
  return total;
}

Eigen::MatrixXd one_hot(const Eigen::VectorXd& y, int k) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(y.size(), k);
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i, static_cast<int>(y[i])) = 1.0;
  return out;
}

ModelSpec spec_of(ModelFamily family, MergeMode mode = MergeMode::kAuto, int k = 2) {
  ModelSpec s;
  s.family = family;
  s.merge_mode = mode;
  s.num_classes = k;
  return s;
}

// Rows with duplicated structure so that colorings are nontrivial.
Eigen::MatrixXd redundant_dense(std::mt19937_64& rng, int rows, int cols) {
  Eigen::MatrixXd base = testing::random_int_dense(rng, std::max(1, rows / 3), cols, 2);
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i) x.row(i) = base.row(static_cast<int>(rng() % base.rows()));
  return x;
}

TEST(InitColoringTest, LinregKeysAreXty) {
  const auto init = init_coloring_linreg(no_symmetry_matrix(), no_symmetry_y());
  EXPECT_TRUE(init.rows.is_unit());
  EXPECT_EQ(init.cols, labels({0, 0, 1}));
}

TEST(InitColoringTest, LinregZeroTargetGivesUnit) {
  const auto init = init_coloring_linreg(no_symmetry_matrix(), Eigen::VectorXd::Zero(5));
  EXPECT_TRUE(init.cols.is_unit());
}

TEST(InitColoringTest, LinregDistinctKeysGiveDiscrete) {
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3, 0, 0, 1;
  const auto init = init_coloring_linreg(SparseMatrix::from_dense(x), vec({1, 1}));
  EXPECT_TRUE(init.cols.is_discrete());
}

TEST(InitColoringTest, LogisticSplitsRowsByWeight) {
  const auto init = init_coloring_logistic(no_symmetry_matrix(), vec({0, 1, 1, 0, 1}),
                                           vec({1, 2, 1, 2, 1}), 2);
  EXPECT_EQ(init.rows, labels({0, 1, 0, 1, 0}));
}

TEST(InitColoringTest, LogisticDuplicatedColumnsShareColor) {
  Eigen::MatrixXd x(3, 3);
  x << 1, 1, 0,
       2, 2, 5,
       0, 0, 3;
  const auto init =
      init_coloring_logistic(SparseMatrix::from_dense(x), vec({1, 0, 1}), vec({1, 1, 1}), 2);
  EXPECT_EQ(init.cols[0], init.cols[1]);
  EXPECT_NE(init.cols[0], init.cols[2]);
}

TEST(InitColoringTest, MulticlassUsesPerClassSums) {
  // Columns 1 and 2 have equal per-class sums (2,2,2) but different rows;
  // column 3 has the same total with a different per-class split.
  Eigen::MatrixXd x(6, 4);
  x << 1, 2, 1, 3,
       0, 0, 1, 0,
       1, 1, 2, 0,
       1, 1, 0, 0,
       0, 2, 1, 3,
       2, 0, 1, 0;
  const Eigen::VectorXd y = vec({0, 0, 1, 1, 2, 2});
  const auto init = init_coloring_logistic(SparseMatrix::from_dense(x), y,
                                           Eigen::VectorXd::Ones(6), 3);
  // Oracle: per-class sums computed directly.
  std::vector<std::vector<double>> sums(4, std::vector<double>(3, 0.0));
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 6; ++i) sums[j][static_cast<int>(y[i])] += x(i, j);
  }
  ASSERT_EQ(sums[1], sums[2]);
  ASSERT_NE(sums[1], sums[3]);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) EXPECT_EQ(init.cols[a] == init.cols[b], sums[a] == sums[b]);
  }
}

TEST(InitColoringTest, RejectsClassOutOfRange) {
  try {
    init_coloring_logistic(no_symmetry_matrix(), vec({0, 1, 2, 0, 1}), Eigen::VectorXd::Ones(5),
                           2);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
}

TEST(ReduceErmTest, NoSymmetryFixtureLinreg) {
  const ReducedInstance r = reduce_erm(no_symmetry_matrix(), no_symmetry_y(),
                                       Eigen::VectorXd::Ones(5), spec_of(ModelFamily::kLinreg));
  Eigen::MatrixXd expected(3, 2);
  expected << 4, 0, 6, 2, 6, 1;
  EXPECT_EQ(r.x.to_dense(), expected);
  EXPECT_EQ(r.targets.values, vec({0.5, 0.5, 7}));
  EXPECT_EQ(r.sample_weights, vec({2, 2, 1}));
  EXPECT_EQ(r.penalty_multipliers, vec({2, 1}));
  EXPECT_EQ(r.n_reduced(), 3u);
  EXPECT_EQ(r.d_reduced(), 2u);
}

TEST(ReduceErmTest, NoSymmetryFixtureHasNoDataPreservingPermutation) {
  const Eigen::MatrixXd x = no_symmetry_x();
  const Eigen::VectorXd y = no_symmetry_y();
  std::vector<int> pi(5), sigma(3);
  std::iota(pi.begin(), pi.end(), 0);
  int preserving = 0;
  do {
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
      bool same = true;
      for (int i = 0; i < 5 && same; ++i) {
        same = y[pi[i]] == y[i];
        for (int j = 0; j < 3 && same; ++j) same = x(pi[i], sigma[j]) == x(i, j);
      }
      preserving += same;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  } while (std::next_permutation(pi.begin(), pi.end()));
  EXPECT_EQ(preserving, 1);  // only the identity
}

TEST(ReduceErmTest, GenericDataIsNotCompressed) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(6, 4);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = g(rng);
  }
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) y[i] = g(rng);
  const ReducedInstance r =
      reduce_erm(SparseMatrix::from_dense(x), y, Eigen::VectorXd::Ones(6),
                 spec_of(ModelFamily::kLinreg));
  EXPECT_TRUE(r.p.is_discrete());
  EXPECT_TRUE(r.q.is_discrete());
  EXPECT_EQ(r.x.to_dense(), x);
}

TEST(ReduceErmTest, PerLabelMergeOfIdenticalSamples) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 1, 2, 1, 2, 1, 2;
  const Eigen::VectorXd y = vec({1, 1, 0, 1});
  const ReducedInstance r = reduce_erm(SparseMatrix::from_dense(x), y, Eigen::VectorXd::Ones(4),
                                       spec_of(ModelFamily::kLogisticBinary));
  EXPECT_TRUE(r.p.is_unit());
  EXPECT_EQ(r.n_reduced(), 2u);
  EXPECT_EQ(r.targets.values, vec({0, 1}));
  EXPECT_EQ(r.sample_weights, vec({1, 3}));
  EXPECT_THAT(r.row_color, ElementsAre(0, 0));
  // The merged loss equals the unmerged loss at any parameter.
  const Eigen::VectorXd w_reduced = Eigen::VectorXd::Constant(r.d_reduced(), 0.1);
  const Eigen::VectorXd w = lift_solution(w_reduced, vec({0}), r.q).w.col(0);
  EXPECT_NEAR(logistic_loss(r.x.to_dense(), r.targets.values, r.sample_weights, w_reduced, 0.4),
              logistic_loss(x, y, Eigen::VectorXd::Ones(4), w, 0.4), 1e-12);
}

TEST(ReduceErmTest, MeanTargetMergeOfIdenticalSamples) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 1, 2, 1, 2, 1, 2;
  const ReducedInstance r =
      reduce_erm(SparseMatrix::from_dense(x), vec({1, 1, 0, 1}), Eigen::VectorXd::Ones(4),
                 spec_of(ModelFamily::kLogisticBinary, MergeMode::kMeanTarget));
  EXPECT_EQ(r.n_reduced(), 1u);
  EXPECT_DOUBLE_EQ(r.targets.values[0], 0.75);
  EXPECT_EQ(r.sample_weights, vec({4}));
}

TEST(ReduceErmTest, RejectsKernelFamily) {
  ModelSpec s = spec_of(ModelFamily::kKernelRidge);
  s.lambda2 = 1.0;
  s.kernel.kind = KernelSpec::Kind::kLinear;
  EXPECT_THROW(reduce_erm(no_symmetry_matrix(), no_symmetry_y(), Eigen::VectorXd::Ones(5), s),
               Error);
}

TEST(ReduceErmTest, RejectsNonpositiveWeights) {
  EXPECT_THROW(reduce_erm(no_symmetry_matrix(), no_symmetry_y(), vec({1, 1, 0, 1, 1}),
                          spec_of(ModelFamily::kLinreg)),
               Error);
}

TEST(ReduceErmTest, DegenerateShapesPassThrough) {
  const ReducedInstance one_row = reduce_erm(SparseMatrix::from_dense(Eigen::MatrixXd::Ones(1, 3)),
                                             vec({2}), vec({1}), spec_of(ModelFamily::kLinreg));
  EXPECT_EQ(one_row.n_reduced(), 1u);
  EXPECT_EQ(one_row.d_reduced(), 1u);
  const ReducedInstance zeros = reduce_erm(SparseMatrix(4, 3), vec({1, 2, 3, 4}),
                                           Eigen::VectorXd::Ones(4), spec_of(ModelFamily::kLinreg));
  EXPECT_TRUE(zeros.q.is_unit());
  EXPECT_EQ(zeros.x.nnz(), 0u);
}

// Structural invariants and loss preservation on random redundant data.
class ReduceErmPropertyTest : public ::testing::TestWithParam<int> {};

TEST_P(ReduceErmPropertyTest, LinregInvariantsAndConstantShift) {
  std::mt19937_64 rng(GetParam());
  const int n = 4 + static_cast<int>(rng() % 10);
  const int d = 1 + static_cast<int>(rng() % 5);
  const Eigen::MatrixXd x = redundant_dense(rng, n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = static_cast<double>(rng() % 3);
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  const ReducedInstance r =
      reduce_erm(SparseMatrix::from_dense(x), y, v, spec_of(ModelFamily::kLinreg));
  EXPECT_DOUBLE_EQ(r.sample_weights.sum(), n);
  EXPECT_DOUBLE_EQ(r.penalty_multipliers.sum(), d);
  EXPECT_LE(r.n_reduced(), static_cast<std::size_t>(n));
  EXPECT_LE(r.d_reduced(), static_cast<std::size_t>(d));

  std::normal_distribution<double> g;
  double shift = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd w_reduced(r.d_reduced());
    for (auto& c : w_reduced) c = g(rng);
    const double b = g(rng);
    const Eigen::VectorXd w = lift_solution(w_reduced, vec({b}), r.q).w.col(0);
    const double diff = squared_loss(x, y, v, w, b) -
                        squared_loss(r.x.to_dense(), r.targets.values, r.sample_weights,
                                     w_reduced, b);
    if (trial == 0) shift = diff;
    EXPECT_NEAR(diff, shift, 1e-9);
  }
}

TEST_P(ReduceErmPropertyTest, LogisticPerLabelExactLoss) {
  std::mt19937_64 rng(1000 + GetParam());
  const int n = 4 + static_cast<int>(rng() % 10);
  const int d = 1 + static_cast<int>(rng() % 5);
  const Eigen::MatrixXd x = redundant_dense(rng, n, d);
  Eigen::VectorXd y(n), v(n);
  for (int i = 0; i < n; ++i) {
    y[i] = static_cast<double>(rng() % 2);
    v[i] = 1.0 + static_cast<double>(rng() % 2);
  }
  const ReducedInstance r =
      reduce_erm(SparseMatrix::from_dense(x), y, v, spec_of(ModelFamily::kLogisticBinary));
  EXPECT_DOUBLE_EQ(r.sample_weights.sum(), v.sum());
  std::vector<int> rows_per_color(r.p.num_colors(), 0);
  for (int s : r.row_color) ++rows_per_color[s];
  EXPECT_LE(*std::max_element(rows_per_color.begin(), rows_per_color.end()), 2);
  for (double t : r.targets.values) EXPECT_TRUE(t == 0.0 || t == 1.0);

  std::normal_distribution<double> g;
  Eigen::VectorXd w_reduced(r.d_reduced());
  for (auto& c : w_reduced) c = g(rng);
  const double b = g(rng);
  const Eigen::VectorXd w = lift_solution(w_reduced, vec({b}), r.q).w.col(0);
  EXPECT_NEAR(logistic_loss(x, y, v, w, b),
              logistic_loss(r.x.to_dense(), r.targets.values, r.sample_weights, w_reduced, b),
              1e-9);

  const ReducedInstance as_two_class = reduce_erm(
      SparseMatrix::from_dense(x), y, v,
      spec_of(ModelFamily::kLogisticMulticlass, MergeMode::kAuto, 2));
  EXPECT_EQ(as_two_class.p, r.p);
  EXPECT_EQ(as_two_class.q, r.q);
}

TEST_P(ReduceErmPropertyTest, MulticlassMeanTargetExactLoss) {
  std::mt19937_64 rng(2000 + GetParam());
  const int n = 6 + static_cast<int>(rng() % 10);
  const int d = 1 + static_cast<int>(rng() % 4);
  const int k = 3;
  const Eigen::MatrixXd x = redundant_dense(rng, n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = static_cast<double>(rng() % k);
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  const ReducedInstance r =
      reduce_erm(SparseMatrix::from_dense(x), y, v,
                 spec_of(ModelFamily::kLogisticMulticlass, MergeMode::kMeanTarget, k));
  ASSERT_TRUE(r.targets.has_probs());
  for (Eigen::Index s = 0; s < r.targets.probs.rows(); ++s) {
    EXPECT_NEAR(r.targets.probs.row(s).sum(), 1.0, 1e-15);
  }
  std::normal_distribution<double> g;
  Eigen::MatrixXd w_reduced(r.d_reduced(), k);
  for (auto& c : w_reduced.reshaped()) c = g(rng);
  Eigen::VectorXd b(k);
  for (auto& c : b) c = g(rng);
  const Eigen::MatrixXd w = lift_solution(w_reduced, b, r.q).w;
  EXPECT_NEAR(softmax_loss(x, one_hot(y, k), v, w, b),
              softmax_loss(r.x.to_dense(), r.targets.probs, r.sample_weights, w_reduced, b),
              1e-9);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ReduceErmPropertyTest, ::testing::Range(0, 40));

TEST(ExpandPolynomialTest, Examples) {
  Eigen::MatrixXd one(2, 1);
  one << 3, -2;
  Eigen::MatrixXd one_expected(2, 2);
  one_expected << 3, 9, -2, 4;
  EXPECT_EQ(expand_polynomial(SparseMatrix::from_dense(one), 2).to_dense(), one_expected);

  Eigen::MatrixXd two(1, 2);
  two << 1, 2;
  Eigen::MatrixXd two_expected(1, 5);
  two_expected << 1, 2, 1, 2, 4;
  EXPECT_EQ(expand_polynomial(SparseMatrix::from_dense(two), 2).to_dense(), two_expected);
}

TEST(ExpandPolynomialTest, DegreeZeroRejected) {
  EXPECT_THROW(expand_polynomial(no_symmetry_matrix(), 0), Error);
}

TEST(ExpandPolynomialTest, MatchesHandExpansionAndPipeline) {
  // Hand expansion of three features to degree 3 in graded order.
  const Eigen::MatrixXd x = no_symmetry_x();
  std::vector<std::vector<int>> monomials;
  for (int a = 0; a < 3; ++a) monomials.push_back({a});
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) monomials.push_back({a, b});
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      for (int c = b; c < 3; ++c) monomials.push_back({a, b, c});
    }
  }
  Eigen::MatrixXd hand(x.rows(), static_cast<Eigen::Index>(monomials.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t m = 0; m < monomials.size(); ++m) {
      double p = 1.0;
      for (int f : monomials[m]) p *= x(i, f);
      hand(i, static_cast<Eigen::Index>(m)) = p;
    }
  }
  const SparseMatrix expanded = expand_polynomial(SparseMatrix::from_dense(x), 3);
  EXPECT_EQ(expanded.to_dense(), hand);
  const auto spec = spec_of(ModelFamily::kLinreg);
  const ReducedInstance a = reduce_erm(expanded, no_symmetry_y(), Eigen::VectorXd::Ones(5), spec);
  const ReducedInstance b = reduce_erm(SparseMatrix::from_dense(hand), no_symmetry_y(),
                                       Eigen::VectorXd::Ones(5), spec);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.q, b.q);
}

TEST(AbsorbSampleWeightsTest, Examples) {
  const WeightedData unit = absorb_sample_weights(no_symmetry_matrix(), no_symmetry_y(),
                                                  Eigen::VectorXd::Ones(5));
  EXPECT_EQ(unit.x, no_symmetry_matrix());
  EXPECT_EQ(unit.y, no_symmetry_y());
  const WeightedData four = absorb_sample_weights(SparseMatrix::from_dense(Eigen::MatrixXd::Ones(1, 1)),
                                                  vec({3}), vec({4}));
  EXPECT_EQ(four.x.to_dense()(0, 0), 2.0);
  EXPECT_EQ(four.y, vec({6}));
  EXPECT_THROW(absorb_sample_weights(no_symmetry_matrix(), no_symmetry_y(), vec({1, 1, -1, 1, 1})),
               Error);
}

TEST(AbsorbSampleWeightsTest, WeightedOlsMatchesTransformedOls) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Eigen::MatrixXd x(12, 4);
  Eigen::VectorXd y(12), v(12);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = g(rng);
    x(i, 3) = 1.0;
    y[i] = g(rng);
    v[i] = u(rng);
  }
  const Eigen::MatrixXd xtw = x.transpose() * v.asDiagonal();
  const Eigen::VectorXd weighted = (xtw * x).ldlt().solve(xtw * y);
  const WeightedData t = absorb_sample_weights(SparseMatrix::from_dense(x), y, v);
  const Eigen::MatrixXd xt = t.x.to_dense();
  const Eigen::VectorXd plain = xt.colPivHouseholderQr().solve(t.y);
  EXPECT_LE((weighted - plain).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LiftSolutionTest, NoSymmetryFixture) {
  const LiftedParams lifted = lift_solution(vec({6.5, -6.5}), vec({-25.5}), labels({0, 0, 1}));
  EXPECT_EQ(Eigen::VectorXd(lifted.w.col(0)), vec({6.5, 6.5, -6.5}));
  EXPECT_EQ(lifted.b, vec({-25.5}));
}

TEST(LiftSolutionTest, DiscreteIsIdentityAndDimensionChecked) {
  EXPECT_EQ(Eigen::VectorXd(lift_solution(vec({1, 2, 3}), vec({0}), Coloring::discrete(3)).w.col(0)),
            vec({1, 2, 3}));
  EXPECT_THROW(lift_solution(vec({1, 2, 3}), vec({0}), labels({0, 0, 1})), Error);
}

TEST(StandardScalerTest, PopulationStatistics) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  const StandardScaler s = StandardScaler::fit(x);
  EXPECT_EQ(s.mean, vec({2.5, 5}));
  EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(1.25));
  EXPECT_EQ(s.scale[1], 1.0);
  EXPECT_THAT(s.constant_features, ElementsAre(1));
  const Eigen::MatrixXd z = s.transform(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR(z.col(0).squaredNorm() / 4.0, 1.0, 1e-15);
}

TEST(ScalerBacktransformTest, Examples) {
  const BackTransformed id = scaler_backtransform(vec({1, -2}), vec({0.5}), vec({0, 0}), vec({1, 1}));
  EXPECT_EQ(Eigen::VectorXd(id.w.col(0)), vec({1, -2}));
  EXPECT_EQ(id.b, vec({0.5}));
  const BackTransformed one = scaler_backtransform(vec({2}), vec({10}), vec({3}), vec({2}));
  EXPECT_EQ(Eigen::VectorXd(one.w.col(0)), vec({1}));
  EXPECT_EQ(one.b, vec({7}));
  const BackTransformed constant = scaler_backtransform(vec({2}), vec({0}), vec({3}), vec({0}));
  EXPECT_THAT(constant.constant_features, ElementsAre(0));
}

TEST(ScalerBacktransformTest, PredictionsAgreeOnRawFeatures) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(20, 3);
  for (auto& c : x.reshaped()) c = 3.0 + 2.0 * g(rng);
  const StandardScaler s = StandardScaler::fit(x);
  const Eigen::VectorXd w_sc = vec({0.7, -1.1, 0.3});
  const double b_sc = 0.2;
  const BackTransformed raw = scaler_backtransform(w_sc, vec({b_sc}), s.mean, s.scale);
  const Eigen::VectorXd z_scaled = (s.transform(x) * w_sc).array() + b_sc;
  const Eigen::VectorXd z_raw = (x * raw.w.col(0)).array() + raw.b[0];
  const auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(sigmoid(z_scaled[i]), sigmoid(z_raw[i]), 1e-10);
  }
}

TEST(ReducedPenaltyTest, Multipliers) {
  EXPECT_EQ(elastic_net_reduced_penalty(Coloring::discrete(3), 1, 1).multipliers, vec({1, 1, 1}));
  EXPECT_EQ(elastic_net_reduced_penalty(labels({0, 0, 1}), 1, 1).multipliers, vec({2, 1}));
}

TEST(ReducedPenaltyTest, EqualsOriginalPenaltyOnLiftedCoefficients) {
  const Coloring q = labels({0, 1, 0, 2, 1, 0});
  const ReducedPenalty pen = elastic_net_reduced_penalty(q, 0.3, 0.7);
  const Eigen::VectorXd w_reduced = vec({1.5, -2, 0.25});
  const Eigen::VectorXd w = lift_solution(w_reduced, vec({0}), q).w.col(0);
  const double original = 0.7 * w.squaredNorm() + 0.3 * w.lpNorm<1>();
  EXPECT_NEAR(pen.value(w_reduced), original, 1e-14);
}

TEST(ReducedPenaltyTest, RidgeClosedFormThroughReducedPenalty) {
  // Ones column appended and penalized with the rest.
  Eigen::MatrixXd x(4, 3);
  x << 1, 0, 1,
       0, 1, 1,
       2, 1, 1,
       1, 2, 1;
  const Eigen::VectorXd y = vec({1, 1, 2, 2});
  const double lambda2 = 0.5;
  ModelSpec spec = spec_of(ModelFamily::kRidge, MergeMode::kMeanTarget);
  spec.lambda2 = lambda2;
  spec.penalize_bias = true;
  const ReducedInstance r = reduce_erm(SparseMatrix::from_dense(x), y, Eigen::VectorXd::Ones(4), spec);
  ASSERT_LT(r.d_reduced(), 3u);
  const Eigen::MatrixXd xr = r.x.to_dense();
  const Eigen::MatrixXd xtw = xr.transpose() * r.sample_weights.asDiagonal();
  const Eigen::MatrixXd lhs =
      xtw * xr + Eigen::MatrixXd(lambda2 * r.penalty_multipliers.asDiagonal());
  const Eigen::VectorXd w_reduced = lhs.ldlt().solve(xtw * r.targets.values);
  const Eigen::VectorXd lifted = lift_solution(w_reduced, vec({0}), r.q).w.col(0);
  const Eigen::VectorXd direct =
      (x.transpose() * x + lambda2 * Eigen::MatrixXd::Identity(3, 3)).ldlt().solve(x.transpose() * y);
  EXPECT_LE((lifted - direct).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ModelSpecTest, ValidationAndNames) {
  ModelSpec s = spec_of(ModelFamily::kKernelRidge);
  EXPECT_THROW(s.validate(), Error);  // needs lambda and kernel
  s.lambda2 = 1.0;
  s.kernel.kind = KernelSpec::Kind::kRbf;
  s.kernel.gamma = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s.kernel.gamma = 0.5;
  EXPECT_NO_THROW(s.validate());
  s.lambda1 = 0.1;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(spec_of(ModelFamily::kLogisticMulticlass, MergeMode::kAuto, 1).validate(), Error);
  for (auto f : {ModelFamily::kLinreg, ModelFamily::kRidge, ModelFamily::kElasticNet,
                 ModelFamily::kLogisticBinary, ModelFamily::kLogisticMulticlass,
                 ModelFamily::kKernelRidge, ModelFamily::kKernelLogistic}) {
    EXPECT_EQ(parse_model_family(to_string(f)), f);
  }
  EXPECT_EQ(spec_of(ModelFamily::kLinreg).resolved_merge_mode(), MergeMode::kMeanTarget);
  EXPECT_EQ(spec_of(ModelFamily::kLogisticBinary).resolved_merge_mode(), MergeMode::kPerLabel);
  EXPECT_THROW(parse_merge_mode("nope"), Error);
}

}  // namespace
}  // namespace ermsquash
