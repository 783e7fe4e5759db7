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

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ermsquash/error.hpp"

namespace ermsquash {
namespace {

void check_lengths(const SparseMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
  require(y.size() == x.rows(), ErrorKind::kDimension,
          "target length " + std::to_string(y.size()) + " does not match " +
              std::to_string(x.rows()) + " rows");
  require(v.size() == x.rows(), ErrorKind::kDimension,
          "weight length " + std::to_string(v.size()) + " does not match " +
              std::to_string(x.rows()) + " rows");
}

std::vector<std::int64_t> keys_of(const Eigen::VectorXd& sums, const FloatKeyPolicy& policy) {
  std::vector<std::int64_t> keys(static_cast<std::size_t>(sums.size()));
  for (Eigen::Index i = 0; i < sums.size(); ++i) keys[i] = policy.key(sums[i]);
  return keys;
}

bool is_constant(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] != v[0]) return false;
  }
  return true;
}

std::vector<int> class_ids(const Eigen::VectorXd& y, int num_classes) {
  std::vector<int> ids(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double c = y[i];
    require(c >= 0 && c < num_classes && c == std::floor(c), ErrorKind::kInput,
            "label " + std::to_string(c) + " at row " + std::to_string(i) +
                " is not a class id in [0, " + std::to_string(num_classes) + ")");
    ids[i] = static_cast<int>(c);
  }
  return ids;
}

// Features of every sample color: row sums of a representative over each
// feature color. Equitability makes these identical across the color.
std::vector<std::vector<std::pair<int, double>>> reduced_rows(const SparseMatrix& x,
                                                              const Coloring& p,
                                                              const Coloring& q) {
  std::vector<int> rep(static_cast<std::size_t>(p.num_colors()), -1);
  for (int i = 0; i < x.rows(); ++i) {
    if (rep[p[i]] < 0) rep[p[i]] = i;
  }
  std::vector<std::vector<std::pair<int, double>>> rows(rep.size());
  std::map<int, double> acc;
  for (std::size_t s = 0; s < rep.size(); ++s) {
    acc.clear();
    const auto cols = x.row_indices(rep[s]);
    const auto vals = x.row_values(rep[s]);
    for (std::size_t k = 0; k < cols.size(); ++k) acc[q[cols[k]]] += vals[k];
    for (const auto& [t, sum] : acc) {
      if (sum != 0.0) rows[s].emplace_back(t, sum);
    }
  }
  return rows;
}

void post_check(const SparseMatrix& x, const Eigen::VectorXd& v, const InitialColorings& init,
                const EquitablePair& pair, const FloatKeyPolicy& policy) {
  if (!pair.rows.refines(init.rows) || !pair.cols.refines(init.cols)) {
    fail(ErrorKind::kInvariant, "refined colorings do not refine the initial colorings");
  }
  if (const auto witness = equitability_witness(x, pair.rows, pair.cols, policy)) {
    fail(ErrorKind::kInvariant, "reduction coloring is not equitable: " + witness->describe());
  }
  std::vector<double> weight(static_cast<std::size_t>(pair.rows.num_colors()), 0.0);
  std::vector<bool> seen(weight.size(), false);
  for (int i = 0; i < x.rows(); ++i) {
    const int s = pair.rows[i];
    if (!seen[s]) {
      seen[s] = true;
      weight[s] = v[i];
    } else if (weight[s] != v[i]) {
      fail(ErrorKind::kInvariant,
           "sample weights differ inside sample color " + std::to_string(s));
    }
  }
}

}  // namespace

InitialColorings init_coloring_linreg(const SparseMatrix& x, const Eigen::VectorXd& y,
                                      const FloatKeyPolicy& policy) {
  require(y.size() == x.rows(), ErrorKind::kDimension,
          "target length " + std::to_string(y.size()) + " does not match " +
              std::to_string(x.rows()) + " rows");
  const Eigen::VectorXd xty = x.transpose_multiply(y);
  return {Coloring::unit(static_cast<std::size_t>(x.rows())),
          split_by_keys(Coloring::unit(static_cast<std::size_t>(x.cols())),
                        keys_of(xty, policy))};
}

InitialColorings init_coloring_logistic(const SparseMatrix& x, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& v, int num_classes,
                                        const FloatKeyPolicy& policy) {
  check_lengths(x, y, v);
  require(num_classes >= 2, ErrorKind::kParameter, "num_classes must be at least 2");
  const std::vector<int> ids = class_ids(y, num_classes);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());

  std::vector<std::int64_t> weight_keys(n);
  for (std::size_t i = 0; i < n; ++i) weight_keys[i] = FloatKeyPolicy{}.key(v[i]);
  Coloring rows = split_by_keys(Coloring::unit(n), weight_keys);

  if (num_classes == 2) {
    Eigen::VectorXd vy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) vy[i] = v[i] * ids[i];
    return {std::move(rows),
            split_by_keys(Coloring::unit(d), keys_of(x.transpose_multiply(vy), policy))};
  }
  std::vector<std::vector<std::int64_t>> keys(d, std::vector<std::int64_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    Eigen::VectorXd vc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (ids[i] == c) vc[i] = v[i];
    }
    const Eigen::VectorXd sums = x.transpose_multiply(vc);
    for (std::size_t j = 0; j < d; ++j) keys[j][c] = policy.key(sums[j]);
  }
  return {std::move(rows), split_by_keys(Coloring::unit(d), keys)};
}

ReducedInstance reduce_erm(const SparseMatrix& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& v, const ModelSpec& spec,
                           const FloatKeyPolicy& policy) {
  spec.validate();
  require(!spec.is_kernel(), ErrorKind::kParameter,
          "reduce_erm handles primal families; use the kernel reductions");
  check_lengths(x, y, v);
  require(x.rows() > 0 && x.cols() > 0, ErrorKind::kEmpty, "empty data matrix");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    require(std::isfinite(v[i]) && v[i] > 0.0, ErrorKind::kParameter,
            "sample weights must be positive");
  }
  require(x.all_finite() && y.allFinite(), ErrorKind::kInput, "non-finite input values");

  const bool classification = spec.is_classification();
  const int num_classes = spec.family == ModelFamily::kLogisticBinary ? 2 : spec.num_classes;

  InitialColorings init;
  if (classification) {
    init = init_coloring_logistic(x, y, v, num_classes, policy);
  } else if (is_constant(v)) {
    init = init_coloring_linreg(x, y, policy);
  } else {
    // Weighted squared loss: same conditions as the weighted logistic case
    // with y used as a real-valued target.
    std::vector<std::int64_t> weight_keys(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) weight_keys[i] = FloatKeyPolicy{}.key(v[i]);
    const Eigen::VectorXd vy = v.cwiseProduct(y);
    init = {split_by_keys(Coloring::unit(static_cast<std::size_t>(x.rows())), weight_keys),
            split_by_keys(Coloring::unit(static_cast<std::size_t>(x.cols())),
                          keys_of(x.transpose_multiply(vy), policy))};
  }

  EquitablePair pair = coarsest_equitable(x, init.rows, init.cols, policy);
  post_check(x, v, init, pair, policy);

  ReducedInstance out;
  out.model = spec;
  out.n_original = static_cast<std::size_t>(x.rows());
  out.d_original = static_cast<std::size_t>(x.cols());
  const auto features = reduced_rows(x, pair.rows, pair.cols);
  const int n_colors = pair.rows.num_colors();
  const MergeMode mode = spec.resolved_merge_mode();

  std::vector<SparseMatrix::Triplet> triplets;
  std::vector<double> targets;
  std::vector<double> weights;
  auto emit_row = [&](int s) {
    const int r = static_cast<int>(out.row_color.size());
    for (const auto& [t, value] : features[s]) triplets.push_back({r, t, value});
    out.row_color.push_back(s);
  };

  if (mode == MergeMode::kPerLabel) {
    // One row per (color, distinct target) in ascending target order.
    std::vector<std::map<double, double>> groups(static_cast<std::size_t>(n_colors));
    for (int i = 0; i < x.rows(); ++i) groups[pair.rows[i]][y[i] == 0.0 ? 0.0 : y[i]] += v[i];
    for (int s = 0; s < n_colors; ++s) {
      for (const auto& [label, weight] : groups[s]) {
        emit_row(s);
        targets.push_back(label);
        weights.push_back(weight);
      }
    }
    out.targets.values = Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                           static_cast<Eigen::Index>(targets.size()));
  } else {
    Eigen::VectorXd weight_sum = Eigen::VectorXd::Zero(n_colors);
    for (int i = 0; i < x.rows(); ++i) weight_sum[pair.rows[i]] += v[i];
    for (int s = 0; s < n_colors; ++s) {
      emit_row(s);
      weights.push_back(weight_sum[s]);
    }
    const bool multiclass = classification && num_classes > 2;
    if (multiclass) {
      const std::vector<int> ids = class_ids(y, num_classes);
      Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(n_colors, num_classes);
      for (int i = 0; i < x.rows(); ++i) probs(pair.rows[i], ids[i]) += v[i];
      for (int s = 0; s < n_colors; ++s) probs.row(s) /= weight_sum[s];
      out.targets.probs = std::move(probs);
      out.targets.values = Eigen::VectorXd::Zero(n_colors);
    } else {
      Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_colors);
      for (int i = 0; i < x.rows(); ++i) sums[pair.rows[i]] += v[i] * y[i];
      out.targets.values = sums.cwiseQuotient(weight_sum);
    }
  }

  out.x = SparseMatrix::from_triplets(static_cast<int>(out.row_color.size()),
                                      pair.cols.num_colors(), std::move(triplets));
  out.sample_weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                        static_cast<Eigen::Index>(weights.size()));
  out.penalty_multipliers =
      elastic_net_reduced_penalty(pair.cols, spec.lambda1, spec.lambda2).multipliers;
  out.p = std::move(pair.rows);
  out.q = std::move(pair.cols);
  return out;
}

SparseMatrix expand_polynomial(const SparseMatrix& x, int degree) {
  require(degree >= 1, ErrorKind::kParameter, "polynomial degree must be at least 1");
  const int d = x.cols();
  // Number of monomials of each degree: C(d + k - 1, k).
  constexpr double kMaxColumns = 5e6;
  double total = 0.0;
  double count = 1.0;
  for (int k = 1; k <= degree; ++k) {
    count = count * (d + k - 1) / k;
    total += count;
  }
  require(total <= kMaxColumns, ErrorKind::kLimit,
          "polynomial expansion would produce " + std::to_string(total) + " columns");

  std::map<std::vector<int>, int> index;
  std::vector<int> combo;
  int next = 0;
  for (int k = 1; k <= degree; ++k) {
    combo.assign(static_cast<std::size_t>(k), 0);
    while (true) {
      index.emplace(combo, next++);
      int pos = k - 1;
      while (pos >= 0 && combo[pos] == d - 1) --pos;
      if (pos < 0) break;
      const int value = combo[pos] + 1;
      for (int t = pos; t < k; ++t) combo[t] = value;
    }
  }

  std::vector<SparseMatrix::Triplet> triplets;
  for (int i = 0; i < x.rows(); ++i) {
    const auto cols = x.row_indices(i);
    const auto vals = x.row_values(i);
    std::vector<int> pick;
    // Depth-first over non-decreasing positions into the row's nonzeros.
    auto visit = [&](auto&& self, std::size_t start, double product) -> void {
      if (!pick.empty()) {
        std::vector<int> key(pick.size());
        for (std::size_t t = 0; t < pick.size(); ++t) key[t] = cols[pick[t]];
        triplets.push_back({i, index.at(key), product});
      }
      if (static_cast<int>(pick.size()) == degree) return;
      for (std::size_t k = start; k < cols.size(); ++k) {
        pick.push_back(static_cast<int>(k));
        self(self, k, product * vals[k]);
        pick.pop_back();
      }
    };
    visit(visit, 0, 1.0);
  }
  return SparseMatrix::from_triplets(x.rows(), next, std::move(triplets));
}

WeightedData absorb_sample_weights(const SparseMatrix& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& v) {
  check_lengths(x, y, v);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    require(v[i] > 0.0, ErrorKind::kParameter,
            "sample weight at row " + std::to_string(i) + " is not positive");
  }
  const Eigen::VectorXd root = v.cwiseSqrt();
  return {x.scale_rows(root), root.cwiseProduct(y)};
}

LiftedParams lift_solution(const Eigen::MatrixXd& w_reduced, const Eigen::VectorXd& b_reduced,
                           const Coloring& q) {
  require(w_reduced.rows() == q.num_colors(), ErrorKind::kDimension,
          "reduced coefficients have " + std::to_string(w_reduced.rows()) + " rows for " +
              std::to_string(q.num_colors()) + " feature colors");
  LiftedParams out{Eigen::MatrixXd(static_cast<Eigen::Index>(q.size()), w_reduced.cols()),
                   b_reduced};
  for (std::size_t j = 0; j < q.size(); ++j) {
    out.w.row(static_cast<Eigen::Index>(j)) = w_reduced.row(q[j]);
  }
  return out;
}

StandardScaler StandardScaler::fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  require(x.rows() > 0, ErrorKind::kEmpty, "cannot fit a scaler on zero rows");
  StandardScaler s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().mean();
    const double sd = std::sqrt(var);
    if (sd == 0.0) {
      s.scale[j] = 1.0;
      s.constant_features.push_back(static_cast<int>(j));
    } else {
      s.scale[j] = sd;
    }
  }
  return s;
}

Eigen::MatrixXd StandardScaler::transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  require(x.cols() == mean.size(), ErrorKind::kDimension, "scaler feature count mismatch");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

BackTransformed scaler_backtransform(const Eigen::MatrixXd& w_scaled,
                                     const Eigen::VectorXd& b_scaled, const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& sigma) {
  require(w_scaled.rows() == mu.size() && mu.size() == sigma.size(), ErrorKind::kDimension,
          "scaler statistics do not match the coefficient count");
  require(b_scaled.size() == w_scaled.cols(), ErrorKind::kDimension,
          "one bias per coefficient column expected");
  BackTransformed out;
  out.w = w_scaled;
  for (Eigen::Index j = 0; j < sigma.size(); ++j) {
    double sd = sigma[j];
    if (sd == 0.0) {
      sd = 1.0;
      out.constant_features.push_back(static_cast<int>(j));
    }
    require(sd > 0.0, ErrorKind::kParameter, "negative standard deviation");
    out.w.row(j) /= sd;
  }
  out.b = b_scaled - out.w.transpose() * mu;
  return out;
}

double ReducedPenalty::value(const Eigen::MatrixXd& w_reduced) const {
  require(w_reduced.rows() == multipliers.size(), ErrorKind::kDimension,
          "penalty multiplier count mismatch");
  double total = 0.0;
  for (Eigen::Index k = 0; k < w_reduced.cols(); ++k) {
    for (Eigen::Index t = 0; t < w_reduced.rows(); ++t) {
      const double w = w_reduced(t, k);
      total += multipliers[t] * (lambda2 * w * w + lambda1 * std::abs(w));
    }
  }
  return total;
}

ReducedPenalty elastic_net_reduced_penalty(const Coloring& q, double lambda1, double lambda2) {
  require(lambda1 >= 0.0 && lambda2 >= 0.0, ErrorKind::kParameter,
          "penalties must be nonnegative");
  ReducedPenalty out;
  out.lambda1 = lambda1;
  out.lambda2 = lambda2;
  const auto sizes = q.sizes();
  out.multipliers.resize(static_cast<Eigen::Index>(sizes.size()));
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    out.multipliers[static_cast<Eigen::Index>(t)] = static_cast<double>(sizes[t]);
  }
  return out;
}

}  // namespace ermsquash
