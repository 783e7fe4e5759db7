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

#include "ermsquash/solvers.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ermsquash/error.hpp"
#include "json.hpp"
#include "optimize.hpp"

namespace ermsquash {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

enum class Loss { kSquared, kSigmoid, kSoftmax };

// Per-row loss values and derivatives with respect to the logits.
double loss_and_derivative(Loss loss, const Eigen::MatrixXd& z, const Eigen::MatrixXd& t,
                           const Eigen::VectorXd& v, Eigen::MatrixXd* dz) {
  double total = 0.0;
  if (dz) dz->resize(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    switch (loss) {
      case Loss::kSquared: {
        const double r = z(i, 0) - t(i, 0);
        total += v[i] * r * r;
        if (dz) (*dz)(i, 0) = 2.0 * v[i] * r;
        break;
      }
      case Loss::kSigmoid: {
        total += v[i] * (softplus(z(i, 0)) - t(i, 0) * z(i, 0));
        if (dz) (*dz)(i, 0) = v[i] * (sigmoid(z(i, 0)) - t(i, 0));
        break;
      }
      case Loss::kSoftmax: {
        const double m = z.row(i).maxCoeff();
        const double lse = m + std::log((z.row(i).array() - m).exp().sum());
        const double mass = t.row(i).sum();
        total += v[i] * (lse * mass - t.row(i).dot(z.row(i)));
        if (dz) {
          for (Eigen::Index c = 0; c < z.cols(); ++c) {
            (*dz)(i, c) = v[i] * (std::exp(z(i, c) - lse) * mass - t(i, c));
          }
        }
        break;
      }
    }
  }
  return total;
}

Eigen::MatrixXd link(Loss loss, const Eigen::MatrixXd& z) {
  switch (loss) {
    case Loss::kSquared: return z;
    case Loss::kSigmoid: return z.unaryExpr([](double a) { return sigmoid(a); });
    case Loss::kSoftmax: {
      Eigen::MatrixXd p(z.rows(), z.cols());
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        p.row(i) = (z.row(i).array() - m).exp();
        p.row(i) /= p.row(i).sum();
      }
      return p;
    }
  }
  return z;
}

// Smooth part of a primal objective over packed parameters [vec(W); b],
// optionally in StandardScaler coordinates (then W and b are scaled-space
// parameters and the penalty must be zero).
struct PrimalProblem {
  Loss loss = Loss::kSquared;
  const SparseMatrix* x = nullptr;
  Eigen::MatrixXd targets;  // n x C
  Eigen::VectorXd v;
  Eigen::VectorXd multipliers;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int columns = 1;
  bool fit_intercept = true;
  bool scaled = false;
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(x->cols()) * columns + columns; }

  void unpack(const Eigen::VectorXd& theta, Eigen::MatrixXd& w, Eigen::VectorXd& b) const {
    const int d = x->cols();
    w = Eigen::Map<const Eigen::MatrixXd>(theta.data(), d, columns);
    b = fit_intercept ? Eigen::VectorXd(theta.tail(columns)) : Eigen::VectorXd::Zero(columns);
  }

  Eigen::MatrixXd logits(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) const {
    Eigen::MatrixXd z = x->eigen() * w;
    z.rowwise() += b.transpose();
    return z;
  }

  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    unpack(theta, w, b);
    Eigen::MatrixXd we = w;
    Eigen::VectorXd be = b;
    if (scaled) {
      we = w.array().colwise() / sigma.array();
      be = b - we.transpose() * mu;
    }
    Eigen::MatrixXd dz;
    double f = loss_and_derivative(loss, logits(we, be), targets, v, grad ? &dz : nullptr);
    const Eigen::MatrixXd w2 = w.array().square();
    f += lambda2 * (multipliers.transpose() * w2).sum();
    if (grad) {
      grad->resize(dim());
      Eigen::MatrixXd gw = x->eigen().transpose() * dz;
      Eigen::VectorXd gb = dz.colwise().sum().transpose();
      if (scaled) gw = (gw - mu * gb.transpose()).array().colwise() / sigma.array();
      gw += 2.0 * lambda2 * (w.array().colwise() * multipliers.array()).matrix();
      if (!fit_intercept) gb.setZero();
      grad->head(w.size()) = Eigen::Map<const Eigen::VectorXd>(gw.data(), gw.size());
      grad->tail(columns) = gb;
    }
    return f;
  }

  double l1_value(const Eigen::MatrixXd& w) const {
    return lambda1 * (multipliers.transpose() * w.cwiseAbs()).sum();
  }
};

Eigen::MatrixXd targets_matrix(const Targets& targets, Loss loss, int columns, Eigen::Index n) {
  if (loss == Loss::kSoftmax) {
    if (targets.has_probs()) {
      require(targets.probs.rows() == n && targets.probs.cols() == columns, ErrorKind::kDimension,
              "probability targets must be n x num_classes");
      return targets.probs;
    }
    require(targets.values.size() == n, ErrorKind::kDimension, "one target per row expected");
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, columns);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = targets.values[i];
      require(c >= 0 && c < columns && c == std::floor(c), ErrorKind::kInput,
              "class id out of range at row " + std::to_string(i));
      t(i, static_cast<Eigen::Index>(c)) = 1.0;
    }
    return t;
  }
  require(targets.values.size() == n, ErrorKind::kDimension, "one target per row expected");
  if (loss == Loss::kSigmoid) {
    for (Eigen::Index i = 0; i < n; ++i) {
      require(targets.values[i] >= 0.0 && targets.values[i] <= 1.0, ErrorKind::kInput,
              "binary targets must lie in [0, 1]");
    }
  }
  return targets.values;
}

void check_common(const SparseMatrix& x, const Eigen::VectorXd& v, const Eigen::VectorXd& m) {
  require(v.size() == x.rows(), ErrorKind::kDimension, "one weight per row expected");
  require(m.size() == x.cols(), ErrorKind::kDimension, "one penalty multiplier per column expected");
  require(x.all_finite() && v.allFinite(), ErrorKind::kInput, "non-finite input values");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    require(v[i] > 0.0, ErrorKind::kParameter, "sample weights must be positive");
  }
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    require(m[j] > 0.0, ErrorKind::kParameter, "penalty multipliers must be positive");
  }
}

PrimalProblem make_problem(Loss loss, const SparseMatrix& x, const Targets& targets,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& multipliers,
                           double lambda1, double lambda2, int columns, bool fit_intercept) {
  check_common(x, v, multipliers);
  require(std::isfinite(lambda1) && std::isfinite(lambda2) && lambda1 >= 0.0 && lambda2 >= 0.0,
          ErrorKind::kParameter, "penalties must be finite and nonnegative");
  PrimalProblem p;
  p.loss = loss;
  p.x = &x;
  p.targets = targets_matrix(targets, loss, columns, x.rows());
  require(p.targets.allFinite(), ErrorKind::kInput, "non-finite targets");
  p.v = v;
  p.multipliers = multipliers;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.columns = columns;
  p.fit_intercept = fit_intercept;
  return p;
}

// Population mean and standard deviation of every column, zeros included.
void sparse_column_stats(const SparseMatrix& x, Eigen::VectorXd& mu, Eigen::VectorXd& sigma) {
  const double n = x.rows();
  const auto& cm = x.column_major();
  mu.resize(x.cols());
  sigma.resize(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (int k = cm.col_ptr[j]; k < cm.col_ptr[j + 1]; ++k) s += cm.values[k];
    const double m = s / n;
    double ss = 0.0;
    int count = 0;
    for (int k = cm.col_ptr[j]; k < cm.col_ptr[j + 1]; ++k) {
      const double dev = cm.values[k] - m;
      ss += dev * dev;
      ++count;
    }
    ss += (n - count) * m * m;
    mu[j] = m;
    sigma[j] = std::sqrt(ss / n);
  }
}

// Objectives are sums over rows, so the gradient tolerance is taken relative
// to the total sample weight. Reduction preserves that total, which keeps the
// stopping rule identical for original and reduced instances.
SolverOptions weight_scaled(const SolverOptions& options, const Eigen::VectorXd& v) {
  require(options.tol > 0.0 && options.max_iter >= 0, ErrorKind::kParameter,
          "solver needs tol > 0 and max_iter >= 0");
  SolverOptions scaled = options;
  scaled.tol = options.tol * std::max(1.0, v.sum());
  return scaled;
}

FitResult run_iterative(PrimalProblem problem, const SolverOptions& user_options) {
  const auto start = Clock::now();
  const SolverOptions options = weight_scaled(user_options, problem.v);
  FitResult out;
  const PrimalProblem raw = problem;
  const bool smooth = problem.lambda1 == 0.0;
  if (options.standardize && smooth && problem.lambda2 == 0.0 && problem.fit_intercept &&
      problem.x->rows() > 0) {
    sparse_column_stats(*problem.x, problem.mu, problem.sigma);
    for (Eigen::Index j = 0; j < problem.sigma.size(); ++j) {
      if (problem.sigma[j] == 0.0) problem.sigma[j] = 1.0;
    }
    problem.scaled = true;
  }
  const detail::SmoothFn fn = [&problem](const Eigen::VectorXd& theta, Eigen::VectorXd& g) {
    return problem.eval(theta, &g);
  };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(problem.dim());
  detail::OptimizeResult r;
  if (smooth) {
    r = detail::minimize_lbfgs(fn, x0, options);
  } else {
    Eigen::VectorXd l1 = Eigen::VectorXd::Zero(problem.dim());
    for (int c = 0; c < problem.columns; ++c) {
      l1.segment(static_cast<Eigen::Index>(c) * problem.x->cols(), problem.x->cols()) =
          problem.lambda1 * problem.multipliers;
    }
    r = detail::minimize_proximal(fn, x0, l1, options);
  }
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
  problem.unpack(r.x, w, b);
  if (problem.scaled) {
    BackTransformed back = scaler_backtransform(w, b, problem.mu, problem.sigma);
    w = std::move(back.w);
    b = std::move(back.b);
    out.standardized = true;
  }
  Eigen::VectorXd theta(raw.dim());
  theta.head(w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  theta.tail(raw.columns) = b;
  out.objective = raw.eval(theta, nullptr) + raw.l1_value(w);
  out.coefficients = std::move(w);
  out.bias = std::move(b);
  out.iterations = r.iterations;
  out.grad_inf_norm = r.residual;
  out.converged = r.converged;
  out.trace = std::move(r.trace);
  out.wall_time = seconds_since(start);
  return out;
}

Loss loss_of(const ModelSpec& spec) {
  switch (spec.family) {
    case ModelFamily::kLinreg:
    case ModelFamily::kRidge:
    case ModelFamily::kElasticNet:
    case ModelFamily::kKernelRidge:
      return Loss::kSquared;
    case ModelFamily::kLogisticBinary:
    case ModelFamily::kKernelLogistic:
      return Loss::kSigmoid;
    case ModelFamily::kLogisticMulticlass:
      return Loss::kSoftmax;
  }
  return Loss::kSquared;
}

int columns_of(const ModelSpec& spec) {
  return spec.family == ModelFamily::kLogisticMulticlass ? spec.num_classes : 1;
}

// Smooth kernel objective over [alpha; b].
struct KernelProblem {
  Loss loss = Loss::kSquared;
  Eigen::MatrixXd k_logit;
  Eigen::MatrixXd k_quad;
  Eigen::MatrixXd y;
  Eigen::VectorXd v;
  double lambda = 0.0;

  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
    const Eigen::Index q = k_quad.rows();
    const Eigen::VectorXd alpha = theta.head(q);
    const double b = theta[q];
    Eigen::MatrixXd z = k_logit * alpha;
    z.array() += b;
    Eigen::MatrixXd dz;
    const Eigen::VectorXd ka = k_quad * alpha;
    double f = loss_and_derivative(loss, z, y, v, grad ? &dz : nullptr) + lambda * alpha.dot(ka);
    if (grad) {
      grad->resize(q + 1);
      grad->head(q) = k_logit.transpose() * dz.col(0) + 2.0 * lambda * ka;
      (*grad)[q] = dz.sum();
    }
    return f;
  }
};

KernelProblem make_kernel_problem(Loss loss, const SparseMatrix& k_logit,
                                  const SparseMatrix& k_quad, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& v, double lambda) {
  require(k_quad.rows() == k_quad.cols(), ErrorKind::kDimension, "K_quad must be square");
  require(k_logit.cols() == k_quad.rows(), ErrorKind::kDimension,
          "K_logit and K_quad disagree on the coefficient count");
  require(y.size() == k_logit.rows() && v.size() == k_logit.rows(), ErrorKind::kDimension,
          "one target and weight per K_logit row expected");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::kParameter,
          "lambda must be nonnegative");
  require(k_logit.all_finite() && k_quad.all_finite() && y.allFinite() && v.allFinite(),
          ErrorKind::kInput, "non-finite input values");
  if (loss == Loss::kSigmoid) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      require(y[i] >= 0.0 && y[i] <= 1.0, ErrorKind::kInput, "binary targets must lie in [0, 1]");
    }
  }
  return {loss, k_logit.to_dense(), k_quad.to_dense(), y, v, lambda};
}

Eigen::VectorXd to_vector(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

std::string to_json(const FitResult& fit) {
  nlohmann::json j;
  if (fit.coefficients.cols() == 1) {
    j["coefficients"] = std::vector<double>(fit.coefficients.data(),
                                            fit.coefficients.data() + fit.coefficients.size());
  } else {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < fit.coefficients.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(fit.coefficients.cols()));
      for (Eigen::Index c = 0; c < fit.coefficients.cols(); ++c) row[c] = fit.coefficients(r, c);
      rows.push_back(row);
    }
    j["coefficients"] = rows;
  }
  j["bias"] = std::vector<double>(fit.bias.data(), fit.bias.data() + fit.bias.size());
  j["objective"] = fit.objective;
  j["iterations"] = fit.iterations;
  j["grad_inf_norm"] = fit.grad_inf_norm;
  j["converged"] = fit.converged;
  j["least_norm"] = fit.least_norm;
  j["standardized"] = fit.standardized;
  if (fit.rank >= 0) j["rank"] = fit.rank;
  j["wall_time"] = fit.wall_time;
  return j.dump();
}

FitResult solve_least_squares(const SparseMatrix& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& v, const ReducedPenalty& penalty,
                              bool penalize_bias, const SolverOptions& options) {
  const auto start = Clock::now();
  Targets targets{y, {}};
  PrimalProblem problem = make_problem(Loss::kSquared, x, targets, v, penalty.multipliers,
                                       penalty.lambda1, penalty.lambda2, 1, !penalize_bias);
  if (penalty.lambda1 > 0.0) {
    SolverOptions plain = options;
    plain.standardize = false;
    return run_iterative(std::move(problem), plain);
  }

  const Eigen::MatrixXd dense = x.to_dense();
  const Eigen::Index n = dense.rows();
  const Eigen::Index d = dense.cols();
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(d);
  double y_mean = 0.0;
  if (!penalize_bias) {
    const double total = v.sum();
    x_mean = (v.transpose() * dense) / total;
    y_mean = v.dot(y) / total;
  }
  const Eigen::VectorXd root = v.cwiseSqrt();
  const bool ridge = penalty.lambda2 > 0.0;
  Eigen::MatrixXd a(n + (ridge ? d : 0), d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
  a.topRows(n) = root.asDiagonal() * (dense.rowwise() - x_mean);
  rhs.head(n) = root.cwiseProduct(y.array().matrix() - Eigen::VectorXd::Constant(n, y_mean));
  if (ridge) {
    a.bottomRows(d) = (penalty.lambda2 * penalty.multipliers).cwiseSqrt().asDiagonal();
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd w = d > 0 ? Eigen::VectorXd(cod.solve(rhs)) : Eigen::VectorXd();

  FitResult out;
  out.coefficients = w;
  out.bias = Eigen::VectorXd::Constant(1, penalize_bias ? 0.0 : y_mean - x_mean.dot(w));
  out.rank = static_cast<int>(cod.rank());
  out.least_norm = out.rank < d;
  Eigen::VectorXd theta(problem.dim()), grad;
  theta << w, out.bias;
  out.objective = problem.eval(theta, &grad);
  out.grad_inf_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  out.converged = true;
  out.iterations = 1;
  out.wall_time = seconds_since(start);
  return out;
}

FitResult solve_logistic(const SparseMatrix& x, const Targets& targets, const Eigen::VectorXd& v,
                         const ReducedPenalty& penalty, int num_classes, bool multinomial,
                         bool fit_intercept, const SolverOptions& options) {
  require(num_classes >= 2, ErrorKind::kParameter, "num_classes must be at least 2");
  require(multinomial || num_classes == 2, ErrorKind::kParameter,
          "the sigmoid link is binary; use the multinomial solver for more classes");
  const Loss loss = multinomial ? Loss::kSoftmax : Loss::kSigmoid;
  return run_iterative(make_problem(loss, x, targets, v, penalty.multipliers, penalty.lambda1,
                                    penalty.lambda2, multinomial ? num_classes : 1, fit_intercept),
                       options);
}

FitResult solve_kernel_ridge(const SparseMatrix& k_logit, const SparseMatrix& k_quad,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& v, double lambda) {
  const auto start = Clock::now();
  const KernelProblem p = make_kernel_problem(Loss::kSquared, k_logit, k_quad, y, v, lambda);
  const Eigen::Index q = p.k_quad.rows();
  const Eigen::MatrixXd vk = v.asDiagonal() * p.k_logit;
  Eigen::MatrixXd system(q + 1, q + 1);
  system.topLeftCorner(q, q) = p.k_logit.transpose() * vk + lambda * p.k_quad;
  system.topRightCorner(q, 1) = vk.colwise().sum().transpose();
  system.bottomLeftCorner(1, q) = vk.colwise().sum();
  system(q, q) = v.sum();
  Eigen::VectorXd rhs(q + 1);
  rhs.head(q) = vk.transpose() * y;
  rhs[q] = v.dot(y);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(system);
  const Eigen::VectorXd theta = cod.solve(rhs);

  FitResult out;
  out.coefficients = theta.head(q);
  out.bias = Eigen::VectorXd::Constant(1, theta[q]);
  out.rank = static_cast<int>(cod.rank());
  out.least_norm = out.rank < q + 1;
  Eigen::VectorXd grad;
  out.objective = p.eval(theta, &grad);
  out.grad_inf_norm = grad.cwiseAbs().maxCoeff();
  out.converged = true;
  out.iterations = 1;
  out.wall_time = seconds_since(start);
  return out;
}

FitResult solve_kernel_logistic(const SparseMatrix& k_logit, const SparseMatrix& k_quad,
                                const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                                double lambda, const SolverOptions& user_options) {
  const auto start = Clock::now();
  const SolverOptions options = weight_scaled(user_options, v);
  const KernelProblem p = make_kernel_problem(Loss::kSigmoid, k_logit, k_quad, y, v, lambda);
  const Eigen::Index q = p.k_quad.rows();
  const detail::SmoothFn fn = [&p](const Eigen::VectorXd& theta, Eigen::VectorXd& g) {
    return p.eval(theta, &g);
  };
  detail::OptimizeResult r = detail::minimize_lbfgs(fn, Eigen::VectorXd::Zero(q + 1), options);
  FitResult out;
  out.coefficients = r.x.head(q);
  out.bias = Eigen::VectorXd::Constant(1, r.x[q]);
  out.objective = r.objective;
  out.iterations = r.iterations;
  out.grad_inf_norm = r.residual;
  out.converged = r.converged;
  out.trace = std::move(r.trace);
  out.wall_time = seconds_since(start);
  return out;
}

FitResult fit_primal(const SparseMatrix& x, const Targets& targets, const Eigen::VectorXd& v,
                     const ModelSpec& spec, const Eigen::VectorXd& multipliers,
                     const SolverOptions& options) {
  spec.validate();
  require(!spec.is_kernel(), ErrorKind::kParameter, "fit_primal handles primal families");
  const ReducedPenalty penalty{multipliers, spec.lambda1, spec.lambda2};
  switch (spec.family) {
    case ModelFamily::kLinreg:
    case ModelFamily::kRidge:
    case ModelFamily::kElasticNet:
      require(!targets.has_probs(), ErrorKind::kInput, "regression needs scalar targets");
      return solve_least_squares(x, targets.values, v, penalty, spec.penalize_bias, options);
    case ModelFamily::kLogisticBinary:
      return solve_logistic(x, targets, v, penalty, 2, false, !spec.penalize_bias, options);
    case ModelFamily::kLogisticMulticlass:
      return solve_logistic(x, targets, v, penalty, spec.num_classes, true, !spec.penalize_bias,
                            options);
    default:
      break;
  }
  fail(ErrorKind::kParameter, "unsupported family");
}

FitResult fit_reduced(const ReducedInstance& instance, const SolverOptions& options) {
  return fit_primal(instance.x, instance.targets, instance.sample_weights, instance.model,
                    instance.penalty_multipliers, options);
}

FitResult fit_kernel(const KernelReduced& instance, const SolverOptions& options) {
  if (instance.family == ModelFamily::kKernelLogistic) {
    return solve_kernel_logistic(instance.k_logit, instance.k_quad, instance.y,
                                 instance.sample_weights, instance.lambda, options);
  }
  return solve_kernel_ridge(instance.k_logit, instance.k_quad, instance.y,
                            instance.sample_weights, instance.lambda);
}

double primal_smooth_objective(const ModelSpec& spec, const SparseMatrix& x,
                               const Targets& targets, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& multipliers, const Eigen::VectorXd& params,
                               Eigen::VectorXd* gradient) {
  const PrimalProblem p = make_problem(loss_of(spec), x, targets, v, multipliers, spec.lambda1,
                                       spec.lambda2, columns_of(spec), !spec.penalize_bias);
  require(params.size() == p.dim(), ErrorKind::kDimension, "parameter vector has wrong length");
  return p.eval(params, gradient);
}

double kernel_smooth_objective(ModelFamily family, const SparseMatrix& k_logit,
                               const SparseMatrix& k_quad, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& v, double lambda,
                               const Eigen::VectorXd& params, Eigen::VectorXd* gradient) {
  const Loss loss = family == ModelFamily::kKernelLogistic ? Loss::kSigmoid : Loss::kSquared;
  const KernelProblem p = make_kernel_problem(loss, k_logit, k_quad, y, v, lambda);
  require(params.size() == p.k_quad.rows() + 1, ErrorKind::kDimension,
          "parameter vector has wrong length");
  return p.eval(params, gradient);
}

Evaluation evaluate_primal(const ModelSpec& spec, const SparseMatrix& x, const Targets& targets,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& multipliers,
                           const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  const Loss loss = loss_of(spec);
  PrimalProblem p = make_problem(loss, x, targets, v, multipliers, spec.lambda1, spec.lambda2,
                                 columns_of(spec), true);
  require(w.rows() == x.cols() && w.cols() == p.columns && b.size() == p.columns,
          ErrorKind::kDimension, "parameters do not match the model dimensions");
  Eigen::VectorXd theta(p.dim());
  theta << to_vector(w), b;
  Evaluation out;
  out.objective = p.eval(theta, nullptr) + p.l1_value(w);
  out.predictions = link(loss, p.logits(w, b));
  return out;
}

Evaluation evaluate_kernel(ModelFamily family, const SparseMatrix& k_logit,
                           const SparseMatrix& k_quad, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& v, double lambda, const Eigen::VectorXd& alpha,
                           double b) {
  const Loss loss = family == ModelFamily::kKernelLogistic ? Loss::kSigmoid : Loss::kSquared;
  const KernelProblem p = make_kernel_problem(loss, k_logit, k_quad, y, v, lambda);
  require(alpha.size() == p.k_quad.rows(), ErrorKind::kDimension,
          "alpha does not match the kernel dimension");
  Eigen::VectorXd theta(alpha.size() + 1);
  theta << alpha, b;
  Evaluation out;
  out.objective = p.eval(theta, nullptr);
  Eigen::MatrixXd z = p.k_logit * alpha;
  z.array() += b;
  out.predictions = link(loss, z);
  return out;
}

}  // namespace ermsquash
