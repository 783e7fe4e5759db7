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

#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ermsquash::detail {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr int kMaxStalled = 50;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Armijo decrease, or, once the predicted decrease is below the rounding
// level of f, a curvature test on the directional derivative with f allowed
// to move by rounding noise only.
bool accept(double f_new, double f, double predicted, double slope_new, double slope) {
  if (!std::isfinite(f_new)) return false;
  if (f_new <= f + kArmijo * predicted) return true;
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
  return -predicted <= 100.0 * noise && f_new <= f + noise &&
         std::abs(slope_new) <= 0.9 * std::abs(slope);
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, const Eigen::VectorXd& thresholds) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) - thresholds[i];
    out[i] = a > 0.0 ? std::copysign(a, z[i]) : 0.0;
  }
  return out;
}

}  // namespace

OptimizeResult minimize_lbfgs(const SmoothFn& f, Eigen::VectorXd x0, const SolverOptions& options) {
  OptimizeResult r;
  r.x = std::move(x0);
  Eigen::VectorXd g(r.x.size()), g_new(r.x.size());
  double fx = f(r.x, g);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  const auto memory = static_cast<std::size_t>(std::max(1, options.lbfgs_memory));
  int stalled = 0;  // consecutive accepted steps without a decrease in f

  for (r.iterations = 0;; ++r.iterations) {
    r.residual = inf_norm(g);
    if (r.residual <= options.tol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= options.max_iter) break;

    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    double gd = g.dot(d);
    if (!(gd < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      gd = -g.squaredNorm();
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / r.residual) : 1.0;
    bool found = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
      x_new = r.x + step * d;
      f_new = f(x_new, g_new);
      if (accept(f_new, fx, step * gd, g_new.dot(d), gd)) {
        found = true;
        break;
      }
    }
    if (!found) {
      if (!s_hist.empty()) {
        // Retry from steepest descent with fresh curvature memory.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      break;
    }
    Eigen::VectorXd s = x_new - r.x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * std::sqrt(s.squaredNorm() * yv.squaredNorm())) {
      if (s_hist.size() == memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }
    stalled = f_new < fx ? 0 : stalled + 1;
    r.x = std::move(x_new);
    g.swap(g_new);
    fx = f_new;
    if (options.record_trace) r.trace.push_back(fx);
    if (stalled >= kMaxStalled) {
      r.residual = inf_norm(g);
      r.converged = r.residual <= options.tol;
      ++r.iterations;
      break;
    }
  }
  r.objective = fx;
  return r;
}

OptimizeResult minimize_proximal(const SmoothFn& f, Eigen::VectorXd x0, const Eigen::VectorXd& l1,
                                 const SolverOptions& options) {
  OptimizeResult r;
  r.x = soft_threshold(x0, Eigen::VectorXd::Zero(x0.size()));
  Eigen::VectorXd g(r.x.size()), g_new(r.x.size());
  double fx = f(r.x, g);
  auto l1_value = [&](const Eigen::VectorXd& x) { return l1.dot(x.cwiseAbs()); };
  double step = std::min(1.0, 1.0 / std::max(inf_norm(g), 1e-300));

  for (r.iterations = 0;; ++r.iterations) {
    r.residual = inf_norm(r.x - soft_threshold(r.x - g, l1));
    if (r.residual <= options.tol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= options.max_iter) break;

    const double big_f = fx + l1_value(r.x);
    bool found = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
      x_new = soft_threshold(r.x - step * g, step * l1);
      const Eigen::VectorXd dx = x_new - r.x;
      f_new = f(x_new, g_new);
      // Quadratic upper-bound condition; it implies a monotone decrease of
      // f + l1 by at least |dx|^2 / (2 step) up to rounding.
      // Both tests tolerate rounding noise in f only.
      const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fx));
      const bool bound = f_new <= fx + g.dot(dx) + dx.squaredNorm() / (2.0 * step) + noise;
      if (std::isfinite(f_new) && bound && f_new + l1_value(x_new) <= big_f + noise) {
        found = true;
        break;
      }
    }
    if (!found) break;
    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : std::min(step * 2.0, 1e12);
    r.x = std::move(x_new);
    g.swap(g_new);
    fx = f_new;
    if (options.record_trace) r.trace.push_back(fx + l1_value(r.x));
  }
  r.objective = fx + l1_value(r.x);
  return r;
}

}  // namespace ermsquash::detail
