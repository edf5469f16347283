#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/targets.hpp"

namespace nrlangevin {

struct ObservableSeries {
  std::vector<double> values;
  double dt = 1.0;
  EvalBudget budget;
};

inline double ergodic_average(const ObservableSeries& s) {
  if (s.values.size() < 2) throw std::invalid_argument("ergodic_average: need N >= 2");
  double mean = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    mean += (s.values[i] - mean) / static_cast<double>(i + 1);
  return mean;
}

struct EssResult {
  double ess = 0.0;
  bool flagged = false;  // zero-variance series, ESS = N by convention
};

// Effective sample size via the initial-monotone-positive-sequence estimate of
// the integrated autocorrelation time: sum consecutive autocorrelation pairs
// while positive, enforce monotonicity, and clip the result to [1, N].
inline EssResult ess(const ObservableSeries& s) {
  const std::size_t n = s.values.size();
  if (n < 100) throw std::invalid_argument("ess: need N >= 100");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += (s.values[i] - mean) / static_cast<double>(i + 1);

  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i)
      acc += (s.values[i] - mean) * (s.values[i + lag] - mean);
    return acc / static_cast<double>(n);
  };

  const double c0 = autocov(0);
  if (c0 <= 0.0) return {static_cast<double>(n), true};

  const std::size_t max_lag = std::min<std::size_t>(n - 2, 20000);
  double pair_sum_total = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < max_lag; k += 2) {
    double pair = (autocov(k) + autocov(k + 1)) / c0;
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);  // monotone envelope
    pair_sum_total += pair;
    prev_pair = pair;
  }
  const double tau = std::max(2.0 * pair_sum_total - 1.0, 1e-12);
  const double value = std::clamp(static_cast<double>(n) / tau, 1.0, static_cast<double>(n));
  return {value, false};
}

// Batch-means estimate of the rescaled asymptotic variance
//   sigma^2_dt(f) = dt * N * Var[(1/N) sum f(X_k)],
// computed as dt * batch_length * sample variance of the batch means.  The
// estimator bias is O(1/batch length).
inline double batch_means_variance(const ObservableSeries& s, int n_batches) {
  const std::size_t n = s.values.size();
  if (n_batches < 10 || static_cast<std::size_t>(n_batches) > n / 10)
    throw std::invalid_argument("batch_means_variance: n_batches must lie in [10, N/10]");
  const std::size_t len = n / static_cast<std::size_t>(n_batches);
  std::vector<double> means(static_cast<std::size_t>(n_batches), 0.0);
  for (std::size_t b = 0; b < means.size(); ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += s.values[b * len + i];
    means[b] = acc / static_cast<double>(len);
  }
  double grand = 0.0;
  for (double m : means) grand += m / static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(means.size() - 1);
  return s.dt * static_cast<double>(len) * var;
}

struct MseDecomposition {
  double mse = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
};

// MSE of replica averages against a reference value, split into squared bias
// and variance; mse = bias_sq + variance holds to rounding by construction.
inline MseDecomposition mse_over_replicas(const std::vector<double>& replica_averages,
                                          double f_ref) {
  if (replica_averages.size() < 2)
    throw std::invalid_argument("mse_over_replicas: need at least 2 replicas");
  const double r = static_cast<double>(replica_averages.size());
  double mse = 0.0, mean = 0.0;
  for (double a : replica_averages) {
    mse += (a - f_ref) * (a - f_ref) / r;
    mean += a / r;
  }
  MseDecomposition out;
  out.mse = mse;
  out.bias_sq = (mean - f_ref) * (mean - f_ref);
  out.variance = out.mse - out.bias_sq;
  return out;
}

namespace detail {

// Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1], by
// Newton iteration on the Legendre recurrence.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

struct QuadraturePanel {
  double x0, x1, y0, y1;
  double den_lo = 0.0, den_hi = 0.0;
  double num_lo = 0.0, num_hi = 0.0;
  double error() const { return std::abs(den_hi - den_lo) + std::abs(num_hi - num_lo); }
};

}  // namespace detail

struct QuadratureBox {
  double x_lo, x_hi, y_lo, y_hi;
};

// Normalized expectation Int f pi / Int pi over the box for a two-dimensional
// target, by tensor Gauss-Legendre panels with adaptive bisection.  Throws if
// the error estimate cannot be driven below tol within the panel budget.
inline double quadrature_reference(const TargetDistribution& target,
                                   const std::function<double(const VectorXd&)>& f,
                                   const QuadratureBox& box, double tol,
                                   int max_panels = 40000) {
  if (target.dim() != 2) throw std::invalid_argument("quadrature_reference: need a 2D target");
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature_reference: tol must be positive");

  static std::vector<double> nodes_lo, weights_lo, nodes_hi, weights_hi;
  if (nodes_lo.empty()) {
    detail::gauss_legendre(10, nodes_lo, weights_lo);
    detail::gauss_legendre(20, nodes_hi, weights_hi);
  }

  // Shift the log densities by the maximum over a coarse probe grid so the
  // exponentials stay in range.
  double log_shift = -std::numeric_limits<double>::infinity();
  VectorXd probe(2);
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      probe[0] = box.x_lo + (box.x_hi - box.x_lo) * i / 40.0;
      probe[1] = box.y_lo + (box.y_hi - box.y_lo) * j / 40.0;
      log_shift = std::max(log_shift, target.log_density_unnorm(probe));
    }

  auto integrate = [&](const detail::QuadraturePanel& p, const std::vector<double>& nodes,
                       const std::vector<double>& weights, double& den, double& num) {
    const double cx = 0.5 * (p.x0 + p.x1), hx = 0.5 * (p.x1 - p.x0);
    const double cy = 0.5 * (p.y0 + p.y1), hy = 0.5 * (p.y1 - p.y0);
    den = num = 0.0;
    VectorXd pt(2);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        pt[0] = cx + hx * nodes[i];
        pt[1] = cy + hy * nodes[j];
        const double w = weights[i] * weights[j] * hx * hy;
        const double dens = std::exp(target.log_density_unnorm(pt) - log_shift);
        den += w * dens;
        num += w * dens * f(pt);
      }
  };

  auto evaluate_panel = [&](detail::QuadraturePanel& p) {
    integrate(p, nodes_lo, weights_lo, p.den_lo, p.num_lo);
    integrate(p, nodes_hi, weights_hi, p.den_hi, p.num_hi);
  };

  std::deque<detail::QuadraturePanel> panels;
  detail::QuadraturePanel root{box.x_lo, box.x_hi, box.y_lo, box.y_hi};
  evaluate_panel(root);
  panels.push_back(root);

  int used = 1;
  while (true) {
    double den = 0.0, num = 0.0, err = 0.0;
    std::size_t worst = 0;
    double worst_err = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      den += panels[i].den_hi;
      num += panels[i].num_hi;
      err += panels[i].error();
      if (panels[i].error() > worst_err) {
        worst_err = panels[i].error();
        worst = i;
      }
    }
    if (den <= 0.0) throw NumericalError("quadrature_reference: vanishing density mass");
    const double ratio = num / den;
    const double ratio_err = (err + std::abs(ratio) * err) / den;
    if (ratio_err <= tol) return ratio;
    if (used + 4 > max_panels)
      throw NumericalError("quadrature_reference: did not converge, error estimate " +
                           std::to_string(ratio_err));

    detail::QuadraturePanel p = panels[worst];
    panels.erase(panels.begin() + static_cast<std::ptrdiff_t>(worst));
    const double mx = 0.5 * (p.x0 + p.x1), my = 0.5 * (p.y0 + p.y1);
    detail::QuadraturePanel quads[4] = {{p.x0, mx, p.y0, my},
                                        {mx, p.x1, p.y0, my},
                                        {p.x0, mx, my, p.y1},
                                        {mx, p.x1, my, p.y1}};
    for (auto& q : quads) {
      evaluate_panel(q);
      panels.push_back(q);
    }
    used += 4;
  }
}

}  // namespace nrlangevin
