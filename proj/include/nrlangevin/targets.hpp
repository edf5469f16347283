#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/linalg.hpp"

namespace nrlangevin {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

// Unnormalized target density on R^d.  Implementations provide log pi up to an
// additive constant and its exact analytic gradient.  Objects are immutable
// after construction and safe to share across chains.
class TargetDistribution {
 public:
  virtual ~TargetDistribution() = default;
  virtual int dim() const = 0;
  virtual double log_density_unnorm(const VectorXd& x) const = 0;
  virtual VectorXd grad_log_density(const VectorXd& x) const = 0;

 protected:
  void check_dim(const VectorXd& x) const {
    if (x.size() != dim())
      throw std::invalid_argument("target: expected dimension " + std::to_string(dim()) +
                                  ", got " + std::to_string(x.size()));
  }
};

struct EvalBudget {
  long density = 0;
  long grad = 0;
};

// Decorator that meters every density/gradient evaluation.  One instance per
// chain; the counters are the source of truth for all budget accounting.
class CountingTarget : public TargetDistribution {
 public:
  explicit CountingTarget(const TargetDistribution& inner) : inner_(inner) {}

  int dim() const override { return inner_.dim(); }
  double log_density_unnorm(const VectorXd& x) const override {
    ++counts_.density;
    return inner_.log_density_unnorm(x);
  }
  VectorXd grad_log_density(const VectorXd& x) const override {
    ++counts_.grad;
    return inner_.grad_log_density(x);
  }

  const EvalBudget& counts() const { return counts_; }
  void reset() { counts_ = EvalBudget{}; }
  const TargetDistribution& inner() const { return inner_; }

 private:
  const TargetDistribution& inner_;
  mutable EvalBudget counts_;
};

// Centered Gaussian with precision matrix P: log pi = -x.Px/2.
class GaussianTarget : public TargetDistribution {
 public:
  explicit GaussianTarget(MatrixXd precision) : precision_(std::move(precision)) {
    if (precision_.rows() != precision_.cols())
      throw std::invalid_argument("GaussianTarget: precision must be square");
    if (!is_symmetric(precision_, 1e-12))
      throw std::invalid_argument("GaussianTarget: precision must be symmetric");
    cholesky_lower(precision_, "GaussianTarget precision");  // SPD check
  }

  int dim() const override { return static_cast<int>(precision_.rows()); }
  double log_density_unnorm(const VectorXd& x) const override {
    check_dim(x);
    return -0.5 * x.dot(precision_ * x);
  }
  VectorXd grad_log_density(const VectorXd& x) const override {
    check_dim(x);
    return -(precision_ * x);
  }
  const MatrixXd& precision() const { return precision_; }

 private:
  MatrixXd precision_;
};

// Two-dimensional warped Gaussian
//   log pi(x) = -x1^2/100 - (x2 + b x1^2 - 100 b)^2,
// where b > 0 controls the warp.  Marginally x1 ~ N(0, 50).
class WarpedGaussianTarget : public TargetDistribution {
 public:
  explicit WarpedGaussianTarget(double b) : b_(b) {
    if (!(b > 0.0)) throw std::invalid_argument("WarpedGaussianTarget: b must be positive");
  }

  int dim() const override { return 2; }
  double log_density_unnorm(const VectorXd& x) const override {
    check_dim(x);
    const double t = x[1] + b_ * x[0] * x[0] - 100.0 * b_;
    return -x[0] * x[0] / 100.0 - t * t;
  }
  VectorXd grad_log_density(const VectorXd& x) const override {
    check_dim(x);
    const double t = x[1] + b_ * x[0] * x[0] - 100.0 * b_;
    VectorXd g(2);
    g[0] = -x[0] / 50.0 - 4.0 * b_ * x[0] * t;
    g[1] = -2.0 * t;
    return g;
  }
  double warp() const { return b_; }

 private:
  double b_;
};

// Bayesian logistic regression posterior with {0,1} responses and Gaussian
// prior N(0, Sigma):
//   log pi(theta) = sum_i [Y_i theta.x_i - log(1 + e^{theta.x_i})] - theta.P theta/2,
// where P is the prior precision.
class LogisticRegressionTarget : public TargetDistribution {
 public:
  LogisticRegressionTarget(MatrixXd design, VectorXd response, MatrixXd prior_precision)
      : design_(std::move(design)),
        response_(std::move(response)),
        prior_precision_(std::move(prior_precision)) {
    if (design_.rows() != response_.size())
      throw std::invalid_argument("LogisticRegressionTarget: design/response row mismatch");
    if (!design_.allFinite())
      throw std::invalid_argument("LogisticRegressionTarget: non-finite design entries");
    for (Eigen::Index i = 0; i < response_.size(); ++i)
      if (response_[i] != 0.0 && response_[i] != 1.0)
        throw std::invalid_argument("LogisticRegressionTarget: responses must be 0 or 1");
    if (prior_precision_.rows() != design_.cols() || prior_precision_.cols() != design_.cols())
      throw std::invalid_argument("LogisticRegressionTarget: prior precision shape mismatch");
    if (!is_symmetric(prior_precision_, 1e-12))
      throw std::invalid_argument("LogisticRegressionTarget: prior precision must be symmetric");
  }

  // Weakly informative default prior precision (1/100) I.
  LogisticRegressionTarget(MatrixXd design, VectorXd response)
      : LogisticRegressionTarget(
            design, response,
            MatrixXd::Identity(design.cols(), design.cols()) / 100.0) {}

  int dim() const override { return static_cast<int>(design_.cols()); }

  double log_density_unnorm(const VectorXd& theta) const override {
    check_dim(theta);
    const VectorXd z = design_ * theta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      ll += response_[i] * z[i] - log1p_exp(z[i]);
    return ll - 0.5 * theta.dot(prior_precision_ * theta);
  }

  VectorXd grad_log_density(const VectorXd& theta) const override {
    check_dim(theta);
    const VectorXd z = design_ * theta;
    VectorXd resid(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) resid[i] = response_[i] - sigmoid(z[i]);
    return design_.transpose() * resid - prior_precision_ * theta;
  }

  const MatrixXd& design() const { return design_; }
  const VectorXd& response() const { return response_; }
  const MatrixXd& prior_precision() const { return prior_precision_; }

 private:
  static double log1p_exp(double z) {  // log(1 + e^z) without overflow
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  static double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }

  MatrixXd design_;
  VectorXd response_;
  MatrixXd prior_precision_;
};

struct CoxHyperparameters {
  double sigma2 = 1.91;
  double corr_scale = 1.0 / 33.0;
  double mean = std::log(126.0) - 1.91 / 2.0;
};

// Log-Gaussian Cox posterior over the latent log-intensity field y on an
// n x n grid (state dimension d = n^2):
//   log pi(y) = sum_ij [x_ij y_ij - m e^{y_ij}] - (y - mu 1).Sigma^{-1}(y - mu 1)/2,
// with cell area m = 1/d and exponential-kernel prior covariance
//   Sigma_{uv} = sigma^2 exp(-dist(u, v) / (n * corr_scale)).
// The Cholesky factor of Sigma is computed once at construction.
class LogGaussianCoxTarget : public TargetDistribution {
 public:
  LogGaussianCoxTarget(const MatrixXi& counts, CoxHyperparameters hyper = {})
      : n_(static_cast<int>(counts.rows())), hyper_(hyper) {
    if (counts.rows() != counts.cols())
      throw std::invalid_argument("LogGaussianCoxTarget: counts grid must be square");
    if (counts.minCoeff() < 0)
      throw std::invalid_argument("LogGaussianCoxTarget: counts must be nonnegative");
    const int d = n_ * n_;
    counts_flat_.resize(d);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) counts_flat_[i * n_ + j] = counts(i, j);
    cell_area_ = 1.0 / d;

    MatrixXd sigma(d, d);
    for (int a = 0; a < d; ++a) {
      const double ai = a / n_, aj = a % n_;
      for (int b = a; b < d; ++b) {
        const double bi = b / n_, bj = b % n_;
        const double dist = std::hypot(ai - bi, aj - bj);
        sigma(a, b) = sigma(b, a) =
            hyper_.sigma2 * std::exp(-dist / (n_ * hyper_.corr_scale));
      }
    }
    prior_chol_ = cholesky_lower(sigma, "LogGaussianCoxTarget prior covariance");
  }

  int dim() const override { return n_ * n_; }
  int grid_side() const { return n_; }
  double cell_area() const { return cell_area_; }
  double mean() const { return hyper_.mean; }
  long total_count() const { return static_cast<long>(counts_flat_.sum()); }

  double log_density_unnorm(const VectorXd& y) const override {
    check_dim(y);
    double poisson = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k)
      poisson += counts_flat_[k] * y[k] - cell_area_ * guarded_exp(y[k]);
    const VectorXd dev = y.array() - hyper_.mean;
    return poisson - 0.5 * dev.dot(prior_solve(dev));
  }

  VectorXd grad_log_density(const VectorXd& y) const override {
    check_dim(y);
    VectorXd g(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k)
      g[k] = counts_flat_[k] - cell_area_ * guarded_exp(y[k]);
    const VectorXd dev = y.array() - hyper_.mean;
    return g - prior_solve(dev);
  }

 private:
  static double guarded_exp(double v) {  // keep log pi finite at extreme inputs
    return std::exp(std::min(v, 700.0));
  }
  VectorXd prior_solve(const VectorXd& v) const {
    return prior_chol_.transpose()
        .triangularView<Eigen::Upper>()
        .solve(prior_chol_.triangularView<Eigen::Lower>().solve(v));
  }

  int n_;
  CoxHyperparameters hyper_;
  VectorXd counts_flat_;
  double cell_area_;
  MatrixXd prior_chol_;
};

}  // namespace nrlangevin
