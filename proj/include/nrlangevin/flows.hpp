#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/rng.hpp"
#include "nrlangevin/targets.hpp"

namespace nrlangevin {

// Skew-symmetric matrix, guaranteed J + J^T = 0 by construction.
class SkewMatrix {
 public:
  static SkewMatrix rotation_2d() {
    MatrixXd j(2, 2);
    j << 0.0, 1.0, -1.0, 0.0;
    return SkewMatrix(std::move(j));
  }

  // Random-permutation skew matrix: draw a permutation s(1),...,s(d) and set
  // J_{s(i),s(i+1)} = +1, J_{s(i+1),s(i)} = -1 for i = 1..d-1.
  static SkewMatrix permutation(int d, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("SkewMatrix::permutation: d must be >= 2");
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (int i = d - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.integer() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    MatrixXd m = MatrixXd::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) {
      m(perm[i], perm[i + 1]) = 1.0;
      m(perm[i + 1], perm[i]) = -1.0;
    }
    return SkewMatrix(std::move(m));
  }

  // Antisymmetric part (m - m^T)/2 of an arbitrary square matrix.
  static SkewMatrix from_matrix(const MatrixXd& m) {
    return SkewMatrix(0.5 * (m - m.transpose()));
  }

  const MatrixXd& matrix() const { return m_; }
  SkewMatrix negated() const { return SkewMatrix(-m_); }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  explicit SkewMatrix(MatrixXd m) : m_(std::move(m)) {}
  MatrixXd m_;
};

inline MatrixXd make_rotation_2d() { return SkewMatrix::rotation_2d().matrix(); }
inline MatrixXd make_permutation_skew(int d, std::uint64_t seed) {
  return SkewMatrix::permutation(d, seed).matrix();
}

enum class FlowKind { log_grad, power, compact };

// Quintic smoothstep bump on (lo, hi): rises 0 -> 1 on the lower half of the
// window and falls back to 0 on the upper half, C^2 everywhere.
inline double smoothstep_bump(double u, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("smoothstep_bump: need lo < hi");
  const double t = (u - lo) / (hi - lo);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = t <= 0.5 ? 2.0 * t : 2.0 - 2.0 * t;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// Divergence-free (w.r.t. pi) vector field gamma built from a skew matrix J:
//   log_grad : beta J grad log pi(x)
//   power    : beta alpha exp(alpha (l(x) - l_ref)) J grad log pi(x)
//   compact  : beta Psi(exp(l(x) - l_ref)) J grad log pi(x)
// where l is the unnormalized log density.  The reference level l_ref absorbs
// the unknown normalization into beta and prevents overflow far from the mode.
class NonreversibleFlow {
 public:
  static NonreversibleFlow log_grad(const TargetDistribution& target, SkewMatrix j,
                                    double beta) {
    return NonreversibleFlow(FlowKind::log_grad, target, std::move(j), beta, 0.0, 0.0, 0.0,
                             0.0);
  }

  static NonreversibleFlow power(const TargetDistribution& target, SkewMatrix j, double beta,
                                 double alpha, double log_ref = 0.0) {
    if (!(alpha > 0.0)) throw std::invalid_argument("NonreversibleFlow::power: alpha > 0");
    return NonreversibleFlow(FlowKind::power, target, std::move(j), beta, alpha, 0.0, 0.0,
                             log_ref);
  }

  static NonreversibleFlow compact(const TargetDistribution& target, SkewMatrix j, double beta,
                                   double window_lo, double window_hi, double log_ref = 0.0) {
    return NonreversibleFlow(FlowKind::compact, target, std::move(j), beta, 0.0, window_lo,
                             window_hi, log_ref);
  }

  VectorXd evaluate(const VectorXd& x) const {
    if (x.size() != j_.dim())
      throw std::invalid_argument("NonreversibleFlow::evaluate: dimension mismatch");
    if (beta_ == 0.0) return VectorXd::Zero(x.size());
    switch (kind_) {
      case FlowKind::log_grad:
        return beta_ * (j_.matrix() * target_->grad_log_density(x));
      case FlowKind::power: {
        const double w =
            alpha_ * std::exp(alpha_ * (target_->log_density_unnorm(x) - log_ref_));
        return (beta_ * w) * (j_.matrix() * target_->grad_log_density(x));
      }
      case FlowKind::compact: {
        const double u = std::exp(target_->log_density_unnorm(x) - log_ref_);
        const double w = smoothstep_bump(u, window_lo_, window_hi_);
        if (w == 0.0) return VectorXd::Zero(x.size());
        return (beta_ * w) * (j_.matrix() * target_->grad_log_density(x));
      }
    }
    return VectorXd::Zero(x.size());
  }

  // For flows that are exactly linear, gamma(x) = G x, returns G; used by the
  // Taylor integrator.  Currently the log_grad flow over a Gaussian target.
  std::optional<MatrixXd> linear_matrix() const {
    if (kind_ != FlowKind::log_grad) return std::nullopt;
    if (const auto* g = dynamic_cast<const GaussianTarget*>(resolve_target()))
      return MatrixXd(-beta_ * (j_.matrix() * g->precision()));
    return std::nullopt;
  }

  double beta() const { return beta_; }
  FlowKind kind() const { return kind_; }
  const SkewMatrix& skew() const { return j_; }
  const TargetDistribution& target() const { return *target_; }

  NonreversibleFlow with_beta(double beta) const {
    NonreversibleFlow copy = *this;
    copy.beta_ = beta;
    return copy;
  }

 private:
  NonreversibleFlow(FlowKind kind, const TargetDistribution& target, SkewMatrix j, double beta,
                    double alpha, double lo, double hi, double log_ref)
      : kind_(kind),
        target_(&target),
        j_(std::move(j)),
        beta_(beta),
        alpha_(alpha),
        window_lo_(lo),
        window_hi_(hi),
        log_ref_(log_ref) {
    if (j_.dim() != target.dim())
      throw std::invalid_argument("NonreversibleFlow: skew matrix / target dimension mismatch");
  }

  const TargetDistribution* resolve_target() const {
    if (const auto* counting = dynamic_cast<const CountingTarget*>(target_))
      return &counting->inner();
    return target_;
  }

  FlowKind kind_;
  const TargetDistribution* target_;
  SkewMatrix j_;
  double beta_;
  double alpha_;
  double window_lo_, window_hi_;
  double log_ref_;
};

// Max over the given points of |div(pi gamma)(x)| / pi(x), with the divergence
// taken by central finite differences of step h on the unnormalized density.
// Test utility; the samplers never call this.
inline double check_divergence_free(const NonreversibleFlow& flow,
                                    const std::vector<VectorXd>& points, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_divergence_free: h must be positive");
  const TargetDistribution& target = flow.target();
  double worst = 0.0;
  for (const VectorXd& x : points) {
    const double l0 = target.log_density_unnorm(x);
    double div = 0.0;
    VectorXd xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      const double fp = std::exp(target.log_density_unnorm(xp) - l0) * flow.evaluate(xp)[i];
      const double fm = std::exp(target.log_density_unnorm(xm) - l0) * flow.evaluate(xm)[i];
      div += (fp - fm) / (2.0 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    worst = std::max(worst, std::abs(div));
  }
  return worst;
}

}  // namespace nrlangevin
