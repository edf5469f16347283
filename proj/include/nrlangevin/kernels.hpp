#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <optional>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/linalg.hpp"
#include "nrlangevin/rng.hpp"
#include "nrlangevin/targets.hpp"

namespace nrlangevin {

enum class KernelKind { mala, rwmh, mala_barker, exact_ou, theta_half };

// Convention for the noise term of the linear-Gaussian kernels:
//   unit_diffusion : dX = -A X dt + dW
//   sqrt2_diffusion: dX = -A X dt + sqrt(2) dW
enum class NoiseConvention { unit_diffusion, sqrt2_diffusion };

struct KernelStepRecord {
  VectorXd proposal;
  bool accepted = false;
  double log_accept_ratio = 0.0;
  long n_density_evals = 0;
  long n_grad_evals = 0;
};

// Current chain position together with the target values at that position.
// Carrying log pi and grad log pi here is what makes a MALA step cost exactly
// one gradient and one density evaluation.
struct ChainState {
  VectorXd x;
  double log_density = 0.0;
  VectorXd grad;
  bool cache_valid = false;

  void invalidate() { cache_valid = false; }
};

// One-step reversible kernel that leaves pi exactly invariant.  Metropolized
// kinds (mala, rwmh, mala_barker) work on any target; exact_ou and theta_half
// are the linear-Gaussian specials driven by a stable drift matrix A.
class ReversibleKernel {
 public:
  static ReversibleKernel metropolized(KernelKind kind, const TargetDistribution& target) {
    if (kind != KernelKind::mala && kind != KernelKind::rwmh &&
        kind != KernelKind::mala_barker)
      throw std::invalid_argument("ReversibleKernel::metropolized: wrong kind");
    ReversibleKernel k;
    k.kind_ = kind;
    k.target_ = &target;
    return k;
  }

  static ReversibleKernel linear(KernelKind kind, MatrixXd drift,
                                 NoiseConvention convention) {
    if (kind != KernelKind::exact_ou && kind != KernelKind::theta_half)
      throw std::invalid_argument("ReversibleKernel::linear: wrong kind");
    if (kind == KernelKind::exact_ou && !has_positive_spectrum(drift))
      throw NumericalError("exact_ou: drift matrix -A is not stable");
    ReversibleKernel k;
    k.kind_ = kind;
    k.drift_ = std::move(drift);
    k.convention_ = convention;
    return k;
  }

  KernelKind kind() const { return kind_; }
  bool is_metropolized() const {
    return kind_ == KernelKind::mala || kind_ == KernelKind::rwmh ||
           kind_ == KernelKind::mala_barker;
  }
  const TargetDistribution& target() const { return *target_; }
  const MatrixXd& drift() const { return drift_; }

  // Deterministic part and one-step noise covariance of a linear kernel:
  //   exact_ou  : x' = e^{-A dt} x + xi,  Cov(xi) = int_0^dt e^{-As} D e^{-A^T s} ds
  //   theta_half: x' = (I + dt A/2)^{-1} [(I - dt A/2) x + sqrt(dt) xi_D]
  // with D = I or 2I according to the noise convention.
  struct LinearOneStep {
    MatrixXd map;         // deterministic map
    MatrixXd noise_cov;   // covariance of the additive noise
    MatrixXd noise_chol;  // lower Cholesky factor of noise_cov
  };

  const LinearOneStep& linear_one_step(double dt) const {
    if (is_metropolized())
      throw std::invalid_argument("linear_one_step: kernel is not linear-Gaussian");
    if (!cache_ || cache_dt_ != dt) {
      const Eigen::Index d = drift_.rows();
      const double diffusion = convention_ == NoiseConvention::unit_diffusion ? 1.0 : 2.0;
      LinearOneStep step;
      if (kind_ == KernelKind::exact_ou) {
        step.map = matrix_exp(-dt * drift_);
        const MatrixXd sigma_inf = solve_lyapunov_continuous(
            drift_, diffusion * MatrixXd::Identity(d, d));
        step.noise_cov = symmetrize(sigma_inf - step.map * sigma_inf * step.map.transpose());
      } else {
        const MatrixXd plus = MatrixXd::Identity(d, d) + 0.5 * dt * drift_;
        const MatrixXd minus = MatrixXd::Identity(d, d) - 0.5 * dt * drift_;
        const MatrixXd plus_inv = plus.partialPivLu().solve(MatrixXd::Identity(d, d));
        step.map = plus_inv * minus;
        step.noise_cov = symmetrize(diffusion * dt * plus_inv * plus_inv.transpose());
      }
      step.noise_chol = cholesky_lower(step.noise_cov, "kernel one-step noise covariance");
      cache_ = std::move(step);
      cache_dt_ = dt;
    }
    return *cache_;
  }

 private:
  KernelKind kind_ = KernelKind::mala;
  const TargetDistribution* target_ = nullptr;
  MatrixXd drift_;
  NoiseConvention convention_ = NoiseConvention::unit_diffusion;
  mutable std::optional<LinearOneStep> cache_;
  mutable double cache_dt_ = -1.0;
};

namespace detail {

// log q_dt(y | x) for the MALA proposal N(x + grad log pi(x) dt, 2 dt I),
// up to the additive constant shared by both directions.
inline double mala_log_proposal(const VectorXd& y, const VectorXd& x, const VectorXd& grad_x,
                                double dt) {
  return -(y - x - dt * grad_x).squaredNorm() / (4.0 * dt);
}

inline void refresh_cache(const TargetDistribution& target, ChainState& state,
                          bool need_grad, KernelStepRecord& rec) {
  if (state.cache_valid) return;
  state.log_density = target.log_density_unnorm(state.x);
  ++rec.n_density_evals;
  if (need_grad) {
    state.grad = target.grad_log_density(state.x);
    ++rec.n_grad_evals;
  }
  state.cache_valid = true;
}

}  // namespace detail

// Advances the chain by one reversible step.  The state cache is reused when
// valid and updated in place; the record reports exactly the evaluations spent.
inline KernelStepRecord kernel_step(const ReversibleKernel& kernel, ChainState& state,
                                    double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("kernel_step: dt must be positive");
  KernelStepRecord rec;

  if (!kernel.is_metropolized()) {
    const auto& step = kernel.linear_one_step(dt);
    state.x = step.map * state.x + step.noise_chol * rng.normal_vector(state.x.size());
    state.invalidate();
    rec.proposal = state.x;
    rec.accepted = true;
    return rec;
  }

  const TargetDistribution& target = kernel.target();
  const bool needs_grad = kernel.kind() != KernelKind::rwmh;
  detail::refresh_cache(target, state, needs_grad, rec);

  VectorXd y;
  double log_ratio;
  double log_density_y = 0.0;
  VectorXd grad_y;
  if (kernel.kind() == KernelKind::rwmh) {
    y = state.x + std::sqrt(2.0 * dt) * rng.normal_vector(state.x.size());
    log_density_y = target.log_density_unnorm(y);
    ++rec.n_density_evals;
    log_ratio = log_density_y - state.log_density;
  } else {
    y = state.x + dt * state.grad + std::sqrt(2.0 * dt) * rng.normal_vector(state.x.size());
    log_density_y = target.log_density_unnorm(y);
    grad_y = target.grad_log_density(y);
    ++rec.n_density_evals;
    ++rec.n_grad_evals;
    log_ratio = log_density_y + detail::mala_log_proposal(state.x, y, grad_y, dt) -
                state.log_density - detail::mala_log_proposal(y, state.x, state.grad, dt);
  }
  if (!y.allFinite() || !std::isfinite(log_density_y))
    throw NumericalError("kernel_step: non-finite proposal");

  rec.proposal = y;
  rec.log_accept_ratio = log_ratio;

  double log_accept_prob;
  if (kernel.kind() == KernelKind::mala_barker) {
    // Barker rule: accept with probability r / (1 + r).
    log_accept_prob = -std::log1p(std::exp(-log_ratio));
  } else {
    log_accept_prob = std::min(0.0, log_ratio);
  }

  if (std::log(rng.uniform()) < log_accept_prob) {
    rec.accepted = true;
    state.x = y;
    state.log_density = log_density_y;
    if (needs_grad) state.grad = std::move(grad_y);
  }
  return rec;
}

// |log[pi(x) q(y|x) a(x,y)] - log[pi(y) q(x|y) a(y,x)]| for Metropolized
// kinds; zero up to rounding when the kernel satisfies detailed balance.
// Test utility.
inline double detailed_balance_residual(const ReversibleKernel& kernel, const VectorXd& x,
                                        const VectorXd& y, double dt) {
  if (!kernel.is_metropolized())
    throw std::invalid_argument("detailed_balance_residual: Metropolized kinds only");
  const TargetDistribution& target = kernel.target();
  const double lx = target.log_density_unnorm(x);
  const double ly = target.log_density_unnorm(y);

  double lq_xy, lq_yx;  // log q(y|x), log q(x|y)
  if (kernel.kind() == KernelKind::rwmh) {
    lq_xy = -(y - x).squaredNorm() / (4.0 * dt);
    lq_yx = -(x - y).squaredNorm() / (4.0 * dt);
  } else {
    lq_xy = detail::mala_log_proposal(y, x, target.grad_log_density(x), dt);
    lq_yx = detail::mala_log_proposal(x, y, target.grad_log_density(y), dt);
  }
  const double log_r_xy = ly + lq_yx - lx - lq_xy;
  double la_xy, la_yx;
  if (kernel.kind() == KernelKind::mala_barker) {
    la_xy = -std::log1p(std::exp(-log_r_xy));
    la_yx = -std::log1p(std::exp(log_r_xy));
  } else {
    la_xy = std::min(0.0, log_r_xy);
    la_yx = std::min(0.0, -log_r_xy);
  }
  return std::abs((lx + lq_xy + la_xy) - (ly + lq_yx + la_yx));
}

}  // namespace nrlangevin
