#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/linalg.hpp"
#include "nrlangevin/splitting.hpp"

namespace nrlangevin {

enum class ReversibleMode { exact, theta_half };

// Linear benchmark system dX = -(I - beta J) A X dt + dW (unit diffusion),
// discretized by the splitting of a reversible linear step (exact
// Ornstein-Uhlenbeck map or the theta = 1/2 method) with the order-p truncated
// exponential T_p(dt beta J A) for the nonreversible flow.
struct LinearModel {
  MatrixXd drift;       // A, all eigenvalues with positive real part
  MatrixXd skew;        // J = -J^T
  double beta = 0.0;
  double dt = 0.0;
  int taylor_order = 1;  // p
  ReversibleMode mode = ReversibleMode::exact;
  Ordering ordering = Ordering::nonreversible_first;

  void validate() const {
    if (drift.rows() != drift.cols()) throw std::invalid_argument("LinearModel: A must be square");
    if (skew.rows() != drift.rows() || skew.cols() != drift.cols())
      throw std::invalid_argument("LinearModel: J shape mismatch");
    if ((skew + skew.transpose()).cwiseAbs().maxCoeff() > 1e-14)
      throw std::invalid_argument("LinearModel: J must be skew-symmetric");
    if (!(dt > 0.0)) throw std::invalid_argument("LinearModel: dt must be positive");
    if (taylor_order < 1) throw std::invalid_argument("LinearModel: p must be >= 1");
    if (!has_positive_spectrum(drift))
      throw NumericalError("LinearModel: -A is not stable");
  }
};

// One-step affine law X_{n+1} = B X_n + f with E[f f^T] = L.
struct OneStepAffine {
  MatrixXd deterministic;  // B, with B(0) = I
  MatrixXd noise_cov;      // L, symmetric PSD
};

// Linear SDE dX = B~ X dt + Sigma~^{1/2} dW whose law matches the affine chain
// at the step times.
struct ModifiedSDE {
  MatrixXd drift_log;    // B~ = log(B)/dt
  MatrixXd diffusion;    // Sigma~, symmetric
};

// Truncated exponential series T_p(G) = I + G + G^2/2! + ... + G^p/p!.
inline MatrixXd taylor_polynomial(const MatrixXd& g, int p) {
  if (p < 1) throw std::invalid_argument("taylor_polynomial: order must be >= 1");
  MatrixXd acc = MatrixXd::Identity(g.rows(), g.cols());
  MatrixXd term = acc;
  for (int k = 1; k <= p; ++k) {
    term = (term * g) / k;
    acc += term;
  }
  return acc;
}

// Assembles (B, L) for the configured splitting.  The reversible part
// contributes R = e^{-A dt} with noise int_0^dt e^{-As} e^{-A^T s} ds in exact
// mode, or the theta = 1/2 rational map with noise dt (I + dt A/2)^{-1}
// (I + dt A^T/2)^{-1}; the flow contributes T = T_p(dt beta J A).
inline OneStepAffine one_step_matrices(const LinearModel& model) {
  model.validate();
  const Eigen::Index d = model.drift.rows();
  const MatrixXd t =
      taylor_polynomial(model.dt * model.beta * (model.skew * model.drift), model.taylor_order);

  MatrixXd r, s;
  if (model.mode == ReversibleMode::exact) {
    r = matrix_exp(-model.dt * model.drift);
    const MatrixXd sigma_inf =
        solve_lyapunov_continuous(model.drift, MatrixXd::Identity(d, d));
    s = symmetrize(sigma_inf - r * sigma_inf * r.transpose());
  } else {
    const MatrixXd plus = MatrixXd::Identity(d, d) + 0.5 * model.dt * model.drift;
    const MatrixXd minus = MatrixXd::Identity(d, d) - 0.5 * model.dt * model.drift;
    const MatrixXd plus_inv = plus.partialPivLu().solve(MatrixXd::Identity(d, d));
    r = plus_inv * minus;
    s = symmetrize(model.dt * plus_inv * plus_inv.transpose());
  }

  OneStepAffine affine;
  if (model.ordering == Ordering::nonreversible_first) {
    affine.deterministic = r * t;
    affine.noise_cov = s;
  } else {
    affine.deterministic = t * r;
    affine.noise_cov = symmetrize(t * s * t.transpose());
  }
  return affine;
}

// Stationary covariance K of the affine chain, K = B K B^T + L.
inline MatrixXd numerical_invariant_covariance(const OneStepAffine& affine) {
  if (spectral_radius(affine.deterministic) >= 1.0)
    throw NumericalError("numerical_invariant_covariance: unstable scheme");
  return solve_stein(affine.deterministic, MatrixXd(-affine.noise_cov));
}

// Coefficients of the SDE the chain solves exactly in the weak sense:
// B~ = log(B)/dt and Sigma~ from the Stein equation
//   B Sigma~ B^T - Sigma~ = B~ L + L B~^T.
inline ModifiedSDE modified_coefficients(const OneStepAffine& affine, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("modified_coefficients: dt must be positive");
  ModifiedSDE mod;
  try {
    mod.drift_log = matrix_log_principal(affine.deterministic) / dt;
  } catch (const NumericalError&) {
    throw NumericalError("modified_coefficients: dt too large (no principal matrix log)");
  }
  const MatrixXd rhs = mod.drift_log * affine.noise_cov +
                       affine.noise_cov * mod.drift_log.transpose();
  mod.diffusion = solve_stein(affine.deterministic, rhs);
  return mod;
}

// CLT asymptotic variance of the time average of f(x) = x.Mx + L.x + K along
// dX = -A X dt + sigma dW with D = sigma sigma^T positive definite:
//
//   sigma^2(f) = 4 Tr[M S Pi S] + L . A^{-1} D A^{-T} L,
//
// where S solves A S + S A^T = D and Pi solves A^T Pi + Pi A = M, so that
// Var(pi_T(f)) ~ sigma^2(f)/T.  The normalization is frozen against the
// batch-means estimate of a long simulated chain (see the test suite).
inline double asymptotic_variance_quadratic(const MatrixXd& a, const MatrixXd& d,
                                            const MatrixXd& m, const VectorXd& lvec) {
  if (!has_positive_spectrum(a))
    throw NumericalError("asymptotic_variance_quadratic: -A is not stable");
  const MatrixXd msym = symmetrize(m);
  double quad = 0.0;
  if (msym.cwiseAbs().maxCoeff() > 0.0) {
    const MatrixXd s = solve_lyapunov_continuous(a, d);
    const MatrixXd pi = solve_lyapunov_continuous(a.transpose(), msym);
    quad = 4.0 * (msym * s * pi * s).trace();
  }
  double lin = 0.0;
  if (lvec.size() > 0 && lvec.cwiseAbs().maxCoeff() > 0.0) {
    const Eigen::PartialPivLU<MatrixXd> lu(a);
    const VectorXd ainv_t_l = lu.transpose().solve(lvec);  // A^{-T} L
    lin = ainv_t_l.dot(d * ainv_t_l);
  }
  return quad + lin;
}

// Asymptotic variance of the splitting chain via its exact modified equation:
// the drift and diffusion of the modified SDE replace (A, D) above.
inline double numerical_asymptotic_variance(const LinearModel& model, const MatrixXd& m,
                                            const VectorXd& lvec) {
  const OneStepAffine affine = one_step_matrices(model);
  const ModifiedSDE mod = modified_coefficients(affine, model.dt);
  return asymptotic_variance_quadratic(-mod.drift_log, mod.diffusion, m, lvec);
}

// Per-coordinate variance profile of the modified diffusion: component i is
//   (Sigma~^{1/2} Pi_i Sigma~^{1/2})_{ii},  A^T Pi_i + Pi_i A = e_i e_i^T,
// with A = -B~.  Cross-coordinate covariances are omitted, and the weights
// come from the modified diffusion tensor rather than its stationary
// covariance; the sum over coordinates reproduces the closed-form small-dt
// variance expansions tabulated for the 2D benchmark.  For the exact
// chain-measurable variance of sum_i x_i^2 use numerical_asymptotic_variance,
// which keeps the cross terms.
inline VectorXd coordinatewise_asymptotic_variance(const LinearModel& model) {
  const OneStepAffine affine = one_step_matrices(model);
  const ModifiedSDE mod = modified_coefficients(affine, model.dt);
  const MatrixXd a = -mod.drift_log;
  if (!has_positive_spectrum(a))
    throw NumericalError("coordinatewise_asymptotic_variance: modified drift not stable");
  const MatrixXd root = sqrt_psd(mod.diffusion);
  const Eigen::Index d = a.rows();
  VectorXd profile(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    MatrixXd mi = MatrixXd::Zero(d, d);
    mi(i, i) = 1.0;
    const MatrixXd pi = solve_lyapunov_continuous(a.transpose(), mi);
    profile[i] = (root * pi * root)(i, i);
  }
  return profile;
}

// bias^2 + asymptotic variance / T.
inline double mse_model(double bias, double asym_var, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("mse_model: T must be positive");
  return bias * bias + asym_var / horizon;
}

}  // namespace nrlangevin
