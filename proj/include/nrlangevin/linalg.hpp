#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>

#include "nrlangevin/errors.hpp"

namespace nrlangevin {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;

inline MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

inline bool is_symmetric(const MatrixXd& m, double tol = 1e-12) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

// Spectral radius of a general square matrix.
inline double spectral_radius(const MatrixXd& m) {
  return Eigen::EigenSolver<MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

// True when all eigenvalues of a have strictly positive real part, i.e. -a is
// a stable drift matrix.
inline bool has_positive_spectrum(const MatrixXd& a, double margin = 0.0) {
  const auto eig = Eigen::EigenSolver<MatrixXd>(a, false).eigenvalues();
  for (Eigen::Index i = 0; i < eig.size(); ++i)
    if (eig[i].real() <= margin) return false;
  return true;
}

// Solves the Sylvester equation A X + X B = C by complex Schur reduction of
// both coefficients followed by a column-wise triangular solve.
inline MatrixXd solve_sylvester(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c) {
  const Eigen::Index n = a.rows(), m = b.rows();
  if (a.cols() != n || b.cols() != m || c.rows() != n || c.cols() != m)
    throw std::invalid_argument("solve_sylvester: dimension mismatch");

  Eigen::ComplexSchur<MatrixXcd> sa(a.cast<std::complex<double>>());
  Eigen::ComplexSchur<MatrixXcd> sb(b.cast<std::complex<double>>());
  const MatrixXcd& ta = sa.matrixT();
  const MatrixXcd& tb = sb.matrixT();
  const MatrixXcd& qa = sa.matrixU();
  const MatrixXcd& qb = sb.matrixU();

  MatrixXcd f = qa.adjoint() * c.cast<std::complex<double>>() * qb;
  MatrixXcd y = MatrixXcd::Zero(n, m);
  const double scale = 1.0 + ta.cwiseAbs().maxCoeff() + tb.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < m; ++k) {
    MatrixXcd rhs = f.col(k);
    for (Eigen::Index j = 0; j < k; ++j) rhs -= tb(j, k) * y.col(j);
    // (ta + tb(k,k) I) y_k = rhs, upper triangular back substitution
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      std::complex<double> s = rhs(i);
      for (Eigen::Index j = i + 1; j < n; ++j) s -= ta(i, j) * y(j, k);
      const std::complex<double> diag = ta(i, i) + tb(k, k);
      if (std::abs(diag) < 1e-14 * scale)
        throw NumericalError("solve_sylvester: singular system (shared eigenvalue)");
      y(i, k) = s / diag;
    }
  }
  return (qa * y * qb.adjoint()).real();
}

// Solves the continuous Lyapunov equation A X + X A^T = Q for symmetric Q.
// The residual is checked against 1e-10 * ||Q||_F.
inline MatrixXd solve_lyapunov_continuous(const MatrixXd& a, const MatrixXd& q) {
  MatrixXd x = solve_sylvester(a, a.transpose(), q);
  if (is_symmetric(q, 1e-10)) x = symmetrize(x);
  const double qn = q.norm();
  const double resid = (a * x + x * a.transpose() - q).norm();
  if (resid > 1e-10 * (qn > 0 ? qn : 1.0))
    throw NumericalError("solve_lyapunov_continuous: residual " + std::to_string(resid));
  return x;
}

// Solves the Stein equation B X B^T - X = C.  Requires that no pair of
// eigenvalues of B has product exactly 1.
inline MatrixXd solve_stein(const MatrixXd& b, const MatrixXd& c) {
  const Eigen::Index n = b.rows();
  if (b.cols() != n || c.rows() != n || c.cols() != n)
    throw std::invalid_argument("solve_stein: dimension mismatch");

  Eigen::ComplexSchur<MatrixXcd> sb(b.cast<std::complex<double>>());
  const MatrixXcd& t = sb.matrixT();
  const MatrixXcd& q = sb.matrixU();
  const MatrixXcd qc = q.conjugate();

  // T Y T^T - Y = F with T upper triangular; sweep indices downwards.
  MatrixXcd f = q.adjoint() * c.cast<std::complex<double>>() * qc;
  MatrixXcd y = MatrixXcd::Zero(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      std::complex<double> s = 0.0;
      for (Eigen::Index k = i; k < n; ++k)
        for (Eigen::Index l = j; l < n; ++l) {
          if (k == i && l == j) continue;
          s += t(i, k) * y(k, l) * t(j, l);
        }
      const std::complex<double> diag = t(i, i) * t(j, j) - 1.0;
      if (std::abs(diag) < 1e-13)
        throw NumericalError("solve_stein: eigenvalue-product degeneracy");
      y(i, j) = (f(i, j) - s) / diag;
    }
  }
  MatrixXd x = (q * y * qc.adjoint()).real();
  if (is_symmetric(c, 1e-10)) x = symmetrize(x);
  return x;
}

inline MatrixXd matrix_exp(const MatrixXd& m) { return m.exp(); }

// Principal matrix logarithm.  Rejects matrices with an eigenvalue on the
// closed negative real axis, where the principal branch does not exist, and
// verifies the exp/log round trip.
inline MatrixXd matrix_log_principal(const MatrixXd& m) {
  const auto eig = Eigen::EigenSolver<MatrixXd>(m, false).eigenvalues();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const std::complex<double> z = eig[i];
    if (z.real() <= 0.0 && std::abs(z.imag()) <= 1e-12 * (1.0 + std::abs(z.real())))
      throw NumericalError("matrix_log_principal: eigenvalue on closed negative real axis");
  }
  MatrixXd l = m.log();
  const double resid = (l.exp() - m).norm();
  if (resid > 1e-10 * (1.0 + m.norm()))
    throw NumericalError("matrix_log_principal: round-trip residual " + std::to_string(resid));
  return l;
}

// Symmetric PSD square root; tiny negative eigenvalues are clamped to zero.
inline MatrixXd sqrt_psd(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
  const VectorXd ev = es.eigenvalues();
  const double floor_tol = -1e-10 * (1.0 + std::abs(ev.maxCoeff()));
  VectorXd root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < floor_tol)
      throw NumericalError("sqrt_psd: matrix has a negative eigenvalue");
    root[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Cholesky factor of an SPD matrix, with a structured error on failure.
inline MatrixXd cholesky_lower(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string("cholesky failed: ") + what);
  return llt.matrixL();
}

}  // namespace nrlangevin
