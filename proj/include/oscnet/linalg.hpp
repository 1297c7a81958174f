#ifndef OSCNET_LINALG_HPP
#define OSCNET_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <string>

#include "oscnet/common.hpp"

namespace oscnet {

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline double symmetry_violation(const Mat& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Relative PSD tolerance used throughout: a symmetric matrix counts as PSD
/// when min eigenvalue >= -tol_scale * trace / dim.
inline double psd_floor(const Mat& m, double tol_scale = 1e-10) {
  const double dim = static_cast<double>(m.rows());
  return -tol_scale * std::abs(m.trace()) / std::max(dim, 1.0);
}

inline double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Mat& m, double tol_scale = 1e-10) {
  return min_eigenvalue(m) >= psd_floor(m, tol_scale);
}

/// Clamp negative eigenvalues to floor_scale*trace/dim, returning a symmetric
/// PSD matrix.
inline Mat psd_clamp(const Mat& m, double floor_scale = 1e-12) {
  Mat s = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const double floor =
      floor_scale * std::abs(s.trace()) / std::max<double>(s.rows(), 1);
  Vec d = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// Symmetric square-root factor F with F*F^T = max(m, 0); tolerates singular
/// and slightly indefinite inputs (negative eigenvalues are zeroed).
inline Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
  Vec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

/// LDLT factorization with a jitter ladder: on failure add eps*I with
/// eps = start_scale*trace/dim, escalating x10 up to max_scale*trace/dim.
/// Throws numerical_error (tagged with `what_matrix`) if all attempts fail.
inline Eigen::LDLT<Mat> robust_ldlt(const Mat& m, const std::string& what_matrix,
                                    double start_scale = 1e-10,
                                    double max_scale = 1e-6) {
  const Mat s = symmetrize(m);
  const double base = std::abs(s.trace()) / std::max<double>(s.rows(), 1);
  Eigen::LDLT<Mat> ldlt(s);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) return ldlt;
  for (double scale = start_scale; scale <= max_scale * 1.0000001; scale *= 10.0) {
    double eps = scale * std::max(base, 1e-300);
    ldlt.compute(s + eps * Mat::Identity(s.rows(), s.cols()));
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) return ldlt;
  }
  throw numerical_error("factorization of " + what_matrix +
                        " failed after jitter escalation");
}

/// log N(x; 0, S) via a jittered LDLT of S.
inline double gaussian_log_density(const Vec& residual, const Mat& cov,
                                   const std::string& what_matrix) {
  auto ldlt = robust_ldlt(cov, what_matrix);
  const double log_det = ldlt.vectorD().array().max(1e-300).log().sum();
  const double quad = residual.dot(ldlt.solve(residual));
  return -0.5 * (static_cast<double>(residual.size()) * std::log(2.0 * pi) +
                 log_det + quad);
}

/// Solve the discrete Lyapunov equation P = A P A' + Q via the Kronecker
/// linear system; requires spectral radius of A below 1.
inline Mat solve_discrete_lyapunov(const Mat& a, const Mat& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    throw validation_error("solve_discrete_lyapunov: dimension mismatch");
  // Column-major vec: vec(P)(j*n+i) = P(i,j); vec(A P A') = (A (x) A) vec(P).
  Vec vec_q(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) vec_q(j * n + i) = q(i, j);
  Mat kron = Mat::Identity(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
          kron(j * n + i, l * n + k) -= a(i, k) * a(j, l);
  Eigen::PartialPivLU<Mat> lu(kron);
  Vec vec_p = lu.solve(vec_q);
  Mat p(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) p(i, j) = vec_p(j * n + i);
  return symmetrize(p);
}

inline double spectral_radius(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Stationary distribution of a row-stochastic matrix. Solves pi' Z = pi',
/// sum(pi) = 1 by least squares; falls back to uniform when the chain has no
/// unique stationary distribution (e.g. Z = I).
inline Vec markov_stationary(const Mat& z) {
  const Eigen::Index m = z.rows();
  Mat a(m + 1, m);
  a.topRows(m) = z.transpose() - Mat::Identity(m, m);
  a.bottomRows(1).setOnes();
  Vec b = Vec::Zero(m + 1);
  b(m) = 1.0;
  Vec pi = a.colPivHouseholderQr().solve(b);
  if (pi.minCoeff() < -1e-8 || (z.transpose() * pi - pi).norm() > 1e-6)
    return Vec::Constant(m, 1.0 / static_cast<double>(m));
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

}  // namespace oscnet

#endif  // OSCNET_LINALG_HPP
