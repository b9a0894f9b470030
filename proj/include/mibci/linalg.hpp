#pragma once
// Covariance estimation, Ledoit-Wolf shrinkage, and the symmetric-definite
// generalized eigensolver shared by the spatial-filter trainers.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mibci/types.hpp"

namespace mibci {

struct Covariance {
  Eigen::MatrixXd matrix;
  std::size_t n_observations{0};
};

// Mean-removed sample covariance. With normalize_trace the matrix is scaled
// so trace equals the channel count, making trials amplitude-invariant.
inline Covariance covariance(const Eigen::MatrixXd& x, bool normalize_trace = true) {
  if (x.cols() < 2) throw std::invalid_argument("covariance: need at least 2 samples");
  const Eigen::MatrixXd centered = x.colwise() - x.rowwise().mean();
  Covariance c;
  c.n_observations = static_cast<std::size_t>(x.cols());
  c.matrix = centered * centered.transpose() / static_cast<double>(x.cols() - 1);
  c.matrix = 0.5 * (c.matrix + c.matrix.transpose().eval());
  if (normalize_trace) {
    const double tr = c.matrix.trace();
    if (tr <= 0.0) throw std::runtime_error("covariance: zero trace");
    c.matrix *= static_cast<double>(x.rows()) / tr;
  }
  return c;
}

// Ledoit-Wolf analytic shrinkage intensity toward (trace/d) * I,
// computed from the raw observations.
inline double ledoit_wolf_gamma(const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  if (n < 2) return 1.0;
  const Eigen::MatrixXd xc = x.colwise() - x.rowwise().mean();
  const Eigen::MatrixXd s = xc * xc.transpose() / static_cast<double>(n);
  const double mu = s.trace() / static_cast<double>(d);
  const double delta2 = (s - mu * Eigen::MatrixXd::Identity(d, d)).squaredNorm();
  if (delta2 <= 0.0) return 0.0;
  double beta2 = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::MatrixXd outer = xc.col(k) * xc.col(k).transpose();
    beta2 += (outer - s).squaredNorm();
  }
  beta2 /= static_cast<double>(n) * static_cast<double>(n);
  return std::clamp(beta2 / delta2, 0.0, 1.0);
}

// (1-gamma) * C + gamma * (trace(C)/d) * I; preserves the trace exactly.
inline Covariance shrink(const Covariance& c, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("shrink: gamma must be in [0,1]");
  const Eigen::Index d = c.matrix.rows();
  Covariance out = c;
  out.matrix = (1.0 - gamma) * c.matrix +
               gamma * (c.matrix.trace() / static_cast<double>(d)) *
                   Eigen::MatrixXd::Identity(d, d);
  return out;
}

struct EigenBasis {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns, B-orthonormal
};

// Solves A w = lambda B w for symmetric A and positive definite B via
// Cholesky of B and a standard symmetric eigendecomposition. If B fails
// the positive-definiteness floor, a gamma = 1e-6 shrinkage is applied
// once; `regularized`, when given, reports whether it was needed.
inline EigenBasis generalized_eig_sym(const Covariance& a, const Covariance& b,
                                      bool* regularized = nullptr) {
  const Eigen::Index d = a.matrix.rows();
  if (b.matrix.rows() != d) throw std::invalid_argument("generalized_eig_sym: size mismatch");

  Eigen::MatrixXd bm = b.matrix;
  if (regularized) *regularized = false;
  auto min_eig = [](const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
               m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  };
  if (min_eig(bm) <= 1e-10 * bm.trace()) {
    bm = shrink({bm, b.n_observations}, 1e-6).matrix;
    if (regularized) *regularized = true;
    if (min_eig(bm) <= 0.0)
      throw std::runtime_error("generalized_eig_sym: B not positive definite");
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(bm);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("generalized_eig_sym: Cholesky of B failed");
  const Eigen::MatrixXd l = llt.matrixL();
  // C = L^-1 A L^-T, symmetric standard problem
  const Eigen::MatrixXd linv_a = l.triangularView<Eigen::Lower>().solve(a.matrix);
  Eigen::MatrixXd c = l.triangularView<Eigen::Lower>().solve(linv_a.transpose().eval());
  c = 0.5 * (c + c.transpose().eval());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("generalized_eig_sym: eigendecomposition failed");

  EigenBasis out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  // Eigen returns ascending; flip to descending and map back w = L^-T y
  const Eigen::MatrixXd w = l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  for (Eigen::Index i = 0; i < d; ++i) {
    out.eigenvalues[i] = es.eigenvalues()[d - 1 - i];
    out.eigenvectors.col(i) = w.col(d - 1 - i);
  }
  return out;
}

}  // namespace mibci
