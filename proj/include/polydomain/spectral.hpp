#pragma once
/** @file spectral.hpp
 *  @brief Hermitian eigen utilities: scale-aware positivity checks, clipped
 *         spectral square roots, operator norms, pseudoinverses.
 *
 *  Positivity convention used everywhere: H passes "psd" iff
 *  lambda_min(H) >= -tol * max(1, ||H||).
 */

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace polydomain {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

inline Mat identity(std::int64_t n) {
  return Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

struct EigH {
  RVec lambda;  // ascending
  Mat u;        // columns are orthonormal eigenvectors
};

inline EigH eigh(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigh: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Largest singular value. Hermitian inputs may use eigh directly; this is
/// the generic route.
inline double op_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  // sigma_max^2 = lambda_max of the Gram matrix; pick the smaller side.
  if (a.rows() >= a.cols()) {
    EigH e = eigh(a.adjoint() * a);
    return std::sqrt(std::max(0.0, e.lambda(e.lambda.size() - 1)));
  }
  EigH e = eigh(a * a.adjoint());
  return std::sqrt(std::max(0.0, e.lambda(e.lambda.size() - 1)));
}

struct PsdReport {
  double min_eig = 0.0;
  double scale = 1.0;  // max(1, ||H||)
  double tol = 0.0;
  bool ok = true;
};

inline PsdReport check_psd(const Mat& h, double tol) {
  PsdReport r;
  r.tol = tol;
  if (h.rows() == 0) return r;
  EigH e = eigh(h);
  const double hi = std::abs(e.lambda(e.lambda.size() - 1));
  const double lo = std::abs(e.lambda(0));
  r.scale = std::max(1.0, std::max(hi, lo));
  r.min_eig = e.lambda(0);
  r.ok = r.min_eig >= -tol * r.scale;
  return r;
}

/// Clipped spectral square root of a numerically-psd Hermitian matrix.
/// Eigenvalues below -tol*scale mark the input as not psd (rejected = true);
/// eigenvalues within [-tol*scale, tol*scale] are clipped to zero so that
/// roundoff never manufactures defect rank.
struct SqrtClip {
  Mat root;        // H^{1/2}, full size
  Mat basis;       // orthonormal columns spanning the numerical range, h x rank
  RVec root_eigs;  // kept sqrt(lambda), aligned with basis columns
  int rank = 0;
  double min_eig = 0.0;
  bool rejected = false;
};

inline SqrtClip sqrt_clip(const Mat& h, double tol) {
  SqrtClip out;
  EigH e = eigh(h);
  const Eigen::Index n = e.lambda.size();
  out.min_eig = n ? e.lambda(0) : 0.0;
  double scale = 1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    scale = std::max(scale, std::abs(e.lambda(i)));
  const double cut = tol * scale;
  if (out.min_eig < -cut) out.rejected = true;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (e.lambda(i) > cut) keep.push_back(i);
  out.rank = static_cast<int>(keep.size());
  out.basis.resize(n, out.rank);
  out.root_eigs.resize(out.rank);
  for (int c = 0; c < out.rank; ++c) {
    out.basis.col(c) = e.u.col(keep[static_cast<std::size_t>(c)]);
    out.root_eigs(c) = std::sqrt(e.lambda(keep[static_cast<std::size_t>(c)]));
  }
  out.root = out.basis * out.root_eigs.asDiagonal() * out.basis.adjoint();
  return out;
}

/// Pseudoinverse of the clipped root on its numerical range.
inline Mat pinv_root(const SqrtClip& s) {
  if (s.rank == 0) return Mat::Zero(s.root.rows(), s.root.cols());
  RVec inv(s.rank);
  for (int c = 0; c < s.rank; ++c) inv(c) = 1.0 / s.root_eigs(c);
  return s.basis * inv.asDiagonal() * s.basis.adjoint();
}

/// Moore-Penrose pseudoinverse with relative singular-value cutoff.
inline Mat pinv(const Mat& a, double eps_rank) {
  if (a.rows() == 0 || a.cols() == 0) return a.adjoint();
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sig = svd.singularValues();
  const double cut = sig.size() ? eps_rank * sig(0) : 0.0;
  RVec inv(sig.size());
  for (Eigen::Index i = 0; i < sig.size(); ++i)
    inv(i) = sig(i) > cut ? 1.0 / sig(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

/// Orthonormal basis of the column span with relative cutoff.
inline Mat range_basis(const Mat& a, double eps_rank) {
  if (a.cols() == 0 || a.rows() == 0) return Mat::Zero(a.rows(), 0);
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU);
  const auto& sig = svd.singularValues();
  const double cut = sig.size() ? eps_rank * sig(0) : 0.0;
  Eigen::Index r = 0;
  while (r < sig.size() && sig(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace polydomain
