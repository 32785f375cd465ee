#pragma once
/** @file charfn.hpp
 *  @brief Characteristic functions of domain members, existence tests, model
 *         spaces, coincidence under unitary equivalence, and pure minimal
 *         dilations.
 *
 *  Throughout, K is the Berezin kernel of the tuple, D the defect space
 *  (range of the clipped defect root, dimension r), and Theta the
 *  multi-analytic factor of I - KK* produced by the constructive
 *  factorization; its coefficient source space is written Dstar.
 */

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polydomain/factorization.hpp"
#include "polydomain/kernel.hpp"
#include "polydomain/random.hpp"

namespace polydomain {

/// Positivity battery for I - KK* on the blocked model space. Trivial defect
/// (D = 0) passes vacuously.
inline Certificate admits_charfn(const OperatorTuple& t, const std::vector<int>& d,
                                 double tol = 1e-9) {
  BerezinKernel ker = berezin_kernel(t, d, tol);
  Certificate cert;
  if (ker.defect.rank == 0) {
    cert.verdict = true;
    return cert;
  }
  const std::int64_t n = ker.k.rows();
  Mat y = identity(n) - ker.k * ker.k.adjoint();
  return beurling_condition(ker.basis, y, ker.defect.rank, tol);
}

struct CharFunction {
  BerezinKernel kernel;        // K and the defect data of the tuple
  MultiAnalyticOp theta;       // fock (x) Dstar -> fock (x) D
  Mat dstar_basis;             // ambient ONB of Dstar inside fock (x) D
  std::int64_t d_rank = 0;     // dim D
  std::int64_t dstar_rank = 0;  // dim Dstar
  double identity_residual = 0.0;  // ||E(KK* + Theta Theta* - I)E||
};

/// Theta = (I-KK*)^{1/2} K_X* through the constructive factorization of
/// Y = I - KK*. A nonzero seed rotates the Dstar coordinate frame by a random
/// unitary; the operator changes only by that right rotation, which the
/// coincidence isometry must recover.
///
/// eps_rank sits at machine scale: near-kernel directions of I - KK* conjugate
/// exactly through the factorization (the similarity errors telescope), while
/// cutting a direction of size lambda costs sqrt(lambda) in the multi-analytic
/// structure of Theta. Only noise-level directions should go.
inline CharFunction char_function(const OperatorTuple& t, const std::vector<int>& d,
                                  double tol = 1e-9, double eps_rank = 1e-14,
                                  std::uint64_t seed = 0) {
  CharFunction cf;
  cf.kernel = berezin_kernel(t, d, tol);
  cf.d_rank = cf.kernel.defect.rank;
  if (cf.d_rank == 0) {
    cf.theta.op = Mat::Zero(0, 0);
    cf.dstar_basis = Mat::Zero(0, 0);
    return cf;
  }
  const TruncatedFockBasis& b = cf.kernel.basis;
  const std::int64_t n = cf.kernel.k.rows();
  Mat y = identity(n) - cf.kernel.k * cf.kernel.k.adjoint();
  if (op_norm(y) <= tol) {
    // unitary kernel: Theta degenerates to the zero map from a zero space.
    // The factorization cutoff is relative, so Y made of roundoff must not
    // reach it.
    cf.theta = make_multi_analytic(b, Mat::Zero(n, 0), 0, cf.d_rank);
    cf.dstar_basis = Mat::Zero(n, 0);
    cf.identity_residual = op_norm(y);
    return cf;
  }
  Factorization f = beurling_factorize(b, y, cf.d_rank, tol, eps_rank);
  cf.theta = std::move(f.m);
  cf.dstar_basis = std::move(f.dstar_basis);
  cf.dstar_rank = f.defect_rank;

  if (seed != 0 && cf.dstar_rank > 0) {
    Rng rng(seed);
    Mat v = random_unitary(cf.dstar_rank, rng);
    for (std::int64_t g = 0; g < b.dim; ++g)
      cf.theta.op.middleCols(g * cf.dstar_rank, cf.dstar_rank) =
          cf.theta.op.middleCols(g * cf.dstar_rank, cf.dstar_rank) * v;
    cf.dstar_basis = cf.dstar_basis * v;
    cf.theta = make_multi_analytic(b, std::move(cf.theta.op), cf.dstar_rank, cf.d_rank);
  }

  DiagProj e = interior_projection(b, defect_reserve(b.spec));
  Mat diff = cf.kernel.k * cf.kernel.k.adjoint() +
             cf.theta.op * cf.theta.op.adjoint() - identity(n);
  cf.identity_residual =
      op_norm(mask_rows(mask_rows(diff, e, cf.d_rank).adjoint(), e, cf.d_rank));
  return cf;
}

struct PureInnerReport {
  PurityReport purity;
  CncReport cnc;
  bool inner = false;
  bool certified = false;   // the equivalence is only asserted under c.n.c.
  bool consistent = true;   // purity == innerness, when certified
  double saturation_gap = 0.0;        // ||I - K*K||; dominates the inner test
  double compression_residual = 0.0;  // max ||T_{i,j} - K*(W_{i,j} (x) I)K||
  double range_residual = 0.0;        // ||E(KK* - (I - Theta Theta*))E||
  CharFunction cf;
};

/// Purity of the tuple against innerness of its characteristic function.
/// For pure tuples the kernel is an isometry onto the model complement of
/// range(Theta), so the compressed shifts reproduce the tuple. At a finite
/// cutoff the Gram only approaches I, so the partial-isometry test for Theta
/// is run at a tolerance widened by the remaining saturation gap.
inline PureInnerReport pure_iff_inner(const OperatorTuple& t,
                                      const std::vector<int>& d, double tol = 1e-9,
                                      double eps_rank = 1e-14) {
  PureInnerReport rep;
  rep.cf = char_function(t, d, tol, eps_rank);
  rep.purity = is_pure(t, tol);
  rep.cnc = is_cnc(t, d, tol);
  rep.certified = rep.cnc.certified;
  const TruncatedFockBasis& b = rep.cf.kernel.basis;
  if (rep.cf.d_rank > 0) {
    rep.saturation_gap = op_norm(rep.cf.kernel.gram() - identity(t.dim));
    double inner_tol = std::max(tol, 1e3 * rep.cf.identity_residual);
    if (rep.certified) inner_tol = std::max(inner_tol, 10.0 * rep.saturation_gap);
    rep.inner = is_inner(b, rep.cf.theta, inner_tol);
  }
  rep.consistent = !rep.certified || (rep.purity.pure == rep.inner);
  rep.range_residual = rep.cf.identity_residual;
  if (rep.purity.pure && rep.cf.d_rank > 0) {
    const Mat& k = rep.cf.kernel.k;
    for (int i = 1; i <= t.k(); ++i)
      for (int j = 1; j <= t.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
        Mat g = k.adjoint() *
                left_shift(b, i, j).apply_left(k, rep.cf.d_rank);
        rep.compression_residual =
            std::max(rep.compression_residual, op_norm(g - t.op(i, j)));
      }
  }
  return rep;
}

struct ModelSpace {
  CharFunction cf;
  SqrtClip delta_theta;   // (I - Theta* Theta)^{1/2} on fock (x) Dstar
  Mat h_basis;            // ONB of the model subspace in (fock (x) D) + range coords
  Mat gamma;              // hdim x dim(H), the model unitary
  OperatorTuple tt;       // Gamma T Gamma*
  std::int64_t hdim = 0;
  double graph_residual = 0.0;      // ||B_H* [Theta; Delta]|| by construction
  double gamma_relation_residual = 0.0;  // ||Gamma K* - P_H J_D||
  double unitary_residual = 0.0;
  double intertwine_residual = 0.0;      // model row relation for TT*
};

/// Model realization on K = (fock (x) D) + closure(Delta_Theta (fock (x) Dstar)),
/// H = K - {Theta phi + Delta_Theta phi}. Needs an injective kernel; refused
/// otherwise, since Gamma inverts the kernel Gram. eps_rank here is the
/// numeric-rank cutoff for the graph subspace, not the factorization cutoff.
inline ModelSpace model_space(const OperatorTuple& t, const std::vector<int>& d,
                              double tol = 1e-9, double eps_rank = 1e-8) {
  ModelSpace ms;
  CncReport cnc = is_cnc(t, d, tol);
  if (!cnc.certified)
    throw std::invalid_argument("model_space: kernel injectivity not certified");
  ms.cf = char_function(t, d, tol);
  const TruncatedFockBasis& b = ms.cf.kernel.basis;
  const std::int64_t r = ms.cf.d_rank;
  const std::int64_t nd = b.dim * r;
  const std::int64_t ns = b.dim * ms.cf.dstar_rank;

  if (ns == 0) {
    ms.hdim = nd;
    ms.h_basis = identity(nd);
  } else {
    ms.delta_theta = sqrt_clip(identity(ns) - ms.cf.theta.op.adjoint() * ms.cf.theta.op, tol);
    const std::int64_t rd = ms.delta_theta.rank;
    Mat s(nd + rd, ns);
    s.topRows(nd) = ms.cf.theta.op;
    s.bottomRows(rd) = ms.delta_theta.basis.adjoint() * ms.delta_theta.root;
    Eigen::BDCSVD<Mat> svd(s, Eigen::ComputeFullU);
    std::int64_t srank = 0;
    if (svd.singularValues().size() > 0) {
      const double top = svd.singularValues()(0);
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > eps_rank * top) ++srank;
    }
    ms.hdim = nd + rd - srank;
    ms.h_basis = svd.matrixU().rightCols(ms.hdim);
    ms.graph_residual = op_norm(ms.h_basis.adjoint() * s);
  }

  // Gamma h = P_H (K h + 0), normalized through the Gram inverse so that
  // Gamma K* g = P_H (g + 0) on the range of the kernel.
  Mat c = ms.h_basis.topRows(nd).adjoint();  // hdim x nd
  Mat gram = ms.cf.kernel.gram();
  Mat ck = c * ms.cf.kernel.k;
  ms.gamma = gram.ldlt().solve(ck.adjoint()).adjoint();
  ms.gamma_relation_residual = op_norm(ms.gamma * ms.cf.kernel.k.adjoint() - c);
  ms.unitary_residual =
      std::max(op_norm(ms.gamma.adjoint() * ms.gamma - identity(ms.gamma.cols())),
               op_norm(ms.gamma * ms.gamma.adjoint() - identity(ms.hdim)));

  ms.tt.spec = t.spec;
  ms.tt.dim = ms.hdim;
  ms.tt.T.resize(static_cast<std::size_t>(t.k()));
  for (int i = 1; i <= t.k(); ++i)
    for (int j = 1; j <= t.spec.n[static_cast<std::size_t>(i - 1)]; ++j)
      ms.tt.T[static_cast<std::size_t>(i - 1)].push_back(
          ms.gamma * t.op(i, j) * ms.gamma.adjoint());

  // row relation: P_D restricted to the model space intertwines TT* with the
  // blocked backward shifts
  DiagProj e = interior_projection(b, defect_reserve(b.spec));
  Mat q = ms.h_basis.topRows(nd);  // nd x hdim
  for (int i = 1; i <= t.k(); ++i)
    for (int j = 1; j <= t.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      Mat lhs = q * ms.tt.op(i, j).adjoint();
      Mat rhs = left_shift(b, i, j).apply_adjoint_left(q, r);
      ms.intertwine_residual =
          std::max(ms.intertwine_residual, op_norm(mask_rows(lhs - rhs, e, r)));
    }
  return ms;
}

struct CoincidenceReport {
  double unitary_residual = 0.0;      // ||U*U - I||
  double conjugation_residual = 0.0;  // max ||T'_{i,j} - U T_{i,j} U*||
  Mat tau;                            // defect transport, r x r
  Mat tau_star;                       // coefficient transport, dstar x dstar
  double tau_unitary_residual = 0.0;
  double tau_star_unitary_residual = 0.0;
  double kernel_residual = 0.0;       // ||K' - (I (x) tau) K U*||
  double defect_conjugation_residual = 0.0;  // ||Y' - (I (x) tau) Y (I (x) tau)*||
  double coincidence_residual = 0.0;  // ||(I (x) tau) Theta - Theta' (I (x) tau_star)||
};

namespace detail {

/// (I (x) a) y on fock-blocked rows.
inline Mat block_rows(const Mat& a, const Mat& y, std::int64_t dim) {
  const std::int64_t blk = a.cols();
  Mat out(dim * a.rows(), y.cols());
  for (std::int64_t g = 0; g < dim; ++g)
    out.middleRows(g * a.rows(), a.rows()) = a * y.middleRows(g * blk, blk);
  return out;
}

}  // namespace detail

/// Characteristic functions of unitarily equivalent tuples coincide: the
/// defect transport tau = U restricted to D and the coefficient transport
/// tau_star = (I (x) tau) restricted to Dstar align Theta and Theta'.
inline CoincidenceReport coincide_under_unitary(const OperatorTuple& ta,
                                                const OperatorTuple& tb, const Mat& u,
                                                const std::vector<int>& d,
                                                double tol = 1e-9,
                                                double eps_rank = 1e-14) {
  CoincidenceReport rep;
  rep.unitary_residual = op_norm(u.adjoint() * u - identity(u.cols()));
  for (int i = 1; i <= ta.k(); ++i)
    for (int j = 1; j <= ta.spec.n[static_cast<std::size_t>(i - 1)]; ++j)
      rep.conjugation_residual = std::max(
          rep.conjugation_residual,
          op_norm(tb.op(i, j) - u * ta.op(i, j) * u.adjoint()));

  CharFunction ca = char_function(ta, d, tol, eps_rank);
  CharFunction cb = char_function(tb, d, tol, eps_rank);
  if (ca.d_rank != cb.d_rank || ca.dstar_rank != cb.dstar_rank)
    throw std::invalid_argument("coincide_under_unitary: defect ranks disagree");
  const std::int64_t r = ca.d_rank;
  if (r == 0) return rep;
  const TruncatedFockBasis& b = ca.kernel.basis;
  const std::int64_t n = ca.kernel.k.rows();

  rep.tau = cb.kernel.defect.basis.adjoint() * (u * ca.kernel.defect.basis);
  rep.tau_unitary_residual = op_norm(rep.tau.adjoint() * rep.tau - identity(r));

  Mat ka_t = detail::block_rows(rep.tau, ca.kernel.k, b.dim) * u.adjoint();
  rep.kernel_residual = op_norm(cb.kernel.k - ka_t);

  Mat ya = identity(n) - ca.kernel.k * ca.kernel.k.adjoint();
  Mat yb = identity(n) - cb.kernel.k * cb.kernel.k.adjoint();
  Mat ya_t = detail::block_rows(rep.tau, ya, b.dim);
  ya_t = detail::block_rows(rep.tau, ya_t.adjoint(), b.dim).adjoint();
  rep.defect_conjugation_residual = op_norm(yb - ya_t);

  rep.tau_star = cb.dstar_basis.adjoint() * detail::block_rows(rep.tau, ca.dstar_basis, b.dim);
  rep.tau_star_unitary_residual =
      op_norm(rep.tau_star.adjoint() * rep.tau_star - identity(ca.dstar_rank));

  Mat lhs = detail::block_rows(rep.tau, ca.theta.op, b.dim);
  Mat rhs(n, ca.theta.op.cols());
  for (std::int64_t g = 0; g < b.dim; ++g)
    rhs.middleCols(g * ca.dstar_rank, ca.dstar_rank) =
        cb.theta.op.middleCols(g * ca.dstar_rank, ca.dstar_rank) * rep.tau_star;
  DiagProj e = interior_projection(b, defect_reserve(b.spec));
  Mat diff = mask_rows(lhs - rhs, e, r);
  diff = mask_rows(diff.adjoint(), e, ca.dstar_rank).adjoint();
  rep.coincidence_residual = op_norm(diff);
  return rep;
}

struct DenseRangeReport {
  double lambda_max_gram = 0.0;   // top eigenvalue of K*K
  double theta_min_eig = 0.0;     // bottom eigenvalue of Theta Theta*
  double identity_gap = 0.0;      // |theta_min_eig - (1 - lambda_max_gram)|
  bool dense_range = true;        // range of Theta dense at this cutoff
};

/// Dense range of Theta is equivalent to the kernel Gram staying strictly
/// below I: the spectrum of Theta Theta* is {1 - spec(K*K)} plus ones, so
/// its bottom eigenvalue equals 1 - lambda_max(K*K) up to the factorization
/// residual. The verdict reflects the truncated object; Gram saturation can
/// move it as the cutoff grows.
inline DenseRangeReport dense_range_check(const CharFunction& cf, double tol = 1e-9) {
  DenseRangeReport rep;
  if (cf.d_rank == 0) return rep;
  EigH eg = eigh(cf.kernel.gram());
  rep.lambda_max_gram = eg.lambda(eg.lambda.size() - 1);
  EigH et = eigh(cf.theta.op * cf.theta.op.adjoint());
  rep.theta_min_eig = et.lambda(0);
  rep.identity_gap = std::abs(rep.theta_min_eig - (1.0 - rep.lambda_max_gram));
  rep.dense_range = rep.lambda_max_gram < 1.0 - 10.0 * tol;
  return rep;
}

struct DilationReport {
  PurityReport purity;
  std::int64_t dilation_index = 0;     // rank of the full defect of the tuple
  double isometry_residual = 0.0;      // ||K*K - I||
  std::vector<double> coinvariance;    // ||(I-P)(W_{i,j}* (x) I)P||, P = KK*
  double reconstruction_residual = 0.0;  // words of total degree <= dil_deg
  std::int64_t span_rank = 0;          // rank of span{(W_beta (x) I) K H}
  bool minimal = false;                // span fills the blocked model space
};

/// Minimal dilation data of a pure member: the kernel is an isometry onto a
/// co-invariant subspace, the compressed shift words reproduce the tuple, and
/// the shifted kernel columns span the whole blocked space.
inline DilationReport pure_dilation(const OperatorTuple& t, const std::vector<int>& d,
                                    double tol = 1e-9, int dil_deg = 3,
                                    double eps_rank = 1e-8) {
  DilationReport rep;
  rep.purity = is_pure(t, tol);
  if (!rep.purity.pure)
    throw std::invalid_argument("pure_dilation: tuple is not pure");
  BerezinKernel ker = berezin_kernel(t, d, tol);
  const TruncatedFockBasis& b = ker.basis;
  const std::int64_t r = ker.defect.rank;
  rep.dilation_index = r;
  if (r == 0) return rep;  // unreachable for pure tuples on dim > 0
  rep.isometry_residual = op_norm(ker.gram() - identity(t.dim));

  const std::int64_t n = ker.k.rows();
  Mat p = ker.k * ker.k.adjoint();
  Mat comp = identity(n) - p;
  for (int i = 1; i <= t.k(); ++i)
    for (int j = 1; j <= t.spec.n[static_cast<std::size_t>(i - 1)]; ++j)
      rep.coinvariance.push_back(
          op_norm(comp * left_shift(b, i, j).apply_adjoint_left(p, r)));

  for (std::int64_t g = 0; g < b.dim; ++g) {
    if (b.total_deg[static_cast<std::size_t>(g)] == 0 ||
        b.total_deg[static_cast<std::size_t>(g)] > dil_deg)
      continue;
    MultiWord mw = b.multiword(g);
    Mat model = ker.k.adjoint() * word_colmap(b, mw, true).apply_left(ker.k, r);
    rep.reconstruction_residual =
        std::max(rep.reconstruction_residual, op_norm(multi_word_op(t, mw) - model));
  }

  Mat span(n, b.dim * t.dim);
  for (std::int64_t g = 0; g < b.dim; ++g)
    span.middleCols(g * t.dim, t.dim) =
        word_colmap(b, b.multiword(g), true).apply_left(ker.k, r);
  rep.span_rank = range_basis(span, eps_rank).cols();
  rep.minimal = (rep.span_rank == n);
  return rep;
}

}  // namespace polydomain
