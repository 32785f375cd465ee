#pragma once
/** @file factorization.hpp
 *  @brief Constructive factorization Y = M M* through multi-analytic
 *         operators, innerness and support analysis, and the invariant /
 *         reducing subspace characterizations for the model shifts.
 *
 *  Operators between fock (x) E and fock (x) H are dense matrices with the
 *  row index fock_index * block + coefficient_index; E and H enter only
 *  through their dimensions.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polydomain/defect.hpp"
#include "polydomain/fock.hpp"
#include "polydomain/kernel.hpp"
#include "polydomain/spectral.hpp"

namespace polydomain {

/// Reserve that makes the truncated defect grid of a blocked operator agree
/// with its infinite-space value on the interior.
inline int defect_reserve(const DomainSpec& spec) {
  int r = 0;
  for (int i = 0; i < spec.k(); ++i)
    r += spec.m[static_cast<std::size_t>(i)] * spec.q[static_cast<std::size_t>(i)].degree();
  return r;
}

struct MultiAnalyticOp {
  Mat op;                    // (fock_dim * out_block) x (fock_dim * in_block)
  std::int64_t in_block = 0;   // dim of the coefficient space E
  std::int64_t out_block = 0;  // dim of the coefficient space H
  double intertwine_residual = 0.0;
};

/// max over (i,j) of ||(E (x) I)(M (W_{i,j} (x) I) - (W_{i,j} (x) I) M)(E (x) I)||.
/// Letter shifts move one degree, so reserve 1 already isolates truncation.
inline double multi_analytic_residual(const TruncatedFockBasis& b, const Mat& m,
                                      std::int64_t in_block, std::int64_t out_block,
                                      int reserve = 1) {
  DiagProj e = interior_projection(b, reserve);
  double worst = 0.0;
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= b.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      ColMap cm = left_shift(b, i, j);
      Mat diff = cm.apply_right(m, in_block) - cm.apply_left(m, out_block);
      diff = mask_rows(diff, e, out_block);
      diff = mask_rows(diff.adjoint(), e, in_block).adjoint();
      worst = std::max(worst, op_norm(diff));
    }
  return worst;
}

inline MultiAnalyticOp make_multi_analytic(const TruncatedFockBasis& b, Mat m,
                                           std::int64_t in_block,
                                           std::int64_t out_block,
                                           int reserve = 1) {
  MultiAnalyticOp out;
  out.op = std::move(m);
  out.in_block = in_block;
  out.out_block = out_block;
  out.intertwine_residual =
      multi_analytic_residual(b, out.op, in_block, out_block, reserve);
  return out;
}

inline bool is_multi_analytic(const TruncatedFockBasis& b, const MultiAnalyticOp& m,
                              double tol = 1e-9, int reserve = 1) {
  const double scale = std::max(1.0, op_norm(m.op));
  return multi_analytic_residual(b, m.op, m.in_block, m.out_block, reserve) <=
         tol * scale;
}

/// Inner = multi-analytic partial isometry: MM* is an orthogonal projection.
inline bool is_inner(const TruncatedFockBasis& b, const MultiAnalyticOp& m,
                     double tol = 1e-9, int reserve = 1) {
  if (!is_multi_analytic(b, m, tol, reserve)) return false;
  Mat g = m.op * m.op.adjoint();
  const double scale = std::max(1.0, op_norm(g));
  return op_norm(g * g - g) <= tol * scale;
}

/// Grid positivity of the blocked defect maps: Delta_{W (x) I}^p(Y) psd on the
/// interior for every 0 != p <= m. The interior reserve absorbs the cutoff.
inline Certificate beurling_condition(const TruncatedFockBasis& b, const Mat& y,
                                      std::int64_t block, double tol = 1e-9) {
  Certificate cert;
  if ((y - y.adjoint()).norm() > 1e-10 * std::max(1.0, y.norm())) {
    cert.input_ok = false;
    cert.reject_reason = "operator is not Hermitian";
    cert.verdict = false;
    return cert;
  }
  DiagProj e = interior_projection(b, defect_reserve(b.spec));
  if (e.rank() == 0)
    throw std::invalid_argument("beurling_condition: cutoff smaller than the reserve");
  bool all_ok = true;
  for (const auto& p : grid_points(b.spec.m)) {
    Mat delta = e.sandwich(model_defect(b, y, p, block), block);
    Witness w = detail::psd_witness(detail::grid_label("beurling", p), delta, tol);
    all_ok &= w.ok;
    cert.witnesses.push_back(std::move(w));
  }
  cert.verdict = all_ok;
  cert.definitions_agree = true;
  return cert;
}

struct Factorization {
  MultiAnalyticOp m;           // Y = m.op * m.op^* on the interior
  OperatorTuple x;             // pure tuple on the numerical range of Y^{1/2}
  Mat range_basis;             // (fock_dim * block) x rank, ONB of that range
  RVec range_roots;            // singular values lambda^{1/2} kept by eps_rank
  Mat dstar_basis;             // ambient ONB of the coefficient space E
  std::int64_t rank = 0;       // numerical rank of Y
  std::int64_t defect_rank = 0;  // dim E
  double welldef_residual = 0.0;   // ||A Y^{1/2} - Y^{1/2}(W* (x) I)||, worst (i,j)
  double factor_residual = 0.0;    // ||E(Y - MM*)E|| on the interior
};

/// Y = M M* with M multi-analytic, by the annihilation-intertwined recipe:
/// A_{i,j} Y^{1/2} = Y^{1/2}(W_{i,j}* (x) I) on the numerical range of Y^{1/2},
/// X = A*, E = range of the defect root of X, M = Y^{1/2} K_X*.
inline Factorization beurling_factorize(const TruncatedFockBasis& b, const Mat& y,
                                        std::int64_t block, double tol = 1e-9,
                                        double eps_rank = 1e-8) {
  Certificate cond = beurling_condition(b, y, block, tol);
  if (!cond.verdict)
    throw std::invalid_argument("beurling_factorize: positivity condition fails");
  const std::int64_t n = b.dim * block;
  if (y.rows() != n || y.cols() != n)
    throw std::invalid_argument("beurling_factorize: size mismatch");

  Factorization out;
  EigH ey = eigh(y);
  const double top = ey.lambda(ey.lambda.size() - 1);
  std::vector<std::int64_t> keep;
  for (std::int64_t idx = 0; idx < ey.lambda.size(); ++idx)
    if (ey.lambda(idx) > eps_rank * std::max(top, 0.0)) keep.push_back(idx);
  out.rank = static_cast<std::int64_t>(keep.size());
  out.x.spec = b.spec;
  out.x.dim = out.rank;
  out.x.T.resize(static_cast<std::size_t>(b.k()));
  if (out.rank == 0) {
    for (int i = 0; i < b.k(); ++i)
      out.x.T[static_cast<std::size_t>(i)].assign(
          static_cast<std::size_t>(b.spec.n[static_cast<std::size_t>(i)]), Mat::Zero(0, 0));
    out.m.op = Mat::Zero(n, 0);
    out.m.in_block = 0;
    out.m.out_block = block;
    out.range_basis = Mat::Zero(n, 0);
    out.range_roots = RVec::Zero(0);
    out.dstar_basis = Mat::Zero(n, 0);
    return out;
  }
  Mat basis(n, out.rank);
  RVec roots(out.rank);
  for (std::int64_t c = 0; c < out.rank; ++c) {
    basis.col(c) = ey.u.col(keep[static_cast<std::size_t>(c)]);
    roots(c) = std::sqrt(ey.lambda(keep[static_cast<std::size_t>(c)]));
  }
  out.range_basis = basis;
  out.range_roots = roots;

  // A = D (B^* (W^* (x) I) B) D^{-1} in range coordinates, D = diag(roots).
  Mat s = roots.asDiagonal() * basis.adjoint();  // = B^* Y^{1/2}, rank x n
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= b.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      ColMap cm = left_shift(b, i, j);
      Mat shifted = cm.apply_adjoint_left(basis, block);  // (W^* (x) I) B
      Mat a = roots.asDiagonal() * (basis.adjoint() * shifted);
      a = a * roots.cwiseInverse().asDiagonal();
      // consistency on the range: A (B^* Y^{1/2})^* columns vs shifts
      Mat lhs = a * s;
      Mat rhs = (cm.apply_left(s.adjoint(), block)).adjoint();
      out.welldef_residual = std::max(out.welldef_residual, op_norm(lhs - rhs));
      out.x.T[static_cast<std::size_t>(i - 1)].push_back(a.adjoint());
    }

  // Defect of the factor tuple, gated spectrally. Conjugating into badly
  // conditioned range coordinates can push truncation roundoff past the gate
  // even though the corner defect of y itself is clean; in that case rebuild
  // the defect as a gram square of the conjugated corner root, which cannot
  // go indefinite. A genuinely indefinite y fails both gates.
  Mat dx = defect_map(out.x, identity(out.rank), b.spec.m);
  SqrtClip dc = sqrt_clip(dx, tol);
  if (dc.rejected) {
    SqrtClip corner = sqrt_clip(model_defect(b, y, b.spec.m, block), tol);
    if (corner.rejected)
      throw std::invalid_argument("beurling_factorize: defect is not psd");
    Mat g = roots.cwiseInverse().asDiagonal() * (basis.adjoint() * corner.root);
    dc = sqrt_clip(Mat(g * g.adjoint()), tol);
    if (dc.rejected)
      throw std::invalid_argument("beurling_factorize: defect is not psd");
  }
  out.defect_rank = dc.rank;
  out.dstar_basis = basis * dc.basis;
  Mat kxk = Mat::Zero(b.dim * dc.rank, out.rank);
  if (dc.rank > 0) {
    Mat l = dc.root_eigs.asDiagonal() * dc.basis.adjoint();
    detail::assemble_rows(out.x, b, 0, l, 1.0, 0, kxk);
  }
  Mat m = basis * roots.asDiagonal() * kxk.adjoint();
  out.m = make_multi_analytic(b, std::move(m), out.defect_rank, block);

  DiagProj e = interior_projection(b, defect_reserve(b.spec));
  Mat diff = y - out.m.op * out.m.op.adjoint();
  out.factor_residual = op_norm(mask_rows(mask_rows(diff, e, block).adjoint(), e, block));
  return out;
}

struct SupportReport {
  Mat l_basis;          // in_block x dim(L), ONB of the coefficient slice
  std::int64_t dim = 0;
  double containment_residual = 0.0;  // ||(I - I (x) P_L) M*||
};

/// L = (P_C (x) I) range(M*); range M* sits inside fock (x) L.
inline SupportReport support(const TruncatedFockBasis& b, const MultiAnalyticOp& m,
                             double eps_rank = 1e-8) {
  SupportReport rep;
  Mat vac = m.op.adjoint().topRows(m.in_block);  // vacuum slice of range M*
  rep.l_basis = range_basis(vac, eps_rank);
  rep.dim = rep.l_basis.cols();
  Mat pl = rep.l_basis * rep.l_basis.adjoint();
  Mat madj = m.op.adjoint();
  Mat proj = Mat::Zero(madj.rows(), madj.cols());
  for (std::int64_t f = 0; f < b.dim; ++f)
    proj.middleRows(f * m.in_block, m.in_block) =
        pl * madj.middleRows(f * m.in_block, m.in_block);
  rep.containment_residual = op_norm(madj - proj);
  return rep;
}

struct SubspaceReport {
  std::vector<double> invariance;  // ||(I-P)(W_{i,j} (x) I)P|| per letter
  Certificate beurling;            // positivity battery on P
  bool polyball_case = false;
  std::vector<double> doubly_commuting;  // cross-factor commutators, polyball only
  double projection_residual = 0.0;      // ||P^2 - P|| + ||P - P*||
};

inline bool polyball_shape(const DomainSpec& spec) {
  for (int i = 0; i < spec.k(); ++i) {
    const auto& q = spec.q[static_cast<std::size_t>(i)];
    if (spec.m[static_cast<std::size_t>(i)] != 1) return false;
    if (static_cast<int>(q.terms.size()) != q.arity) return false;
    for (const auto& [w, c] : q.terms)
      if (w.size() != 1 || std::abs(c - 1.0) > 1e-12) return false;
  }
  return true;
}

inline SubspaceReport invariant_subspace_tests(const TruncatedFockBasis& b,
                                               const Mat& p, std::int64_t block,
                                               double tol = 1e-9) {
  SubspaceReport rep;
  rep.projection_residual = op_norm(p * p - p) + op_norm(p - p.adjoint());
  if (rep.projection_residual > 1e3 * tol * std::max(1.0, op_norm(p)))
    throw std::invalid_argument("invariant_subspace_tests: not a projection");
  const std::int64_t n = b.dim * block;
  Mat comp = identity(n) - p;
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= b.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      ColMap cm = left_shift(b, i, j);
      rep.invariance.push_back(op_norm(comp * cm.apply_left(p, block)));
    }
  rep.beurling = beurling_condition(b, p, block, tol);
  rep.polyball_case = polyball_shape(b.spec);
  if (rep.polyball_case) {
    for (int i1 = 1; i1 <= b.k(); ++i1)
      for (int i2 = 1; i2 <= b.k(); ++i2) {
        if (i1 == i2) continue;
        for (int j1 = 1; j1 <= b.spec.n[static_cast<std::size_t>(i1 - 1)]; ++j1)
          for (int j2 = 1; j2 <= b.spec.n[static_cast<std::size_t>(i2 - 1)]; ++j2) {
            Mat u = p * left_shift(b, i1, j1).apply_left(p, block);
            Mat v = p * left_shift(b, i2, j2).apply_adjoint_left(p, block);
            rep.doubly_commuting.push_back(op_norm(u * v - v * u));
          }
      }
  }
  return rep;
}

struct ReducingReport {
  bool reducing = false;
  double obstruction = 0.0;        // worst one-sided invariance residual
  std::optional<Mat> e_basis;      // block x dim(E) when reducing
  double match_residual = 0.0;     // ||P - I (x) P_E||
};

/// Reducing subspaces of the blocked shifts are exactly fock (x) E; E is read
/// off the vacuum slice of P.
inline ReducingReport reducing_characterize(const TruncatedFockBasis& b,
                                            const Mat& p, std::int64_t block,
                                            double tol = 1e-9,
                                            double eps_rank = 1e-8) {
  ReducingReport rep;
  const std::int64_t n = b.dim * block;
  Mat comp = identity(n) - p;
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= b.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      ColMap cm = left_shift(b, i, j);
      rep.obstruction = std::max(rep.obstruction, op_norm(comp * cm.apply_left(p, block)));
      rep.obstruction =
          std::max(rep.obstruction, op_norm(comp * cm.apply_adjoint_left(p, block)));
    }
  const double scale = std::max(1.0, op_norm(p));
  if (rep.obstruction > tol * scale) return rep;
  rep.reducing = true;
  Mat vac = p.topLeftCorner(block, block);
  Mat eb = range_basis(vac, eps_rank);
  Mat pe = eb * eb.adjoint();
  Mat full = Mat::Zero(n, n);
  for (std::int64_t f = 0; f < b.dim; ++f)
    full.block(f * block, f * block, block, block) = pe;
  rep.e_basis = eb;
  rep.match_residual = op_norm(p - full);
  return rep;
}

/// Partial isometry V with M1 ~ M2 (I (x) V), from matching vacuum slices of
/// the adjoints; valid whenever M1 M1* = M2 M2* and both are multi-analytic.
inline Mat coincidence_isometry(const MultiAnalyticOp& m1, const MultiAnalyticOp& m2,
                                double eps_rank = 1e-8) {
  Mat g1 = m1.op.adjoint().topRows(m1.in_block);  // in1 x (F*out)
  Mat g2 = m2.op.adjoint().topRows(m2.in_block);
  Mat v = (g1 * pinv(g2, eps_rank)).adjoint();    // in2 x in1
  Eigen::BDCSVD<Mat> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVec s = svd.singularValues();
  Mat u = Mat::Zero(v.rows(), v.cols());
  for (std::int64_t idx = 0; idx < s.size(); ++idx)
    if (s(idx) > 0.5)
      u += svd.matrixU().col(idx) * svd.matrixV().col(idx).adjoint();
  return u;
}

/// ||M1 - M2 (I (x) V)|| on the interior.
inline double coincidence_residual(const TruncatedFockBasis& b,
                                   const MultiAnalyticOp& m1,
                                   const MultiAnalyticOp& m2, const Mat& v,
                                   int reserve = 1) {
  Mat scaled = Mat::Zero(m2.op.rows(), b.dim * v.cols());
  for (std::int64_t f = 0; f < b.dim; ++f)
    scaled.middleCols(f * v.cols(), v.cols()) =
        m2.op.middleCols(f * m2.in_block, m2.in_block) * v;
  DiagProj e = interior_projection(b, reserve);
  Mat diff = m1.op - scaled;
  diff = mask_rows(diff, e, m1.out_block);
  diff = mask_rows(diff.adjoint(), e, m1.in_block).adjoint();
  return op_norm(diff);
}

}  // namespace polydomain
