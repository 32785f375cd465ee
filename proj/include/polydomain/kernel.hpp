#pragma once
/** @file kernel.hpp
 *  @brief Noncommutative Berezin kernels and transforms for domain members,
 *         with the geometric truncation-tail bound that turns limit
 *         statements into finite certificates.
 *
 *  Row layout of K: global fock index f and defect coordinate s map to row
 *  f * rank + s. Coordinates are taken in the orthonormal eigenbasis of the
 *  clipped defect root.
 */

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "polydomain/defect.hpp"
#include "polydomain/fock.hpp"
#include "polydomain/spectral.hpp"

namespace polydomain {

struct BerezinKernel {
  TruncatedFockBasis basis;
  OperatorTuple tuple;
  SqrtClip defect;  // of Delta^m(I) on the tuple's space
  Mat k;            // (basis.dim * defect.rank) x dim

  std::int64_t rank() const { return defect.rank; }
  Mat gram() const { return k.adjoint() * k; }
};

namespace detail {

/// Recursive assembly over factors: rows[f] = sqrt(prod b) * L * X_{(beta)}^*
/// where L = Lambda^{1/2} B^* projects onto defect coordinates. Words iterate
/// in graded order so each word's product extends its strip-first parent.
inline void assemble_rows(const OperatorTuple& t, const TruncatedFockBasis& b,
                          int factor, const Mat& partial, double bw,
                          std::int64_t fock_at, Mat& k) {
  const auto fi = static_cast<std::size_t>(factor);
  const std::int64_t count = b.sizes[fi];
  const int arity = b.spec.n[fi];
  std::vector<Mat> cache(static_cast<std::size_t>(count));
  cache[0] = partial;
  const std::int64_t r = partial.rows();
  for (std::int64_t idx = 0; idx < count; ++idx) {
    if (idx > 0) {
      const Word& w = b.words[fi][static_cast<std::size_t>(idx)];
      Word tail(w.begin() + 1, w.end());
      const std::int64_t parent = word_index(tail, arity);
      cache[static_cast<std::size_t>(idx)] =
          cache[static_cast<std::size_t>(parent)] *
          t.T[fi][static_cast<std::size_t>(w[0] - 1)].adjoint();
    }
    const double bw2 = bw * b.wt[fi].at(idx);
    const std::int64_t at = fock_at + idx * b.strides[fi];
    if (factor + 1 == b.k()) {
      k.middleRows(at * r, r) =
          std::sqrt(bw2) * cache[static_cast<std::size_t>(idx)];
    } else {
      assemble_rows(t, b, factor + 1, cache[static_cast<std::size_t>(idx)], bw2,
                    at, k);
    }
  }
}

}  // namespace detail

/// K h = sum over multi-words (beta) of sqrt(prod_i b_{i,beta_i})
/// e_(beta) (x) Delta^m(I)^{1/2} T_{(beta)}^* h.
/// check_member runs the full certification first; callers that construct the
/// tuple from an already-certified positivity condition may skip it, but a
/// genuinely indefinite defect is always rejected.
inline BerezinKernel berezin_kernel(const OperatorTuple& t,
                                    const std::vector<int>& d,
                                    double tol = 1e-9,
                                    bool check_member = true,
                                    std::int64_t dim_cap = kDefaultDimCap) {
  if (check_member && !membership(t, tol).verdict)
    throw std::invalid_argument("berezin_kernel: tuple is not a domain member");
  BerezinKernel ker;
  ker.basis = build_basis(t.spec, d, dim_cap);
  ker.tuple = t;
  ker.defect = sqrt_clip(defect_map(t, identity(t.dim), t.spec.m), tol);
  if (ker.defect.rejected)
    throw std::invalid_argument("berezin_kernel: defect map is not psd");
  const std::int64_t r = ker.defect.rank;
  ker.k = Mat::Zero(ker.basis.dim * r, t.dim);
  if (r > 0) {
    Mat l = ker.defect.root_eigs.asDiagonal() * ker.defect.basis.adjoint();
    detail::assemble_rows(t, ker.basis, 0, l, 1.0, 0, ker.k);
  }
  return ker;
}

/// (g (x) I_rank) K for g acting on the truncated Fock space.
inline Mat apply_fock_operator(const BerezinKernel& ker, const Mat& g) {
  const std::int64_t r = ker.defect.rank;
  Mat out = Mat::Zero(ker.k.rows(), ker.k.cols());
  for (std::int64_t row = 0; row < ker.basis.dim; ++row)
    for (std::int64_t col = 0; col < ker.basis.dim; ++col) {
      const cplx v = g(row, col);
      if (v != cplx(0, 0)) out.middleRows(row * r, r) += v * ker.k.middleRows(col * r, r);
    }
  return out;
}

/// Berezin transform B_T[g] = K^* (g (x) I) K.
inline Mat berezin_transform(const BerezinKernel& ker, const Mat& g) {
  return ker.k.adjoint() * apply_fock_operator(ker, g);
}

/// Zero the rows of a fock (x) defect matrix outside the interior projection.
inline Mat mask_rows(const Mat& a, const DiagProj& e, std::int64_t block) {
  Mat out = a;
  for (std::size_t f = 0; f < e.mask.size(); ++f)
    if (e.mask[f] == 0.0)
      out.middleRows(static_cast<std::int64_t>(f) * block, block).setZero();
  return out;
}

/// max over (i,j) of ||(E (x) I)(K T_{i,j}^* - (W_{i,j}^* (x) I) K)|| with E
/// the interior projection at the given reserve. Row-exact away from the top
/// degree band, so members report roundoff here.
inline std::vector<double> intertwine_residuals(const BerezinKernel& ker,
                                                int reserve = 1) {
  const std::int64_t r = ker.defect.rank;
  DiagProj e = interior_projection(ker.basis, reserve);
  std::vector<double> out;
  for (int i = 1; i <= ker.basis.k(); ++i)
    for (int j = 1; j <= ker.basis.spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      Mat lhs = ker.k * ker.tuple.op(i, j).adjoint();
      Mat rhs = left_shift(ker.basis, i, j).apply_adjoint_left(ker.k, r);
      out.push_back(op_norm(mask_rows(lhs - rhs, e, r)));
    }
  return out;
}

inline double intertwine_residual(const BerezinKernel& ker, int reserve = 1) {
  double worst = 0.0;
  for (double v : intertwine_residuals(ker, reserve)) worst = std::max(worst, v);
  return worst;
}

struct CncReport {
  bool certified = false;  // a positive verdict is conclusive
  double min_eig = 0.0;    // of K^*K at this degree
  std::vector<int> degree;
};

/// The Gram K^*K increases to the defining limit in the cutoff degree, so
/// min-eigenvalue > tol certifies complete non-coisometry; anything else is
/// "not certified at this degree", never "false".
inline CncReport is_cnc(const OperatorTuple& t, const std::vector<int>& d,
                        double tol = 1e-9) {
  BerezinKernel ker = berezin_kernel(t, d, tol);
  CncReport rep;
  rep.degree = ker.basis.d;
  if (ker.defect.rank == 0) {
    rep.min_eig = 0.0;
    rep.certified = false;
    return rep;
  }
  EigH e = eigh(ker.gram());
  rep.min_eig = e.lambda(0);
  rep.certified = rep.min_eig > tol;
  return rep;
}

/// Upper bound on the operator norm of the kernel mass omitted by the cutoff:
/// sum over multi-words with some |beta_i| > d_i of b T Delta T^*. Uses
/// lambda_max(Phi_i(I)) = rho_i^2 < 1 and the splitting-count inequality
/// b^{(m)} <= C(p+m-1, m-1) b^{(1)} per degree-p shell. Infinite when some
/// rho_i >= 1.
inline double kernel_tail_bound(const OperatorTuple& t, const std::vector<int>& d) {
  const int k = t.k();
  const Mat eye = identity(t.dim);
  std::vector<double> rho2(static_cast<std::size_t>(k));
  std::vector<int> gmax(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    EigH e = eigh(phi_apply(t, i + 1, eye));
    rho2[static_cast<std::size_t>(i)] = std::max(0.0, e.lambda(e.lambda.size() - 1));
    if (rho2[static_cast<std::size_t>(i)] >= 1.0)
      return std::numeric_limits<double>::infinity();
    gmax[static_cast<std::size_t>(i)] = t.spec.q[static_cast<std::size_t>(i)].degree();
  }
  const double dnorm = op_norm(defect_map(t, eye, t.spec.m));

  auto shell = [&](int i, int p) {
    const int m = t.spec.m[static_cast<std::size_t>(i)];
    const double c = binomial<double>(p + m - 1, m - 1);
    const int s = (p + gmax[static_cast<std::size_t>(i)] - 1) /
                  gmax[static_cast<std::size_t>(i)];
    return c * std::pow(rho2[static_cast<std::size_t>(i)], s) /
           (1.0 - rho2[static_cast<std::size_t>(i)]);
  };
  auto series_sum = [&](int i, int from) {
    double acc = 0.0;
    for (int p = from; p < 100000; ++p) {
      const double term = shell(i, p);
      acc += term;
      if (term < 1e-18 * std::max(acc, 1.0) && p > from + 4) break;
    }
    return acc;
  };

  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double cross = 1.0;
    for (int l = 0; l < k; ++l)
      if (l != i) cross *= 1.0 + series_sum(l, 1);
    total += series_sum(i, d[static_cast<std::size_t>(i)] + 1) * cross;
  }
  return total * dnorm;
}

/// Smallest per-factor cutoffs whose tail bound clears the target, grown one
/// factor at a time; respects the basis dimension cap.
inline std::vector<int> choose_degree(const OperatorTuple& t, double target,
                                      int d_max = 400,
                                      std::int64_t dim_cap = kDefaultDimCap) {
  const int k = t.k();
  std::vector<int> d(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    d[static_cast<std::size_t>(i)] = std::max(2, t.spec.m[static_cast<std::size_t>(i)] + 1);
  auto dim_of = [&](const std::vector<int>& dd) {
    std::int64_t dim = 1;
    for (int i = 0; i < k; ++i) {
      dim *= word_count(t.spec.n[static_cast<std::size_t>(i)], dd[static_cast<std::size_t>(i)]);
      if (dim > dim_cap) return dim;
    }
    return dim;
  };
  while (kernel_tail_bound(t, d) > target) {
    int best = -1;
    double best_gain = 0.0;
    for (int i = 0; i < k; ++i) {
      if (d[static_cast<std::size_t>(i)] >= d_max) continue;
      std::vector<int> trial = d;
      ++trial[static_cast<std::size_t>(i)];
      if (dim_of(trial) > dim_cap) continue;
      const double gain = kernel_tail_bound(t, d) - kernel_tail_bound(t, trial);
      if (best < 0 || gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    if (best < 0) break;  // capped out; caller sees the residual bound
    ++d[static_cast<std::size_t>(best)];
  }
  return d;
}

}  // namespace polydomain
