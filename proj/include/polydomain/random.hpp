#pragma once
/** @file random.hpp
 *  @brief Deterministic random ensembles: Gaussian draws with an explicit
 *         Box-Muller transform (std::normal_distribution varies across
 *         standard libraries), Haar unitaries, and domain-member generators.
 */

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "polydomain/defect.hpp"
#include "polydomain/fock.hpp"

namespace polydomain {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {
    // strictly inside (0,1)
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  cplx cgauss() {
    const double re = gauss();
    const double im = gauss();
    return cplx(re, im) / std::sqrt(2.0);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline Mat random_matrix(std::int64_t rows, std::int64_t cols, Rng& rng) {
  Mat a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = rng.cgauss();
  return a;
}

inline Mat random_unitary(std::int64_t n, Rng& rng) {
  Mat g = random_matrix(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx d = r(i, i);
    q.col(i) *= (d == cplx(0, 0)) ? cplx(1, 0) : d / std::abs(d);
  }
  return q;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

struct MemberOptions {
  double margin = 0.35;     // target: sum_i m_i lambda_max(Phi_i(I)) = margin^2
  bool boundary = false;    // push the whole tuple toward the membership edge
  double tol = 1e-9;
};

namespace detail {

/// Scale one factor group so lambda_max(Phi_{q_i}(I)) hits target; Phi is
/// monotone in the scale, so bisection converges fast.
inline void scale_factor_to(std::vector<Mat>& group, const FreePoly& q,
                            std::int64_t dim, double target) {
  auto level = [&](double s) {
    std::vector<Mat> scaled = group;
    for (Mat& a : scaled) a *= s;
    EigH e = eigh(phi_map(q, scaled, identity(dim)));
    return e.lambda(e.lambda.size() - 1);
  };
  double hi = 1.0;
  while (level(hi) < target) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (level(mid) < target ? lo : hi) = mid;
  }
  for (Mat& a : group) a *= 0.5 * (lo + hi);
}

}  // namespace detail

/// Cross-group commutation by construction: factor i acts on its own tensor
/// leg, T_{i,j} = I x ... x A_{i,j} x ... x I. Scaling puts
/// sum m_i lambda_max(Phi_i(I)) = margin^2 < 1, which certifies membership
/// and purity outright; boundary mode then rescales toward the edge.
inline OperatorTuple generate_random_member(const DomainSpec& spec,
                                            const std::vector<int>& factor_dims,
                                            std::uint64_t seed,
                                            const MemberOptions& opt = {}) {
  const int k = spec.k();
  if (static_cast<int>(factor_dims.size()) != k)
    throw std::invalid_argument("generate_random_member: dims length mismatch");
  if (!(opt.margin > 0.0 && opt.margin < 1.0))
    throw std::invalid_argument("generate_random_member: margin must be in (0,1)");
  Rng rng(seed);

  std::vector<std::vector<Mat>> locals(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const std::int64_t h = factor_dims[static_cast<std::size_t>(i)];
    for (int j = 0; j < spec.n[static_cast<std::size_t>(i)]; ++j)
      locals[static_cast<std::size_t>(i)].push_back(random_matrix(h, h, rng) /
                                                    std::sqrt(2.0 * h));
    const double target = opt.margin * opt.margin /
                          (k * spec.m[static_cast<std::size_t>(i)]);
    detail::scale_factor_to(locals[static_cast<std::size_t>(i)],
                            spec.q[static_cast<std::size_t>(i)], h, target);
  }

  OperatorTuple t;
  t.spec = spec;
  t.dim = 1;
  for (int d : factor_dims) t.dim *= d;
  t.T.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    for (const Mat& a : locals[static_cast<std::size_t>(i)]) {
      Mat full = identity(1);
      for (int l = 0; l < k; ++l)
        full = kron(full, l == i ? a : identity(factor_dims[static_cast<std::size_t>(l)]));
      t.T[static_cast<std::size_t>(i)].push_back(full);
    }

  if (opt.boundary) {
    double lo = 1.0, hi = 1.0;
    while (membership(scale_tuple(t, hi), opt.tol).verdict) hi *= 1.5;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (membership(scale_tuple(t, mid), opt.tol).verdict ? lo : hi) = mid;
    }
    t = scale_tuple(t, lo);
  }

  if (!membership(t, opt.tol).verdict)
    throw std::logic_error("generate_random_member: constructed tuple failed certification");
  return t;
}

/// Compression of the universal model to a subspace closed under every
/// adjoint letter. Such compressions are exact members (the adjoint orbit
/// never leaves the subspace, so word operators compress exactly) and are
/// always pure at finite truncation.
inline OperatorTuple compress_model(const TruncatedFockBasis& b, const Mat& v) {
  OperatorTuple t;
  t.spec = b.spec;
  t.dim = v.cols();
  t.T.resize(static_cast<std::size_t>(b.k()));
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= b.spec.n[static_cast<std::size_t>(i - 1)]; ++j)
      t.T[static_cast<std::size_t>(i - 1)].push_back(
          v.adjoint() * left_shift(b, i, j).dense() * v);
  return t;
}

/// Random subspace of the truncated Fock space closed under all adjoint
/// letters: the adjoint orbit of a few random vectors.
inline Mat random_coinvariant_subspace(const TruncatedFockBasis& b, int seeds,
                                       Rng& rng) {
  Mat start = random_matrix(b.dim, seeds, rng);
  std::vector<ColMap> letters;
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= b.spec.n[static_cast<std::size_t>(i - 1)]; ++j)
      letters.push_back(left_shift(b, i, j));
  Mat span = range_basis(start, 1e-12);
  for (;;) {
    std::vector<Mat> pieces{span};
    for (const auto& w : letters) pieces.push_back(w.apply_adjoint_left(span));
    Eigen::Index total = 0;
    for (const Mat& p : pieces) total += p.cols();
    Mat stacked(b.dim, total);
    Eigen::Index at = 0;
    for (const Mat& p : pieces) {
      stacked.middleCols(at, p.cols()) = p;
      at += p.cols();
    }
    Mat next = range_basis(stacked, 1e-12);
    if (next.cols() == span.cols()) return next;
    span = next;
  }
}

}  // namespace polydomain
