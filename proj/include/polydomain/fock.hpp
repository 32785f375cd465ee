#pragma once
/** @file fock.hpp
 *  @brief Truncated tensor-product Fock space and the universal weighted-shift
 *         model: left/right creation operators, vacuum and interior
 *         projections, word operators, and the model-side defect maps.
 *
 *  Truncation semantics: every operator here is the compression P W P of its
 *  infinite-space counterpart to the per-factor degree box d. Adjoints lower
 *  degree and are therefore exact on the box; identities involving creation
 *  steps hold exactly on the interior (per-factor degree <= d_i - reserve).
 */

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polydomain/domain.hpp"
#include "polydomain/spectral.hpp"
#include "polydomain/weights.hpp"
#include "polydomain/words.hpp"

namespace polydomain {

struct TruncatedFockBasis {
  DomainSpec spec;
  std::vector<int> d;                    // per-factor degree cutoffs
  std::vector<std::vector<Word>> words;  // per factor, graded order
  std::vector<WeightTable<double>> wt;   // per factor
  std::vector<std::int64_t> sizes;       // per-factor word counts
  std::vector<std::int64_t> strides;     // factor 1 slowest
  std::vector<std::vector<int>> deg;     // per factor, per word index
  std::vector<int> total_deg;            // per global index
  std::int64_t dim = 0;

  int k() const { return spec.k(); }

  std::int64_t compose(const std::vector<std::int64_t>& f) const {
    std::int64_t g = 0;
    for (int i = 0; i < k(); ++i) g += f[static_cast<std::size_t>(i)] * strides[static_cast<std::size_t>(i)];
    return g;
  }

  std::vector<std::int64_t> decompose(std::int64_t g) const {
    std::vector<std::int64_t> f(static_cast<std::size_t>(k()));
    for (int i = 0; i < k(); ++i) {
      f[static_cast<std::size_t>(i)] = g / strides[static_cast<std::size_t>(i)];
      g %= strides[static_cast<std::size_t>(i)];
    }
    return f;
  }

  MultiWord multiword(std::int64_t g) const {
    auto f = decompose(g);
    MultiWord mw(static_cast<std::size_t>(k()));
    for (int i = 0; i < k(); ++i)
      mw[static_cast<std::size_t>(i)] = words[static_cast<std::size_t>(i)][static_cast<std::size_t>(f[static_cast<std::size_t>(i)])];
    return mw;
  }

  int factor_degree(std::int64_t g, int i) const {
    return deg[static_cast<std::size_t>(i)]
              [static_cast<std::size_t>(g / strides[static_cast<std::size_t>(i)] %
                                        sizes[static_cast<std::size_t>(i)])];
  }
};

inline constexpr std::int64_t kDefaultDimCap = 20000;

inline TruncatedFockBasis build_basis(const DomainSpec& spec, std::vector<int> d,
                                      std::int64_t dim_cap = kDefaultDimCap) {
  ValidationReport vr = validate(spec);
  if (!vr.ok) throw std::invalid_argument("build_basis: " + vr.violations.front());
  const int k = spec.k();
  if (static_cast<int>(d.size()) == 1 && k > 1) d.assign(static_cast<std::size_t>(k), d[0]);
  if (static_cast<int>(d.size()) != k)
    throw std::invalid_argument("build_basis: degree vector length mismatch");
  TruncatedFockBasis b;
  b.spec = spec;
  b.d = d;
  std::int64_t dim = 1;
  for (int i = 0; i < k; ++i) {
    if (d[static_cast<std::size_t>(i)] < 0)
      throw std::invalid_argument("build_basis: negative cutoff");
    b.words.push_back(enumerate_words(spec.n[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(i)]));
    b.wt.push_back(weight_table(spec.q[static_cast<std::size_t>(i)], spec.m[static_cast<std::size_t>(i)],
                                d[static_cast<std::size_t>(i)]));
    b.sizes.push_back(static_cast<std::int64_t>(b.words.back().size()));
    std::vector<int> dg;
    dg.reserve(b.words.back().size());
    for (const auto& w : b.words.back()) dg.push_back(word_length(w));
    b.deg.push_back(std::move(dg));
    dim *= b.sizes.back();
    if (dim > dim_cap)
      throw std::invalid_argument("build_basis: dimension exceeds cap");
  }
  b.dim = dim;
  b.strides.assign(static_cast<std::size_t>(k), 1);
  for (int i = k - 2; i >= 0; --i)
    b.strides[static_cast<std::size_t>(i)] =
        b.strides[static_cast<std::size_t>(i + 1)] * b.sizes[static_cast<std::size_t>(i + 1)];
  b.total_deg.resize(static_cast<std::size_t>(dim));
  for (std::int64_t g = 0; g < dim; ++g) {
    int t = 0;
    for (int i = 0; i < k; ++i) t += b.factor_degree(g, i);
    b.total_deg[static_cast<std::size_t>(g)] = t;
  }
  return b;
}

/// Operator with at most one nonzero per column (every creation word operator
/// on the truncated space has this shape). target -1 means the column is
/// annihilated by the cutoff.
struct ColMap {
  std::int64_t dim = 0;
  std::vector<std::int64_t> target;
  std::vector<double> weight;

  Mat dense() const {
    Mat a = Mat::Zero(dim, dim);
    for (std::int64_t c = 0; c < dim; ++c)
      if (target[static_cast<std::size_t>(c)] >= 0)
        a(target[static_cast<std::size_t>(c)], c) = weight[static_cast<std::size_t>(c)];
    return a;
  }

  /// this * A, with A living on dim*block rows (identity on the block factor).
  Mat apply_left(const Mat& a, std::int64_t block = 1) const {
    Mat out = Mat::Zero(a.rows(), a.cols());
    for (std::int64_t c = 0; c < dim; ++c) {
      const std::int64_t t = target[static_cast<std::size_t>(c)];
      if (t < 0) continue;
      out.middleRows(t * block, block) +=
          weight[static_cast<std::size_t>(c)] * a.middleRows(c * block, block);
    }
    return out;
  }

  /// adjoint(this) * A on dim*block rows.
  Mat apply_adjoint_left(const Mat& a, std::int64_t block = 1) const {
    Mat out = Mat::Zero(a.rows(), a.cols());
    for (std::int64_t c = 0; c < dim; ++c) {
      const std::int64_t t = target[static_cast<std::size_t>(c)];
      if (t < 0) continue;
      out.middleRows(c * block, block) +=
          weight[static_cast<std::size_t>(c)] * a.middleRows(t * block, block);
    }
    return out;
  }

  /// A * this on dim*block columns.
  Mat apply_right(const Mat& a, std::int64_t block = 1) const {
    Mat out = Mat::Zero(a.rows(), a.cols());
    for (std::int64_t c = 0; c < dim; ++c) {
      const std::int64_t t = target[static_cast<std::size_t>(c)];
      if (t < 0) continue;
      out.middleCols(c * block, block) =
          weight[static_cast<std::size_t>(c)] * a.middleCols(t * block, block);
    }
    return out;
  }

  /// A * adjoint(this) on dim*block columns.
  Mat apply_adjoint_right(const Mat& a, std::int64_t block = 1) const {
    Mat out = Mat::Zero(a.rows(), a.cols());
    for (std::int64_t c = 0; c < dim; ++c) {
      const std::int64_t t = target[static_cast<std::size_t>(c)];
      if (t < 0) continue;
      out.middleCols(t * block, block) +=
          weight[static_cast<std::size_t>(c)] * a.middleCols(c * block, block);
    }
    return out;
  }

  /// (this tensor I_block) Y (this tensor I_block)^*.
  Mat conjugate(const Mat& y, std::int64_t block = 1) const {
    Mat out = Mat::Zero(y.rows(), y.cols());
    for (std::int64_t c = 0; c < dim; ++c) {
      const std::int64_t t = target[static_cast<std::size_t>(c)];
      if (t < 0) continue;
      const double wc = weight[static_cast<std::size_t>(c)];
      for (std::int64_t c2 = 0; c2 < dim; ++c2) {
        const std::int64_t t2 = target[static_cast<std::size_t>(c2)];
        if (t2 < 0) continue;
        out.block(t * block, t2 * block, block, block) +=
            wc * weight[static_cast<std::size_t>(c2)] *
            y.block(c * block, c2 * block, block, block);
      }
    }
    return out;
  }
};

namespace detail {

inline void check_factor_letter(const TruncatedFockBasis& b, int i, int j) {
  if (i < 1 || i > b.k()) throw std::out_of_range("factor index out of range");
  if (j < 1 || j > b.spec.n[static_cast<std::size_t>(i - 1)])
    throw std::out_of_range("letter index out of range");
}

}  // namespace detail

/// Creation by one multi-word: factor-i component beta_i is prepended (left)
/// or appended (right). Weight is the product of sqrt(b_alpha / b_new) over
/// factors; a factor overflowing its cutoff kills the column.
inline ColMap word_colmap(const TruncatedFockBasis& b, const MultiWord& beta,
                          bool left = true) {
  const int k = b.k();
  if (static_cast<int>(beta.size()) != k)
    throw std::invalid_argument("word_colmap: wrong number of factors");
  for (int i = 0; i < k; ++i)
    if (!word_valid(beta[static_cast<std::size_t>(i)], b.spec.n[static_cast<std::size_t>(i)]))
      throw std::out_of_range("word_colmap: letter out of range");
  ColMap cm;
  cm.dim = b.dim;
  cm.target.assign(static_cast<std::size_t>(b.dim), -1);
  cm.weight.assign(static_cast<std::size_t>(b.dim), 0.0);
  for (std::int64_t g = 0; g < b.dim; ++g) {
    auto f = b.decompose(g);
    double w = 1.0;
    bool alive = true;
    std::vector<std::int64_t> nf = f;
    for (int i = 0; i < k && alive; ++i) {
      const Word& bi = beta[static_cast<std::size_t>(i)];
      if (bi.empty()) continue;
      const Word& alpha = b.words[static_cast<std::size_t>(i)][static_cast<std::size_t>(f[static_cast<std::size_t>(i)])];
      if (word_length(alpha) + word_length(bi) > b.d[static_cast<std::size_t>(i)]) {
        alive = false;
        break;
      }
      Word merged = left ? concat(bi, alpha) : concat(alpha, bi);
      std::int64_t idx = word_index(merged, b.spec.n[static_cast<std::size_t>(i)]);
      w *= std::sqrt(b.wt[static_cast<std::size_t>(i)].at(f[static_cast<std::size_t>(i)]) /
                     b.wt[static_cast<std::size_t>(i)].at(idx));
      nf[static_cast<std::size_t>(i)] = idx;
    }
    if (!alive) continue;
    cm.target[static_cast<std::size_t>(g)] = b.compose(nf);
    cm.weight[static_cast<std::size_t>(g)] = w;
  }
  return cm;
}

inline ColMap left_shift(const TruncatedFockBasis& b, int i, int j) {
  detail::check_factor_letter(b, i, j);
  MultiWord mw(static_cast<std::size_t>(b.k()));
  mw[static_cast<std::size_t>(i - 1)] = Word{j};
  return word_colmap(b, mw, true);
}

inline ColMap right_shift(const TruncatedFockBasis& b, int i, int j) {
  detail::check_factor_letter(b, i, j);
  MultiWord mw(static_cast<std::size_t>(b.k()));
  mw[static_cast<std::size_t>(i - 1)] = Word{j};
  return word_colmap(b, mw, false);
}

/// Diagonal 0/1 projection.
struct DiagProj {
  std::vector<double> mask;

  std::int64_t rank() const {
    std::int64_t r = 0;
    for (double v : mask) r += (v != 0.0);
    return r;
  }

  Mat dense() const {
    const auto n = static_cast<Eigen::Index>(mask.size());
    Mat a = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) = mask[static_cast<std::size_t>(i)];
    return a;
  }

  /// (P tensor I_block) Y (P tensor I_block) for Y on mask.size()*block.
  Mat sandwich(const Mat& y, std::int64_t block = 1) const {
    Mat out = y;
    const auto n = static_cast<std::int64_t>(mask.size());
    for (std::int64_t i = 0; i < n; ++i)
      if (mask[static_cast<std::size_t>(i)] == 0.0) {
        out.middleRows(i * block, block).setZero();
        out.middleCols(i * block, block).setZero();
      }
    return out;
  }
};

inline DiagProj vacuum_projection(const TruncatedFockBasis& b) {
  DiagProj p;
  p.mask.assign(static_cast<std::size_t>(b.dim), 0.0);
  p.mask[0] = 1.0;
  return p;
}

/// Projection onto per-factor degree <= d_i - reserve (all factors).
inline DiagProj interior_projection(const TruncatedFockBasis& b, int reserve) {
  if (reserve < 0) throw std::invalid_argument("interior_projection: negative reserve");
  DiagProj p;
  p.mask.assign(static_cast<std::size_t>(b.dim), 1.0);
  for (std::int64_t g = 0; g < b.dim; ++g)
    for (int i = 0; i < b.k(); ++i)
      if (b.factor_degree(g, i) > b.d[static_cast<std::size_t>(i)] - reserve) {
        p.mask[static_cast<std::size_t>(g)] = 0.0;
        break;
      }
  return p;
}

/// Phi_{q_i, W_i tensor I_block}(Y) for the universal model on the truncated
/// space: exact in the adjoint-first sense (see file header).
inline Mat model_phi(const TruncatedFockBasis& b, int i, const Mat& y,
                     std::int64_t block = 1) {
  detail::check_factor_letter(b, i, 1);
  Mat out = Mat::Zero(y.rows(), y.cols());
  for (const auto& [g, a] : b.spec.q[static_cast<std::size_t>(i - 1)].terms) {
    if (g.empty()) continue;
    MultiWord mw(static_cast<std::size_t>(b.k()));
    mw[static_cast<std::size_t>(i - 1)] = g;
    out += a * word_colmap(b, mw, true).conjugate(y, block);
  }
  return out;
}

/// Product over factors of (id - Phi_i)^{p_i} applied to Y.
inline Mat model_defect(const TruncatedFockBasis& b, const Mat& y,
                        const std::vector<int>& p, std::int64_t block = 1) {
  if (static_cast<int>(p.size()) != b.k())
    throw std::invalid_argument("model_defect: grid length mismatch");
  Mat z = y;
  for (int i = 1; i <= b.k(); ++i)
    for (int t = 0; t < p[static_cast<std::size_t>(i - 1)]; ++t)
      z -= model_phi(b, i, z, block);
  return z;
}

/// Product over factors of (id - Phi_i^{p_i}) applied to Y; the model-side
/// twin of the saturation expression for tuples.
inline Mat model_saturation(const TruncatedFockBasis& b, const Mat& y,
                            const std::vector<int>& p, std::int64_t block = 1) {
  if (static_cast<int>(p.size()) != b.k())
    throw std::invalid_argument("model_saturation: grid length mismatch");
  Mat z = y;
  for (int i = 1; i <= b.k(); ++i) {
    Mat w = z;
    for (int t = 0; t < p[static_cast<std::size_t>(i - 1)]; ++t)
      w = model_phi(b, i, w, block);
    z -= w;
  }
  return z;
}

}  // namespace polydomain
