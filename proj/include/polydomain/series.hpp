#pragma once
/** @file series.hpp
 *  @brief Free power series over the letter alphabet: evaluation on operator
 *         tuples and on the truncated universal model, Hardy-style norm
 *         estimates, the homogeneous radius criterion, the von Neumann
 *         inequality check, and Cesaro smoothing by total degree.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "polydomain/defect.hpp"
#include "polydomain/fock.hpp"
#include "polydomain/spectral.hpp"

namespace polydomain {

/// Finitely supported series sum c_(omega) Z_(omega); each multi-word has one
/// word per factor group (possibly empty).
struct FreeSeries {
  std::vector<int> n;  // alphabet sizes per factor
  std::vector<std::pair<MultiWord, cplx>> terms;

  int k() const { return static_cast<int>(n.size()); }
  int degree() const {
    int d = 0;
    for (const auto& [mw, c] : terms) d = std::max(d, total_degree(mw));
    return d;
  }
};

inline ValidationReport validate_series(const FreeSeries& s) {
  ValidationReport rep;
  if (s.n.empty()) rep.fail("series needs at least one factor alphabet");
  for (int x : s.n)
    if (x < 1) rep.fail("alphabet sizes must be positive");
  for (const auto& [mw, c] : s.terms) {
    if (static_cast<int>(mw.size()) != s.k()) {
      rep.fail("term has wrong number of factor words");
      continue;
    }
    for (std::size_t i = 0; i < mw.size(); ++i)
      if (!word_valid(mw[i], s.n[i])) rep.fail("term letter out of range");
  }
  return rep;
}

/// phi(r T) = sum c r^{deg} T_{(omega)}; word operators are memoized per
/// factor through the strip-first-letter recurrence.
inline Mat eval_series(const FreeSeries& s, const OperatorTuple& t, double r = 1.0) {
  if (s.k() != t.k()) throw std::invalid_argument("eval_series: factor count mismatch");
  for (int i = 0; i < s.k(); ++i)
    if (s.n[static_cast<std::size_t>(i)] != t.spec.n[static_cast<std::size_t>(i)])
      throw std::invalid_argument("eval_series: alphabet mismatch");
  std::vector<std::map<Word, Mat>> memo(static_cast<std::size_t>(s.k()));
  std::function<Mat(int, const Word&)> word_mat = [&](int i, const Word& w) -> Mat {
    if (w.empty()) return identity(t.dim);
    auto& m = memo[static_cast<std::size_t>(i)];
    auto it = m.find(w);
    if (it != m.end()) return it->second;
    Word tail(w.begin() + 1, w.end());
    Mat v = t.op(i + 1, w[0]) * word_mat(i, tail);
    m.emplace(w, v);
    return v;
  };
  Mat out = Mat::Zero(t.dim, t.dim);
  for (const auto& [mw, c] : s.terms) {
    Mat prod = identity(t.dim);
    for (int i = 0; i < s.k(); ++i) prod = prod * word_mat(i, mw[static_cast<std::size_t>(i)]);
    out += c * std::pow(r, total_degree(mw)) * prod;
  }
  return out;
}

/// phi(r W) as a dense matrix on the truncated Fock space.
inline Mat eval_series_model(const FreeSeries& s, const TruncatedFockBasis& b,
                             double r = 1.0) {
  if (s.k() != b.k()) throw std::invalid_argument("eval_series_model: factor count mismatch");
  Mat out = Mat::Zero(b.dim, b.dim);
  for (const auto& [mw, c] : s.terms) {
    ColMap cm = word_colmap(b, mw, true);
    const cplx scale = c * std::pow(r, total_degree(mw));
    for (std::int64_t col = 0; col < b.dim; ++col)
      if (cm.target[static_cast<std::size_t>(col)] >= 0)
        out(cm.target[static_cast<std::size_t>(col)], col) +=
            scale * cm.weight[static_cast<std::size_t>(col)];
  }
  return out;
}

/// ||phi(r W)|| over the given radii. Nondecreasing in r up to roundoff:
/// rotation by a total-degree phase is unitary on the truncation, so the norm
/// is a circular max of a function of z = r e^{i theta}.
inline std::vector<double> hardy_norm_estimate(const FreeSeries& s,
                                               const TruncatedFockBasis& b,
                                               const std::vector<double>& radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(op_norm(eval_series_model(s, b, r)));
  return out;
}

struct RadiusReport {
  std::vector<double> roots;  // ||phi_p(W)||^{1/p} per homogeneous degree p >= 1
  bool saturated = false;     // support reaches the storage degree
  bool ok = true;             // tail criterion holds
};

/// Homogeneous-part criterion for membership of the associated Hardy algebra:
/// limsup_p ||phi_p(W)||^{1/p} <= 1. Finite data forces a convention: when the
/// support stops strictly below the basis cutoff the series is taken as
/// complete (tail zero, criterion holds); when support saturates storage the
/// top half of the root sequence stands in for the tail.
inline RadiusReport radius_check(const FreeSeries& s, const TruncatedFockBasis& b,
                                 double tol = 1e-9) {
  const int deg = s.degree();
  RadiusReport rep;
  int cutoff = *std::min_element(b.d.begin(), b.d.end());
  rep.saturated = deg >= cutoff;
  for (int p = 1; p <= deg; ++p) {
    FreeSeries part;
    part.n = s.n;
    for (const auto& term : s.terms)
      if (total_degree(term.first) == p) part.terms.push_back(term);
    const double norm = part.terms.empty() ? 0.0 : op_norm(eval_series_model(part, b, 1.0));
    rep.roots.push_back(std::pow(norm, 1.0 / p));
  }
  if (rep.saturated) {
    for (int p = std::max(1, (deg + 1) / 2); p <= deg; ++p)
      if (rep.roots[static_cast<std::size_t>(p - 1)] > 1.0 + tol) rep.ok = false;
  }
  return rep;
}

struct PolyPair {
  FreeSeries p, q;
};

struct VonNeumannReport {
  std::vector<double> tuple_side, model_side;
  double worst_violation = 0.0;  // max over samples of tuple - model
  bool ok = true;
};

/// || sum p_g(T) q_g(T)^* || <= || E (sum p_g(W) q_g(W)^*) E || for members,
/// with E the interior projection at a reserve covering every p degree (the
/// raising side); each sample is one sum of pairs.
inline VonNeumannReport von_neumann_check(const OperatorTuple& t,
                                          const std::vector<std::vector<PolyPair>>& samples,
                                          const TruncatedFockBasis& b,
                                          double tol = 1e-9) {
  VonNeumannReport rep;
  for (const auto& sample : samples) {
    Mat lhs = Mat::Zero(t.dim, t.dim);
    Mat mid = Mat::Zero(b.dim, b.dim);
    int reserve = 1;
    for (const auto& pq : sample)
      reserve = std::max({reserve, pq.p.degree(), pq.q.degree()});
    for (const auto& pq : sample) {
      lhs += eval_series(pq.p, t) * eval_series(pq.q, t).adjoint();
      mid += eval_series_model(pq.p, b) * eval_series_model(pq.q, b).adjoint();
    }
    DiagProj e = interior_projection(b, reserve);
    const double lv = op_norm(lhs);
    const double rv = op_norm(e.dense() * mid * e.dense());
    rep.tuple_side.push_back(lv);
    rep.model_side.push_back(rv);
    rep.worst_violation = std::max(rep.worst_violation, lv - rv);
  }
  rep.ok = rep.worst_violation <= tol;
  return rep;
}

/// Diagonal band of A along total degree: entries with deg(row) - deg(col) == j.
inline Mat gamma_band(const Mat& a, const TruncatedFockBasis& b, int j) {
  Mat out = Mat::Zero(a.rows(), a.cols());
  for (std::int64_t r = 0; r < b.dim; ++r)
    for (std::int64_t c = 0; c < b.dim; ++c)
      if (b.total_deg[static_cast<std::size_t>(r)] - b.total_deg[static_cast<std::size_t>(c)] == j)
        out(r, c) = a(r, c);
  return out;
}

/// Cesaro smoothing: entry (r, c) scaled by max(0, 1 - |deg r - deg c| / n).
/// Averages unitary phase conjugates against a nonnegative kernel, hence a
/// complete contraction; invertible on the surviving bands.
inline Mat cesaro(const Mat& a, const TruncatedFockBasis& b, int n) {
  if (n < 1) throw std::invalid_argument("cesaro: n must be positive");
  Mat out = Mat::Zero(a.rows(), a.cols());
  for (std::int64_t r = 0; r < b.dim; ++r)
    for (std::int64_t c = 0; c < b.dim; ++c) {
      const int j = std::abs(b.total_deg[static_cast<std::size_t>(r)] -
                             b.total_deg[static_cast<std::size_t>(c)]);
      if (j < n) out(r, c) = a(r, c) * (1.0 - static_cast<double>(j) / n);
    }
  return out;
}

/// Exact de-weighting of cesaro(a, b, n); requires every band of a to survive,
/// i.e. n > max total-degree spread of the basis.
inline Mat cesaro_invert(const Mat& a, const TruncatedFockBasis& b, int n) {
  const int spread = *std::max_element(b.total_deg.begin(), b.total_deg.end());
  if (n <= spread)
    throw std::invalid_argument("cesaro_invert: bands were truncated at this n");
  Mat out = Mat::Zero(a.rows(), a.cols());
  for (std::int64_t r = 0; r < b.dim; ++r)
    for (std::int64_t c = 0; c < b.dim; ++c) {
      const int j = std::abs(b.total_deg[static_cast<std::size_t>(r)] -
                             b.total_deg[static_cast<std::size_t>(c)]);
      out(r, c) = a(r, c) / (1.0 - static_cast<double>(j) / n);
    }
  return out;
}

}  // namespace polydomain
