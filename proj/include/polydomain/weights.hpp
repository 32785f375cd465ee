#pragma once
/** @file weights.hpp
 *  @brief Weighted-shift normalization constants b_alpha attached to an
 *         admissible polynomial and a defect order m.
 *
 *  b_alpha is the alpha coefficient of (1 - q)^{-m} in the free algebra:
 *    b_empty = 1,
 *    b_alpha = sum over splittings alpha = g_1...g_p into p >= 1 nonempty
 *              blocks of a_{g_1}...a_{g_p} * C(p + m - 1, m - 1).
 *  Equivalently the m-fold free convolution of the m = 1 weights, which is
 *  how the table route computes them.
 */

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polydomain/domain.hpp"
#include "polydomain/words.hpp"

namespace polydomain {

/// C(n, k) by Pascal recursion, exact in S (use Rational to rule out rounding).
template <class S>
S binomial(int n, int k) {
  if (k < 0 || k > n) return S(0);
  std::vector<S> row(static_cast<std::size_t>(k) + 1, S(0));
  row[0] = S(1);
  for (int i = 1; i <= n; ++i)
    for (int j = std::min(i, k); j >= 1; --j) row[j] = row[j] + row[j - 1];
  return row[k];
}

/// Direct splitting sum for one word. Exponential in |alpha|; intended for
/// cross-checks and short words. The table route below is the workhorse.
template <class S>
S weight_direct(const FreePolyT<S>& q, int m, const Word& alpha) {
  if (m < 1) throw std::invalid_argument("weight_direct: m must be >= 1");
  if (alpha.empty()) return S(1);
  S total(0);
  const int len = word_length(alpha);
  for (int p = 1; p <= len; ++p) {
    S layer(0);
    bool nonzero = false;
    for (const auto& split : factorizations(alpha, p)) {
      S prod(1);
      for (const Word& block : split) prod = prod * q.coeff(block);
      if (!(prod == S(0))) {
        layer = layer + prod;
        nonzero = true;
      }
    }
    if (nonzero) total = total + layer * binomial<S>(p + m - 1, m - 1);
  }
  return total;
}

/// Weights for all words of length <= max_degree over one factor, indexed by
/// word_index into enumerate_words(q.arity, max_degree).
template <class S>
struct WeightTable {
  int arity = 1;
  int max_degree = 0;
  std::vector<Word> words;  // graded order, position = word_index
  std::vector<S> b;

  const S& at(const Word& w) const { return b[static_cast<std::size_t>(word_index(w, arity))]; }
  const S& at(std::int64_t idx) const { return b[static_cast<std::size_t>(idx)]; }
};

/// m = 1 seed: b_alpha = sum over nonempty prefix blocks g of a_g * b_suffix.
/// Then m - 1 free convolutions with the seed. O(words * degree) per pass.
template <class S>
WeightTable<S> weight_table(const FreePolyT<S>& q, int m, int max_degree) {
  if (m < 1) throw std::invalid_argument("weight_table: m must be >= 1");
  if (max_degree < 0) throw std::invalid_argument("weight_table: negative degree");
  WeightTable<S> t;
  t.arity = q.arity;
  t.max_degree = max_degree;
  t.words = enumerate_words(q.arity, max_degree);
  const std::size_t count = t.words.size();

  std::vector<S> seed(count, S(0));
  seed[0] = S(1);
  for (std::size_t i = 1; i < count; ++i) {
    const Word& w = t.words[i];
    S acc(0);
    for (const auto& [g, a] : q.terms) {
      const int glen = word_length(g);
      if (glen == 0 || glen > word_length(w)) continue;
      if (!std::equal(g.begin(), g.end(), w.begin())) continue;
      Word suffix(w.begin() + glen, w.end());
      acc = acc + a * seed[static_cast<std::size_t>(word_index(suffix, q.arity))];
    }
    seed[i] = acc;
  }

  t.b = seed;
  for (int pass = 2; pass <= m; ++pass) {
    std::vector<S> next(count, S(0));
    for (std::size_t i = 0; i < count; ++i) {
      const Word& w = t.words[i];
      const int len = word_length(w);
      S acc(0);
      for (int cut = 0; cut <= len; ++cut) {
        Word head(w.begin(), w.begin() + cut);
        Word tail(w.begin() + cut, w.end());
        acc = acc + t.b[static_cast<std::size_t>(word_index(head, q.arity))] *
                        seed[static_cast<std::size_t>(word_index(tail, q.arity))];
      }
      next[i] = acc;
    }
    t.b = std::move(next);
  }
  return t;
}

/// Reverses every generating word; the weight of alpha under the reversed
/// polynomial equals the weight of reverse(alpha) under the original.
template <class S>
FreePolyT<S> reverse_poly(const FreePolyT<S>& q) {
  FreePolyT<S> out;
  out.arity = q.arity;
  for (const auto& [w, c] : q.terms) out.terms.emplace_back(reverse(w), c);
  return out;
}

/// Submultiplicativity constant: b_alpha * b_beta <= C * b_{alpha beta} with
/// C = min(C(|alpha|+m-1, m-1), C(|beta|+m-1, m-1)).
template <class S>
S product_bound(int m, int len_alpha, int len_beta) {
  S ca = binomial<S>(len_alpha + m - 1, m - 1);
  S cb = binomial<S>(len_beta + m - 1, m - 1);
  return ca < cb ? ca : cb;
}

}  // namespace polydomain
