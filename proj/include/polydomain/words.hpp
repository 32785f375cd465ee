#pragma once
/** @file words.hpp
 *  @brief Words over a finite alphabet {1..n}: graded-lexicographic
 *         enumeration, concatenation, reversal, and ordered splittings into
 *         nonempty blocks. The empty word is the unit.
 */

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace polydomain {

/// Letters are 1-based generator indices; the empty vector is the identity.
using Word = std::vector<int>;

/// One word per tensor factor.
using MultiWord = std::vector<Word>;

inline int word_length(const Word& w) { return static_cast<int>(w.size()); }

inline int total_degree(const MultiWord& mw) {
  int s = 0;
  for (const Word& w : mw) s += word_length(w);
  return s;
}

inline bool word_valid(const Word& w, int n) {
  return std::all_of(w.begin(), w.end(),
                     [n](int c) { return 1 <= c && c <= n; });
}

inline Word concat(const Word& u, const Word& v) {
  Word w;
  w.reserve(u.size() + v.size());
  w.insert(w.end(), u.begin(), u.end());
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

inline Word reverse(const Word& w) { return Word(w.rbegin(), w.rend()); }

/// 1 + n + ... + n^d, throwing rather than overflowing.
inline std::int64_t word_count(int n, int d) {
  if (n < 1 || d < 0) throw std::invalid_argument("word_count: n >= 1, d >= 0");
  std::int64_t total = 0, level = 1;
  for (int j = 0; j <= d; ++j) {
    total += level;
    if (j < d) {
      if (level > (INT64_MAX - total) / n)
        throw std::overflow_error("word_count: overflow");
      level *= n;
    }
  }
  return total;
}

/// All words of length <= d, graded order: by length, then lexicographic.
/// Within a length the list counts through letters like a base-n odometer.
inline std::vector<Word> enumerate_words(int n, int d) {
  if (n < 1 || d < 0)
    throw std::invalid_argument("enumerate_words: n >= 1, d >= 0");
  std::vector<Word> out;
  out.reserve(static_cast<std::size_t>(word_count(n, d)));
  out.push_back({});
  for (int len = 1; len <= d; ++len) {
    Word w(len, 1);
    while (true) {
      out.push_back(w);
      int pos = len - 1;
      while (pos >= 0 && w[pos] == n) w[pos--] = 1;
      if (pos < 0) break;
      ++w[pos];
    }
  }
  return out;
}

/// Position of w inside enumerate_words(n, .); graded-lex closed form.
inline std::int64_t word_index(const Word& w, int n) {
  if (!word_valid(w, n)) throw std::invalid_argument("word_index: bad letter");
  std::int64_t idx = 0, level = 1;
  for (std::size_t j = 0; j < w.size(); ++j) {
    idx += level;
    level *= n;
  }
  std::int64_t offset = 0;
  for (int c : w) offset = offset * n + (c - 1);
  return idx + offset;
}

/// All ordered splittings of w into p nonempty consecutive blocks.
/// Count is C(|w|-1, p-1) for 1 <= p <= |w|, empty otherwise.
inline std::vector<std::vector<Word>> factorizations(const Word& w, int p) {
  if (p < 1) throw std::invalid_argument("factorizations: p >= 1");
  std::vector<std::vector<Word>> out;
  const int len = word_length(w);
  if (p > len) return out;
  // cuts[t] is the start of block t+1; cuts strictly increase in (0, len).
  std::vector<int> cuts(p - 1);
  for (int t = 0; t < p - 1; ++t) cuts[t] = t + 1;
  while (true) {
    std::vector<Word> blocks;
    blocks.reserve(p);
    int start = 0;
    for (int t = 0; t < p - 1; ++t) {
      blocks.emplace_back(w.begin() + start, w.begin() + cuts[t]);
      start = cuts[t];
    }
    blocks.emplace_back(w.begin() + start, w.end());
    out.push_back(std::move(blocks));
    // next cut combination in lexicographic order
    int t = p - 2;
    while (t >= 0 && cuts[t] == len - (p - 1 - t)) --t;
    if (t < 0) break;
    ++cuts[t];
    for (int s = t + 1; s < p - 1; ++s) cuts[s] = cuts[s - 1] + 1;
  }
  return out;
}

}  // namespace polydomain
