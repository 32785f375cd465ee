#pragma once
/** @file domain.hpp
 *  @brief Noncommutative polynomials with nonnegative coefficients and the
 *         domain specification (k, n, m, q) shared by every module.
 */

#include <string>
#include <utility>
#include <vector>

#include "polydomain/rational.hpp"
#include "polydomain/words.hpp"

namespace polydomain {

/// Finite noncommutative polynomial over scalar S, terms keyed by words over
/// {1..arity}. Admissible generating polynomials have no constant term,
/// strictly positive linear coefficients and nonnegative coefficients overall.
template <class S>
struct FreePolyT {
  int arity = 1;
  std::vector<std::pair<Word, S>> terms;

  S coeff(const Word& w) const {
    for (const auto& [word, c] : terms)
      if (word == w) return c;
    return S(0);
  }

  int degree() const {
    int d = 0;
    for (const auto& [word, c] : terms)
      if (!(c == S(0))) d = std::max(d, word_length(word));
    return d;
  }
};

using FreePoly = FreePolyT<double>;
using FreePolyExact = FreePolyT<Rational>;

inline FreePolyExact to_exact(const FreePoly& q, std::int64_t max_den = 1000000) {
  FreePolyExact out;
  out.arity = q.arity;
  for (const auto& [w, c] : q.terms)
    out.terms.emplace_back(w, Rational::from_double(c, max_den));
  return out;
}

inline FreePoly to_double(const FreePolyExact& q) {
  FreePoly out;
  out.arity = q.arity;
  for (const auto& [w, c] : q.terms) out.terms.emplace_back(w, c.to_double());
  return out;
}

/// The domain data: factor count k, per-factor arities n, defect orders m,
/// and one admissible polynomial per factor.
struct DomainSpec {
  std::vector<int> n;
  std::vector<int> m;
  std::vector<FreePoly> q;

  int k() const { return static_cast<int>(n.size()); }
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(std::string msg) {
    ok = false;
    violations.push_back(std::move(msg));
  }
};

template <class S>
inline void validate_poly(const FreePolyT<S>& q, const std::string& name,
                          ValidationReport& report) {
  if (q.arity < 1) report.fail(name + ": arity must be >= 1");
  for (const auto& [w, c] : q.terms) {
    if (!word_valid(w, q.arity)) report.fail(name + ": letter out of range");
    if (c < S(0)) report.fail(name + ": negative coefficient");
  }
  if (!(q.coeff(Word{}) == S(0))) report.fail(name + ": constant term present");
  for (int j = 1; j <= q.arity; ++j) {
    S c = q.coeff(Word{j});
    if (!(S(0) < c))
      report.fail(name + ": linear coefficient " + std::to_string(j) +
                  " must be positive");
  }
  for (std::size_t a = 0; a < q.terms.size(); ++a)
    for (std::size_t b = a + 1; b < q.terms.size(); ++b)
      if (q.terms[a].first == q.terms[b].first)
        report.fail(name + ": duplicate term");
}

inline ValidationReport validate(const DomainSpec& spec) {
  ValidationReport report;
  const int k = spec.k();
  if (k < 1) report.fail("spec: k must be >= 1");
  if (static_cast<int>(spec.m.size()) != k || static_cast<int>(spec.q.size()) != k)
    report.fail("spec: n, m, q must have equal length k");
  for (int i = 0; i < k && i < static_cast<int>(spec.m.size()); ++i)
    if (spec.m[i] < 1) report.fail("spec: m must be >= 1 in every factor");
  for (int i = 0; i < k && i < static_cast<int>(spec.q.size()); ++i) {
    if (i < static_cast<int>(spec.n.size()) && spec.q[i].arity != spec.n[i])
      report.fail("spec: arity of q[" + std::to_string(i) +
                  "] does not match n");
    validate_poly(spec.q[i], "q[" + std::to_string(i) + "]", report);
  }
  return report;
}

}  // namespace polydomain
