#pragma once
/** @file rational.hpp
 *  @brief Exact rational scalar for the combinatorial weight tables. Values
 *         stay normalized (gcd 1, positive denominator); arithmetic throws on
 *         64-bit overflow instead of wrapping.
 */

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace polydomain {

class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(checked(static_cast<__int128>(a.num_) * b.den_ +
                            static_cast<__int128>(b.num_) * a.den_),
                    checked(static_cast<__int128>(a.den_) * b.den_));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return a + Rational(-b.num_, b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(checked(static_cast<__int128>(a.num_) * b.num_),
                    checked(static_cast<__int128>(a.den_) * b.den_));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return Rational(checked(static_cast<__int128>(a.num_) * b.den_),
                    checked(static_cast<__int128>(a.den_) * b.num_));
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ <
           static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a < b || a == b;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Best rational with denominator <= max_den (continued fractions).
  /// Recovers small fractions stored in doubles exactly.
  static Rational from_double(double x, std::int64_t max_den = 1000000) {
    if (!std::isfinite(x)) throw std::domain_error("Rational: non-finite");
    bool neg = x < 0;
    double v = neg ? -x : x;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = v;
    for (int it = 0; it < 64; ++it) {
      double fl = std::floor(frac);
      if (fl > 9.0e18) throw std::overflow_error("Rational: magnitude");
      std::int64_t a = static_cast<std::int64_t>(fl);
      __int128 p2 = static_cast<__int128>(a) * p1 + p0;
      __int128 q2 = static_cast<__int128>(a) * q1 + q0;
      if (q2 > max_den) break;
      p0 = p1;
      q0 = q1;
      p1 = static_cast<std::int64_t>(p2);
      q1 = static_cast<std::int64_t>(q2);
      double rem = frac - fl;
      if (rem < 1e-15 * (1.0 + fl)) break;
      frac = 1.0 / rem;
    }
    if (q1 == 0) throw std::domain_error("Rational: no approximant");
    return Rational(neg ? -p1 : p1, q1);
  }

 private:
  static std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
      throw std::overflow_error("Rational: 64-bit overflow");
    return static_cast<std::int64_t>(v);
  }
  void normalize() {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  std::int64_t num_, den_;
};

}  // namespace polydomain
