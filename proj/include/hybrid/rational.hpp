#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace hybrid {

// Exact non-overflowing (for the magnitudes used here) rational number.
// Always normalized: den > 0, gcd(num, den) == 1.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  // Smallest integer >= value.
  std::int64_t ceil() const;
  std::int64_t floor() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

Rational max(const Rational& a, const Rational& b);
Rational min(const Rational& a, const Rational& b);

// Exact comparisons against square roots of non-negative rationals.
// sqrt_at_least(x, r): x >= sqrt(r).
bool sqrt_at_least(const Rational& x, const Rational& r);
// sqrt_at_most(x, r): x <= sqrt(r).
bool sqrt_at_most(const Rational& x, const Rational& r);

}  // namespace hybrid
