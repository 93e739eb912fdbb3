#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace faciloc {

/// Exact rational number, always kept in lowest terms with a positive
/// denominator. All mechanism outputs, losses and tie decisions in this
/// library are computed with Rational; there is no floating point anywhere.
class Rational {
public:
  constexpr Rational() : num_(0), den_(1) {}
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
  constexpr Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    normalize();
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }

  constexpr bool is_integer() const { return den_ == 1; }
  constexpr int sign() const { return num_ < 0 ? -1 : num_ > 0 ? 1 : 0; }

  friend constexpr Rational operator-(const Rational& x) {
    Rational r;
    r.num_ = -x.num_;
    r.den_ = x.den_;
    return r;
  }
  friend constexpr Rational operator+(const Rational& x, const Rational& y) {
    return Rational(x.num_ * y.den_ + y.num_ * x.den_, x.den_ * y.den_);
  }
  friend constexpr Rational operator-(const Rational& x, const Rational& y) {
    return Rational(x.num_ * y.den_ - y.num_ * x.den_, x.den_ * y.den_);
  }
  friend constexpr Rational operator*(const Rational& x, const Rational& y) {
    return Rational(x.num_ * y.num_, x.den_ * y.den_);
  }
  friend constexpr Rational operator/(const Rational& x, const Rational& y) {
    if (y.num_ == 0) throw std::domain_error("Rational: division by zero");
    return Rational(x.num_ * y.den_, x.den_ * y.num_);
  }

  Rational& operator+=(const Rational& y) { return *this = *this + y; }
  Rational& operator-=(const Rational& y) { return *this = *this - y; }
  Rational& operator*=(const Rational& y) { return *this = *this * y; }
  Rational& operator/=(const Rational& y) { return *this = *this / y; }

  friend constexpr bool operator==(const Rational& x, const Rational& y) {
    return x.num_ == y.num_ && x.den_ == y.den_;  // canonical form
  }
  friend constexpr std::strong_ordering operator<=>(const Rational& x,
                                                    const Rational& y) {
    // Cross products in 128 bits so comparisons can never overflow.
    const __int128 lhs = static_cast<__int128>(x.num_) * y.den_;
    const __int128 rhs = static_cast<__int128>(y.num_) * x.den_;
    return lhs < rhs   ? std::strong_ordering::less
           : lhs > rhs ? std::strong_ordering::greater
                       : std::strong_ordering::equal;
  }

  friend Rational abs(const Rational& x) { return x.num_ < 0 ? -x : x; }

  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Parses "p" or "p/q". Throws std::invalid_argument on malformed input.
  static Rational from_string(std::string_view s) {
    const auto slash = s.find('/');
    try {
      if (slash == std::string_view::npos)
        return Rational(parse_int(s));
      return Rational(parse_int(s.substr(0, slash)),
                      parse_int(s.substr(slash + 1)));
    } catch (const std::domain_error&) {
      throw std::invalid_argument("Rational: bad literal '" + std::string(s) +
                                  "'");
    }
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& x) {
    return os << x.to_string();
  }

private:
  constexpr void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  static std::int64_t parse_int(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("Rational: empty literal");
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(std::string(s), &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("Rational: bad literal '" + std::string(s) +
                                  "'");
    }
    if (pos != s.size())
      throw std::invalid_argument("Rational: bad literal '" + std::string(s) +
                                  "'");
    return v;
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace faciloc
