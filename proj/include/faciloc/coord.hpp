#pragma once

#include <algorithm>
#include <compare>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "faciloc/rational.hpp"

namespace faciloc {

/// A point on the extended real line: an exact rational or one of the two
/// infinities. Houses agent locations, phantom values and mechanism outputs.
/// Total order: -inf < every finite value < +inf.
class ExtendedCoord {
public:
  constexpr ExtendedCoord() : kind_(Kind::Finite), value_(0) {}
  constexpr ExtendedCoord(Rational v) : kind_(Kind::Finite), value_(v) {}
  constexpr ExtendedCoord(std::int64_t v) : kind_(Kind::Finite), value_(v) {}

  static constexpr ExtendedCoord neg_inf() { return ExtendedCoord(Kind::NegInf); }
  static constexpr ExtendedCoord pos_inf() { return ExtendedCoord(Kind::PosInf); }

  constexpr bool is_finite() const { return kind_ == Kind::Finite; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::PosInf; }

  /// Finite value; throws if infinite.
  constexpr const Rational& finite() const {
    if (!is_finite())
      throw std::domain_error("ExtendedCoord: infinite value has no rational");
    return value_;
  }

  friend constexpr bool operator==(const ExtendedCoord& a,
                                   const ExtendedCoord& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::Finite || a.value_ == b.value_;
  }
  friend constexpr std::strong_ordering operator<=>(const ExtendedCoord& a,
                                                    const ExtendedCoord& b) {
    const int ra = a.rank(), rb = b.rank();
    if (ra != rb) return ra <=> rb;
    if (a.kind_ != Kind::Finite) return std::strong_ordering::equal;
    return a.value_ <=> b.value_;
  }

  /// Extended addition. Adding infinities of the same sign is fine; mixing
  /// them is undefined and throws.
  friend ExtendedCoord operator+(const ExtendedCoord& a,
                                 const ExtendedCoord& b) {
    if (a.is_finite() && b.is_finite()) return ExtendedCoord(a.value_ + b.value_);
    if (a.is_finite()) return b;
    if (b.is_finite() || b.kind_ == a.kind_) return a;
    throw std::domain_error("ExtendedCoord: inf + -inf");
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::NegInf: return "-inf";
      case Kind::PosInf: return "inf";
      default: return value_.to_string();
    }
  }

  /// Parses "inf", "+inf", "-inf" or a rational literal.
  static ExtendedCoord from_string(std::string_view s) {
    if (s == "inf" || s == "+inf") return pos_inf();
    if (s == "-inf") return neg_inf();
    return ExtendedCoord(Rational::from_string(s));
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedCoord& c) {
    return os << c.to_string();
  }

private:
  enum class Kind { NegInf, Finite, PosInf };

  constexpr explicit ExtendedCoord(Kind k) : kind_(k), value_(0) {}
  constexpr int rank() const {
    return kind_ == Kind::NegInf ? -1 : kind_ == Kind::PosInf ? 1 : 0;
  }

  Kind kind_;
  Rational value_;
};

/// Losses are nonnegative extended rationals; +inf arises when a facility is
/// placed at an infinite coordinate.
using ExtRational = ExtendedCoord;

/// Median of a nonempty multiset of extended coordinates, as a (lo, hi)
/// interval over the sorted values: the middle element when the size is odd,
/// the two middle elements when it is even. Throws on empty input.
struct ExtMedianInterval {
  ExtendedCoord lo;
  ExtendedCoord hi;

  bool degenerate() const { return lo == hi; }
  friend bool operator==(const ExtMedianInterval&,
                         const ExtMedianInterval&) = default;
};

inline ExtMedianInterval ext_median_interval(std::vector<ExtendedCoord> points) {
  if (points.empty())
    throw std::domain_error("ext_median_interval: empty multiset");
  std::sort(points.begin(), points.end());
  const std::size_t k = points.size();
  if (k % 2 == 1) {
    const ExtendedCoord& m = points[k / 2];
    return {m, m};
  }
  return {points[k / 2 - 1], points[k / 2]};
}

}  // namespace faciloc
