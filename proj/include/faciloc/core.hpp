#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "faciloc/coord.hpp"
#include "faciloc/rational.hpp"

namespace faciloc {

/// Median interval of a finite multiset: [lo, hi] with lo == hi for odd
/// sizes. Any location inside is optimal for the owner of the multiset.
struct MedianInterval {
  Rational lo;
  Rational hi;

  bool degenerate() const { return lo == hi; }

  /// The weighted point beta*lo + (1-beta)*hi used as the single summary
  /// location of the interval; beta = 1 picks lo, beta = 0 picks hi.
  Rational representative(const Rational& beta) const {
    if (lo == hi) return lo;
    return beta * lo + (Rational(1) - beta) * hi;
  }

  friend bool operator==(const MedianInterval&, const MedianInterval&) = default;
};

/// One agent's submission: a nonempty multiset of finite coordinates.
/// Multiplicity matters (reporting a value twice is a different report),
/// and reports are stored sorted so equality is multiset equality.
class Report {
public:
  Report(std::vector<Rational> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::domain_error("Report: empty multiset");
    std::sort(points_.begin(), points_.end());
  }
  Report(std::initializer_list<Rational> points)
      : Report(std::vector<Rational>(points)) {}

  std::size_t size() const { return points_.size(); }
  const std::vector<Rational>& points() const { return points_; }

  MedianInterval median() const {
    const std::size_t k = points_.size();
    if (k % 2 == 1) return {points_[k / 2], points_[k / 2]};
    return {points_[k / 2 - 1], points_[k / 2]};
  }

  Rational representative(const Rational& beta) const {
    return median().representative(beta);
  }

  friend bool operator==(const Report&, const Report&) = default;
  friend std::strong_ordering operator<=>(const Report& a, const Report& b) {
    return std::lexicographical_compare_three_way(
        a.points_.begin(), a.points_.end(), b.points_.begin(), b.points_.end());
  }

  friend std::ostream& operator<<(std::ostream& os, const Report& r) {
    os << "{";
    for (std::size_t i = 0; i < r.points_.size(); ++i) {
      if (i) os << ",";
      os << r.points_[i];
    }
    return os << "}";
  }

private:
  std::vector<Rational> points_;
};

/// An ordered list of reports, one per agent. The pooled view forgets which
/// agent reported what and is invariant under permuting the agents.
class Profile {
public:
  explicit Profile(std::vector<Report> reports) : reports_(std::move(reports)) {
    if (reports_.empty()) throw std::domain_error("Profile: no agents");
  }
  Profile(std::initializer_list<Report> reports)
      : Profile(std::vector<Report>(reports)) {}

  std::size_t n() const { return reports_.size(); }
  const Report& report(std::size_t i) const { return reports_.at(i); }
  const std::vector<Report>& reports() const { return reports_; }

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& r : reports_) n += r.size();
    return n;
  }

  /// Sorted multiset union of all reports.
  std::vector<Rational> pooled() const {
    std::vector<Rational> all;
    all.reserve(total_points());
    for (const auto& r : reports_)
      all.insert(all.end(), r.points().begin(), r.points().end());
    std::sort(all.begin(), all.end());
    return all;
  }

  Profile with_report(std::size_t i, Report r) const {
    std::vector<Report> reports = reports_;
    reports.at(i) = std::move(r);
    return Profile(std::move(reports));
  }

  friend bool operator==(const Profile&, const Profile&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Profile& p) {
    os << "(";
    for (std::size_t i = 0; i < p.reports_.size(); ++i) {
      if (i) os << ",";
      os << p.reports_[i];
    }
    return os << ")";
  }

private:
  std::vector<Report> reports_;
};

/// Sum of absolute deviations of the report's points from the facility y.
/// A facility at +-inf costs +inf.
inline ExtRational loss(const ExtendedCoord& y, const Report& report) {
  if (!y.is_finite()) return ExtendedCoord::pos_inf();
  Rational total = 0;
  for (const Rational& p : report.points()) total += abs(y.finite() - p);
  return ExtRational(total);
}

enum class Preference { A, B, Tie };

/// Which of the two facility locations the report's owner prefers, by exact
/// comparison of the two losses.
inline Preference prefers(const Report& report, const ExtendedCoord& a,
                          const ExtendedCoord& b) {
  const ExtRational la = loss(a, report);
  const ExtRational lb = loss(b, report);
  if (la < lb) return Preference::A;
  if (lb < la) return Preference::B;
  return Preference::Tie;
}

/// Median of a nonempty multiset of finite coordinates.
inline MedianInterval median_interval(std::vector<Rational> points) {
  if (points.empty()) throw std::domain_error("median_interval: empty multiset");
  std::sort(points.begin(), points.end());
  const std::size_t k = points.size();
  if (k % 2 == 1) return {points[k / 2], points[k / 2]};
  return {points[k / 2 - 1], points[k / 2]};
}

}  // namespace faciloc
