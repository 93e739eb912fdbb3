#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "faciloc/core.hpp"
#include "faciloc/mechanisms.hpp"

namespace faciloc {

/// Finite carrier for exhaustive search: a strictly increasing list of
/// rational coordinates.
struct Grid {
  std::vector<Rational> coords;

  explicit Grid(std::vector<Rational> c) : coords(std::move(c)) {
    if (coords.empty()) throw ConfigError("Grid: empty");
    for (std::size_t i = 1; i < coords.size(); ++i)
      if (!(coords[i - 1] < coords[i]))
        throw ConfigError("Grid: coordinates must be strictly increasing");
  }

  static Grid integer_range(std::int64_t lo, std::int64_t hi) {
    std::vector<Rational> c;
    for (std::int64_t v = lo; v <= hi; ++v) c.emplace_back(v);
    return Grid(std::move(c));
  }

  bool contains(const Rational& v) const {
    return std::binary_search(coords.begin(), coords.end(), v);
  }
  std::size_t size() const { return coords.size(); }
};

/// Which strategic actions a deviating agent may take, and how large a
/// report she may submit.
struct ActionSet {
  bool manipulation = false;
  bool replication = false;
  bool hiding = false;
  std::size_t max_report_size = 1;

  static ActionSet all(std::size_t max_report_size) {
    return {true, true, true, max_report_size};
  }
  static ActionSet manipulation_only(std::size_t max_report_size) {
    return {true, false, false, max_report_size};
  }
  static ActionSet replication_only(std::size_t max_report_size) {
    return {false, true, false, max_report_size};
  }
  static ActionSet hiding_only(std::size_t max_report_size) {
    return {false, false, true, max_report_size};
  }

  bool any() const { return manipulation || replication || hiding; }
  bool full() const { return manipulation && replication && hiding; }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;
};

namespace detail {

/// Emits all sorted tuples over `coords` with size in [1, max_size] in
/// lexicographic order (a prefix precedes its extensions).
inline void emit_multisets(const std::vector<Rational>& coords,
                           std::size_t max_size, std::size_t first,
                           std::vector<Rational>& prefix,
                           std::vector<Report>& out) {
  for (std::size_t i = first; i < coords.size(); ++i) {
    prefix.push_back(coords[i]);
    out.push_back(Report(prefix));
    if (prefix.size() < max_size) emit_multisets(coords, max_size, i, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace detail

/// All nonempty multisets over the grid with size <= max_size, in
/// lexicographic order. This is the closure of manipulation, replication and
/// hiding ("combined" deviations), and doubles as the true-report enumerator.
inline std::vector<Report> all_reports(const Grid& grid, std::size_t max_size) {
  if (max_size == 0) throw std::domain_error("all_reports: max_size must be >= 1");
  std::vector<Report> out;
  std::vector<Rational> prefix;
  detail::emit_multisets(grid.coords, max_size, 0, prefix, out);
  return out;
}

/// All multisets over the grid of size exactly k, in lexicographic order.
inline std::vector<Report> reports_of_size(const Grid& grid, std::size_t k) {
  if (k == 0) throw std::domain_error("reports_of_size: k must be >= 1");
  std::vector<Report> all = all_reports(grid, k);
  std::erase_if(all, [k](const Report& r) { return r.size() != k; });
  return all;
}

/// Manipulation: re-value every controlled location; the report size is
/// preserved. Includes the truthful report whenever its support lies on the
/// grid.
inline std::vector<Report> manipulations(const Report& true_report,
                                         const Grid& grid) {
  return reports_of_size(grid, true_report.size());
}

/// Replication: add extra copies of values already present, up to max_size
/// total points. The truthful report is the zero-extra-copies case.
inline std::vector<Report> replications(const Report& true_report,
                                        std::size_t max_size) {
  if (max_size < true_report.size())
    throw std::domain_error("replications: max_size below the true report size");
  std::vector<Rational> support = true_report.points();
  support.erase(std::unique(support.begin(), support.end()), support.end());

  std::vector<Report> out;
  const std::size_t budget = max_size - true_report.size();

  // extras[i] additional copies of support[i], total at most `budget`
  std::vector<std::size_t> extras(support.size(), 0);
  while (true) {
    std::vector<Rational> pts = true_report.points();
    for (std::size_t i = 0; i < support.size(); ++i)
      pts.insert(pts.end(), extras[i], support[i]);
    out.push_back(Report(std::move(pts)));

    // next composition with sum <= budget
    std::size_t total = 0;
    for (auto e : extras) total += e;
    std::size_t i = 0;
    for (; i < extras.size(); ++i) {
      if (total < budget) {
        ++extras[i];
        break;
      }
      total -= extras[i];
      extras[i] = 0;
    }
    if (i == extras.size()) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Hiding: report any nonempty sub-multiset of the controlled locations.
inline std::vector<Report> hidings(const Report& true_report) {
  std::vector<std::pair<Rational, std::size_t>> groups;
  for (const Rational& p : true_report.points()) {
    if (!groups.empty() && groups.back().first == p)
      ++groups.back().second;
    else
      groups.emplace_back(p, 1);
  }
  std::vector<Report> out;
  std::vector<std::size_t> take(groups.size(), 0);
  while (true) {
    // next multiplicity vector (mixed radix)
    std::size_t i = 0;
    for (; i < take.size(); ++i) {
      if (take[i] < groups[i].second) {
        ++take[i];
        break;
      }
      take[i] = 0;
    }
    if (i == take.size()) break;
    std::vector<Rational> pts;
    for (std::size_t g = 0; g < groups.size(); ++g)
      pts.insert(pts.end(), take[g], groups[g].first);
    out.push_back(Report(std::move(pts)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// The deviation stream for one agent under an action set: the union of the
/// selected generators, deduplicated and in lexicographic order. When all
/// three actions are allowed this is every nonempty multiset over the grid of
/// size <= max_report_size. The truthful report is always a member.
inline std::vector<Report> deviation_stream(const Report& true_report,
                                            const ActionSet& actions,
                                            const Grid& grid) {
  if (!actions.any()) throw ConfigError("ActionSet: no actions enabled");
  if (actions.full()) return all_reports(grid, actions.max_report_size);

  std::vector<Report> out;
  if (actions.manipulation) {
    auto v = manipulations(true_report, grid);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (actions.replication) {
    auto v = replications(true_report, actions.max_report_size);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (actions.hiding) {
    auto v = hidings(true_report);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (!actions.manipulation) out.push_back(true_report);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace faciloc
