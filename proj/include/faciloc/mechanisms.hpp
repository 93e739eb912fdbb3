#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "faciloc/core.hpp"

namespace faciloc {

/// Raised when a mechanism or search is configured inconsistently
/// (phantom-count mismatch, thresholds out of order, breakpoint off grid...).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class MechanismKind {
  PooledPhantomMedian,      // median of all points plus N+1 phantoms
  RepresentativeMedian,     // median of agent representatives plus n-1 phantoms
  TwoThreshold,             // representative median snapped to t1/t2 by vote
  Constant,                 // fixed output, reports ignored
  WeightedRelabeledMedian,  // each agent replaced by |D_i| copies of her representative
  PooledOptimal,            // median of all reported points
};

inline const char* kind_name(MechanismKind k) {
  switch (k) {
    case MechanismKind::PooledPhantomMedian: return "pooled_phantom_median";
    case MechanismKind::RepresentativeMedian: return "representative_median";
    case MechanismKind::TwoThreshold: return "two_threshold";
    case MechanismKind::Constant: return "constant";
    case MechanismKind::WeightedRelabeledMedian: return "weighted_relabeled_median";
    case MechanismKind::PooledOptimal: return "pooled_optimal";
  }
  throw std::logic_error("kind_name: bad kind");
}

inline MechanismKind kind_from_name(const std::string& s) {
  if (s == "pooled_phantom_median") return MechanismKind::PooledPhantomMedian;
  if (s == "representative_median") return MechanismKind::RepresentativeMedian;
  if (s == "two_threshold") return MechanismKind::TwoThreshold;
  if (s == "constant") return MechanismKind::Constant;
  if (s == "weighted_relabeled_median") return MechanismKind::WeightedRelabeledMedian;
  if (s == "pooled_optimal") return MechanismKind::PooledOptimal;
  throw ConfigError("unknown mechanism kind '" + s + "'");
}

/// Tagged description of a mechanism instance. Phantoms are kept sorted;
/// their order never matters. One global beta is shared by all agents.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::Constant;
  std::vector<ExtendedCoord> phantoms;
  Rational beta = Rational(1, 2);
  std::optional<std::pair<Rational, Rational>> thresholds;
  std::optional<ExtendedCoord> constant;

  static MechanismSpec pooled_phantom_median(std::vector<ExtendedCoord> phantoms) {
    MechanismSpec s;
    s.kind = MechanismKind::PooledPhantomMedian;
    s.phantoms = std::move(phantoms);
    s.finish();
    return s;
  }
  static MechanismSpec representative_median(std::vector<ExtendedCoord> phantoms,
                                             Rational beta) {
    MechanismSpec s;
    s.kind = MechanismKind::RepresentativeMedian;
    s.phantoms = std::move(phantoms);
    s.beta = beta;
    s.finish();
    return s;
  }
  static MechanismSpec two_threshold(Rational t1, Rational t2,
                                     std::vector<ExtendedCoord> phantoms,
                                     Rational beta) {
    MechanismSpec s;
    s.kind = MechanismKind::TwoThreshold;
    s.phantoms = std::move(phantoms);
    s.beta = beta;
    s.thresholds = {t1, t2};
    s.finish();
    return s;
  }
  static MechanismSpec constant_mechanism(ExtendedCoord c) {
    MechanismSpec s;
    s.kind = MechanismKind::Constant;
    s.constant = c;
    s.finish();
    return s;
  }
  static MechanismSpec weighted_relabeled_median(Rational beta) {
    MechanismSpec s;
    s.kind = MechanismKind::WeightedRelabeledMedian;
    s.beta = beta;
    s.finish();
    return s;
  }
  static MechanismSpec pooled_optimal(Rational beta) {
    MechanismSpec s;
    s.kind = MechanismKind::PooledOptimal;
    s.beta = beta;
    s.finish();
    return s;
  }

  /// Structural validation; throws ConfigError. Called by the factories and
  /// again after deserialization.
  void finish() {
    std::sort(phantoms.begin(), phantoms.end());
    if (beta < Rational(0) || beta > Rational(1))
      throw ConfigError("beta must lie in [0,1]");
    if ((kind == MechanismKind::TwoThreshold) != thresholds.has_value())
      throw ConfigError("thresholds are required exactly for two_threshold");
    if ((kind == MechanismKind::Constant) != constant.has_value())
      throw ConfigError("constant value is required exactly for constant");
    if (thresholds && !(thresholds->first < thresholds->second))
      throw ConfigError("two_threshold requires t1 < t2");
    const bool wants_phantoms = kind == MechanismKind::PooledPhantomMedian ||
                                kind == MechanismKind::RepresentativeMedian ||
                                kind == MechanismKind::TwoThreshold;
    if (!wants_phantoms && !phantoms.empty())
      throw ConfigError(std::string(kind_name(kind)) + " takes no phantoms");
  }

  /// Finite parameters of the mechanism; the search grid must contain them.
  std::vector<Rational> finite_breakpoints() const {
    std::vector<Rational> out;
    for (const auto& p : phantoms)
      if (p.is_finite()) out.push_back(p.finite());
    if (thresholds) {
      out.push_back(thresholds->first);
      out.push_back(thresholds->second);
    }
    if (constant && constant->is_finite()) out.push_back(constant->finite());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Number of phantoms required for a profile with n agents and N total
  /// points, or nullopt when the kind takes none.
  std::optional<std::size_t> required_phantoms(std::size_t n, std::size_t N) const {
    switch (kind) {
      case MechanismKind::PooledPhantomMedian: return N + 1;
      case MechanismKind::RepresentativeMedian: return n - 1;
      case MechanismKind::TwoThreshold: return n + 1;
      default: return std::nullopt;
    }
  }

  /// Whether the mechanism is defined on this profile shape. Only
  /// pooled_phantom_median constrains the total point count.
  bool accepts(std::size_t n, std::size_t total_points) const {
    const auto need = required_phantoms(n, total_points);
    return !need || phantoms.size() == *need;
  }

  friend bool operator==(const MechanismSpec&, const MechanismSpec&) = default;
};

namespace detail {

/// Median (middle element) of an odd-sized scratch vector.
inline ExtendedCoord odd_median(std::vector<ExtendedCoord>& vals) {
  const std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
  return vals[mid];
}

}  // namespace detail

/// Per-agent data the mechanisms actually consume: the report itself plus the
/// beta-representative of its median, its size, and its t1-vs-t2 vote (only
/// meaningful for two_threshold specs). Precomputable, which matters in the
/// exhaustive checkers.
struct AgentSummary {
  const Report* report = nullptr;
  Rational rep;
  std::size_t size = 0;
  int prefers_t1 = 0;  // 1 if loss(t1) <= loss(t2)

  static AgentSummary of(const MechanismSpec& spec, const Report& r) {
    AgentSummary s;
    s.report = &r;
    s.rep = r.representative(spec.beta);
    s.size = r.size();
    if (spec.thresholds) {
      const Preference p = prefers(r, ExtendedCoord(spec.thresholds->first),
                                   ExtendedCoord(spec.thresholds->second));
      s.prefers_t1 = p != Preference::B ? 1 : 0;
    }
    return s;
  }
};

/// Reusable buffers for mechanism evaluation; keep one per thread.
struct EvalScratch {
  std::vector<ExtendedCoord> vals;
  std::vector<Rational> merged;
  std::vector<std::pair<Rational, std::size_t>> weighted;
};

inline ExtendedCoord evaluate(const MechanismSpec& spec,
                              std::span<const AgentSummary> agents,
                              EvalScratch& scratch) {
  const std::size_t n = agents.size();
  if (n == 0) throw std::domain_error("evaluate: no agents");
  std::size_t total = 0;
  for (const auto& a : agents) total += a.size;
  if (!spec.accepts(n, total))
    throw ConfigError(std::string(kind_name(spec.kind)) +
                      ": phantom count does not match profile shape");

  switch (spec.kind) {
    case MechanismKind::Constant:
      return *spec.constant;

    case MechanismKind::PooledPhantomMedian: {
      auto& vals = scratch.vals;
      vals.clear();
      for (const auto& a : agents)
        for (const auto& p : a.report->points()) vals.emplace_back(p);
      vals.insert(vals.end(), spec.phantoms.begin(), spec.phantoms.end());
      return detail::odd_median(vals);  // 2N+1 values
    }

    case MechanismKind::RepresentativeMedian: {
      auto& vals = scratch.vals;
      vals.clear();
      for (const auto& a : agents) vals.emplace_back(a.rep);
      vals.insert(vals.end(), spec.phantoms.begin(), spec.phantoms.end());
      return detail::odd_median(vals);  // 2n-1 values
    }

    case MechanismKind::TwoThreshold: {
      auto& vals = scratch.vals;
      vals.clear();
      for (const auto& a : agents) vals.emplace_back(a.rep);
      vals.insert(vals.end(), spec.phantoms.begin(), spec.phantoms.end());
      const ExtendedCoord t_star = detail::odd_median(vals);  // 2n+1 values
      const ExtendedCoord t1(spec.thresholds->first);
      const ExtendedCoord t2(spec.thresholds->second);
      // Outside or on the band the pivot passes through unchanged.
      if (t_star < t1 || t_star > t2 || t_star == t1 || t_star == t2)
        return t_star;
      std::size_t p = 0;
      for (const auto& a : agents) p += a.prefers_t1;
      return p >= n - p ? t1 : t2;
    }

    case MechanismKind::WeightedRelabeledMedian: {
      auto& entries = scratch.weighted;
      entries.clear();
      for (const auto& a : agents) entries.emplace_back(a.rep, a.size);
      std::sort(entries.begin(), entries.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      // Median interval of the multiset holding `size` copies of each rep.
      const std::size_t lo_pos = (total - 1) / 2, hi_pos = total / 2;
      Rational lo, hi;
      std::size_t seen = 0;
      bool lo_set = false;
      for (const auto& [value, weight] : entries) {
        const std::size_t next = seen + weight;
        if (!lo_set && lo_pos < next) {
          lo = value;
          lo_set = true;
        }
        if (hi_pos < next) {
          hi = value;
          break;
        }
        seen = next;
      }
      return ExtendedCoord(MedianInterval{lo, hi}.representative(spec.beta));
    }

    case MechanismKind::PooledOptimal: {
      auto& merged = scratch.merged;
      merged.clear();
      for (const auto& a : agents)
        merged.insert(merged.end(), a.report->points().begin(),
                      a.report->points().end());
      std::sort(merged.begin(), merged.end());
      const MedianInterval m{merged[(total - 1) / 2], merged[total / 2]};
      return ExtendedCoord(m.representative(spec.beta));
    }
  }
  throw std::logic_error("evaluate: bad kind");
}

inline ExtendedCoord evaluate(const MechanismSpec& spec, const Profile& profile) {
  std::vector<AgentSummary> agents;
  agents.reserve(profile.n());
  for (const auto& r : profile.reports())
    agents.push_back(AgentSummary::of(spec, r));
  EvalScratch scratch;
  return evaluate(spec, agents, scratch);
}

// Convenience entry points mirroring the catalog.

inline ExtendedCoord pooled_phantom_median(const Profile& profile,
                                           std::vector<ExtendedCoord> phantoms) {
  return evaluate(MechanismSpec::pooled_phantom_median(std::move(phantoms)),
                  profile);
}

inline ExtendedCoord representative_median(const Profile& profile,
                                           std::vector<ExtendedCoord> phantoms,
                                           Rational beta) {
  return evaluate(
      MechanismSpec::representative_median(std::move(phantoms), beta), profile);
}

inline ExtendedCoord two_threshold(const Profile& profile, Rational t1,
                                   Rational t2,
                                   std::vector<ExtendedCoord> phantoms,
                                   Rational beta) {
  return evaluate(
      MechanismSpec::two_threshold(t1, t2, std::move(phantoms), beta), profile);
}

inline ExtendedCoord constant_mechanism(const Profile&, ExtendedCoord c) {
  return c;
}

inline ExtendedCoord weighted_relabeled_median(const Profile& profile,
                                               Rational beta) {
  return evaluate(MechanismSpec::weighted_relabeled_median(beta), profile);
}

inline ExtendedCoord pooled_optimal(const Profile& profile, Rational beta) {
  return evaluate(MechanismSpec::pooled_optimal(beta), profile);
}

/// Equivalence key for one agent's report: two reports with equal keys yield
/// the same mechanism output whatever the other agents submit. nullopt means
/// the mechanism reads the full multiset (pooled kinds) and reports cannot be
/// grouped. The exhaustive checkers use this to collapse deviation streams.
struct DeviationKey {
  Rational rep;
  std::size_t size = 0;
  int prefers_t1 = 0;

  friend bool operator==(const DeviationKey&, const DeviationKey&) = default;
};

inline std::optional<DeviationKey> deviation_key(const MechanismSpec& spec,
                                                 const AgentSummary& agent) {
  switch (spec.kind) {
    case MechanismKind::Constant:
      return DeviationKey{};  // single class
    case MechanismKind::RepresentativeMedian:
      return DeviationKey{agent.rep, 0, 0};
    case MechanismKind::TwoThreshold:
      return DeviationKey{agent.rep, 0, agent.prefers_t1};
    case MechanismKind::WeightedRelabeledMedian:
      return DeviationKey{agent.rep, agent.size, 0};
    case MechanismKind::PooledPhantomMedian:
    case MechanismKind::PooledOptimal:
      return std::nullopt;
  }
  throw std::logic_error("deviation_key: bad kind");
}

}  // namespace faciloc
