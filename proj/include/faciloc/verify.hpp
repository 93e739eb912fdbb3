#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "faciloc/core.hpp"
#include "faciloc/deviations.hpp"
#include "faciloc/mechanisms.hpp"

namespace faciloc {

/// Bounds of one exhaustive verification run. All quantification is over
/// profiles whose reports are multisets over `grid`; verdicts are exhaustive
/// for that space only and carry its cardinality.
struct SearchConfig {
  std::size_t n = 2;
  Grid grid = Grid::integer_range(0, 4);
  std::size_t max_true_size = 2;
  ActionSet action_set = ActionSet::all(3);
  bool equal_cardinality = false;   // every true report has size == max_true_size
  bool odd_true_sizes_only = false; // restrict true reports to odd sizes
  std::size_t max_coalition = 1;
  std::size_t threads = 0;          // 0 = hardware concurrency
};

enum class Property {
  Strategyproof,
  GroupStrategyproof,
  StrongGroupStrategyproof,
  Efficient,
  Anonymous,
  Constant,
};

inline const char* property_name(Property p) {
  switch (p) {
    case Property::Strategyproof: return "sp";
    case Property::GroupStrategyproof: return "group_sp";
    case Property::StrongGroupStrategyproof: return "strong_group_sp";
    case Property::Efficient: return "efficient";
    case Property::Anonymous: return "anonymous";
    case Property::Constant: return "constant";
  }
  throw std::logic_error("property_name: bad property");
}

inline Property property_from_name(const std::string& s) {
  if (s == "sp") return Property::Strategyproof;
  if (s == "group_sp") return Property::GroupStrategyproof;
  if (s == "strong_group_sp") return Property::StrongGroupStrategyproof;
  if (s == "efficient") return Property::Efficient;
  if (s == "anonymous") return Property::Anonymous;
  if (s == "constant") return Property::Constant;
  throw ConfigError("unknown check '" + s + "'");
}

/// A fully replayable counterexample. Re-running the mechanism on
/// true_profile and on deviated_profile() reproduces the recorded outputs and
/// losses exactly.
///
/// deviators lists the coalition members in ascending order (a member may
/// "deviate" to her truthful report); deviated_reports, losses_before and
/// losses_after are parallel to it. Efficiency and constancy witnesses have
/// no coalition; for efficiency output_after holds a dominating location and
/// the loss vectors cover all agents. Anonymity witnesses store the permuted
/// profile in deviated_reports.
struct ViolationWitness {
  Property property = Property::Strategyproof;
  Profile true_profile{{Report{Rational(0)}}};
  std::vector<std::size_t> deviators;
  std::vector<Report> deviated_reports;
  std::vector<ExtRational> losses_before;
  std::vector<ExtRational> losses_after;
  ExtendedCoord output_before;
  ExtendedCoord output_after;

  Profile deviated_profile() const {
    std::vector<Report> reports = true_profile.reports();
    if (property == Property::Anonymous) {
      reports = deviated_reports;
    } else {
      for (std::size_t k = 0; k < deviators.size(); ++k)
        reports.at(deviators[k]) = deviated_reports.at(k);
    }
    return Profile(std::move(reports));
  }
};

struct Verdict {
  bool pass = true;
  std::optional<ViolationWitness> witness;
  std::uint64_t space_size = 0;  // number of true profiles enumerated
};

struct ConstancyResult {
  bool constant = true;
  std::uint64_t space_size = 0;
  std::optional<std::pair<Profile, Profile>> counterexample;
};

// ---------------------------------------------------------------------------
// Pareto optimality
// ---------------------------------------------------------------------------

/// True iff `candidate` is weakly better than `incumbent` for every agent and
/// strictly better for at least one.
inline bool dominates(const Profile& profile, const ExtendedCoord& candidate,
                      const ExtendedCoord& incumbent) {
  bool strict = false;
  for (const Report& r : profile.reports()) {
    const ExtRational lc = loss(candidate, r);
    const ExtRational li = loss(incumbent, r);
    if (li < lc) return false;
    if (lc < li) strict = true;
  }
  return strict;
}

namespace detail {

struct ParetoBand {
  Rational right_bound;  // y is dominated from the right iff y < right_bound
  Rational left_bound;   // y is dominated from the left  iff y > left_bound
};

// Losses fall strictly toward an agent's median interval and are flat on it:
// moving right from y helps someone strictly iff y is left of some interval
// start, and hurts nobody iff y is left of every interval end.
inline ParetoBand pareto_band(std::span<const MedianInterval> medians) {
  Rational max_lo = medians[0].lo, min_hi = medians[0].hi;
  Rational min_lo = medians[0].lo, max_hi = medians[0].hi;
  for (std::size_t i = 1; i < medians.size(); ++i) {
    max_lo = std::max(max_lo, medians[i].lo);
    min_hi = std::min(min_hi, medians[i].hi);
    min_lo = std::min(min_lo, medians[i].lo);
    max_hi = std::max(max_hi, medians[i].hi);
  }
  return {std::min(max_lo, min_hi), std::max(min_hi, max_lo)};
}

inline ParetoBand pareto_band(const Profile& profile) {
  std::vector<MedianInterval> medians;
  medians.reserve(profile.n());
  for (const Report& r : profile.reports()) medians.push_back(r.median());
  return pareto_band(medians);
}

}  // namespace detail

/// Closed-form Pareto check of a facility location against the profile's
/// median intervals.
inline bool pareto_optimal(const Profile& profile, const ExtendedCoord& y) {
  const detail::ParetoBand band = detail::pareto_band(profile);
  return !(y < ExtendedCoord(band.right_bound)) &&
         !(y > ExtendedCoord(band.left_bound));
}

/// Dominating location produced by the closed form, if any.
inline std::optional<ExtendedCoord> pareto_dominator(const Profile& profile,
                                                     const ExtendedCoord& y) {
  const detail::ParetoBand band = detail::pareto_band(profile);
  if (y < ExtendedCoord(band.right_bound))
    return ExtendedCoord(band.right_bound);
  if (y > ExtendedCoord(band.left_bound)) return ExtendedCoord(band.left_bound);
  return std::nullopt;
}

/// Independent route: scan the agents' median endpoints (plus y itself) for a
/// dominating location and return the least one. Agrees with pareto_dominator
/// on whether y is dominated; checkers use the closed form, tests cross-check
/// the two.
inline std::optional<ExtendedCoord> pareto_dominator_scan(
    const Profile& profile, const ExtendedCoord& y) {
  std::vector<ExtendedCoord> candidates;
  for (const Report& r : profile.reports()) {
    const MedianInterval m = r.median();
    candidates.emplace_back(m.lo);
    candidates.emplace_back(m.hi);
  }
  candidates.push_back(y);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  for (const ExtendedCoord& c : candidates)
    if (dominates(profile, c, y)) return c;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Configuration validation
// ---------------------------------------------------------------------------

/// Validates a (mechanism, search) pair. The soundness guard: every finite
/// phantom, threshold and constant of the mechanism must be a grid
/// coordinate, otherwise grid search could miss the behavior change at that
/// breakpoint.
inline void validate_config(const MechanismSpec& spec, const SearchConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("search requires n >= 1");
  if (cfg.max_true_size < 1) throw ConfigError("max_true_size must be >= 1");
  if (!cfg.action_set.any()) throw ConfigError("ActionSet: no actions enabled");
  if (cfg.action_set.max_report_size < cfg.max_true_size)
    throw ConfigError("max_report_size must be >= max_true_size");
  if (cfg.max_coalition < 1) throw ConfigError("max_coalition must be >= 1");
  if (cfg.equal_cardinality && cfg.odd_true_sizes_only &&
      cfg.max_true_size % 2 == 0)
    throw ConfigError(
        "equal cardinality at an even size conflicts with the odd-size "
        "restriction");
  for (const Rational& b : spec.finite_breakpoints())
    if (!cfg.grid.contains(b))
      throw ConfigError("breakpoint not on grid: " + b.to_string());
  if (spec.kind == MechanismKind::PooledPhantomMedian) {
    if (spec.phantoms.empty())
      throw ConfigError("pooled_phantom_median: needs N+1 phantoms");
    const std::size_t N = spec.phantoms.size() - 1;
    if (N < cfg.n || N > cfg.n * cfg.max_true_size)
      throw ConfigError(
          "pooled_phantom_median: phantom count admits no profile in this "
          "search space");
  }
}

// ---------------------------------------------------------------------------
// Search engine
// ---------------------------------------------------------------------------

namespace detail {

struct PreparedReport {
  Report report;
  AgentSummary summary;
  MedianInterval median;

  PreparedReport(const MechanismSpec& spec, Report r)
      : report(std::move(r)), median(report.median()) {
    summary = AgentSummary::of(spec, report);
    summary.report = &report;
  }
  PreparedReport(const PreparedReport&) = delete;
  PreparedReport& operator=(const PreparedReport&) = delete;
};

struct DevClass {
  std::size_t first_index;  // position in the lex deviation stream
  Report report;            // lex-least report of the class
  AgentSummary summary;
};

/// Groups a lex-ordered deviation stream into output-equivalence classes.
/// The first improving deviation overall is the first report of the first
/// improving class, so checking one representative per class preserves both
/// verdicts and witness identity. Mechanisms that read the full multiset get
/// one class per report.
inline std::vector<DevClass> build_classes(
    const MechanismSpec& spec, const std::vector<Report>& stream,
    std::optional<std::size_t> only_size) {
  std::vector<DevClass> out;
  out.reserve(stream.size());
  std::vector<DeviationKey> keys;
  keys.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Report& r = stream[i];
    if (only_size && r.size() != *only_size) continue;
    AgentSummary s = AgentSummary::of(spec, r);
    if (auto key = deviation_key(spec, s)) {
      if (std::find(keys.begin(), keys.end(), *key) != keys.end()) continue;
      keys.push_back(*key);
    }
    out.push_back(DevClass{i, r, s});
    out.back().summary.report = &out.back().report;
  }
  return out;
}

/// Reusable per-thread buffers for the checking loops.
struct CheckScratch {
  EvalScratch eval;
  std::vector<AgentSummary> agents;
  std::vector<const PreparedReport*> truth;
  std::vector<ExtRational> losses_before;
  std::vector<std::size_t> idx;
};

inline Profile profile_of(std::span<const PreparedReport* const> truth) {
  std::vector<Report> reports;
  reports.reserve(truth.size());
  for (const auto* t : truth) reports.push_back(t->report);
  return Profile(std::move(reports));
}

/// Single-agent deviation scan; agents in index order, deviations in stream
/// order. Returns the first strict improvement.
template <typename ClassesOf>
std::optional<ViolationWitness> sp_violation(
    const MechanismSpec& spec, std::span<const PreparedReport* const> truth,
    ClassesOf&& classes_of, CheckScratch& scratch) {
  const std::size_t n = truth.size();
  auto& agents = scratch.agents;
  agents.clear();
  for (const auto* t : truth) agents.push_back(t->summary);

  const ExtendedCoord out_before = evaluate(spec, agents, scratch.eval);
  auto& losses_before = scratch.losses_before;
  losses_before.clear();
  for (const auto* t : truth)
    losses_before.push_back(loss(out_before, t->report));

  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<DevClass>& classes = classes_of(i);
    for (const DevClass& cls : classes) {
      agents[i] = cls.summary;
      const ExtendedCoord out_after = evaluate(spec, agents, scratch.eval);
      const ExtRational loss_after = loss(out_after, truth[i]->report);
      if (loss_after < losses_before[i]) {
        ViolationWitness w;
        w.property = Property::Strategyproof;
        w.true_profile = profile_of(truth);
        w.deviators = {i};
        w.deviated_reports = {cls.report};
        w.losses_before = {losses_before[i]};
        w.losses_after = {loss_after};
        w.output_before = out_before;
        w.output_after = out_after;
        return w;
      }
    }
    agents[i] = truth[i]->summary;
  }
  return std::nullopt;
}

/// Coalition deviation scan: coalitions by increasing size then lexicographic
/// member sets; joint deviations in lexicographic tuple order (first member
/// most significant). `strong` selects the weak-improvement condition.
template <typename ClassesOf>
std::optional<ViolationWitness> coalition_violation(
    const MechanismSpec& spec, std::span<const PreparedReport* const> truth,
    ClassesOf&& classes_of, std::size_t max_coalition, bool strong,
    CheckScratch& scratch) {
  const std::size_t n = truth.size();
  auto& agents = scratch.agents;
  agents.clear();
  for (const auto* t : truth) agents.push_back(t->summary);

  const ExtendedCoord out_before = evaluate(spec, agents, scratch.eval);
  auto& losses_before = scratch.losses_before;
  losses_before.clear();
  for (const auto* t : truth)
    losses_before.push_back(loss(out_before, t->report));

  std::vector<std::size_t> members;
  std::vector<const std::vector<DevClass>*> member_classes;
  std::vector<std::size_t> choice;
  std::vector<ExtRational> losses_after;

  const std::size_t max_size = std::min(max_coalition, n);
  for (std::size_t s = 1; s <= max_size; ++s) {
    // first combination {0, 1, ..., s-1}
    members.resize(s);
    for (std::size_t k = 0; k < s; ++k) members[k] = k;
    while (true) {
      member_classes.clear();
      for (std::size_t m : members) member_classes.push_back(&classes_of(m));
      bool any_empty = false;
      for (const auto* c : member_classes) any_empty |= c->empty();
      if (!any_empty) {
        choice.assign(s, 0);
        while (true) {
          for (std::size_t k = 0; k < s; ++k)
            agents[members[k]] = (*member_classes[k])[choice[k]].summary;
          const ExtendedCoord out_after = evaluate(spec, agents, scratch.eval);
          losses_after.clear();
          bool all_strict = true, none_worse = true, some_strict = false;
          for (std::size_t k = 0; k < s; ++k) {
            const ExtRational la = loss(out_after, truth[members[k]]->report);
            losses_after.push_back(la);
            const ExtRational& lb = losses_before[members[k]];
            if (!(la < lb)) all_strict = false;
            if (lb < la) none_worse = false;
            if (la < lb) some_strict = true;
          }
          const bool hit = strong ? (none_worse && some_strict) : all_strict;
          if (hit) {
            ViolationWitness w;
            w.property = strong ? Property::StrongGroupStrategyproof
                                : Property::GroupStrategyproof;
            w.true_profile = profile_of(truth);
            w.deviators = members;
            for (std::size_t k = 0; k < s; ++k) {
              w.deviated_reports.push_back(
                  (*member_classes[k])[choice[k]].report);
              w.losses_before.push_back(losses_before[members[k]]);
            }
            w.losses_after = losses_after;
            w.output_before = out_before;
            w.output_after = out_after;
            return w;
          }
          // next joint deviation (last member varies fastest)
          std::size_t k = s;
          while (k-- > 0) {
            if (++choice[k] < member_classes[k]->size()) break;
            choice[k] = 0;
            if (k == 0) goto combos_done;
          }
        }
      }
    combos_done:
      for (std::size_t m : members) agents[m] = truth[m]->summary;
      // next combination of {0..n-1} of size s
      std::size_t k = s;
      bool advanced = false;
      while (k-- > 0) {
        if (members[k] + (s - k) < n) {
          ++members[k];
          for (std::size_t j = k + 1; j < s; ++j) members[j] = members[j - 1] + 1;
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
  }
  return std::nullopt;
}

class Engine {
public:
  Engine(const MechanismSpec& spec, const SearchConfig& cfg)
      : spec_(spec), cfg_(cfg) {
    validate_config(spec, cfg);
    if (cfg_.threads == 0)
      cfg_.threads = std::max(1u, std::thread::hardware_concurrency());
    if (spec.kind == MechanismKind::PooledPhantomMedian)
      fixed_total_ = spec.phantoms.size() - 1;

    for (const Report& r : all_reports(cfg.grid, cfg.max_true_size)) {
      if (cfg.equal_cardinality && r.size() != cfg.max_true_size) continue;
      if (cfg.odd_true_sizes_only && r.size() % 2 == 0) continue;
      pool_.emplace_back(spec, r);
    }
    if (pool_.empty() || space_size() == 0)
      throw ConfigError("search space is empty");
  }

  const MechanismSpec& spec() const { return spec_; }
  const SearchConfig& cfg() const { return cfg_; }
  const std::deque<PreparedReport>& pool() const { return pool_; }

  std::uint64_t flat_count() const {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < cfg_.n; ++i) total *= pool_.size();
    return total;
  }

  /// Number of valid true profiles; this is the reported space size.
  std::uint64_t space_size() const {
    if (!fixed_total_) return flat_count();
    std::vector<std::uint64_t> ways(*fixed_total_ + 1, 0);
    ways[0] = 1;
    for (std::size_t a = 0; a < cfg_.n; ++a) {
      std::vector<std::uint64_t> next(*fixed_total_ + 1, 0);
      for (std::size_t s = 0; s <= *fixed_total_; ++s) {
        if (ways[s] == 0) continue;
        for (const auto& pr : pool_) {
          const std::size_t sz = pr.report.size();
          if (s + sz <= *fixed_total_) next[s + sz] += ways[s];
        }
      }
      ways = std::move(next);
    }
    return ways[*fixed_total_];
  }

  bool decode(std::uint64_t flat, std::vector<std::size_t>& idx) const {
    idx.resize(cfg_.n);
    for (std::size_t a = cfg_.n; a-- > 0;) {
      idx[a] = static_cast<std::size_t>(flat % pool_.size());
      flat /= pool_.size();
    }
    if (!fixed_total_) return true;
    std::size_t total = 0;
    for (std::size_t a = 0; a < cfg_.n; ++a)
      total += pool_[idx[a]].report.size();
    return total == *fixed_total_;
  }

  /// Precomputes every deviation-class list; the parallel phase then reads
  /// them without locking.
  void warm_classes() {
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      const std::size_t key = class_key(i);
      if (classes_.count(key)) continue;
      auto stream =
          deviation_stream(pool_[i].report, cfg_.action_set, cfg_.grid);
      classes_.emplace(
          key, build_classes(spec_, stream, pooled_size_filter(pool_[i].report)));
    }
  }

  const std::vector<DevClass>& classes_ready(std::size_t pool_idx) const {
    return classes_.at(class_key(pool_idx));
  }

  std::optional<std::size_t> pooled_size_filter(const Report& truth) const {
    // A pooled mechanism with a fixed phantom list is only defined for one
    // total point count; deviations that change the report size would leave
    // its domain and are not available actions against it.
    if (fixed_total_) return truth.size();
    return std::nullopt;
  }

  /// Runs `per_profile(flat, idx)` over every valid profile, in parallel, and
  /// returns the hit with the smallest flat index; identical for any thread
  /// count.
  template <typename PerProfile>
  std::optional<std::pair<std::uint64_t, ViolationWitness>> search(
      PerProfile per_profile) const {
    const std::uint64_t total = flat_count();
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> best{UINT64_MAX};
    std::mutex found_mutex;
    std::optional<std::pair<std::uint64_t, ViolationWitness>> found;

    const std::uint64_t chunk =
        std::max<std::uint64_t>(1, total / (cfg_.threads * 64) + 1);
    auto worker = [&]() {
      std::vector<std::size_t> idx;
      while (true) {
        const std::uint64_t begin = next.fetch_add(chunk);
        if (begin >= total) return;
        if (begin >= best.load(std::memory_order_relaxed)) return;
        const std::uint64_t end = std::min(total, begin + chunk);
        for (std::uint64_t flat = begin; flat < end; ++flat) {
          if (flat >= best.load(std::memory_order_relaxed)) break;
          if (!decode(flat, idx)) continue;
          if (auto w = per_profile(flat, idx)) {
            std::scoped_lock lock(found_mutex);
            if (!found || flat < found->first) {
              found = {flat, std::move(*w)};
              std::uint64_t cur = best.load();
              while (flat < cur && !best.compare_exchange_weak(cur, flat)) {
              }
            }
            break;
          }
        }
      }
    };

    if (cfg_.threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> workers;
      for (std::size_t t = 0; t < cfg_.threads; ++t) workers.emplace_back(worker);
      for (auto& t : workers) t.join();
    }
    return found;
  }

private:
  std::size_t class_key(std::size_t pool_idx) const {
    // Full-action and manipulation-only streams coincide for reports of equal
    // size; replication/hiding streams depend on the report itself.
    const bool shared =
        cfg_.action_set.full() ||
        (cfg_.action_set.manipulation && !cfg_.action_set.replication &&
         !cfg_.action_set.hiding);
    return shared ? pool_[pool_idx].report.size() : pool_.size() + pool_idx;
  }

  MechanismSpec spec_;
  SearchConfig cfg_;
  std::deque<PreparedReport> pool_;
  std::optional<std::size_t> fixed_total_;
  std::map<std::size_t, std::vector<DevClass>> classes_;
};

/// Search bounds adjusted to one concrete profile.
inline SearchConfig config_for_profile(const Profile& profile,
                                       SearchConfig cfg) {
  cfg.n = profile.n();
  for (const Report& r : profile.reports())
    cfg.max_true_size = std::max(cfg.max_true_size, r.size());
  if (cfg.action_set.max_report_size < cfg.max_true_size)
    throw ConfigError("max_report_size below a profile report size");
  return cfg;
}

/// Ad-hoc prepared profile + class lists for the single-profile checkers.
class PreparedProfile {
public:
  PreparedProfile(const MechanismSpec& spec, const Profile& profile,
                  const SearchConfig& cfg) {
    for (const Report& r : profile.reports()) {
      for (const Rational& p : r.points())
        if (!cfg.grid.contains(p))
          throw ConfigError("profile coordinate not on grid: " + p.to_string());
      prepared_.emplace_back(spec, r);
    }
    std::optional<std::size_t> fixed_total;
    if (spec.kind == MechanismKind::PooledPhantomMedian)
      fixed_total = spec.phantoms.size() - 1;
    for (const auto& pr : prepared_) {
      auto stream = deviation_stream(pr.report, cfg.action_set, cfg.grid);
      classes_.push_back(build_classes(
          spec, stream,
          fixed_total ? std::optional<std::size_t>(pr.report.size())
                      : std::nullopt));
      truth_.push_back(&pr);
    }
  }

  std::span<const PreparedReport* const> truth() const { return truth_; }
  const std::vector<DevClass>& classes(std::size_t agent) const {
    return classes_.at(agent);
  }

private:
  std::deque<PreparedReport> prepared_;
  std::vector<const PreparedReport*> truth_;
  std::vector<std::vector<DevClass>> classes_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

/// No single agent can strictly reduce her loss (measured against her true
/// locations) by any deviation in the action set. First witness in profile /
/// agent / deviation order, or pass.
inline Verdict check_strategyproof(const MechanismSpec& spec,
                                   const SearchConfig& cfg) {
  detail::Engine engine(spec, cfg);
  engine.warm_classes();
  auto found = engine.search([&engine, &spec](std::uint64_t,
                                              const std::vector<std::size_t>& idx)
                                 -> std::optional<ViolationWitness> {
    thread_local detail::CheckScratch scratch;
    scratch.truth.clear();
    for (std::size_t i : idx) scratch.truth.push_back(&engine.pool()[i]);
    return detail::sp_violation(
        spec, scratch.truth,
        [&](std::size_t agent) -> const std::vector<detail::DevClass>& {
          return engine.classes_ready(idx[agent]);
        },
        scratch);
  });
  Verdict v;
  v.space_size = engine.space_size();
  if (found) {
    v.pass = false;
    v.witness = std::move(found->second);
  }
  return v;
}

/// Strategyproofness on one fixed true profile.
inline Verdict check_strategyproof_on(const MechanismSpec& spec,
                                      const Profile& profile,
                                      const SearchConfig& raw_cfg) {
  const SearchConfig cfg = detail::config_for_profile(profile, raw_cfg);
  validate_config(spec, cfg);
  detail::PreparedProfile prep(spec, profile, cfg);
  detail::CheckScratch scratch;
  auto w = detail::sp_violation(
      spec, prep.truth(),
      [&](std::size_t agent) -> const std::vector<detail::DevClass>& {
        return prep.classes(agent);
      },
      scratch);
  Verdict v;
  v.space_size = 1;
  if (w) {
    v.pass = false;
    v.witness = std::move(w);
  }
  return v;
}

namespace detail {

inline Verdict check_coalitions(const MechanismSpec& spec,
                                const SearchConfig& cfg, bool strong) {
  Engine engine(spec, cfg);
  engine.warm_classes();
  auto found = engine.search(
      [&engine, &spec, &cfg, strong](
          std::uint64_t,
          const std::vector<std::size_t>& idx) -> std::optional<ViolationWitness> {
        thread_local CheckScratch scratch;
        scratch.truth.clear();
        for (std::size_t i : idx) scratch.truth.push_back(&engine.pool()[i]);
        return coalition_violation(
            spec, scratch.truth,
            [&](std::size_t agent) -> const std::vector<DevClass>& {
              return engine.classes_ready(idx[agent]);
            },
            cfg.max_coalition, strong, scratch);
      });
  Verdict v;
  v.space_size = engine.space_size();
  if (found) {
    v.pass = false;
    v.witness = std::move(found->second);
  }
  return v;
}

inline Verdict check_coalitions_on(const MechanismSpec& spec,
                                   const Profile& profile,
                                   const SearchConfig& raw_cfg, bool strong) {
  const SearchConfig cfg = config_for_profile(profile, raw_cfg);
  validate_config(spec, cfg);
  PreparedProfile prep(spec, profile, cfg);
  CheckScratch scratch;
  auto w = coalition_violation(
      spec, prep.truth(),
      [&](std::size_t agent) -> const std::vector<DevClass>& {
        return prep.classes(agent);
      },
      cfg.max_coalition, strong, scratch);
  Verdict v;
  v.space_size = 1;
  if (w) {
    v.pass = false;
    v.witness = std::move(w);
  }
  return v;
}

}  // namespace detail

/// No coalition of size <= max_coalition can deviate jointly so that every
/// member is strictly better off.
inline Verdict check_group_sp(const MechanismSpec& spec,
                              const SearchConfig& cfg) {
  return detail::check_coalitions(spec, cfg, /*strong=*/false);
}

inline Verdict check_group_sp_on(const MechanismSpec& spec,
                                 const Profile& profile,
                                 const SearchConfig& cfg) {
  return detail::check_coalitions_on(spec, profile, cfg, /*strong=*/false);
}

/// No coalition can deviate so that no member is worse off and some member is
/// strictly better off.
inline Verdict check_strong_group_sp(const MechanismSpec& spec,
                                     const SearchConfig& cfg) {
  return detail::check_coalitions(spec, cfg, /*strong=*/true);
}

inline Verdict check_strong_group_sp_on(const MechanismSpec& spec,
                                        const Profile& profile,
                                        const SearchConfig& cfg) {
  return detail::check_coalitions_on(spec, profile, cfg, /*strong=*/true);
}

/// The output on every truthful profile is Pareto optimal. A witness stores a
/// dominating location in output_after and per-agent losses against both.
inline Verdict check_efficient(const MechanismSpec& spec,
                               const SearchConfig& cfg) {
  detail::Engine engine(spec, cfg);
  auto found = engine.search(
      [&engine, &spec](std::uint64_t, const std::vector<std::size_t>& idx)
          -> std::optional<ViolationWitness> {
        thread_local detail::CheckScratch scratch;
        auto& agents = scratch.agents;
        agents.clear();
        std::vector<MedianInterval> medians;
        for (std::size_t i : idx) {
          agents.push_back(engine.pool()[i].summary);
          medians.push_back(engine.pool()[i].median);
        }
        const ExtendedCoord out = evaluate(spec, agents, scratch.eval);
        const detail::ParetoBand band = detail::pareto_band(medians);
        std::optional<ExtendedCoord> dominator;
        if (out < ExtendedCoord(band.right_bound))
          dominator = ExtendedCoord(band.right_bound);
        else if (out > ExtendedCoord(band.left_bound))
          dominator = ExtendedCoord(band.left_bound);
        if (!dominator) return std::nullopt;
        ViolationWitness w;
        w.property = Property::Efficient;
        std::vector<Report> reports;
        for (std::size_t i : idx) reports.push_back(engine.pool()[i].report);
        w.true_profile = Profile(std::move(reports));
        for (const Report& r : w.true_profile.reports()) {
          w.losses_before.push_back(loss(out, r));
          w.losses_after.push_back(loss(*dominator, r));
        }
        w.output_before = out;
        w.output_after = *dominator;
        return w;
      });
  Verdict v;
  v.space_size = engine.space_size();
  if (found) {
    v.pass = false;
    v.witness = std::move(found->second);
  }
  return v;
}

/// Permutation core behind check_anonymous, usable with any evaluator
/// (including rigged non-anonymous test doubles).
template <typename EvalFn>
std::optional<ViolationWitness> anonymity_violation(EvalFn&& eval_fn,
                                                    const Profile& profile) {
  const ExtendedCoord out = eval_fn(profile);
  std::vector<std::size_t> perm(profile.n());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  while (std::next_permutation(perm.begin(), perm.end())) {
    std::vector<Report> permuted;
    permuted.reserve(perm.size());
    for (std::size_t k : perm) permuted.push_back(profile.report(k));
    const Profile q(std::move(permuted));
    const ExtendedCoord out_perm = eval_fn(q);
    if (!(out_perm == out)) {
      ViolationWitness w;
      w.property = Property::Anonymous;
      w.true_profile = profile;
      w.deviated_reports = q.reports();
      w.output_before = out;
      w.output_after = out_perm;
      return w;
    }
  }
  return std::nullopt;
}

/// The output is invariant under permuting the agents' reports.
inline Verdict check_anonymous(const MechanismSpec& spec,
                               const SearchConfig& cfg) {
  detail::Engine engine(spec, cfg);
  auto found = engine.search(
      [&engine, &spec](std::uint64_t, const std::vector<std::size_t>& idx)
          -> std::optional<ViolationWitness> {
        thread_local detail::CheckScratch scratch;
        auto& agents = scratch.agents;
        agents.clear();
        for (std::size_t i : idx) agents.push_back(engine.pool()[i].summary);
        const ExtendedCoord out = evaluate(spec, agents, scratch.eval);

        std::vector<std::size_t> perm(idx.size());
        for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
        while (std::next_permutation(perm.begin(), perm.end())) {
          for (std::size_t k = 0; k < perm.size(); ++k)
            agents[k] = engine.pool()[idx[perm[k]]].summary;
          const ExtendedCoord out_perm = evaluate(spec, agents, scratch.eval);
          if (!(out_perm == out)) {
            ViolationWitness w;
            w.property = Property::Anonymous;
            std::vector<Report> reports, permuted;
            for (std::size_t i : idx) reports.push_back(engine.pool()[i].report);
            for (std::size_t k = 0; k < perm.size(); ++k)
              permuted.push_back(engine.pool()[idx[perm[k]]].report);
            w.true_profile = Profile(std::move(reports));
            w.deviated_reports = std::move(permuted);
            w.output_before = out;
            w.output_after = out_perm;
            return w;
          }
        }
        return std::nullopt;
      });
  Verdict v;
  v.space_size = engine.space_size();
  if (found) {
    v.pass = false;
    v.witness = std::move(found->second);
  }
  return v;
}

/// True iff the mechanism outputs one location across the whole enumerated
/// space.
inline ConstancyResult is_constant(const MechanismSpec& spec,
                                   const SearchConfig& cfg) {
  detail::Engine engine(spec, cfg);
  ConstancyResult result;
  result.space_size = engine.space_size();

  // Baseline: output on the first valid profile.
  std::vector<std::size_t> idx;
  std::uint64_t first_flat = 0;
  const std::uint64_t total = engine.flat_count();
  while (first_flat < total && !engine.decode(first_flat, idx)) ++first_flat;
  detail::CheckScratch scratch;
  scratch.agents.clear();
  for (std::size_t i : idx) scratch.agents.push_back(engine.pool()[i].summary);
  const ExtendedCoord baseline = evaluate(spec, scratch.agents, scratch.eval);
  const Profile baseline_profile = [&] {
    std::vector<Report> reports;
    for (std::size_t i : idx) reports.push_back(engine.pool()[i].report);
    return Profile(std::move(reports));
  }();

  auto found = engine.search(
      [&engine, &spec, &baseline](std::uint64_t,
                                  const std::vector<std::size_t>& idx)
          -> std::optional<ViolationWitness> {
        thread_local detail::CheckScratch scratch;
        scratch.agents.clear();
        for (std::size_t i : idx)
          scratch.agents.push_back(engine.pool()[i].summary);
        const ExtendedCoord out = evaluate(spec, scratch.agents, scratch.eval);
        if (out == baseline) return std::nullopt;
        ViolationWitness w;
        w.property = Property::Constant;
        std::vector<Report> reports;
        for (std::size_t i : idx) reports.push_back(engine.pool()[i].report);
        w.true_profile = Profile(std::move(reports));
        w.output_before = baseline;
        w.output_after = out;
        return w;
      });
  if (found) {
    result.constant = false;
    result.counterexample = {baseline_profile, found->second.true_profile};
  }
  return result;
}

/// Verdict wrapper around is_constant for campaign reports.
inline Verdict check_constant(const MechanismSpec& spec,
                              const SearchConfig& cfg) {
  const ConstancyResult c = is_constant(spec, cfg);
  Verdict v;
  v.space_size = c.space_size;
  v.pass = c.constant;
  if (!c.constant) {
    ViolationWitness w;
    w.property = Property::Constant;
    w.true_profile = c.counterexample->second;
    w.output_before = evaluate(spec, c.counterexample->first);
    w.output_after = evaluate(spec, c.counterexample->second);
    v.witness = std::move(w);
  }
  return v;
}

/// Re-evaluates a witness from scratch and checks that every recorded output
/// and loss reproduces exactly.
inline bool witness_replays(const MechanismSpec& spec,
                            const ViolationWitness& w) {
  const ExtendedCoord out_before = evaluate(spec, w.true_profile);
  if (!(out_before == w.output_before)) return false;

  switch (w.property) {
    case Property::Strategyproof:
    case Property::GroupStrategyproof:
    case Property::StrongGroupStrategyproof: {
      const ExtendedCoord out_after = evaluate(spec, w.deviated_profile());
      if (!(out_after == w.output_after)) return false;
      for (std::size_t k = 0; k < w.deviators.size(); ++k) {
        const Report& truth = w.true_profile.report(w.deviators[k]);
        if (!(loss(out_before, truth) == w.losses_before.at(k))) return false;
        if (!(loss(out_after, truth) == w.losses_after.at(k))) return false;
      }
      return true;
    }
    case Property::Efficient: {
      if (!dominates(w.true_profile, w.output_after, w.output_before))
        return false;
      for (std::size_t i = 0; i < w.true_profile.n(); ++i) {
        const Report& r = w.true_profile.report(i);
        if (!(loss(w.output_before, r) == w.losses_before.at(i))) return false;
        if (!(loss(w.output_after, r) == w.losses_after.at(i))) return false;
      }
      return true;
    }
    case Property::Anonymous: {
      const ExtendedCoord out_after = evaluate(spec, w.deviated_profile());
      return out_after == w.output_after && !(out_after == out_before);
    }
    case Property::Constant:
      return !(w.output_before == w.output_after) &&
             evaluate(spec, w.true_profile) == w.output_after;
  }
  return false;
}

/// Outputs reachable by one agent when her median interval is pinned to
/// `target`, the other agents' reports are fixed, and her report ranges over
/// all grid multisets of size <= max_size realizing that median. Sorted and
/// deduplicated. Throws if no report realizes the target.
inline std::vector<ExtendedCoord> fixed_median_output_set(
    const MechanismSpec& spec, std::size_t agent, const MedianInterval& target,
    const std::vector<Report>& others, const Grid& grid,
    std::size_t max_size) {
  if (!grid.contains(target.lo) || !grid.contains(target.hi))
    throw std::domain_error(
        "fixed_median_output_set: target median endpoints must be on the grid");
  if (agent > others.size())
    throw std::domain_error("fixed_median_output_set: bad agent index");

  std::vector<ExtendedCoord> outputs;
  bool realized = false;
  for (const Report& candidate : all_reports(grid, max_size)) {
    if (!(candidate.median() == target)) continue;
    std::vector<Report> reports = others;
    reports.insert(reports.begin() + static_cast<std::ptrdiff_t>(agent),
                   candidate);
    Profile profile(std::move(reports));
    if (!spec.accepts(profile.n(), profile.total_points())) continue;
    realized = true;
    outputs.push_back(evaluate(spec, profile));
  }
  if (!realized)
    throw std::domain_error(
        "fixed_median_output_set: no report realizes the target median within "
        "the size bound");
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  return outputs;
}

}  // namespace faciloc
