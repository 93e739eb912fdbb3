#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "faciloc/verify.hpp"

namespace faciloc {

/// One checked fact inside a scenario: pass iff expected == observed exactly.
struct ClaimResult {
  std::string description;
  std::string expected;
  std::string observed;
  bool pass = false;
};

struct ScenarioReport {
  std::string name;
  std::vector<ClaimResult> claims;
  std::vector<ViolationWitness> witnesses;

  bool all_pass() const {
    for (const auto& c : claims)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline void claim(ScenarioReport& report, std::string description,
                  std::string expected, std::string observed) {
  ClaimResult c;
  c.description = std::move(description);
  c.expected = std::move(expected);
  c.observed = std::move(observed);
  c.pass = c.expected == c.observed;
  report.claims.push_back(std::move(c));
}

inline std::string verdict_str(const Verdict& v) {
  return v.pass ? "pass" : "witness";
}

inline Report make_report(std::initializer_list<int> pts) {
  std::vector<Rational> v;
  for (int p : pts) v.emplace_back(p);
  return Report(std::move(v));
}

inline ExtendedCoord fin(int v) { return ExtendedCoord(Rational(v)); }

inline std::string fmt(const ExtRational& x) { return x.to_string(); }

// The frozen mechanism catalog used by the action-set comparison scenario.
// beta = 1/2 throughout: at the extreme betas the relabeled and pooled
// medians coincide with a phantom-median rule on fixed-size manipulation
// domains while still failing under replication, so only interior betas give
// an instance-independent comparison.
inline std::vector<std::pair<std::string, MechanismSpec>> action_catalog(
    std::size_t points_per_agent) {
  const Rational half(1, 2);
  std::vector<ExtendedCoord> pooled_phantoms(2 * points_per_agent + 1, fin(2));
  pooled_phantoms[0] = fin(0);
  return {
      {"representative_median", MechanismSpec::representative_median({fin(2)}, half)},
      {"pooled_phantom_median",
       MechanismSpec::pooled_phantom_median(pooled_phantoms)},
      {"two_threshold",
       MechanismSpec::two_threshold(Rational(1), Rational(3),
                                    {ExtendedCoord::neg_inf(),
                                     ExtendedCoord::neg_inf(),
                                     ExtendedCoord::pos_inf()},
                                    half)},
      {"constant", MechanismSpec::constant_mechanism(fin(2))},
      {"weighted_relabeled_median", MechanismSpec::weighted_relabeled_median(half)},
      {"pooled_optimal", MechanismSpec::pooled_optimal(half)},
  };
}

// --- scenario bodies --------------------------------------------------------

inline ScenarioReport thm1_nonidentifying(std::size_t threads) {
  ScenarioReport report;
  report.name = "thm1_nonidentifying";
  const auto spec = MechanismSpec::pooled_phantom_median(
      {fin(0), fin(2), fin(2), fin(2), fin(2), fin(2)});
  const Profile truth{make_report({0}), make_report({1, 1, 1, 2})};

  const ExtendedCoord out = evaluate(spec, truth);
  claim(report, "truthful output", "2", out.to_string());
  claim(report, "agent 1 truthful loss", "3",
        fmt(loss(out, truth.report(1))));

  const Profile deviated = truth.with_report(1, make_report({1, 1, 1, 1}));
  const ExtendedCoord out_dev = evaluate(spec, deviated);
  claim(report, "output after agent 1 reports {1,1,1,1}", "1",
        out_dev.to_string());
  claim(report, "agent 1 loss after that deviation", "1",
        fmt(loss(out_dev, truth.report(1))));

  SearchConfig cfg;
  cfg.grid = Grid::integer_range(0, 2);
  cfg.action_set = ActionSet::manipulation_only(4);
  cfg.threads = threads;
  const Verdict v = check_strategyproof_on(spec, truth, cfg);
  claim(report, "manipulation search on the profile", "witness", verdict_str(v));
  if (v.witness) {
    claim(report, "witness losses", "3 -> 1",
          fmt(v.witness->losses_before.at(0)) + " -> " +
              fmt(v.witness->losses_after.at(0)));
    report.witnesses.push_back(*v.witness);
  }
  return report;
}

inline ScenarioReport example1_sp_but_inefficient(std::size_t threads) {
  ScenarioReport report;
  report.name = "example1_sp_but_inefficient";
  const auto spec = MechanismSpec::two_threshold(
      Rational(0), Rational(10),
      {ExtendedCoord::neg_inf(), ExtendedCoord::neg_inf(),
       ExtendedCoord::pos_inf()},
      Rational(1, 2));
  SearchConfig cfg;
  cfg.n = 2;
  cfg.grid = Grid(std::vector<Rational>{Rational(0), Rational(5), Rational(10)});
  cfg.max_true_size = 3;
  cfg.odd_true_sizes_only = true;  // unique optima, the example's domain
  cfg.action_set = ActionSet::all(4);
  cfg.threads = threads;

  claim(report, "strategyproof on the configured space", "pass",
        verdict_str(check_strategyproof(spec, cfg)));

  const Verdict eff = check_efficient(spec, cfg);
  claim(report, "efficiency check", "witness", verdict_str(eff));
  if (eff.witness) {
    const ViolationWitness& w = *eff.witness;
    std::ostringstream medians;
    for (const Report& r : w.true_profile.reports()) {
      const MedianInterval m = r.median();
      medians << "[" << m.lo << "," << m.hi << "]";
    }
    claim(report, "witness agent medians", "[5,5][5,5]", medians.str());
    claim(report, "witness output is the lower threshold", "0",
          w.output_before.to_string());
    claim(report, "dominating location", "5", w.output_after.to_string());
    report.witnesses.push_back(w);
  }
  return report;
}

inline ScenarioReport example2_strong_gsp_fail(std::size_t threads) {
  ScenarioReport report;
  report.name = "example2_strong_gsp_fail";
  const auto spec =
      MechanismSpec::representative_median({fin(0), fin(10)}, Rational(1));
  const Profile truth{make_report({2, 4}), make_report({2}), make_report({4})};
  SearchConfig cfg;
  cfg.grid = Grid(std::vector<Rational>{Rational(0), Rational(2), Rational(4),
                                        Rational(10)});
  cfg.action_set = ActionSet::manipulation_only(2);
  cfg.max_coalition = 3;
  cfg.threads = threads;

  claim(report, "group deviation search on the profile", "pass",
        verdict_str(check_group_sp_on(spec, truth, cfg)));

  const Verdict strong = check_strong_group_sp_on(spec, truth, cfg);
  claim(report, "weak-improvement coalition search", "witness",
        verdict_str(strong));
  if (strong.witness) {
    const ViolationWitness& w = *strong.witness;
    std::ostringstream devs;
    for (std::size_t d : w.deviators) devs << d << ",";
    claim(report, "coalition", "0,2,", devs.str());
    std::ostringstream lie;
    lie << w.deviated_reports.at(0);
    claim(report, "agent 0 misreport", "{4,4}", lie.str());
    claim(report, "output moves", "2 -> 4",
          w.output_before.to_string() + " -> " + w.output_after.to_string());
    claim(report, "agent 0 loss unchanged", "2 -> 2",
          fmt(w.losses_before.at(0)) + " -> " + fmt(w.losses_after.at(0)));
    report.witnesses.push_back(w);
  }
  return report;
}

inline ScenarioReport thm3_full_suite(std::size_t threads) {
  ScenarioReport report;
  report.name = "thm3_full_suite";
  const auto spec =
      MechanismSpec::representative_median({fin(2)}, Rational(1, 2));
  SearchConfig cfg;
  cfg.n = 2;
  cfg.grid = Grid::integer_range(0, 4);
  cfg.max_true_size = 3;
  cfg.action_set = ActionSet::all(4);
  cfg.max_coalition = 2;
  cfg.threads = threads;

  claim(report, "strategyproof", "pass",
        verdict_str(check_strategyproof(spec, cfg)));
  claim(report, "group strategyproof", "pass",
        verdict_str(check_group_sp(spec, cfg)));
  claim(report, "anonymous", "pass", verdict_str(check_anonymous(spec, cfg)));

  SearchConfig odd = cfg;
  odd.odd_true_sizes_only = true;  // efficiency needs unique optima
  claim(report, "efficient on unique-optima profiles", "pass",
        verdict_str(check_efficient(spec, odd)));
  return report;
}

inline ScenarioReport thm5_manipulation_only(std::size_t threads) {
  ScenarioReport report;
  report.name = "thm5_manipulation_only";
  for (const std::size_t m : {2, 3}) {
    for (const auto& [name, spec] : action_catalog(m)) {
      SearchConfig cfg;
      cfg.n = 2;
      cfg.grid = Grid::integer_range(0, 4);
      cfg.max_true_size = m;
      cfg.equal_cardinality = true;
      cfg.threads = threads;
      cfg.action_set = ActionSet::manipulation_only(4);
      const Verdict manipulation = check_strategyproof(spec, cfg);
      cfg.action_set = ActionSet::all(4);
      const Verdict full = check_strategyproof(spec, cfg);
      const std::string observed =
          manipulation.pass == full.pass
              ? "agree"
              : std::string("manipulation=") + verdict_str(manipulation) +
                    " full=" + verdict_str(full);
      claim(report,
            name + " verdicts agree at report size " + std::to_string(m),
            "agree", observed);
      if (!full.pass && full.witness) report.witnesses.push_back(*full.witness);
    }
  }
  return report;
}

inline ScenarioReport thm7_unique_optima(std::size_t threads) {
  ScenarioReport report;
  report.name = "thm7_unique_optima";
  const auto spec =
      MechanismSpec::representative_median({fin(0), fin(10)}, Rational(1));
  SearchConfig cfg;
  cfg.n = 3;
  cfg.grid = Grid(std::vector<Rational>{Rational(0), Rational(2), Rational(4),
                                        Rational(10)});
  cfg.max_true_size = 3;
  cfg.odd_true_sizes_only = true;
  cfg.action_set = ActionSet::all(4);
  cfg.max_coalition = 3;
  cfg.threads = threads;
  const Verdict strong = check_strong_group_sp(spec, cfg);
  claim(report, "strong group strategyproof on odd-size profiles", "pass",
        verdict_str(strong));
  return report;
}

inline ScenarioReport relabeled_median_replication_attack(std::size_t threads) {
  ScenarioReport report;
  report.name = "relabeled_median_replication_attack";
  const auto spec = MechanismSpec::weighted_relabeled_median(Rational(1, 2));
  SearchConfig cfg;
  cfg.n = 2;
  cfg.grid = Grid::integer_range(0, 4);
  cfg.max_true_size = 3;
  cfg.action_set = ActionSet::replication_only(6);
  cfg.threads = threads;
  const Verdict v = check_strategyproof(spec, cfg);
  claim(report, "replication search", "witness", verdict_str(v));
  if (v.witness) {
    claim(report, "witness replays exactly", "true",
          witness_replays(spec, *v.witness) ? "true" : "false");
    const Report& truth =
        v.witness->true_profile.report(v.witness->deviators.at(0));
    const Report& lie = v.witness->deviated_reports.at(0);
    claim(report, "deviation strictly adds copies", "true",
          lie.size() > truth.size() ? "true" : "false");
    report.witnesses.push_back(*v.witness);
  }
  return report;
}

}  // namespace detail

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "thm1_nonidentifying",
      "example1_sp_but_inefficient",
      "example2_strong_gsp_fail",
      "thm3_full_suite",
      "thm5_manipulation_only",
      "thm7_unique_optima",
      "relabeled_median_replication_attack",
  };
  return names;
}

/// Runs one canned scenario; every configuration inside is a frozen constant
/// so reports are bit-reproducible. Throws ConfigError for unknown names.
inline ScenarioReport run_scenario(const std::string& name,
                                   std::size_t threads = 0) {
  using Runner = ScenarioReport (*)(std::size_t);
  static const std::map<std::string, Runner> registry = {
      {"thm1_nonidentifying", &detail::thm1_nonidentifying},
      {"example1_sp_but_inefficient", &detail::example1_sp_but_inefficient},
      {"example2_strong_gsp_fail", &detail::example2_strong_gsp_fail},
      {"thm3_full_suite", &detail::thm3_full_suite},
      {"thm5_manipulation_only", &detail::thm5_manipulation_only},
      {"thm7_unique_optima", &detail::thm7_unique_optima},
      {"relabeled_median_replication_attack",
       &detail::relabeled_median_replication_attack},
  };
  const auto it = registry.find(name);
  if (it == registry.end()) throw ConfigError("unknown scenario '" + name + "'");
  return it->second(threads);
}

}  // namespace faciloc
