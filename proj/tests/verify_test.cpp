#include "faciloc/verify.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace faciloc {
namespace {

Report rep(std::initializer_list<int> pts) {
  std::vector<Rational> v;
  for (int p : pts) v.emplace_back(p);
  return Report(std::move(v));
}

ExtendedCoord fin(int v) { return ExtendedCoord(Rational(v)); }
const ExtendedCoord kNegInf = ExtendedCoord::neg_inf();
const ExtendedCoord kPosInf = ExtendedCoord::pos_inf();

std::vector<ExtendedCoord> coords(std::initializer_list<ExtendedCoord> v) {
  return std::vector<ExtendedCoord>(v);
}

SearchConfig small_cfg(std::size_t n, Grid grid, std::size_t max_true,
                       ActionSet actions, std::size_t coalition = 1) {
  SearchConfig cfg;
  cfg.n = n;
  cfg.grid = std::move(grid);
  cfg.max_true_size = max_true;
  cfg.action_set = actions;
  cfg.max_coalition = coalition;
  cfg.threads = 1;
  return cfg;
}

// --- Pareto optimality -------------------------------------------------------

TEST(Pareto, Examples) {
  EXPECT_FALSE(pareto_optimal(Profile{rep({5}), rep({5})}, fin(0)));
  EXPECT_TRUE(pareto_optimal(Profile{rep({0}), rep({10})}, fin(4)));
  // {0,4} has plateau [0,4] and {2} is a point: 2 dominates 3 (agent 2
  // strictly better, agent 1 flat), so 3 is not Pareto optimal.
  const Profile p{rep({0, 4}), rep({2})};
  EXPECT_TRUE(dominates(p, fin(2), fin(3)));
  EXPECT_FALSE(pareto_optimal(p, fin(3)));
  EXPECT_TRUE(pareto_optimal(p, fin(2)));
}

TEST(Pareto, InfiniteLocationsAreDominated) {
  const Profile p{rep({0}), rep({10})};
  EXPECT_FALSE(pareto_optimal(p, kPosInf));
  EXPECT_FALSE(pareto_optimal(p, kNegInf));
  EXPECT_TRUE(dominates(p, fin(10), kPosInf));
}

TEST(Pareto, ClosedFormAgreesWithEndpointScanExhaustively) {
  // all profiles with n in {1,2,3}, reports of size <= 3 over {0..3},
  // candidates on the half-integer grid plus infinities
  const Grid grid = Grid::integer_range(0, 3);
  const auto reports = all_reports(grid, 3);
  std::vector<ExtendedCoord> candidates{kNegInf, kPosInf};
  for (int v = -2; v <= 8; ++v) candidates.push_back(ExtendedCoord(Rational(v, 2)));

  std::mt19937 rng(42);
  for (int trial = 0; trial < 4000; ++trial) {
    const std::size_t n = 1 + rng() % 3;
    std::vector<Report> rs;
    for (std::size_t i = 0; i < n; ++i) rs.push_back(reports[rng() % reports.size()]);
    const Profile p(std::move(rs));
    for (const ExtendedCoord& y : candidates) {
      const auto closed = pareto_dominator(p, y);
      const auto scanned = pareto_dominator_scan(p, y);
      ASSERT_EQ(closed.has_value(), scanned.has_value())
          << p << " y=" << y;
      ASSERT_EQ(pareto_optimal(p, y), !closed.has_value());
      if (closed) {
        EXPECT_TRUE(dominates(p, *closed, y)) << p << " y=" << y;
        EXPECT_TRUE(dominates(p, *scanned, y)) << p << " y=" << y;
      }
    }
  }
}

// --- check_strategyproof -----------------------------------------------------

TEST(CheckStrategyproof, RepresentativeMedianPasses) {
  const auto spec =
      MechanismSpec::representative_median(coords({fin(2)}), Rational(1));
  const auto cfg =
      small_cfg(2, Grid::integer_range(0, 4), 3, ActionSet::all(4));
  const Verdict v = check_strategyproof(spec, cfg);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.space_size, 55u * 55u);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(CheckStrategyproof, PooledPhantomInstanceHasWitness) {
  const auto spec = MechanismSpec::pooled_phantom_median(
      coords({fin(0), fin(2), fin(2), fin(2), fin(2), fin(2)}));
  const Profile truth{rep({0}), rep({1, 1, 1, 2})};
  auto cfg = small_cfg(2, Grid::integer_range(0, 2), 4,
                       ActionSet::manipulation_only(4));
  const Verdict v = check_strategyproof_on(spec, truth, cfg);
  ASSERT_FALSE(v.pass);
  ASSERT_TRUE(v.witness.has_value());
  const ViolationWitness& w = *v.witness;
  EXPECT_EQ(w.deviators, (std::vector<std::size_t>{1}));
  EXPECT_EQ(w.output_before, fin(2));
  EXPECT_EQ(w.output_after, fin(1));
  EXPECT_EQ(w.losses_before.at(0), ExtRational(Rational(3)));
  EXPECT_EQ(w.losses_after.at(0), ExtRational(Rational(1)));
  EXPECT_TRUE(witness_replays(spec, w));
}

TEST(CheckStrategyproof, ConstantAlwaysPasses) {
  const auto spec = MechanismSpec::constant_mechanism(fin(3));
  const auto cfg = small_cfg(2, Grid::integer_range(0, 4), 2, ActionSet::all(3));
  const Verdict v = check_strategyproof(spec, cfg);
  EXPECT_TRUE(v.pass);
}

TEST(CheckStrategyproof, RelabeledMedianFailsUnderReplication) {
  const auto spec = MechanismSpec::weighted_relabeled_median(Rational(1, 2));
  const auto cfg = small_cfg(2, Grid::integer_range(0, 4), 3,
                             ActionSet::replication_only(6));
  const Verdict v = check_strategyproof(spec, cfg);
  ASSERT_FALSE(v.pass);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_TRUE(witness_replays(spec, *v.witness));
  // replication only ever adds copies of existing values
  const Report& truth = v.witness->true_profile.report(v.witness->deviators[0]);
  const Report& lie = v.witness->deviated_reports[0];
  EXPECT_GT(lie.size(), truth.size());
  for (const Rational& p : lie.points())
    EXPECT_TRUE(std::find(truth.points().begin(), truth.points().end(), p) !=
                truth.points().end());
}

TEST(CheckStrategyproof, DeterministicAcrossThreadCounts) {
  const auto spec = MechanismSpec::pooled_optimal(Rational(1, 2));
  auto cfg = small_cfg(2, Grid::integer_range(0, 3), 2, ActionSet::all(3));
  cfg.threads = 1;
  const Verdict v1 = check_strategyproof(spec, cfg);
  cfg.threads = 4;
  const Verdict v4 = check_strategyproof(spec, cfg);
  ASSERT_EQ(v1.pass, v4.pass);
  ASSERT_FALSE(v1.pass);
  EXPECT_EQ(v1.witness->true_profile, v4.witness->true_profile);
  EXPECT_EQ(v1.witness->deviators, v4.witness->deviators);
  EXPECT_EQ(v1.witness->deviated_reports, v4.witness->deviated_reports);
  EXPECT_EQ(v1.witness->output_after, v4.witness->output_after);
}

TEST(CheckStrategyproof, ManipulationWitnessImpliesFullActionWitness) {
  // witness sets are monotone in the action set
  const Grid grid = Grid::integer_range(0, 3);
  const std::vector<MechanismSpec> specs = {
      MechanismSpec::pooled_optimal(Rational(1, 2)),
      MechanismSpec::weighted_relabeled_median(Rational(1, 2)),
      MechanismSpec::representative_median(coords({fin(2)}), Rational(1, 2)),
  };
  for (const auto& spec : specs) {
    const Verdict man = check_strategyproof(
        spec, small_cfg(2, grid, 2, ActionSet::manipulation_only(3)));
    const Verdict full =
        check_strategyproof(spec, small_cfg(2, grid, 2, ActionSet::all(3)));
    if (!man.pass) EXPECT_FALSE(full.pass) << kind_name(spec.kind);
  }
}

// --- group / strong group ----------------------------------------------------

TEST(CheckGroupSp, ConstantPasses) {
  const auto spec = MechanismSpec::constant_mechanism(fin(1));
  const auto cfg =
      small_cfg(2, Grid::integer_range(0, 2), 2, ActionSet::all(3), 2);
  EXPECT_TRUE(check_group_sp(spec, cfg).pass);
  EXPECT_TRUE(check_strong_group_sp(spec, cfg).pass);
}

TEST(CheckGroupSp, SingletonCoalitionInheritsSpViolation) {
  const auto spec = MechanismSpec::pooled_phantom_median(
      coords({fin(0), fin(2), fin(2), fin(2), fin(2), fin(2)}));
  auto cfg = small_cfg(2, Grid::integer_range(0, 2), 4,
                       ActionSet::manipulation_only(4), 1);
  const Verdict v = check_group_sp(spec, cfg);
  ASSERT_FALSE(v.pass);
  EXPECT_EQ(v.witness->deviators.size(), 1u);
  EXPECT_TRUE(witness_replays(spec, *v.witness));
}

TEST(StrongGroupSp, IntervalOptimaExample) {
  // agent 0 has plateau [2,4]; reporting {4,4} moves the output from 2 to 4,
  // helping agent 2 while leaving agent 0 exactly as well off
  const auto spec =
      MechanismSpec::representative_median(coords({fin(0), fin(10)}), Rational(1));
  const Profile truth{rep({2, 4}), rep({2}), rep({4})};
  Grid grid({Rational(0), Rational(2), Rational(4), Rational(10)});
  auto cfg = small_cfg(3, grid, 2, ActionSet::manipulation_only(2), 3);

  const Verdict plain = check_group_sp_on(spec, truth, cfg);
  EXPECT_TRUE(plain.pass);

  const Verdict strong = check_strong_group_sp_on(spec, truth, cfg);
  ASSERT_FALSE(strong.pass);
  const ViolationWitness& w = *strong.witness;
  EXPECT_EQ(w.deviators, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(w.deviated_reports.at(0), rep({4, 4}));
  EXPECT_EQ(w.deviated_reports.at(1), rep({4}));  // truthful member
  EXPECT_EQ(w.output_before, fin(2));
  EXPECT_EQ(w.output_after, fin(4));
  EXPECT_EQ(w.losses_before.at(0), ExtRational(Rational(2)));
  EXPECT_EQ(w.losses_after.at(0), ExtRational(Rational(2)));
  EXPECT_TRUE(witness_replays(spec, w));
}

// --- efficiency ---------------------------------------------------------------

TEST(CheckEfficient, RepresentativeMedianPassesOnUniqueOptima) {
  const auto spec =
      MechanismSpec::representative_median(coords({kNegInf}), Rational(1, 2));
  auto cfg = small_cfg(2, Grid::integer_range(0, 3), 3, ActionSet::all(3));
  cfg.odd_true_sizes_only = true;
  EXPECT_TRUE(check_efficient(spec, cfg).pass);
}

TEST(CheckEfficient, BetaSummaryLeaksEfficiencyOnIntervalOptima) {
  // With an interval median, the beta representative stands in for the whole
  // plateau, and the output can sit strictly left of a location that every
  // agent weakly prefers: ({0,4},{3}) yields min(2,3) = 2, but 3 is better
  // for agent 1 and indifferent for agent 0.
  const auto spec =
      MechanismSpec::representative_median(coords({kNegInf}), Rational(1, 2));
  const Profile p{rep({0, 4}), rep({3})};
  EXPECT_EQ(evaluate(spec, p), fin(2));
  EXPECT_TRUE(dominates(p, fin(3), fin(2)));

  Grid grid({Rational(0), Rational(3), Rational(4)});
  const auto cfg = small_cfg(2, grid, 2, ActionSet::all(3));
  EXPECT_FALSE(check_efficient(spec, cfg).pass);
}

TEST(CheckEfficient, ConstantIsInefficient) {
  const auto spec = MechanismSpec::constant_mechanism(fin(3));
  const auto cfg = small_cfg(2, Grid::integer_range(0, 3), 1, ActionSet::all(2));
  const Verdict v = check_efficient(spec, cfg);
  ASSERT_FALSE(v.pass);
  const ViolationWitness& w = *v.witness;
  EXPECT_EQ(w.true_profile, (Profile{rep({0}), rep({0})}));
  EXPECT_EQ(w.output_before, fin(3));
  EXPECT_EQ(w.output_after, fin(0));  // dominating location
  EXPECT_TRUE(dominates(w.true_profile, w.output_after, w.output_before));
  EXPECT_TRUE(witness_replays(spec, w));
}

TEST(CheckEfficient, TwoThresholdSeparation) {
  const auto spec = MechanismSpec::two_threshold(
      Rational(0), Rational(10), coords({kNegInf, kNegInf, kPosInf}),
      Rational(1, 2));
  Grid grid({Rational(0), Rational(5), Rational(10)});
  auto cfg = small_cfg(2, grid, 3, ActionSet::all(4));
  cfg.odd_true_sizes_only = true;
  const Verdict sp = check_strategyproof(spec, cfg);
  EXPECT_TRUE(sp.pass);
  const Verdict eff = check_efficient(spec, cfg);
  ASSERT_FALSE(eff.pass);
  EXPECT_TRUE(witness_replays(spec, *eff.witness));
  EXPECT_TRUE(
      dominates(eff.witness->true_profile, eff.witness->output_after,
                eff.witness->output_before));
}

// --- anonymity -----------------------------------------------------------------

TEST(CheckAnonymous, CatalogMechanismsPass) {
  const auto cfg = small_cfg(2, Grid::integer_range(0, 3), 2, ActionSet::all(3));
  EXPECT_TRUE(check_anonymous(
                  MechanismSpec::representative_median(coords({fin(1)}), Rational(1)),
                  cfg)
                  .pass);
  EXPECT_TRUE(
      check_anonymous(MechanismSpec::constant_mechanism(fin(2)), cfg).pass);
  EXPECT_TRUE(
      check_anonymous(MechanismSpec::pooled_optimal(Rational(1, 2)), cfg).pass);
}

TEST(CheckAnonymous, DictatorDoubleIsCaught) {
  // rigged evaluator: always returns agent 0's representative
  auto dictator = [](const Profile& p) {
    return ExtendedCoord(p.report(0).representative(Rational(1)));
  };
  const Profile p{rep({0}), rep({4})};
  auto w = anonymity_violation(dictator, p);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->output_before, fin(0));
  EXPECT_EQ(w->output_after, fin(4));
  EXPECT_EQ(w->property, Property::Anonymous);

  // and a genuinely anonymous evaluator is not flagged
  auto median_eval = [](const Profile& p2) {
    return pooled_optimal(p2, Rational(1, 2));
  };
  EXPECT_FALSE(anonymity_violation(median_eval, p).has_value());
}

// --- constancy -----------------------------------------------------------------

TEST(IsConstant, ConstantInfinity) {
  const auto spec = MechanismSpec::constant_mechanism(kPosInf);
  const auto cfg = small_cfg(2, Grid::integer_range(0, 2), 2, ActionSet::all(3));
  const ConstancyResult r = is_constant(spec, cfg);
  EXPECT_TRUE(r.constant);
  EXPECT_EQ(r.space_size, 9u * 9u);
}

TEST(IsConstant, EqualPhantomsForceConstancy) {
  // N+1 copies of 2 outnumber the N reported points
  const auto spec = MechanismSpec::pooled_phantom_median(
      coords({fin(2), fin(2), fin(2), fin(2)}));
  const auto cfg = small_cfg(2, Grid::integer_range(0, 4), 2,
                             ActionSet::manipulation_only(2));
  const ConstancyResult r = is_constant(spec, cfg);
  EXPECT_TRUE(r.constant);
}

TEST(IsConstant, SpreadPhantomsAreNotConstant) {
  const auto spec =
      MechanismSpec::representative_median(coords({fin(1), fin(3)}), Rational(1));
  const auto cfg = small_cfg(3, Grid::integer_range(0, 4), 1,
                             ActionSet::manipulation_only(1));
  const ConstancyResult r = is_constant(spec, cfg);
  EXPECT_FALSE(r.constant);
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_NE(evaluate(spec, r.counterexample->first),
            evaluate(spec, r.counterexample->second));
}

// --- fixed-median output probe ---------------------------------------------------

TEST(FixedMedianOutputSet, RepresentativeMedianIsSingleton) {
  const auto spec =
      MechanismSpec::representative_median(coords({fin(2)}), Rational(1, 2));
  const Grid grid = Grid::integer_range(0, 4);
  for (int lo = 0; lo <= 4; ++lo) {
    for (int hi = lo; hi <= 4; ++hi) {
      const MedianInterval target{Rational(lo), Rational(hi)};
      const auto outputs = fixed_median_output_set(
          spec, 0, target, {rep({1, 3})}, grid, 4);
      EXPECT_EQ(outputs.size(), 1u) << lo << "," << hi;
    }
  }
}

TEST(FixedMedianOutputSet, TwoThresholdStraddles) {
  const auto spec = MechanismSpec::two_threshold(
      Rational(0), Rational(10), coords({kNegInf, kNegInf, kPosInf}),
      Rational(1, 2));
  Grid grid({Rational(0), Rational(5), Rational(7), Rational(10)});
  const auto outputs = fixed_median_output_set(
      spec, 0, MedianInterval{Rational(5), Rational(5)}, {rep({7})}, grid, 4);
  EXPECT_EQ(outputs, (std::vector<ExtendedCoord>{fin(0), fin(10)}));
}

TEST(FixedMedianOutputSet, ConstantIsItsConstant) {
  const auto spec = MechanismSpec::constant_mechanism(fin(3));
  const auto outputs = fixed_median_output_set(
      spec, 1, MedianInterval{Rational(1), Rational(2)}, {rep({0})},
      Grid::integer_range(0, 3), 4);
  EXPECT_EQ(outputs, (std::vector<ExtendedCoord>{fin(3)}));
}

TEST(FixedMedianOutputSet, UnrealizableTargetThrows) {
  const auto spec = MechanismSpec::constant_mechanism(fin(0));
  EXPECT_THROW(fixed_median_output_set(spec, 0,
                                       MedianInterval{Rational(1), Rational(2)},
                                       {rep({0})}, Grid::integer_range(0, 3), 1),
               std::domain_error);
}

// --- config validation ------------------------------------------------------------

TEST(ValidateConfig, BreakpointOffGridIsRejected) {
  const auto spec =
      MechanismSpec::representative_median(coords({fin(7)}), Rational(1));
  const auto cfg = small_cfg(2, Grid::integer_range(0, 4), 2, ActionSet::all(3));
  try {
    validate_config(spec, cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("breakpoint not on grid"),
              std::string::npos);
  }
}

TEST(ValidateConfig, StructuralErrors) {
  const auto spec = MechanismSpec::constant_mechanism(fin(1));
  auto cfg = small_cfg(2, Grid::integer_range(0, 2), 3, ActionSet::all(2));
  EXPECT_THROW(validate_config(spec, cfg), ConfigError);  // report bound 2 < 3
  cfg = small_cfg(0, Grid::integer_range(0, 2), 1, ActionSet::all(2));
  EXPECT_THROW(validate_config(spec, cfg), ConfigError);
  cfg = small_cfg(2, Grid::integer_range(0, 2), 2, ActionSet::all(3));
  cfg.equal_cardinality = true;
  cfg.odd_true_sizes_only = true;
  EXPECT_THROW(validate_config(spec, cfg), ConfigError);
}

TEST(ValidateConfig, PooledPhantomCountMustAdmitProfiles) {
  const auto spec = MechanismSpec::pooled_phantom_median(
      coords({fin(0), fin(0), fin(0), fin(0), fin(0), fin(0), fin(0), fin(0)}));
  // N = 7 > n * max_true_size = 4
  const auto cfg = small_cfg(2, Grid::integer_range(0, 2), 2,
                             ActionSet::manipulation_only(2));
  EXPECT_THROW(validate_config(spec, cfg), ConfigError);
}

// --- witness space sizes -----------------------------------------------------------

TEST(SpaceSize, EqualCardinalityAndOddFilters) {
  const auto spec = MechanismSpec::constant_mechanism(fin(0));
  auto cfg = small_cfg(2, Grid::integer_range(0, 2), 2, ActionSet::all(3));
  EXPECT_EQ(check_strategyproof(spec, cfg).space_size, 9u * 9u);
  cfg.equal_cardinality = true;  // only size-2 reports: C(4,2) = 6 each
  EXPECT_EQ(check_strategyproof(spec, cfg).space_size, 36u);
  cfg.equal_cardinality = false;
  cfg.odd_true_sizes_only = true;  // singletons only at max size 2
  EXPECT_EQ(check_strategyproof(spec, cfg).space_size, 9u);
}

TEST(SpaceSize, PooledTotalsAreCoupled) {
  // N = 3 over two agents: sizes (1,2) and (2,1)
  const auto spec = MechanismSpec::pooled_phantom_median(
      coords({fin(0), fin(1), fin(2), fin(2)}));
  const auto cfg = small_cfg(2, Grid::integer_range(0, 2), 2,
                             ActionSet::manipulation_only(2));
  const Verdict v = check_strategyproof(spec, cfg);
  EXPECT_EQ(v.space_size, 2u * 3u * 6u);  // 3 singletons, 6 pairs, two orders
}

}  // namespace
}  // namespace faciloc
