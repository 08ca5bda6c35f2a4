#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "ntl/classifier.hpp"
#include "ntl/data.hpp"
#include "ntl/error.hpp"
#include "ntl/fuzzy.hpp"
#include "ntl/random.hpp"
#include "ntl/rules.hpp"
#include "oracles.hpp"
#include "toys.hpp"

using ntl::MembershipFunction;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sample(const oracle::Polyline& p, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = p(static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

/// One variable "x" with a single set "a" = trap(0, 1, 1, 2); rules are added
/// by the caller.
ntl::FuzzySystem bare_system() {
  ntl::FuzzySystem s;
  s.variables.push_back({"x", {{"a", MembershipFunction::trapezoid(0, 1, 1, 2)}}});
  return s;
}

ntl::AttributeVector x_is(double x) {
  ntl::AttributeVector a;
  a.set("x", x);
  return a;
}

std::map<std::string, ntl::AttributeStats> stats_x(double iqr) {
  return {{"x", {0.0, 10.0, 11.0, 10.0 + iqr, 30.0}}};
}

ntl::AttributeCatalog x_catalog() {
  return ntl::AttributeCatalog({{"x", "mean", nlohmann::json::object()}});
}

}  // namespace

TEST(Membership, TrapezoidAndSigmoid) {
  const auto t = MembershipFunction::trapezoid(0, 1, 2, 3);
  EXPECT_EQ(ntl::membership_eval(t, 1.5), 1.0);
  EXPECT_EQ(ntl::membership_eval(t, 0.5), 0.5);
  EXPECT_EQ(ntl::membership_eval(t, 2.75), 0.25);
  EXPECT_EQ(ntl::membership_eval(t, -1.0), 0.0);
  EXPECT_EQ(ntl::membership_eval(t, 3.0), 0.0);
  EXPECT_EQ(ntl::membership_eval(MembershipFunction::sigmoid(0, 2), 0.0), 0.5);
  EXPECT_NEAR(ntl::membership_eval(MembershipFunction::sigmoid(0, 2), 1.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Membership, ShouldersAndCrisp) {
  const auto left = MembershipFunction::trapezoid(-kInf, -kInf, 4, 6);
  const auto right = MembershipFunction::trapezoid(4, 6, kInf, kInf);
  EXPECT_EQ(ntl::membership_eval(left, -1e300), 1.0);
  EXPECT_EQ(ntl::membership_eval(right, 1e300), 1.0);
  EXPECT_EQ(ntl::membership_eval(left, 5.0), 0.5);
  EXPECT_EQ(ntl::membership_eval(right, 5.0), 0.5);
  const auto crisp = MembershipFunction::trapezoid(1, 1, 2, 2);
  EXPECT_EQ(ntl::membership_eval(crisp, 1.0), 1.0);
  EXPECT_EQ(ntl::membership_eval(crisp, 0.999), 0.0);
  EXPECT_FALSE(MembershipFunction::trapezoid(2, 1, 3, 4).valid());
}

TEST(Membership, OutputsStayInUnitInterval) {
  ntl::Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    double p[4];
    for (double& v : p) v = rng.uniform(-5, 5);
    std::sort(p, p + 4);
    const double x = rng.uniform(-6, 6);
    const double m = ntl::membership_eval(MembershipFunction::trapezoid(p[0], p[1], p[2], p[3]), x);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
    const double s = ntl::membership_eval(MembershipFunction::sigmoid(p[0], rng.uniform(-10, 10)), x);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(ProjectTrapezoid, RestoresOrderingAndKeepsValidOnes) {
  auto mf = MembershipFunction::trapezoid(3, 1, 2, 4);
  ntl::project_trapezoid(mf);
  EXPECT_TRUE(mf.valid());
  EXPECT_EQ(mf.params, (std::array<double, 4>{2, 2, 2, 4}));
  auto ok = MembershipFunction::trapezoid(0, 1, 2, 3);
  ntl::project_trapezoid(ok);
  EXPECT_EQ(ok.params, (std::array<double, 4>{0, 1, 2, 3}));
  auto shoulder = MembershipFunction::trapezoid(5, 4, kInf, kInf);
  ntl::project_trapezoid(shoulder);
  EXPECT_EQ(shoulder.params, (std::array<double, 4>{4.5, 4.5, kInf, kInf}));
}

TEST(Fuzzify, SingleThresholdGivesCrossingPair) {
  const auto rs = ntl::parse_rules("rule r: x < 5", x_catalog());
  const auto sys = ntl::fuzzify_ruleset(rs, {{"x", {0.0, 4.0, 5.0, 6.0, 9.0}}});
  ASSERT_EQ(sys.variables.size(), 1u);
  const auto& sets = sys.variables[0].sets;
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(ntl::membership_eval(sets[0].mf, 5.0), 0.5);
  EXPECT_EQ(ntl::membership_eval(sets[1].mf, 5.0), 0.5);
  // Ramp width is half the IQR of 2.
  EXPECT_EQ(ntl::membership_eval(sets[0].mf, 4.5), 1.0);
  EXPECT_EQ(ntl::membership_eval(sets[1].mf, 5.5), 1.0);
  EXPECT_EQ(sys.rules.back().otherwise, true);
}

TEST(Fuzzify, TwoThresholdsGiveFourFunctions) {
  const auto rs = ntl::parse_rules("rule r1: x < 5\nrule r2: x > 9", x_catalog());
  const auto sys = ntl::fuzzify_ruleset(rs, stats_x(2.0));
  EXPECT_EQ(sys.variables[0].sets.size(), 4u);
  EXPECT_EQ(ntl::membership_census(sys), (std::map<std::size_t, std::size_t>{{4, 1}}));
}

TEST(Fuzzify, CensusOverShippedCatalog) {
  ntl::SynthConfig cfg;
  cfg.n_customers = 300;
  const auto pool = ntl::build_pool(ntl::generate_synthetic(cfg), 12, ntl::AttributeCatalog::shipped());
  const auto sys = ntl::fuzzify_ruleset(ntl::shipped_rules(), ntl::compute_attribute_stats(pool.attributes));
  // change_3m and mean_12m carry two thresholds; the rest one.
  EXPECT_EQ(ntl::membership_census(sys), (std::map<std::size_t, std::size_t>{{2, 4}, {4, 2}}));
}

TEST(Fuzzify, TooManyThresholdsIsConfigError) {
  const auto rs = ntl::parse_rules("rule r1: x < 5\nrule r2: x > 9\nrule r3: x < 12", x_catalog());
  EXPECT_THROW(ntl::fuzzify_ruleset(rs, stats_x(2.0)), ntl::ConfigError);
  EXPECT_THROW(ntl::fuzzify_ruleset(rs, {}), ntl::MissingAttributeError);
}

TEST(Fuzzify, EqualityAndNegation) {
  const auto rs = ntl::parse_rules("rule r: x != 3", x_catalog());
  const auto sys = ntl::fuzzify_ruleset(rs, stats_x(2.0));
  ASSERT_EQ(sys.variables[0].sets.size(), 1u);
  EXPECT_TRUE(sys.rules[0].antecedents[0].negated);
  EXPECT_EQ(ntl::classify_fuzzy(sys, x_is(3.0)).label, 0);
  EXPECT_EQ(ntl::classify_fuzzy(sys, x_is(7.0)).label, 1);
}

TEST(MamdaniInfer, NothingFiresGivesHalf) {
  auto s = bare_system();
  s.rules.push_back({"r", {{"x", "a", false}}, ntl::OutputLabel::Ntl, false});
  EXPECT_EQ(ntl::mamdani_infer(s, x_is(10.0)), 0.5);
}

TEST(MamdaniInfer, SymmetricConsequentCentroid) {
  auto s = bare_system();
  s.output.no_ntl = MembershipFunction::trapezoid(0, 0, 1, 1);  // never fires; keeps [0, 1] covered
  s.output.ntl = MembershipFunction::trapezoid(0.6, 0.8, 0.8, 1.0);
  s.rules.push_back({"r", {{"x", "a", false}}, ntl::OutputLabel::Ntl, false});
  EXPECT_NEAR(ntl::mamdani_infer(s, x_is(1.0)), 0.8, 1e-12);
}

TEST(MamdaniInfer, MirrorConsequentsBalance) {
  auto s = bare_system();
  s.rules.push_back({"lo", {{"x", "a", false}}, ntl::OutputLabel::NoNtl, false});
  s.rules.push_back({"hi", {{"x", "a", false}}, ntl::OutputLabel::Ntl, false});
  EXPECT_NEAR(ntl::mamdani_infer(s, x_is(0.3)), 0.5, 1e-12);
}

TEST(MamdaniInfer, StrongerLoneRuleApproachesConsequentCentroid) {
  auto s = bare_system();
  s.rules.push_back({"r", {{"x", "a", false}}, ntl::OutputLabel::Ntl, false});
  const auto full = ntl::defuzzify_centroid(sample({{0, 0.25, 0.75, 1}, {0, 0, 1, 1}}, 1001)).value();
  double prev_gap = kInf;
  for (double w = 0.05; w <= 1.0 + 1e-12; w += 0.05) {
    const double gap = std::abs(ntl::mamdani_infer(s, x_is(w)) - full);
    EXPECT_LE(gap, prev_gap + 1e-12) << w;
    prev_gap = gap;
  }
  EXPECT_NEAR(prev_gap, 0.0, 1e-12);
}

TEST(MamdaniInfer, MissingAttribute) {
  auto s = bare_system();
  s.rules.push_back({"r", {{"x", "a", false}}, ntl::OutputLabel::Ntl, false});
  ntl::AttributeVector a;
  a.set("y", 1.0);
  EXPECT_THROW(ntl::mamdani_infer(s, a), ntl::MissingAttributeError);
}

TEST(Defuzzify, SymmetricShapes) {
  EXPECT_NEAR(ntl::defuzzify_centroid(std::vector<double>(1001, 1.0)).value(), 0.5, 1e-9);
  const auto two = sample({{0, 0.2, 0.3, 0.7, 0.8, 1}, {1, 1, 0, 0, 1, 1}}, 1001);
  EXPECT_NEAR(ntl::defuzzify_centroid(two).value(), 0.5, 1e-9);
  const auto tri = sample({{0, 0.3, 0.5, 0.7, 1}, {0, 0, 1, 0, 0}}, 1001);
  EXPECT_NEAR(ntl::defuzzify_centroid(tri).value(), 0.5, 1e-9);
}

TEST(Defuzzify, AsymmetricTriangleMatchesClosedForm) {
  const oracle::Polyline tri{{0, 0.25, 1}, {0, 1, 0}};
  // Triangle with vertices at 0, 0.25, 1: centroid (0 + 0.25 + 1) / 3.
  EXPECT_NEAR(oracle::centroid_closed_form(tri), 1.25 / 3.0, 1e-15);
  EXPECT_NEAR(ntl::defuzzify_centroid(sample(tri, 1001)).value(), 1.25 / 3.0, 1e-12);
}

TEST(Defuzzify, DegenerateInputs) {
  EXPECT_FALSE(ntl::defuzzify_centroid(std::vector<double>(11, 0.0)).has_value());
  EXPECT_THROW(ntl::defuzzify_centroid(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(ntl::defuzzify_centroid(std::vector<double>{0.5, 1.5}), std::invalid_argument);
}

TEST(Defuzzify, GridRefinementAgrees) {
  ntl::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::Polyline p;
    // Off-grid breakpoints at least 0.05 apart keep every slope bounded.
    const auto k = 2 + rng.below(8);
    std::vector<double> cuts;
    for (std::size_t i = 0; i < k; ++i) cuts.push_back(0.05 + 0.9 * rng.uniform());
    std::sort(cuts.begin(), cuts.end());
    p.xs.push_back(0.0);
    for (double x : cuts)
      if (x - p.xs.back() >= 0.05 && 1.0 - x >= 0.05) p.xs.push_back(x);
    p.xs.push_back(1.0);
    for (std::size_t i = 0; i < p.xs.size(); ++i) p.ys.push_back(rng.uniform());
    const double coarse = ntl::defuzzify_centroid(sample(p, 1001)).value();
    const double fine = ntl::defuzzify_centroid(sample(p, 10001)).value();
    EXPECT_NEAR(coarse, fine, 1e-4);
  }
}

TEST(ClassifyFuzzy, ThresholdIsStrict) {
  auto s = bare_system();
  s.output.no_ntl = MembershipFunction::trapezoid(0, 0, 1, 1);
  s.output.ntl = MembershipFunction::trapezoid(0.6, 0.7, 0.7, 0.8);
  s.rules.push_back({"r", {{"x", "a", false}}, ntl::OutputLabel::Ntl, false});
  const auto d = ntl::classify_fuzzy(s, x_is(1.0), 0.5);
  EXPECT_NEAR(d.score, 0.7, 1e-12);
  EXPECT_EQ(d.label, 1);
  EXPECT_EQ(ntl::classify_fuzzy(s, x_is(1.0), 0.8).label, 0);
  EXPECT_EQ(ntl::classify_fuzzy(s, x_is(9.0), 0.5).label, 0);  // score exactly 0.5
  EXPECT_THROW(ntl::classify_fuzzy(s, x_is(1.0), 1.0), std::invalid_argument);
}

TEST(ClassifyFuzzy, HalfThresholdReproducesBooleanRules) {
  // Away from the thresholds themselves, the fuzzified rule set at 0.5
  // decides exactly like the crisp one.
  const auto catalog = ntl::AttributeCatalog::shipped();
  const auto rules = ntl::shipped_rules();
  ntl::SynthConfig cfg;
  cfg.n_customers = 400;
  const auto pool = ntl::build_pool(ntl::generate_synthetic(cfg), 12, catalog);
  const auto sys = ntl::fuzzify_ruleset(rules, ntl::compute_attribute_stats(pool.attributes));
  ntl::Rng rng(12);
  for (int i = 0; i < 3000; ++i) {
    ntl::AttributeVector a;
    a.set("mean_12m", rng.uniform(0, 30));
    a.set("std_12m", rng.uniform(0, 8));
    a.set("change_3m", rng.uniform(-1, 0.5));
    a.set("slope_12m", rng.uniform(-1.5, 1));
    a.set("min_over_mean", rng.uniform(0, 1));
    a.set("zero_month_count", rng.uniform(0, 12));
    EXPECT_EQ(ntl::classify_fuzzy(sys, a, 0.5).label, ntl::classify_boolean(rules, a).label);
  }
}

TEST(FuzzySystem, JsonRoundTripAndValidation) {
  const auto sys = toy::threshold_system(3.0, 2.5);
  const nlohmann::json j = sys;
  EXPECT_EQ(j.get<ntl::FuzzySystem>(), sys);
  auto bad = sys;
  bad.rules[0].antecedents[0].label = "nope";
  EXPECT_THROW(bad.validate(), ntl::ConfigError);
  auto disordered = sys;
  disordered.variables[0].sets[1].mf.params = {5, 4, kInf, kInf};
  EXPECT_THROW(disordered.validate(), ntl::ConfigError);
}

TEST(AttributeStats, Quartiles) {
  std::vector<ntl::AttributeVector> v;
  for (double x : {1.0, 2.0, 3.0, 4.0, 5.0}) v.push_back(x_is(x));
  const auto st = ntl::compute_attribute_stats(v).at("x");
  EXPECT_EQ(st.q1, 2.0);
  EXPECT_EQ(st.median, 3.0);
  EXPECT_EQ(st.q3, 4.0);
  EXPECT_EQ(st.scale(), 2.0);
  const ntl::AttributeStats flat{1, 1, 1, 1, 1};
  EXPECT_EQ(flat.scale(), 1.0);
}
