#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dynpath/aalen.hpp"
#include "dynpath/simulate.hpp"
#include "test_support.hpp"

namespace dynpath {
namespace {

using testing::subject;

Dataset simulated(std::size_t n, std::uint64_t seed) {
  auto p = constant_params(Schedule({0.0, 0.5, 1.0}), 0.4, 0.2, 0.1, 1.0, 1.0);
  p.covariates = {CovariateLaw::uniform("x", 0.0, 1.0)};
  p.hazard.rho.assign(3, {0.3});
  p.mediator.delta.assign(3, {0.5});
  p.mediator.b(1, 0) = 0.3;
  p.mediator.b(2, 1) = 0.3;
  p.censoring.t_max = 2.0;
  // Mediator starts high enough that the hazard stays positive.
  p.mediator.lambda = {3.0, 1.0, 1.0};
  return simulate_cohort(p, n, seed);
}

TEST(FitAdditive, InterceptOnlyIsNelsonAalen) {
  const Dataset d(Schedule{}, {}, {subject("1", 0, 1, true), subject("2", 0, 2, true), subject("3", 0, 3, false)});
  const auto fit = fit_additive(d, Terms::intercept_only());
  ASSERT_EQ(fit.times(), (std::vector<Time>{1.0, 2.0}));
  EXPECT_NEAR(fit.baseline.increments()[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(fit.baseline.increments()[1], 1.0 / 2.0, 1e-15);
  EXPECT_EQ(fit.skipped_events, 0u);
}

TEST(FitAdditive, InterceptOnlyMatchesNelsonAalenOnSimulatedCohort) {
  const auto d = simulated(800, 5);
  const auto fit = fit_additive(d, Terms::intercept_only());
  const auto na = nelson_aalen(d);
  ASSERT_EQ(fit.times(), na.jumps());
  for (std::size_t k = 0; k < na.size(); ++k) EXPECT_NEAR(fit.baseline.values()[k], na.values()[k], 1e-12);
}

TEST(FitAdditive, FourSubjectGroupDifference) {
  // Group-wise Nelson-Aalen oracle, valid while both arms are at risk (t <= 2).
  const auto d = testing::four_subject_example();
  const auto fit = fit_additive(d, Terms::treatment_only());
  const auto na0 = nelson_aalen(d, [](const SubjectRecord& s) { return s.treatment == 0; });
  const auto na1 = nelson_aalen(d, [](const SubjectRecord& s) { return s.treatment == 1; });
  for (Time t : {1.0, 1.25, 1.5, 2.0}) {
    EXPECT_NEAR(fit.baseline(t), na0(t), 1e-12) << t;
    EXPECT_NEAR(fit.treatment(t), na1(t) - na0(t), 1e-12) << t;
  }
  EXPECT_NEAR(fit.treatment(2.0), 0.0, 1e-12);
  EXPECT_NEAR(fit.baseline(2.0), 0.5, 1e-12);
  // At t = 3 only one control subject remains: the two-column design is rank
  // deficient and the increment is skipped.
  EXPECT_EQ(fit.skipped_events, 1u);
  EXPECT_EQ(fit.times(), (std::vector<Time>{1.0, 1.5}));
}

TEST(FitAdditive, IdenticalRiskSetIsSkipped) {
  const Dataset d(Schedule{}, {},
                  {subject("1", 1, 1, true), subject("2", 1, 2, true), subject("3", 1, 2, false),
                   subject("4", 0, 0.5, true), subject("5", 0, 0.8, false)});
  const auto fit = fit_additive(d, Terms::treatment_only());
  // At t = 1 and t = 2 every at-risk subject has a = 1.
  EXPECT_EQ(fit.skipped_events, 2u);
  EXPECT_EQ(fit.times(), (std::vector<Time>{0.5}));
  EXPECT_EQ(fit.baseline.size(), fit.treatment.size());
  EXPECT_EQ(fit.baseline.jumps(), fit.mediator.jumps());
}

TEST(FitAdditive, Errors) {
  EXPECT_THROW(fit_additive(Dataset(Schedule{}, {}, {subject("1", 0, 1, false)})), Error);
  // Three design columns but never more than two subjects at risk.
  EXPECT_THROW(fit_additive(Dataset(Schedule{}, {}, {subject("1", 0, 1, true), subject("2", 1, 2, true)})), Error);
}

TEST(FitAdditive, JumpSetsAreShared) {
  const auto d = simulated(400, 9);
  const auto fit = fit_additive(d);
  EXPECT_EQ(fit.baseline.jumps(), fit.treatment.jumps());
  EXPECT_EQ(fit.baseline.jumps(), fit.mediator.jumps());
  ASSERT_EQ(fit.covariates.size(), 1u);
  EXPECT_EQ(fit.baseline.jumps(), fit.covariates[0].jumps());
  EXPECT_EQ(fit.times().size() + fit.skipped_events, event_times(d).size());
}

TEST(FitAdditive, IncrementsMatchNormalEquations) {
  const auto d = simulated(500, 21);
  const auto fit = fit_additive(d);
  for (std::size_t k = 0; k < fit.times().size(); k += 17) {
    const auto rs = design_at(d, fit.times()[k]);
    const Eigen::MatrixXd gram = rs.design.transpose() * rs.design;
    const Eigen::VectorXd beta = gram.ldlt().solve(rs.design.transpose() * rs.events);
    EXPECT_NEAR(fit.baseline.increments()[k], beta(0), 1e-10);
    EXPECT_NEAR(fit.treatment.increments()[k], beta(1), 1e-10);
    EXPECT_NEAR(fit.mediator.increments()[k], beta(2), 1e-10);
    EXPECT_NEAR(fit.covariates[0].increments()[k], beta(3), 1e-10);
  }
}

TEST(FitAdditive, TiedEventsEqualSumOfSingleEventSolves) {
  std::vector<SubjectRecord> subs;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (int i = 0; i < 30; ++i) {
    const bool tied = i < 4;
    subs.push_back(subject(std::to_string(i), i % 2, tied ? 1.0 : 1.0 + 0.1 * (i + 1), tied || i % 3 == 0, z(gen)));
  }
  const Dataset d(Schedule{}, {}, subs);
  const auto rs = design_at(d, 1.0);
  ASSERT_EQ(rs.events.sum(), 4.0);
  const LeastSquares ls(rs.design);
  const Eigen::VectorXd joint = ls.solve(rs.events);
  Eigen::VectorXd summed = Eigen::VectorXd::Zero(joint.size());
  for (Eigen::Index r = 0; r < rs.events.size(); ++r) {
    if (rs.events(r) == 0.0) continue;
    Eigen::VectorXd single = Eigen::VectorXd::Zero(rs.events.size());
    single(r) = 1.0;
    summed += ls.solve(single);
  }
  EXPECT_LT((joint - summed).cwiseAbs().maxCoeff(), 1e-12);
  const auto fit = fit_additive(d);
  EXPECT_NEAR(fit.baseline.increments()[0], joint(0), 1e-12);
  EXPECT_NEAR(fit.mediator.increments()[0], joint(2), 1e-12);
}

TEST(FitAdditive, MediatorScaleEquivariance) {
  const auto d = simulated(600, 13);
  for (double k : {0.1, -3.0, 10.0}) {
    auto subs = d.subjects();
    for (auto& s : subs)
      for (auto& m : s.mediators) m *= k;
    const Dataset scaled(d.schedule(), d.covariate_names(), subs);
    const auto a = fit_additive(d);
    const auto b = fit_additive(scaled);
    ASSERT_EQ(a.times(), b.times());
    for (std::size_t j = 0; j < a.times().size(); ++j) {
      EXPECT_NEAR(b.mediator.increments()[j] * k, a.mediator.increments()[j], 1e-12);
      EXPECT_NEAR(b.baseline.increments()[j], a.baseline.increments()[j], 1e-12);
      EXPECT_NEAR(b.treatment.increments()[j], a.treatment.increments()[j], 1e-12);
      EXPECT_NEAR(b.covariates[0].increments()[j], a.covariates[0].increments()[j], 1e-12);
    }
  }
}

TEST(NelsonAalen, Examples) {
  const Dataset two(Schedule{}, {}, {subject("1", 0, 1, true), subject("2", 0, 2, true)});
  EXPECT_EQ(nelson_aalen(two), StepFunction({1.0, 2.0}, {0.5, 1.0}));

  const Dataset censored(Schedule{}, {}, {subject("1", 0, 1, false), subject("2", 0, 2, false)});
  EXPECT_TRUE(nelson_aalen(censored).empty());
  EXPECT_EQ(nelson_aalen(censored)(5.0), 0.0);

  const Dataset tie(Schedule{}, {},
                    {subject("1", 0, 1, true), subject("2", 0, 1, true), subject("3", 0, 2, false),
                     subject("4", 0, 3, false)});
  EXPECT_EQ(nelson_aalen(tie), StepFunction({1.0}, {0.5}));

  EXPECT_THROW(nelson_aalen(two, [](const SubjectRecord&) { return false; }), Error);
}

TEST(LeastSquares, RankTest) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, 1, 1, 1, 1, 1, 1;
  EXPECT_FALSE(LeastSquares(x).full_rank());
  x(3, 1) = 0.0;
  EXPECT_TRUE(LeastSquares(x).full_rank());
  EXPECT_FALSE(LeastSquares(Eigen::MatrixXd::Ones(1, 2)).full_rank());
  // Columns equal up to 1e-12 relative: below the 1e-10 singular-value ratio.
  x << 1, 1, 1, 1 + 1e-12, 1, 1, 1, 1;
  EXPECT_FALSE(LeastSquares(x).full_rank());
}

}  // namespace
}  // namespace dynpath
