#include <gtest/gtest.h>

#include <random>

#include "dynpath/core.hpp"
#include "test_support.hpp"

namespace dynpath {
namespace {

TEST(Schedule, RejectsBadTimes) {
  EXPECT_THROW(Schedule(std::vector<Time>{}), Error);
  EXPECT_THROW(Schedule({0.5, 1.0}), Error);
  EXPECT_THROW(Schedule({0.0, 1.0, 1.0}), Error);
  EXPECT_NO_THROW(Schedule({0.0, 0.25, 3.0}));
}

TEST(MediatorIndex, Examples) {
  const Schedule s({0.0, 1.0, 2.0});
  EXPECT_EQ(mediator_index(s, 1.5), 1u);
  EXPECT_EQ(mediator_index(s, 1.0), 1u);
  EXPECT_EQ(mediator_index(Schedule{}, 7.0), 0u);
  EXPECT_EQ(mediator_index(s, 0.0), 0u);
  EXPECT_EQ(mediator_index(s, 99.0), 2u);
  EXPECT_THROW(mediator_index(s, -0.1), Error);
}

TEST(MediatorIndex, ScheduleTimesMapToTheirOwnIndex) {
  const Schedule s({0.0, 0.1, 0.3, 0.7, 1.1, 2.0, 5.0});
  for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(mediator_index(s, s[k]), k);
}

TEST(RiskSet, Examples) {
  using testing::subject;
  const Dataset d(Schedule{}, {}, {subject("x", 0, 1.0, false), subject("y", 1, 1.0, true), subject("z", 0, 2.0, true)});
  EXPECT_EQ(risk_set(d, 0.0).size(), 3u);
  // Censored at 1: gone at 1.5.
  EXPECT_EQ(risk_set(d, 1.5), (std::vector<std::size_t>{2}));
  // At risk through its own event time.
  EXPECT_EQ(risk_set(d, 1.0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(RiskSet, Antitone) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  std::vector<SubjectRecord> subs;
  for (int i = 0; i < 200; ++i) subs.push_back(testing::subject("s" + std::to_string(i), i % 2, u(gen), i % 3 == 0));
  // followup may exceed the single-visit schedule; one mediator value covers it.
  const Dataset d(Schedule{}, {}, subs);
  for (int rep = 0; rep < 50; ++rep) {
    double s = u(gen), t = u(gen);
    if (s > t) std::swap(s, t);
    const auto later = risk_set(d, t);
    const auto earlier = risk_set(d, s);
    EXPECT_TRUE(std::includes(earlier.begin(), earlier.end(), later.begin(), later.end()));
  }
}

TEST(Dataset, EnforcesInvariants) {
  using testing::subject;
  EXPECT_THROW(Dataset(Schedule{}, {}, {subject("x", 0, 1, true), subject("x", 1, 2, true)}), Error);
  EXPECT_THROW(Dataset(Schedule{}, {}, {subject("x", 0, 0.0, true)}), Error);
  EXPECT_THROW(Dataset(Schedule{}, {"age"}, {subject("x", 0, 1, true)}), Error);
  // Alive at t1 = 1 but only M0 recorded.
  EXPECT_THROW(Dataset(Schedule({0.0, 1.0}), {}, {subject("x", 0, 1.5, true)}), Error);
  auto s = subject("x", 0, 1.5, true);
  s.mediators = {0.1, 0.2};
  EXPECT_NO_THROW(Dataset(Schedule({0.0, 1.0}), {}, {s}));
}

TEST(StepFunction, Evaluation) {
  const StepFunction f({1.0, 2.0}, {0.5, 0.25});
  EXPECT_EQ(eval_step(f, 1.5), 0.5);
  EXPECT_EQ(eval_step(f, 0.5), 0.0);
  EXPECT_EQ(eval_step(f, 2.0), 0.75);
  EXPECT_EQ(eval_step(f, 10.0), 0.75);
  EXPECT_EQ(eval_step(StepFunction{}, 3.0), 0.0);
  EXPECT_THROW(StepFunction({1.0, 1.0}, {0.1, 0.2}), Error);
  EXPECT_THROW(StepFunction({1.0}, {0.1, 0.2}), Error);
}

TEST(StepFunction, MonotoneForNonnegativeIncrements) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StepFunction f;
  double t = 0.0;
  for (int k = 0; k < 100; ++k) f.push_back(t += u(gen), u(gen));
  double prev = -1.0;
  for (double x = 0.0; x < t + 1.0; x += 0.37) {
    const double v = f(x);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(StepFunction, SlopeOverWindow) {
  const StepFunction f({1.0, 2.0}, {0.5, 0.25});
  EXPECT_DOUBLE_EQ(slope(f, 0.0, 2.0), 0.375);
  EXPECT_THROW(slope(f, 1.0, 1.0), Error);
}

}  // namespace
}  // namespace dynpath
