#include <gtest/gtest.h>

#include <string>

#include "dynpath/io.hpp"
#include "dynpath/simulate.hpp"

namespace dynpath {
namespace {

IngestOptions options(std::vector<Time> schedule, GapMode mode = GapMode::Strict,
                      std::vector<std::string> covariates = {}) {
  return IngestOptions{Schedule(std::move(schedule)), std::move(covariates), mode, ','};
}

std::string error_of(const std::string& subjects, const std::string& mediators, const IngestOptions& o) {
  try {
    load_dataset(subjects, mediators, o);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LoadDataset, MinimalInput) {
  const auto d = load_dataset("id,treatment,followup,event\n1,1,2.5,1\n2,0,3,0\n",
                              "id,time,value\n1,0,0.3\n2,0,-1.25\n", options({0.0}));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].treatment, 1.0);
  EXPECT_TRUE(d[0].event);
  EXPECT_FALSE(d[1].event);
  EXPECT_EQ(d[1].mediators, (std::vector<double>{-1.25}));
}

TEST(LoadDataset, CovariatesSelectedByName) {
  const auto d = load_dataset("id,treatment,followup,event,sex,age\nx,1,1,1,0,61.5\n",
                              "id,time,value\nx,0,2\n", options({0.0}, GapMode::Strict, {"age", "sex"}));
  EXPECT_EQ(d[0].baseline, (std::vector<double>{61.5, 0.0}));
  EXPECT_EQ(d.covariate_names(), (std::vector<std::string>{"age", "sex"}));
}

TEST(LoadDataset, MissingMediatorInStrictMode) {
  const std::string subjects = "id,treatment,followup,event\n1,1,2.5,1\n";
  const std::string mediators = "id,time,value\n1,0,0.3\n";
  EXPECT_NE(error_of(subjects, mediators, options({0.0, 1.0})).find("missing mediator"), std::string::npos);
}

TEST(LoadDataset, CarryForwardFillsGaps) {
  const std::string subjects = "id,treatment,followup,event\n1,1,2.5,1\n2,0,0.5,0\n";
  const std::string mediators = "id,time,value\n1,0,0.3\n1,2,0.9\n2,0,4\n";
  const auto d = load_dataset(subjects, mediators, options({0.0, 1.0, 2.0}, GapMode::CarryForward));
  EXPECT_EQ(d[0].mediators, (std::vector<double>{0.3, 0.3, 0.9}));
  EXPECT_EQ(d.carried_forward(), 1u);
  // Nothing to carry at t0.
  EXPECT_THROW(load_dataset(subjects, "id,time,value\n1,2,0.9\n2,0,4\n",
                            options({0.0, 1.0, 2.0}, GapMode::CarryForward)),
               Error);
}

TEST(LoadDataset, ErrorPaths) {
  const std::string subjects = "id,treatment,followup,event\n1,1,1.5,1\n";
  const auto o = options({0.0, 1.0, 2.0});
  EXPECT_NE(error_of("id,treatment,followup,event\n1,x,1.5,1\n", "id,time,value\n1,0,1\n", o).find("malformed"),
            std::string::npos);
  EXPECT_NE(error_of("id,treatment,followup,event\n1,1,1.5\n", "id,time,value\n1,0,1\n", o).find("expected 4"),
            std::string::npos);
  EXPECT_NE(error_of(subjects, "id,time,value\n1,0,1\n1,1,1\n9,0,1\n", o).find("unknown subject"),
            std::string::npos);
  EXPECT_NE(error_of(subjects, "id,time,value\n1,0,1\n1,1,1\n1,2,1\n", o).find("after followup"),
            std::string::npos);
  EXPECT_NE(error_of(subjects, "id,time,value\n1,0,1\n1,0,2\n1,1,1\n", o).find("duplicate"), std::string::npos);
  EXPECT_NE(error_of(subjects, "id,time,value\n1,0,1\n1,0.5,1\n", o).find("not a schedule time"),
            std::string::npos);
  EXPECT_NE(error_of("id,treatment,followup,event\n1,1,1.5,2\n", "id,time,value\n1,0,1\n1,1,1\n", o)
                .find("event must be 0 or 1"),
            std::string::npos);
  EXPECT_NE(error_of("id,treatment,followup,event\n1,1,1.5,1\n1,0,2,0\n", "id,time,value\n", o).find("duplicate"),
            std::string::npos);
}

TEST(LoadDataset, TwentyOneVisitPanel) {
  // Monthly then quarterly visits, complete measurements for every survivor.
  std::vector<Time> sched{0.0};
  for (int m = 1; m <= 12; ++m) sched.push_back(m / 12.0);
  while (sched.size() < 21) sched.push_back(sched.back() + 0.25);
  auto p = constant_params(Schedule(sched), 0.01, 0.005, 0.0, 0.0, 1.0);
  p.censoring.t_max = sched.back() + 0.5;
  const auto cohort = simulate_cohort(p, 9342, 3);
  const auto reloaded =
      load_dataset(write_subjects_table(cohort), write_mediators_table(cohort), ingest_options_for(cohort));
  EXPECT_EQ(reloaded.size(), 9342u);
  EXPECT_EQ(reloaded.schedule().size(), 21u);
  EXPECT_EQ(reloaded, cohort);
}

TEST(LoadDataset, ReserializationIsByteIdentical) {
  auto p = constant_params(Schedule({0.0, 0.5, 1.0}), 0.3, 0.1, 0.05, 1.0, 1.0);
  p.covariates = {CovariateLaw::normal("x", 1.0, 2.0)};
  p.hazard.rho.assign(3, {0.01});
  p.mediator.delta.assign(3, {0.2});
  p.censoring.t_max = 2.0;
  const auto d = simulate_cohort(p, 300, 17);
  const auto subjects = write_subjects_table(d);
  const auto mediators = write_mediators_table(d);
  const auto again = load_dataset(subjects, mediators, ingest_options_for(d));
  EXPECT_EQ(write_subjects_table(again), subjects);
  EXPECT_EQ(write_mediators_table(again), mediators);
}

TEST(IngestConfig, JsonRoundTrip) {
  const auto o = options({0.0, 1.0}, GapMode::CarryForward, {"a", "b"});
  const auto back = ingest_config_from_json(ingest_config_to_json(o));
  EXPECT_EQ(back.schedule, o.schedule);
  EXPECT_EQ(back.covariates, o.covariates);
  EXPECT_EQ(back.mode, GapMode::CarryForward);
  EXPECT_THROW(ingest_config_from_json(nlohmann::json{{"schedule", {0.0}}, {"mode", "lenient"}}), Error);
}

TEST(FormatNumber, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 12345.678, 0.0}) EXPECT_EQ(*parse_number(format_number(x)), x);
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_FALSE(parse_number("1.5x"));
}

}  // namespace
}  // namespace dynpath
