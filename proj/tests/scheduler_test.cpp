#include "tpi/scheduler.hpp"

#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "oracles.hpp"

namespace tpi {
namespace {

std::string fixture(const std::string& rel) { return read_file(std::string(TPI_FIXTURE_DIR) + "/" + rel); }

WeeklyPlan fourtrack_plan() {
  return build_weekly_plan(parse_jobs(fixture("fourtrack/fourtrack.jobs")),
                           parse_calendar(fixture("fourtrack/fourtrack.cal")));
}

std::string label_of(const WeeklyPlan& plan, const std::string& night, const std::string& job) {
  const Assignment* a = plan.find(night, job);
  if (!a) return "-";
  return a->cancelled() ? "CANCELLED" : std::string(1, *a->variant);
}

TEST(SchedulerTest, FiveCraftDemandBindsEveryCraft) {
  auto jobs = parse_jobs(fixture("fourtrack/fourtrack.jobs"));
  auto cal = parse_calendar(fixture("fourtrack/fourtrack.cal"));
  auto r = effective_capacity(cal, jobs, "fri");
  EXPECT_EQ(r.demanded, (CraftCounts{6, 4, 2, 3, 2}));
  EXPECT_EQ(r.available, (CraftCounts{6, 4, 2, 3, 2}));
  EXPECT_EQ(r.binding, std::vector<Craft>(kAllCrafts.begin(), kAllCrafts.end()));
}

TEST(SchedulerTest, BindingCraftsHaveTheSmallestRatio) {
  auto r = effective_capacity(CraftCounts{6, 4, 2, 3, 2}, CraftCounts{3, 4, 0, 1, 2});
  EXPECT_EQ(r.binding, (std::vector<Craft>{Craft::kGroundman, Craft::kDispatcher}));
  EXPECT_TRUE(effective_capacity(CraftCounts{1, 1, 1, 1, 1}, CraftCounts{}).binding.empty());
}

TEST(SchedulerTest, FourtrackPlanUsesEveryHeadAndPassesFeasibility) {
  auto plan = fourtrack_plan();
  EXPECT_EQ(plan.stage, PipelineStage::kApproved);
  for (const char* j : {"J1", "J2", "J3", "J4"}) EXPECT_EQ(label_of(plan, "fri", j), "A") << j;
  EXPECT_EQ(plan.residual.at("fri"), (CraftCounts{0, 0, 0, 0, 0}));
  EXPECT_NO_THROW(check_feasible(plan));
}

TEST(SchedulerTest, SickLinemanCancelsLowestPriorityJob) {
  auto plan = fourtrack_plan();
  auto r = apply_disruption(plan, parse_disruption("sick_call lineman fri 1"));
  ASSERT_EQ(r.diff.size(), 1u);
  EXPECT_EQ(r.diff[0], (DiffEntry{"J4", "fri", "A", "CANCELLED", "insufficient_lineman"}));
  EXPECT_EQ(r.plan.stage, PipelineStage::kExecuting);
  EXPECT_NO_THROW(check_feasible(r.plan));
  // A second call keeps the higher-priority jobs on their current variants.
  auto r2 = apply_disruption(r.plan, parse_disruption("sick_call lineman fri 1"));
  EXPECT_EQ(label_of(r2.plan, "fri", "J1"), "A");
  EXPECT_EQ(label_of(r2.plan, "fri", "J2"), "A");
  EXPECT_EQ(label_of(r2.plan, "fri", "J3"), "CANCELLED");
  EXPECT_NO_THROW(check_feasible(r2.plan));
}

TEST(SchedulerTest, WeatherCancelsIsolationBearingVariantsOnly) {
  auto r = apply_disruption(fourtrack_plan(), parse_disruption("weather_cancel fri"));
  EXPECT_EQ(label_of(r.plan, "fri", "J1"), "CANCELLED");
  EXPECT_EQ(r.plan.find("fri", "J1")->reason, "weather");
  EXPECT_EQ(label_of(r.plan, "fri", "J2"), "A");
}

TEST(SchedulerTest, ContractorCancelFreesCrewsForOthers) {
  auto plan = fourtrack_plan();
  auto sick = apply_disruption(plan, parse_disruption("sick_call lineman fri 1")).plan;
  auto r = apply_disruption(sick, parse_disruption("contractor_cancel J1"));
  EXPECT_EQ(label_of(r.plan, "fri", "J1"), "CANCELLED");
  EXPECT_EQ(r.plan.find("fri", "J1")->reason, "contractor_cancel");
  EXPECT_EQ(label_of(r.plan, "fri", "J4"), "A");
}

TEST(SchedulerTest, ServiceEmergencyRemovesCraftsAndOutages) {
  auto d = parse_disruption("service_emergency fri crafts=flagman:1,dispatcher:1 outages=1");
  EXPECT_EQ(at(d.crafts_lost, Craft::kFlagman), 1);
  EXPECT_EQ(parse_disruption(to_string(d)).crafts_lost, d.crafts_lost);
  auto r = apply_disruption(fourtrack_plan(), d);
  EXPECT_EQ(r.plan.calendar.outage_cap.at("fri"), 1);
  EXPECT_NO_THROW(check_feasible(r.plan));
  EXPECT_LE(at(night_usage(r.plan, "fri"), Craft::kDispatcher), 1);
}

TEST(SchedulerTest, DisruptionsNeedAnApprovedPlan) {
  auto plan = monday_look_ahead(parse_jobs(fixture("fourtrack/fourtrack.jobs")),
                                parse_calendar(fixture("fourtrack/fourtrack.cal")));
  EXPECT_THROW(apply_disruption(plan, parse_disruption("sick_call lineman fri 1")), DomainError);
  EXPECT_THROW(thursday_approve(plan), DomainError);
  auto approved = fourtrack_plan();
  EXPECT_THROW(apply_disruption(approved, parse_disruption("sick_call lineman sun 1")), DomainError);
  EXPECT_THROW(apply_disruption(approved, parse_disruption("contractor_cancel J9")), DomainError);
  EXPECT_THROW(parse_disruption("hail fri"), ParseError);
}

TEST(SchedulerTest, GatesWithdrawRejectedJobs) {
  auto plan = monday_look_ahead(parse_jobs(fixture("fourtrack/fourtrack.jobs")),
                                parse_calendar(fixture("fourtrack/fourtrack.cal")));
  tuesday_set_priorities(plan);
  wednesday_request(plan, {"J3"});
  thursday_approve(plan, {"J2"});
  EXPECT_EQ(plan.find("fri", "J3")->reason, "request_rejected");
  EXPECT_EQ(plan.find("fri", "J2")->reason, "approval_denied");
  EXPECT_EQ(label_of(plan, "fri", "J4"), "A");
}

TEST(SchedulerTest, DuplicatePrioritiesAndUnknownNightsAreRejected) {
  auto jobs = parse_jobs(fixture("fourtrack/fourtrack.jobs"));
  auto cal = parse_calendar(fixture("fourtrack/fourtrack.cal"));
  auto dup = jobs;
  dup[1].priority = dup[0].priority;
  EXPECT_THROW(build_weekly_plan(dup, cal), DomainError);
  auto off = jobs;
  off[0].nights = {"sat"};
  EXPECT_THROW(monday_look_ahead(off, cal), DomainError);
}

TEST(SchedulerTest, IsolationsAreCheckedAgainstTheNetwork) {
  auto t = load_topology_or_throw(fixture("minimal/minimal.net"));
  auto s = normal_state(t);
  IsolationContext ctx;
  ctx.topology = &t;
  ctx.state = &s;
  auto jobs = parse_jobs(fixture("minimal/minimal.jobs"));
  auto cal = parse_calendar(fixture("minimal/minimal.cal"));
  auto missing = build_weekly_plan(jobs, cal, ctx);
  EXPECT_EQ(missing.isolation_status.at("R1"), "unknown_isolation");
  EXPECT_EQ(missing.find("mon", "J1")->reason, "unknown_isolation");
  for (const auto& r : parse_requests(fixture("minimal/minimal.req"))) ctx.requests[r.id] = r;
  auto ok = build_weekly_plan(jobs, cal, ctx);
  EXPECT_EQ(ok.isolation_status.at("R1"), "");
  EXPECT_EQ(label_of(ok, "mon", "J1"), "A");
}

TEST(SchedulerTest, SharedIsolationCountsCrewsOnce) {
  auto jobs = parse_jobs(R"(
job A prio=1 nights=mon
variant A lineman=1 groundman=2 director=1 flagman=0 dispatcher=1 isolation=I1 outage=1
job B prio=2 nights=mon
variant A lineman=1 groundman=2 director=1 flagman=0 dispatcher=1 isolation=I1 outage=1
)");
  auto cal = parse_calendar("avail mon lineman 2\navail mon groundman 2\navail mon director 1\navail mon dispatcher 1\n"
                            "outages mon 1\n");
  auto plan = build_weekly_plan(jobs, cal);
  EXPECT_EQ(label_of(plan, "mon", "A"), "A");
  EXPECT_EQ(label_of(plan, "mon", "B"), "A");
  EXPECT_EQ(night_usage(plan, "mon"), (CraftCounts{2, 2, 1, 0, 1}));
}

TEST(SchedulerTest, GreedyMatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(606);
  int cancelled = 0, degraded = 0;
  for (int i = 0; i < 2000; ++i) {
    auto c = test_support::random_schedule_case(rng);
    auto plan = build_weekly_plan(c.jobs, c.calendar);
    ASSERT_NO_THROW(check_feasible(plan));
    for (const auto& night : c.calendar.nights) {
      for (const auto& [job, expect] : test_support::exhaustive_night(c.jobs, c.calendar, night)) {
        const Assignment* a = plan.find(night, job);
        ASSERT_TRUE(a);
        ASSERT_EQ(a->variant, expect) << to_document(plan);
        cancelled += a->cancelled();
        degraded += a->variant.has_value() && *a->variant != 'A';
      }
    }
  }
  EXPECT_GT(cancelled, 100);
  EXPECT_GT(degraded, 100);
}

TEST(SchedulerTest, DocumentsRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto c = test_support::random_schedule_case(rng);
    EXPECT_EQ(parse_jobs(to_document(c.jobs)), c.jobs);
    EXPECT_EQ(parse_calendar(to_document(c.calendar)), c.calendar);
    auto plan = build_weekly_plan(c.jobs, c.calendar);
    auto sick = apply_disruption(plan, Disruption{Disruption::Kind::kWeatherCancel, Craft::kLineman, "", 0, "",
                                                  {c.calendar.nights.front()}, {}, 0})
                    .plan;
    for (const auto* p : {&plan, &sick}) {
      auto doc = to_document(*p);
      EXPECT_EQ(parse_weekly_plan(doc), *p) << doc;
    }
  }
}

TEST(SchedulerTest, CheckFeasibleCatchesOvercommit) {
  auto plan = fourtrack_plan();
  plan.calendar.availability["fri"][static_cast<std::size_t>(Craft::kFlagman)] = 2;
  try {
    check_feasible(plan);
    FAIL() << "expected RESOURCE_OVERCOMMIT";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.kind(), "RESOURCE_OVERCOMMIT");
    EXPECT_EQ(e.participants(), (std::vector<std::string>{"fri", "flagman"}));
  }
}

}  // namespace
}  // namespace tpi
