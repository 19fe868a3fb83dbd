#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpi/control_room.hpp"
#include "tpi/scheduler.hpp"

namespace tpi {
namespace {

std::string fx(const std::string& rel) { return std::string(TPI_FIXTURE_DIR) + "/" + rel; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tpi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::filesystem::path dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"validate"}).code, 2);
  EXPECT_EQ(run({"validate", fx("minimal/minimal.net"), "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"replay", fx("minimal/hot_ground.order")}).code, 2);
  auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("isolate"), std::string::npos);
}

TEST_F(CliTest, ValidateReportsSummaryAndWireRuns) {
  auto ok = run({"validate", fx("fourtrack/fourtrack.net")});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("wire runs over limit"), std::string::npos);
  std::string chain = "zone Z\ntrack 1\n";
  for (int i = 0; i <= 4; ++i) chain += "node n" + std::to_string(i) + " Z " + std::to_string(i * 3000) + "\n";
  chain += "source S equalizing_substation n0\n";
  for (int i = 0; i < 4; ++i) {
    chain += "section T" + std::to_string(i) + " trolley n" + std::to_string(i) + " n" + std::to_string(i + 1) + " " +
             std::to_string(i * 3000) + " " + std::to_string((i + 1) * 3000) + " track=1\n";
  }
  auto long_run = run({"validate", write("chain.net", chain)});
  EXPECT_EQ(long_run.code, 1);
  EXPECT_NE(long_run.err.find("WIRE_RUN_EXCEEDED"), std::string::npos);
  auto broken = run({"validate", write("broken.net", "zone Z\nnode a Q 0\n")});
  EXPECT_EQ(broken.code, 1);
  EXPECT_FALSE(broken.err.empty());
}

TEST_F(CliTest, EnergizeAndIsolate) {
  auto e = run({"energize", fx("minimal/minimal.net"), fx("minimal/minimal.state")});
  EXPECT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("violations"), std::string::npos);

  const auto orders = path("orders.txt");
  auto iso = run({"isolate", fx("minimal/minimal.net"), fx("minimal/minimal.state"), fx("minimal/minimal.req"),
                  "--orders-out", orders, "--format", "records"});
  ASSERT_EQ(iso.code, 0) << iso.err;
  auto plan = parse_plan(iso.out);
  EXPECT_EQ(plan.plate_order, "P1");
  EXPECT_EQ(parse_operating_orders(read_file(orders)).size(), plan.forms.size() + plan.restore_forms.size());

  auto replay = run({"replay", orders, "--net", fx("minimal/minimal.net"), "--state", fx("minimal/minimal.state"),
                     "--format", "records"});
  ASSERT_EQ(replay.code, 0) << replay.err;
  auto t = load_topology_or_throw(read_file(fx("minimal/minimal.net")));
  // Isolation then restoration lands back on the starting state.
  std::string state_doc;
  std::istringstream lines(replay.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("R1-", 0) != 0) state_doc += line + "\n";
  }
  EXPECT_EQ(parse_state(t, state_doc), parse_state(t, read_file(fx("minimal/minimal.state"))));

  auto margin = run({"isolate", fx("minimal/minimal.net"), fx("minimal/minimal.state"), fx("minimal/minimal.req"),
                     "--margin-ft", "100"});
  EXPECT_EQ(margin.code, 1);
  EXPECT_NE(margin.err.find("NO_PLATE_ORDER"), std::string::npos);
  EXPECT_EQ(run({"isolate", fx("minimal/minimal.net"), fx("minimal/minimal.state"), fx("minimal/minimal.req"),
                 "--margin-ft", "100", "--no-plate"})
                .code,
            0);
}

TEST_F(CliTest, ReplayRejectsHotGroundUnlessInterlocksAreOff) {
  auto r = run({"replay", fx("minimal/hot_ground.order"), "--net", fx("minimal/minimal.net")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("REJECTED"), std::string::npos);
  auto off = run({"replay", fx("minimal/hot_ground.order"), "--net", fx("minimal/minimal.net"), "--no-interlock"});
  EXPECT_EQ(off.code, 0) << off.err;
}

TEST_F(CliTest, ReplayFoldsAnEventLog) {
  auto t = load_topology_or_throw(read_file(fx("minimal/minimal.net")));
  ControlRoom room(t, normal_state(t));
  room.add_order(parse_operating_orders("order O1 group=1 director=PD1\nop 1 open CB remote_scada\n").at(0));
  room.step("O1", "PD1");
  std::string log;
  for (const auto& e : room.events_since(0)) log += e.to_line() + "\n";
  auto r = run({"replay", write("events.log", log), "--net", fx("minimal/minimal.net"), "--format", "records"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_state(t, r.out), room.state());
}

TEST_F(CliTest, PlateOrderReportsClosestCandidate) {
  auto ok = run({"plate-order", fx("minimal/minimal.net"), fx("minimal/minimal.req"), "--format", "records"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("selected P1 barred_ft=2000"), std::string::npos);
  auto gap = run({"plate-order", fx("minimal/minimal.net"), fx("minimal/minimal.req"), "--margin-ft", "100"});
  EXPECT_EQ(gap.code, 1);
  EXPECT_NE(gap.err.find("closest P1 leaves 100 ft uncovered"), std::string::npos);
}

TEST_F(CliTest, ScheduleThenDisrupt) {
  const auto plan = path("plan.txt");
  auto s = run({"schedule", fx("fourtrack/fourtrack.net"), fx("fourtrack/fourtrack.jobs"), fx("fourtrack/fourtrack.cal"),
                "--requests", fx("fourtrack/bridle_removal.req"), "--state", fx("fourtrack/bridle_removal.state"),
                "--format", "records"});
  ASSERT_EQ(s.code, 0) << s.err;
  write("plan.txt", s.out);
  EXPECT_EQ(parse_weekly_plan(s.out).stage, PipelineStage::kApproved);
  const auto next = path("next.txt");
  auto missing = run({"schedule", fx("fourtrack/fourtrack.net"), fx("fourtrack/fourtrack.jobs"),
                      fx("fourtrack/fourtrack.cal"), "--format", "records"});
  EXPECT_EQ(parse_weekly_plan(missing.out).find("fri", "J1")->reason, "unknown_isolation");
  auto d = run({"disrupt", plan, "sick_call lineman fri 1", "--out", next});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_NE(d.out.find("J4"), std::string::npos);
  EXPECT_NE(d.out.find("CANCELLED"), std::string::npos);
  EXPECT_EQ(parse_weekly_plan(read_file(next)).find("fri", "J4")->reason, "insufficient_lineman");
  EXPECT_EQ(run({"disrupt", plan, "contractor_cancel J9"}).code, 1);
}

TEST_F(CliTest, SimulateReferenceNight) {
  auto r = run({"simulate", fx("minimal/minimal.net"), fx("minimal/minimal.req"), fx("reference_night/reference_night.window"),
                "--format", "records"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ref,summary,22:00,05:30,450,on_track=159,nominal=420,status=ok"), std::string::npos);
  EXPECT_EQ(run({"simulate", fx("minimal/minimal.net"), fx("minimal/minimal.req"), fx("reference_night/reference_night.window"),
                 "--nights", "nope"})
                .code,
            2);
}

}  // namespace
}  // namespace tpi
