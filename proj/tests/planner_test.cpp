#include "tpi/planner.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"

namespace tpi {
namespace {

using test_support::random_rail_case;
using test_support::search_isolation;
using test_support::section_closure;

std::string fixture(const std::string& rel) { return read_file(std::string(TPI_FIXTURE_DIR) + "/" + rel); }

struct Loaded {
  NetworkTopology topology;
  SwitchingState state;
  IsolationRequest request;
};

Loaded load(const std::string& net, const std::string& state, const std::string& req) {
  Loaded l{load_topology_or_throw(fixture(net)), {}, {}};
  l.state = parse_state(l.topology, fixture(state));
  l.request = parse_requests(fixture(req)).at(0);
  return l;
}

std::vector<std::string> rows(const std::vector<PlannedOp>& ops) {
  std::vector<std::string> out;
  for (const auto& p : ops) out.push_back(std::string(to_string(p.op.kind)) + " " + p.op.target);
  return out;
}

PlanOptions no_plate() {
  PlanOptions o;
  o.require_plate_order = false;
  return o;
}

TEST(PlannerTest, MinimalCircuitIsHandEnumerable) {
  auto l = load("minimal/minimal.net", "minimal/minimal.state", "minimal/minimal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  std::vector<std::string> want = {"open CB",           "open MOD",        "tag MOD",          "close CB",
                                   "test_potential GA", "apply_ground GA", "tag GA",           "test_potential GB",
                                   "apply_ground GB",   "tag GB"};
  EXPECT_EQ(rows(plan.sequence), want);
  EXPECT_EQ(plan.plate_order, "P1");
  EXPECT_TRUE(plan.exact);
  EXPECT_EQ(plan.expected_dead, (std::set<std::string>{"a", "b"}));
}

TEST(PlannerTest, RestoreIsReverseWithInverseKinds) {
  auto l = load("minimal/minimal.net", "minimal/minimal.state", "minimal/minimal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  ASSERT_EQ(plan.sequence.size(), plan.restore_sequence.size());
  const std::size_t n = plan.sequence.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& fwd = plan.sequence[n - 1 - i].op;
    const auto& back = plan.restore_sequence[i].op;
    EXPECT_EQ(back.kind, inverse(fwd.kind));
    EXPECT_EQ(back.target, fwd.target);
    EXPECT_EQ(back.order_ref, fwd.order_ref + "-R");
  }
}

TEST(PlannerTest, SameInputsGiveByteIdenticalPlans) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  auto a = to_document(plan_isolation(l.topology, l.state, l.request));
  auto b = to_document(plan_isolation(l.topology, l.state, l.request));
  EXPECT_EQ(a, b);
}

TEST(PlannerTest, BridleRemovalHasSixFormsAndSymmetricCounts) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  std::vector<std::string> ids;
  for (const auto& f : plan.forms) ids.push_back(f.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"BR1-1", "BR1-2", "BR1-3", "BR1-4", "BR1-FE", "BR1-FW"}));
  EXPECT_EQ(plan.restore_forms.size(), 6u);
  auto [iso, restore] = plan.predicted_counts();
  EXPECT_EQ(iso, restore);
  EXPECT_GE(iso, 60u);
  EXPECT_LE(iso, 100u);
  EXPECT_TRUE(plan.exact);
}

TEST(PlannerTest, BridleRemovalSubstationInsideTargetIsRackedOutAndGrounded) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  auto r = rows(plan.sequence);
  auto has = [&](const std::string& row) { return std::find(r.begin(), r.end(), row) != r.end(); };
  EXPECT_TRUE(has("rack_out S05_MB"));
  EXPECT_TRUE(has("apply_ground S05_GB"));
  for (const auto& p : plan.sequence) {
    if (p.op.target == "S05_MB") EXPECT_EQ(p.step, 4);
  }
}

TEST(PlannerTest, DeviceTaggedByAnotherDirectorBecomesSharedControl) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  EXPECT_TRUE(plan.has_warning("SHARED_DEVICE"));
  ASSERT_EQ(plan.shared.count("BR1-FE"), 1u);
  EXPECT_EQ(plan.shared.at("BR1-FE").first, "PD2");
  EXPECT_EQ(plan.shared.at("BR1-FE").second, (std::set<std::string>{"S06_CBFEW"}));
  for (const auto& f : plan.forms) {
    if (f.id == "BR1-FE") EXPECT_EQ(f.shared_with, std::optional<std::string>("PD2"));
  }
  for (const auto& p : plan.sequence) EXPECT_NE(p.op.target, "S06_CBFEW");
}

TEST(PlannerTest, EveryPrefixOfBridleRemovalIsSafe) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  std::size_t checked = 0;
  auto check = [&](const PlannedOp& p, const SwitchingState& s) {
    auto e = compute_energization(l.topology, s);
    EXPECT_EQ(e.count(ViolationKind::kGroundFault), 0u) << p.op.target;
    EXPECT_EQ(e.count(ViolationKind::kPhaseTie), 0u) << p.op.target;
    ++checked;
  };
  auto end = run_sequence(l.topology, l.state, plan.sequence, plan.director, check);
  auto back = run_sequence(l.topology, end, plan.restore_sequence, plan.director, check);
  EXPECT_EQ(checked, plan.sequence.size() * 2);
  EXPECT_EQ(back.device_positions, l.state.device_positions);
  EXPECT_EQ(back.applied_grounds, l.state.applied_grounds);
  EXPECT_EQ(back.tags, l.state.tags);
}

TEST(PlannerTest, FinalDeadSetIsTargetClosure) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  auto plan = plan_isolation(l.topology, l.state, l.request);
  auto end = run_sequence(l.topology, l.state, plan.sequence, plan.director);
  auto e = compute_energization(l.topology, end);
  auto before = compute_energization(l.topology, l.state);
  auto closure = section_closure(l.topology, l.request.target_sections);
  for (const auto& n : closure) EXPECT_FALSE(e.energized.count(n)) << n;
  // Outside the target only the racked-out substation complex loses supply.
  for (const auto& n : before.energized) {
    if (closure.count(n) || n.rfind("S05_", 0) == 0) continue;
    EXPECT_TRUE(e.energized.count(n)) << n;
  }
  for (const auto& id : l.topology.track_layout().keep_live_assets) {
    auto ends = l.topology.sections()[l.topology.section_index(id)].endpoints;
    EXPECT_TRUE(e.energized.count(ends[0]) && e.energized.count(ends[1])) << id;
  }
}

TEST(PlannerTest, AerialGroundWidensFeedersThenRecloses) {
  auto t = load_topology_or_throw(fixture("fourtrack/fourtrack.net"));
  auto s = normal_state(t);
  auto req = parse_requests("request A1 aerial=1\ntarget T1_02b\n").at(0);
  auto plan = plan_isolation(t, s, req);
  auto r = rows(plan.sequence);
  auto at = [&](const std::string& row) { return std::find(r.begin(), r.end(), row) - r.begin(); };
  ASSERT_LT(at("apply_ground GA_T1_B02"), static_cast<long>(r.size()));
  EXPECT_LT(at("open S02_CBFEE"), at("apply_ground GA_T1_B02"));
  EXPECT_GT(at("close S02_CBFEE"), at("apply_ground GA_T1_B02"));
  EXPECT_TRUE(plan.exact);

  req.allow_aerial_grounds = false;
  auto skipped = plan_isolation(t, s, req);
  EXPECT_TRUE(skipped.has_warning("AERIAL_SKIPPED"));
  EXPECT_LT(skipped.sequence.size(), plan.sequence.size());
}

TEST(PlannerTest, SpanOverNineThousandFeetIsRejectedWithSplit) {
  auto t = load_topology_or_throw(fixture("fourtrack/fourtrack.net"));
  auto req = parse_requests("request W\ntarget T2_03a T2_03b T2_03c T2_04a T2_04b\n").at(0);
  try {
    plan_isolation(t, normal_state(t), req);
    FAIL() << "expected SPAN_EXCEEDED";
  } catch (const SpanExceeded& e) {
    EXPECT_EQ(e.kind(), "SPAN_EXCEEDED");
    ASSERT_EQ(e.splits().size(), 1u);
    std::size_t parts = 0;
    for (const auto& r : e.splits()[0].ranges) EXPECT_LE(r.hi - r.lo, kMaxWorkZoneFt);
    for (const auto& p : e.splits()[0].parts) parts += p.size();
    EXPECT_EQ(parts, 5u);
  }
}

TEST(PlannerTest, SignalFeederAndSupplyTapCannotBeTargets) {
  auto t = load_topology_or_throw(
      "zone Z\nnode a Z 0\nnode b Z 10\nsection SF signal_feeder a b 0 10\nsection ST supply_tap a b 0 10\n");
  for (const char* id : {"SF", "ST"}) {
    IsolationRequest r{"R", {id}, std::nullopt, "", false};
    try {
      check_request(t, r);
      FAIL() << id;
    } catch (const DomainError& e) {
      EXPECT_EQ(e.kind(), "INVALID_REQUEST");
    }
  }
}

TEST(PlannerTest, MissingBoxGroundIsReported) {
  auto doc = fixture("minimal/minimal.net");
  doc.replace(doc.find("ground GB box b"), 15, "");
  auto t = load_topology_or_throw(doc);
  try {
    plan_isolation(t, normal_state(t), parse_requests(fixture("minimal/minimal.req")).at(0));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.kind(), "NO_BOX_GROUND");
  }
}

TEST(PlannerTest, UnsafeStartingStateIsRefused) {
  auto t = load_topology_or_throw(fixture("minimal/minimal.net"));
  auto s = normal_state(t);
  s.applied_grounds.insert("GA");
  try {
    plan_isolation(t, s, parse_requests(fixture("minimal/minimal.req")).at(0));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.kind(), "UNSAFE_STATE");
  }
}

TEST(PlannerTest, PlanDocumentRoundTrips) {
  auto l = load("fourtrack/fourtrack.net", "fourtrack/bridle_removal.state", "fourtrack/bridle_removal.req");
  PlanOptions o;
  o.date = "2024-03-08";
  auto plan = plan_isolation(l.topology, l.state, l.request, o);
  auto again = parse_plan(to_document(plan));
  EXPECT_EQ(again.sequence, plan.sequence);
  EXPECT_EQ(again.restore_sequence, plan.restore_sequence);
  EXPECT_EQ(again.forms, plan.forms);
  EXPECT_EQ(again.restore_forms, plan.restore_forms);
  EXPECT_EQ(again.shared, plan.shared);
  EXPECT_EQ(again.expected_dead, plan.expected_dead);
  EXPECT_EQ(to_document(again), to_document(plan));
}

// Exhaustive configuration search agrees with the planner on small lines.
TEST(PlannerTest, RandomRailCasesMatchExhaustiveSearch) {
  std::mt19937_64 rng(20240308);
  int planned = 0;
  for (int i = 0; i < 300; ++i) {
    auto c = random_rail_case(rng);
    for (const auto& sec : c.trolley_sections) {
      IsolationRequest req{"R", {sec}, std::vector<std::string>{}, "", false};
      auto target = section_closure(c.topology, req.target_sections);
      auto oracle = search_isolation(c.topology, c.initial, target);
      SCOPED_TRACE(c.document + "target " + sec);
      try {
        auto plan = plan_isolation(c.topology, c.initial, req, no_plate());
        ++planned;
        EXPECT_TRUE(oracle.target_dead_reachable);
        EXPECT_EQ(plan.exact, oracle.exact_reachable);
        const auto device_ops = std::count_if(plan.sequence.begin(), plan.sequence.end(), [](const PlannedOp& p) {
          return p.op.kind == OpKind::kOpen || p.op.kind == OpKind::kClose;
        });
        if (plan.exact) EXPECT_LE(oracle.exact_distance, device_ops);
        auto end = run_sequence(c.topology, c.initial, plan.sequence, plan.director);
        auto e = compute_energization(c.topology, end);
        EXPECT_TRUE(e.safe());
        for (const auto& n : target) EXPECT_FALSE(e.energized.count(n)) << n;
      } catch (const DomainError& e) {
        EXPECT_FALSE(oracle.target_dead_reachable) << e.kind() << ": " << e.detail();
      }
    }
  }
  EXPECT_GT(planned, 300);
}

TEST(PlannerTest, RandomRailCasesRoundTripFromPerturbedStates) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    auto c = random_rail_case(rng, 6, true);
    IsolationRequest req{"R", {c.trolley_sections.front()}, std::vector<std::string>{}, "", false};
    IsolationPlan plan;
    try {
      plan = plan_isolation(c.topology, c.initial, req, no_plate());
    } catch (const DomainError&) {
      continue;
    }
    auto end = run_sequence(c.topology, c.initial, plan.sequence, plan.director);
    auto back = run_sequence(c.topology, end, plan.restore_sequence, plan.director);
    EXPECT_EQ(back.device_positions, c.initial.device_positions) << c.document;
    EXPECT_EQ(back.applied_grounds, c.initial.applied_grounds);
    EXPECT_EQ(back.tags, c.initial.tags);
  }
}

}  // namespace
}  // namespace tpi
