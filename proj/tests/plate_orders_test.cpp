#include "tpi/plate_orders.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "oracles.hpp"

namespace tpi {
namespace {

std::string fixture(const std::string& rel) { return read_file(std::string(TPI_FIXTURE_DIR) + "/" + rel); }

IsolationRequest request_for(std::vector<std::string> sections) {
  IsolationRequest r;
  r.id = "R";
  r.target_sections = std::move(sections);
  return r;
}

TEST(PlateOrdersTest, MinimalPlateCoversTrackOneSection) {
  auto t = load_topology_or_throw(fixture("minimal/minimal.net"));
  const auto& p = t.plate_orders()[0];
  EXPECT_EQ(barred_track_feet(t, p), 2000);
  auto iv = barred_intervals(t, p);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv[0].first, "1");
  EXPECT_EQ(iv[0].second, (Interval{50, 2050}));
  EXPECT_TRUE(coverage_check(t, p, request_for({"T1"})).covered());
  // Feeders are not trolley targets and never need plate coverage.
  EXPECT_TRUE(coverage_check(t, p, request_for({"F1"})).covered());
}

TEST(PlateOrdersTest, MarginShrinksBarredIntervalsAndExposesGaps) {
  auto t = load_topology_or_throw(fixture("minimal/minimal.net"));
  const auto& p = t.plate_orders()[0];
  auto r = coverage_check(t, p, request_for({"T1"}), 100);
  ASSERT_EQ(r.gaps.size(), 2u);
  EXPECT_EQ(r.gaps[0], (CoverageGap{"T1", "1", {100, 150}}));
  EXPECT_EQ(r.gaps[1], (CoverageGap{"T1", "1", {1950, 2000}}));
  EXPECT_EQ(r.gap_feet(), 100);
  EXPECT_FALSE(test_support::oracle_covers(t, p, request_for({"T1"}), 100));
  EXPECT_THROW(select_plate_order(t, t.plate_orders(), request_for({"T1"}), 100), DomainError);
}

TEST(PlateOrdersTest, SelectionMatchesFullScanOnFourTrack) {
  auto t = load_topology_or_throw(fixture("fourtrack/fourtrack.net"));
  ASSERT_EQ(t.plate_orders().size(), 200u);
  std::map<std::string, std::vector<const Section*>> by_track;
  for (const auto& s : t.sections()) {
    if (s.kind == SectionKind::kTrolley) by_track[*s.track].push_back(&s);
  }
  for (auto& [track, v] : by_track) {
    std::sort(v.begin(), v.end(), [](const Section* a, const Section* b) { return a->start_ft < b->start_ft; });
  }
  std::vector<std::string> tracks;
  for (const auto& [track, v] : by_track) tracks.push_back(track);

  std::mt19937_64 rng(1234);
  int selected = 0;
  for (int i = 0; i < 300; ++i) {
    const auto& v = by_track[tracks[rng() % tracks.size()]];
    const std::size_t n = 1 + rng() % 3;
    const std::size_t start = rng() % (v.size() - n + 1);
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < n; ++k) ids.push_back(v[start + k]->id);
    const Feet margin = (rng() % 2) ? 0 : 100;
    auto req = request_for(ids);
    auto expect = test_support::oracle_select(t, t.plate_orders(), req, margin);
    if (expect) {
      EXPECT_EQ(select_plate_order(t, t.plate_orders(), req, margin).id, *expect);
      ++selected;
    } else {
      EXPECT_THROW(select_plate_order(t, t.plate_orders(), req, margin), DomainError);
    }
    for (std::size_t k = 0; k < 5; ++k) {
      const auto& p = t.plate_orders()[rng() % t.plate_orders().size()];
      EXPECT_EQ(coverage_check(t, p, req, margin).covered(), test_support::oracle_covers(t, p, req, margin));
      EXPECT_EQ(barred_track_feet(t, p), test_support::oracle_barred_feet(t, p));
    }
  }
  EXPECT_GT(selected, 50);
}

// Independent transcription of the protection table.
std::optional<PopsState> table_next(PopsState s, PopsEvent e) {
  using S = PopsState;
  using E = PopsEvent;
  if (e == E::kAbort) return S::kIdle;
  static const std::map<std::pair<S, E>, S> kTable = {
      {{S::kIdle, E::kRequest}, S::kRequested},
      {{S::kRequested, E::kAcknowledge}, S::kAcknowledged},
      {{S::kAcknowledged, E::kPutInEffect}, S::kInEffect},
      {{S::kInEffect, E::kRequestRelease}, S::kReleaseRequested},
      {{S::kReleaseRequested, E::kRelease}, S::kReleased},
  };
  auto it = kTable.find({s, e});
  return it == kTable.end() ? std::nullopt : std::optional(it->second);
}

TEST(PlateOrdersTest, PopsMatchesTableUnderRandomEvents) {
  const std::vector<PopsEvent> events = {PopsEvent::kRequest,        PopsEvent::kAcknowledge, PopsEvent::kPutInEffect,
                                         PopsEvent::kRequestRelease, PopsEvent::kRelease,     PopsEvent::kAbort};
  std::mt19937_64 rng(9);
  int legal = 0;
  for (int i = 0; i < 10000; ++i) {
    PopsSession s;
    s.plate_order = "P1";
    for (int k = 0; k < 8; ++k) {
      const auto e = events[rng() % events.size()];
      const auto expect = table_next(s.state, e);
      if (!expect) {
        auto before = s;
        EXPECT_THROW(s = pops_transition(s, e, "x", k), DomainError);
        EXPECT_EQ(s, before);
        continue;
      }
      const auto from = s.state;
      s = pops_transition(s, e, "x", k);
      ++legal;
      ASSERT_EQ(s.state, *expect);
      ASSERT_EQ(s.log.back(), (PopsLogEntry{from, *expect, e, "x", k}));
      EXPECT_EQ(s.locked(), s.state == PopsState::kInEffect);
    }
  }
  EXPECT_GT(legal, 10000);
}

TEST(PlateOrdersTest, RolesGateEvents) {
  EXPECT_TRUE(role_may_issue(Role::kDirector, PopsEvent::kRequest));
  EXPECT_TRUE(role_may_issue(Role::kDirector, PopsEvent::kRequestRelease));
  EXPECT_FALSE(role_may_issue(Role::kDirector, PopsEvent::kAcknowledge));
  EXPECT_TRUE(role_may_issue(Role::kDispatcher, PopsEvent::kPutInEffect));
  EXPECT_TRUE(role_may_issue(Role::kDispatcher, PopsEvent::kRelease));
  EXPECT_FALSE(role_may_issue(Role::kDispatcher, PopsEvent::kRequest));
  EXPECT_TRUE(role_may_issue(Role::kDirector, PopsEvent::kAbort));
  EXPECT_TRUE(role_may_issue(Role::kDispatcher, PopsEvent::kAbort));

  PopsSession s{"P1", PopsState::kIdle, "", "", {}};
  EXPECT_THROW(pops_transition(s, PopsEvent::kRequest, Role::kDispatcher, "D1", 0), DomainError);
  s = pops_transition(s, PopsEvent::kRequest, Role::kDirector, "PD1", 1);
  s = pops_transition(s, PopsEvent::kAcknowledge, Role::kDispatcher, "D1", 2);
  EXPECT_EQ(s.director, "PD1");
  EXPECT_EQ(s.dispatcher, "D1");
  for (auto st : {PopsState::kIdle, PopsState::kReleased}) EXPECT_EQ(parse_pops_state(to_string(st)), st);
  EXPECT_EQ(parse_role("dispatcher"), Role::kDispatcher);
  EXPECT_FALSE(parse_pops_event("bogus"));
}

TEST(PlateOrdersTest, LockedSwitchesComeFromSessionsInEffect) {
  auto t = load_topology_or_throw(fixture("minimal/minimal.net"));
  PopsSession s{"P1", PopsState::kAcknowledged, "PD1", "D1", {}};
  EXPECT_TRUE(locked_switches(t, {s}).empty());
  s = pops_transition(s, PopsEvent::kPutInEffect, "D1", 3);
  EXPECT_EQ(locked_switches(t, {s}), (std::set<std::string>{"X1"}));
  s = pops_transition(s, PopsEvent::kRequestRelease, "PD1", 4);
  EXPECT_TRUE(locked_switches(t, {s}).empty());
}

}  // namespace
}  // namespace tpi
