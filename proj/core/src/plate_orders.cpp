#include "tpi/plate_orders.hpp"

#include <algorithm>
#include <map>

namespace tpi {

std::vector<std::pair<std::string, Interval>> barred_intervals(const NetworkTopology& t, const PlateOrder& plate,
                                                               Feet margin_ft) {
  std::vector<std::pair<std::string, Interval>> out;
  const auto& switches = t.track_layout().switches;
  for (const auto& seg : plate.barred_segments) {
    auto a = t.find_switch(seg.from_switch);
    auto b = t.find_switch(seg.to_switch);
    if (!a || !b) continue;
    Feet lo = std::min(switches[*a].location, switches[*b].location) + margin_ft;
    Feet hi = std::max(switches[*a].location, switches[*b].location) - margin_ft;
    if (lo <= hi) out.emplace_back(seg.track, Interval{lo, hi});
  }
  return out;
}

Feet barred_track_feet(const NetworkTopology& t, const PlateOrder& plate) {
  Feet total = 0;
  for (const auto& [track, iv] : barred_intervals(t, plate, 0)) total += iv.hi - iv.lo;
  return total;
}

Feet CoverageResult::gap_feet() const {
  Feet total = 0;
  for (const auto& g : gaps) total += g.span.hi - g.span.lo;
  return total;
}

CoverageResult coverage_check(const NetworkTopology& t, const PlateOrder& plate, const IsolationRequest& request,
                              Feet margin_ft) {
  std::map<std::string, std::vector<Interval>> by_track;
  for (auto& [track, iv] : barred_intervals(t, plate, margin_ft)) by_track[track].push_back(iv);
  for (auto& [track, ivs] : by_track) {
    std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  }

  CoverageResult result;
  for (const auto& id : request.target_sections) {
    auto si = t.find_section(id);
    if (!si) continue;
    const auto& sec = t.sections()[*si];
    if (sec.kind != SectionKind::kTrolley || !sec.track) continue;
    Feet cursor = sec.start_ft;
    auto it = by_track.find(*sec.track);
    if (it != by_track.end()) {
      for (const auto& iv : it->second) {
        if (iv.hi < cursor) continue;
        if (iv.lo > cursor) {
          Feet stop = std::min(iv.lo, sec.end_ft);
          if (stop > cursor) result.gaps.push_back({sec.id, *sec.track, {cursor, stop}});
        }
        cursor = std::max(cursor, iv.hi);
        if (cursor >= sec.end_ft) break;
      }
    }
    if (cursor < sec.end_ft) result.gaps.push_back({sec.id, *sec.track, {cursor, sec.end_ft}});
  }
  return result;
}

const PlateOrder& select_plate_order(const NetworkTopology& t, const std::vector<PlateOrder>& library,
                                     const IsolationRequest& request, Feet margin_ft) {
  const PlateOrder* best = nullptr;
  Feet best_feet = 0;
  for (const auto& plate : library) {
    if (!coverage_check(t, plate, request, margin_ft).covered()) continue;
    Feet feet = barred_track_feet(t, plate);
    if (!best || feet < best_feet || (feet == best_feet && plate.id < best->id)) {
      best = &plate;
      best_feet = feet;
    }
  }
  if (!best) {
    throw DomainError("NO_PLATE_ORDER", {request.id},
                      "no plate order in the library covers request '" + request.id + "'");
  }
  return *best;
}

std::string_view to_string(PopsState s) {
  switch (s) {
    case PopsState::kIdle: return "Idle";
    case PopsState::kRequested: return "Requested";
    case PopsState::kAcknowledged: return "Acknowledged";
    case PopsState::kInEffect: return "InEffect";
    case PopsState::kReleaseRequested: return "ReleaseRequested";
    case PopsState::kReleased: return "Released";
  }
  return "?";
}

std::string_view to_string(PopsEvent e) {
  switch (e) {
    case PopsEvent::kRequest: return "request";
    case PopsEvent::kAcknowledge: return "acknowledge";
    case PopsEvent::kPutInEffect: return "put_in_effect";
    case PopsEvent::kRequestRelease: return "request_release";
    case PopsEvent::kRelease: return "release";
    case PopsEvent::kAbort: return "abort";
  }
  return "?";
}

std::string_view to_string(Role r) { return r == Role::kDirector ? "director" : "dispatcher"; }

std::optional<PopsState> parse_pops_state(std::string_view s) {
  for (auto v : {PopsState::kIdle, PopsState::kRequested, PopsState::kAcknowledged, PopsState::kInEffect,
                 PopsState::kReleaseRequested, PopsState::kReleased}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<PopsEvent> parse_pops_event(std::string_view s) {
  for (auto v : {PopsEvent::kRequest, PopsEvent::kAcknowledge, PopsEvent::kPutInEffect, PopsEvent::kRequestRelease,
                 PopsEvent::kRelease, PopsEvent::kAbort}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "director") return Role::kDirector;
  if (s == "dispatcher") return Role::kDispatcher;
  return std::nullopt;
}

std::optional<PopsState> pops_next(PopsState state, PopsEvent event) {
  if (event == PopsEvent::kAbort) return PopsState::kIdle;
  switch (state) {
    case PopsState::kIdle:
      if (event == PopsEvent::kRequest) return PopsState::kRequested;
      break;
    case PopsState::kRequested:
      if (event == PopsEvent::kAcknowledge) return PopsState::kAcknowledged;
      break;
    case PopsState::kAcknowledged:
      if (event == PopsEvent::kPutInEffect) return PopsState::kInEffect;
      break;
    case PopsState::kInEffect:
      if (event == PopsEvent::kRequestRelease) return PopsState::kReleaseRequested;
      break;
    case PopsState::kReleaseRequested:
      if (event == PopsEvent::kRelease) return PopsState::kReleased;
      break;
    case PopsState::kReleased:
      break;
  }
  return std::nullopt;
}

bool role_may_issue(Role role, PopsEvent event) {
  switch (event) {
    case PopsEvent::kRequest:
    case PopsEvent::kRequestRelease:
      return role == Role::kDirector;
    case PopsEvent::kAcknowledge:
    case PopsEvent::kPutInEffect:
    case PopsEvent::kRelease:
      return role == Role::kDispatcher;
    case PopsEvent::kAbort:
      return true;
  }
  return false;
}

PopsSession pops_transition(PopsSession session, PopsEvent event, const std::string& actor, std::int64_t timestamp) {
  auto next = pops_next(session.state, event);
  if (!next) {
    throw DomainError("ILLEGAL_TRANSITION", {session.plate_order, std::string(to_string(session.state))},
                      "cannot " + std::string(to_string(event)) + " from " + std::string(to_string(session.state)));
  }
  session.log.push_back({session.state, *next, event, actor, timestamp});
  session.state = *next;
  return session;
}

PopsSession pops_transition(PopsSession session, PopsEvent event, Role role, const std::string& actor,
                            std::int64_t timestamp) {
  if (!role_may_issue(role, event)) {
    throw DomainError("ILLEGAL_TRANSITION", {session.plate_order, std::string(to_string(role))},
                      "the " + std::string(to_string(role)) + " may not " + std::string(to_string(event)));
  }
  if (event == PopsEvent::kRequest && role == Role::kDirector) session.director = actor;
  if (event == PopsEvent::kAcknowledge) session.dispatcher = actor;
  return pops_transition(std::move(session), event, actor, timestamp);
}

std::set<std::string> locked_switches(const NetworkTopology& t, const std::vector<PopsSession>& sessions) {
  std::set<std::string> out;
  for (const auto& s : sessions) {
    if (!s.locked()) continue;
    if (auto p = t.find_plate_order(s.plate_order)) {
      const auto& blocked = t.plate_orders()[*p].blocked_switches;
      out.insert(blocked.begin(), blocked.end());
    }
  }
  return out;
}

}  // namespace tpi
