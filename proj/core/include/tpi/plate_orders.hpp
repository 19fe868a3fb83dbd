#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tpi/isolation_request.hpp"
#include "tpi/topology.hpp"

namespace tpi {

struct Interval {
  Feet lo = 0;
  Feet hi = 0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Barred stationing per barred segment, shrunk by `margin_ft` at both ends.
std::vector<std::pair<std::string, Interval>> barred_intervals(const NetworkTopology& topology,
                                                               const PlateOrder& plate, Feet margin_ft = 0);

// Total barred track-feet (switch-to-switch distance summed over segments).
Feet barred_track_feet(const NetworkTopology& topology, const PlateOrder& plate);

struct CoverageGap {
  std::string section;
  std::string track;
  Interval span;

  friend bool operator==(const CoverageGap&, const CoverageGap&) = default;
};

struct CoverageResult {
  std::vector<CoverageGap> gaps;

  [[nodiscard]] bool covered() const { return gaps.empty(); }
  [[nodiscard]] Feet gap_feet() const;
};

// A trolley target is covered when its stationing lies inside the union of
// the plate's barred intervals on its track. Non-trolley targets are ignored.
CoverageResult coverage_check(const NetworkTopology& topology, const PlateOrder& plate,
                              const IsolationRequest& request, Feet margin_ft = 0);

// Covering order with the fewest barred track-feet, ties by id. Throws
// DomainError NO_PLATE_ORDER if nothing covers.
const PlateOrder& select_plate_order(const NetworkTopology& topology, const std::vector<PlateOrder>& library,
                                     const IsolationRequest& request, Feet margin_ft = 0);

enum class PopsState { kIdle, kRequested, kAcknowledged, kInEffect, kReleaseRequested, kReleased };
enum class PopsEvent { kRequest, kAcknowledge, kPutInEffect, kRequestRelease, kRelease, kAbort };
enum class Role { kDirector, kDispatcher };

std::string_view to_string(PopsState s);
std::string_view to_string(PopsEvent e);
std::string_view to_string(Role r);
std::optional<PopsState> parse_pops_state(std::string_view s);
std::optional<PopsEvent> parse_pops_event(std::string_view s);
std::optional<Role> parse_role(std::string_view s);

// The bare transition table; nullopt for illegal pairs.
std::optional<PopsState> pops_next(PopsState state, PopsEvent event);

// Which role may issue an event (abort: either).
bool role_may_issue(Role role, PopsEvent event);

struct PopsLogEntry {
  PopsState from = PopsState::kIdle;
  PopsState to = PopsState::kIdle;
  PopsEvent event = PopsEvent::kRequest;
  std::string actor;
  std::int64_t timestamp = 0;

  friend bool operator==(const PopsLogEntry&, const PopsLogEntry&) = default;
};

struct PopsSession {
  std::string plate_order;
  PopsState state = PopsState::kIdle;
  std::string director;
  std::string dispatcher;
  std::vector<PopsLogEntry> log;

  [[nodiscard]] bool locked() const { return state == PopsState::kInEffect; }

  friend bool operator==(const PopsSession&, const PopsSession&) = default;
};

// Applies a legal transition and logs it. Throws DomainError
// ILLEGAL_TRANSITION (session untouched since it is taken by value).
PopsSession pops_transition(PopsSession session, PopsEvent event, const std::string& actor = {},
                            std::int64_t timestamp = 0);

// Role-checked variant; a wrong role is also ILLEGAL_TRANSITION.
PopsSession pops_transition(PopsSession session, PopsEvent event, Role role, const std::string& actor,
                            std::int64_t timestamp);

// Switches locked by the sessions currently in effect.
std::set<std::string> locked_switches(const NetworkTopology& topology, const std::vector<PopsSession>& sessions);

}  // namespace tpi
