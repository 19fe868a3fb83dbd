#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpi/energization.hpp"
#include "tpi/operating_order.hpp"
#include "tpi/planner.hpp"
#include "tpi/plate_orders.hpp"
#include "tpi/timeline.hpp"
#include "tpi/topology.hpp"

namespace tpi {

// One state change. Rendered as `seq=<n> kind=<k> key=value ...` with values
// percent-escaped so every event stays on one line.
struct Event {
  std::uint64_t seq = 0;
  std::string kind;
  std::map<std::string, std::string> fields;

  [[nodiscard]] std::string to_line() const;
  [[nodiscard]] const std::string& at(const std::string& key) const;

  friend bool operator==(const Event&, const Event&) = default;
};

Event parse_event(std::string_view line);
std::vector<Event> parse_events(std::string_view text);

// Rebuilds a switching state from the normal configuration and an event log.
SwitchingState fold_events(const NetworkTopology& topology, const std::vector<Event>& events);

struct StepOutcome {
  std::string order_id;
  std::size_t index = 0;
  SwitchOp op;
  OpRecord record;
  bool complete = false;
};

// A simulated control room: one switching state, its orders and POPS
// sessions. Every mutation holds the room lock, so commands are totally
// ordered and each appends exactly one event.
class ControlRoom {
 public:
  ControlRoom(NetworkTopology topology, SwitchingState initial, PlanOptions options = {});

  [[nodiscard]] const NetworkTopology& topology() const { return topology_; }
  [[nodiscard]] SwitchingState state() const;
  [[nodiscard]] std::uint64_t last_seq() const;
  // State and the seq of the last event folded into it, read atomically.
  [[nodiscard]] std::pair<SwitchingState, std::uint64_t> snapshot() const;

  // Plans `request` for `director`, registers isolation and restore forms and
  // an Idle POPS session for the selected plate order.
  IsolationPlan create_isolation(const IsolationRequest& request, const std::string& director);

  // Registers a hand-written order (drills, interlock demonstrations).
  void add_order(OperatingOrder order);

  [[nodiscard]] OperatingOrder order(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> order_ids() const;

  // Executes the next op of `order_id` acting as `director`. Isolation forms
  // need their plate order in effect; restore forms need release requested.
  StepOutcome step(const std::string& order_id, const std::string& director);
  void confirm(const std::string& order_id, const std::string& director);

  PopsSession pops(const std::string& plate_order, PopsEvent event, Role role, const std::string& actor);
  [[nodiscard]] std::optional<PopsSession> pops_session(const std::string& plate_order) const;
  [[nodiscard]] std::vector<PopsSession> pops_sessions() const;

  [[nodiscard]] std::optional<IsolationPlan> plan(const std::string& request_id) const;

  // Events with seq > since; blocks up to `wait` for the first one.
  std::vector<Event> events_since(std::uint64_t since, std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const;

 private:
  void append(std::string kind, std::map<std::string, std::string> fields);
  OperatingOrder& order_ref(const std::string& id);

  NetworkTopology topology_;
  PlanOptions options_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  SwitchingState state_;
  std::map<std::string, OperatingOrder> orders_;
  std::map<std::string, IsolationPlan> plans_;
  std::map<std::string, PopsSession> sessions_;
  std::vector<Event> events_;
  std::int64_t clock_ = 0;
};

}  // namespace tpi
