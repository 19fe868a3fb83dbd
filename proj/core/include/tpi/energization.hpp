#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tpi/topology.hpp"

namespace tpi {

struct Tag {
  std::string authority;
  std::string reason;
  std::int64_t timestamp = 0;

  friend bool operator==(const Tag&, const Tag&) = default;
};

using NodePair = std::pair<std::string, std::string>;

// Normalizes a pair so (a,b) and (b,a) compare equal.
NodePair make_node_pair(std::string a, std::string b);

struct SwitchingState {
  std::map<std::string, Position> device_positions;
  std::set<std::string> applied_grounds;
  std::set<std::string> sources_in_service;
  // Keyed by device or ground-point id.
  std::map<std::string, Tag> tags;
  // Node pairs bridged by a multi-pantograph train; normally empty.
  std::set<NodePair> pantograph_bridges;

  friend bool operator==(const SwitchingState&, const SwitchingState&) = default;
};

// Devices in their normal positions, every source in service, no grounds.
SwitchingState normal_state(const NetworkTopology& topology);

// Overrides on top of normal_state(). Records:
//   position <device> open|closed|racked_out
//   ground <ground_point>
//   source <id> in|out
//   sources [<id>...]      (replaces the in-service set)
//   tag <target> <authority> "<reason>" [<timestamp>]
//   bridge <nodeA> <nodeB>
SwitchingState parse_state(const NetworkTopology& topology, std::string_view document);
std::string to_document(const SwitchingState& state);

// Throws DomainError UNKNOWN_ID for ids the topology does not define.
void check_state_ids(const NetworkTopology& topology, const SwitchingState& state);

enum class ViolationKind { kGroundFault, kPhaseTie, kBackfeedHazard, kUnbalance };

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::kGroundFault;
  std::vector<std::string> participants;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct EnergizationOptions {
  // Unbalance is flagged when the busiest source carries more than this
  // multiple of the mean load.
  double unbalance_factor = 2.0;
};

struct EnergizationResult {
  std::set<std::string> energized;
  // Every node reachable from an applied ground (may overlap energized only
  // under a GROUND_FAULT).
  std::set<std::string> grounded;
  std::set<std::string> dead;
  std::vector<Violation> violations;

  [[nodiscard]] std::size_t count(ViolationKind k) const;
  [[nodiscard]] bool safe() const;  // no GROUND_FAULT, PHASE_TIE or BACKFEED_HAZARD
};

EnergizationResult compute_energization(const NetworkTopology& topology, const SwitchingState& state,
                                        const EnergizationOptions& options = {});

// `energized|dead|grounded <node>` and `violation <KIND> "<detail>" <participants...>` records.
std::string to_document(const EnergizationResult& result);

struct UnbalanceReport {
  std::map<std::string, double> scores;  // per in-service source
  double mean = 0.0;
  double max = 0.0;
  std::optional<Violation> violation;
};

UnbalanceReport unbalance_metric(const NetworkTopology& topology, const SwitchingState& state,
                                 const EnergizationOptions& options = {});

// Index-level view used by the switching engine; avoids string sets on hot paths.
struct NodeMarks {
  std::vector<char> energized;
  std::vector<char> grounded;
  // Connected component over sections + closed devices (bridges excluded).
  std::vector<Index> component;
};

NodeMarks mark_nodes(const NetworkTopology& topology, const SwitchingState& state, bool include_bridges = true);

bool device_conducts(const SwitchingState& state, const std::string& device_id);

}  // namespace tpi
