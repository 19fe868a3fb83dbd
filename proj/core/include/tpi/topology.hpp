#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tpi/records.hpp"

namespace tpi {

// Catenary structures are assumed 300 ft apart, which makes a 30-catenary
// work zone 9,000 ft long.
inline constexpr Feet kCatenarySpacingFt = 300;
inline constexpr Feet kMaxWorkZoneFt = 30 * kCatenarySpacingFt;
inline constexpr Feet kMaxWireRunFt = 10560;

enum class SectionKind { kTrolley, kFeeder, kSupplyTap, kSignalFeeder };
enum class DeviceKind { kBreaker, kMod, kKnifeSwitch, kTie };
enum class Control { kRemote, kManual };
enum class SourceKind { kSupplySubstation, kEqualizingSubstation };
enum class GroundKind { kLocal, kAerial, kBox };
enum class Position { kOpen, kClosed, kRackedOut };

std::string_view to_string(SectionKind k);
std::string_view to_string(DeviceKind k);
std::string_view to_string(Control c);
std::string_view to_string(SourceKind k);
std::string_view to_string(GroundKind k);
std::string_view to_string(Position p);

std::optional<SectionKind> parse_section_kind(std::string_view s);
std::optional<DeviceKind> parse_device_kind(std::string_view s);
std::optional<SourceKind> parse_source_kind(std::string_view s);
std::optional<GroundKind> parse_ground_kind(std::string_view s);
std::optional<Position> parse_position(std::string_view s);

using Index = std::size_t;
inline constexpr Index kNoIndex = static_cast<Index>(-1);

struct ElectricalNode {
  std::string id;
  std::string phase_zone;
  Feet location = 0;
  int line = 0;
};

struct Section {
  std::string id;
  SectionKind kind = SectionKind::kTrolley;
  std::optional<std::string> track;
  // Line group for feeder sections (e.g. one per side of the right-of-way).
  std::string group;
  std::array<std::string, 2> endpoints;
  Feet start_ft = 0;
  Feet end_ft = 0;
  int catenary_count = 0;
  int line = 0;

  [[nodiscard]] Feet length() const { return end_ft - start_ft; }
};

struct Device {
  std::string id;
  DeviceKind kind = DeviceKind::kBreaker;
  std::array<std::string, 2> terminals;
  bool load_break = true;
  Control control = Control::kRemote;
  double travel_minutes = 0.0;
  bool rackable = false;
  // Position in the normal (as-built) configuration.
  Position normal = Position::kClosed;
  std::string group;
  int line = 0;
};

struct Source {
  std::string id;
  SourceKind kind = SourceKind::kEqualizingSubstation;
  std::string node;
  std::string phase_zone;
  int line = 0;
};

struct GroundPoint {
  std::string id;
  GroundKind kind = GroundKind::kLocal;
  std::string node;
  bool requires_pole_climb = false;
  std::string group;
  int line = 0;
};

struct TrackSwitch {
  std::string id;
  std::string track_a;
  std::string track_b;
  Feet location = 0;
  int line = 0;

  [[nodiscard]] bool on_track(std::string_view track) const {
    return track == track_a || track == track_b;
  }
};

struct Interlocking {
  std::string id;
  Feet start_ft = 0;
  Feet end_ft = 0;
  std::vector<std::string> switches;
  int line = 0;
};

struct TrackLayout {
  std::vector<std::string> tracks;
  std::vector<TrackSwitch> switches;
  std::vector<Interlocking> interlockings;
  // Strategic trolley sections (interlockings, drawbridges) kept live when possible.
  std::vector<std::string> keep_live_assets;
};

struct BarredSegment {
  std::string track;
  std::string from_switch;
  std::string to_switch;
};

struct PlateOrder {
  std::string id;
  std::string description;
  std::vector<BarredSegment> barred_segments;
  std::vector<std::string> blocked_switches;
  int line = 0;
};

struct ValidationIssue {
  std::string code;
  std::string message;
  int line = 0;
  std::vector<std::string> participants;
};

enum class EdgeKind { kSection, kDevice };

// Undirected conductor: a section (always conducting) or a device (conducting
// when closed).
struct Edge {
  Index a = kNoIndex;
  Index b = kNoIndex;
  EdgeKind kind = EdgeKind::kSection;
  Index element = kNoIndex;
};

struct TopologyParts {
  std::vector<std::string> phase_zones;
  std::vector<ElectricalNode> nodes;
  std::vector<Section> sections;
  std::vector<Device> devices;
  std::vector<Source> sources;
  std::vector<GroundPoint> ground_points;
  TrackLayout track_layout;
  std::vector<PlateOrder> plate_orders;
};

// Immutable network model. Construction resolves references into indices but
// does not validate; use load_topology() or validate_topology().
class NetworkTopology {
 public:
  NetworkTopology() = default;
  explicit NetworkTopology(TopologyParts parts);

  [[nodiscard]] const std::vector<std::string>& phase_zones() const { return parts_.phase_zones; }
  [[nodiscard]] const std::vector<ElectricalNode>& nodes() const { return parts_.nodes; }
  [[nodiscard]] const std::vector<Section>& sections() const { return parts_.sections; }
  [[nodiscard]] const std::vector<Device>& devices() const { return parts_.devices; }
  [[nodiscard]] const std::vector<Source>& sources() const { return parts_.sources; }
  [[nodiscard]] const std::vector<GroundPoint>& ground_points() const { return parts_.ground_points; }
  [[nodiscard]] const TrackLayout& track_layout() const { return parts_.track_layout; }
  [[nodiscard]] const std::vector<PlateOrder>& plate_orders() const { return parts_.plate_orders; }
  [[nodiscard]] const TopologyParts& parts() const { return parts_; }

  [[nodiscard]] std::optional<Index> find_node(std::string_view id) const;
  [[nodiscard]] std::optional<Index> find_section(std::string_view id) const;
  [[nodiscard]] std::optional<Index> find_device(std::string_view id) const;
  [[nodiscard]] std::optional<Index> find_source(std::string_view id) const;
  [[nodiscard]] std::optional<Index> find_ground(std::string_view id) const;
  [[nodiscard]] std::optional<Index> find_switch(std::string_view id) const;
  [[nodiscard]] std::optional<Index> find_plate_order(std::string_view id) const;

  // Throwing lookups (DomainError UNKNOWN_ID).
  [[nodiscard]] Index node_index(std::string_view id) const;
  [[nodiscard]] Index section_index(std::string_view id) const;
  [[nodiscard]] Index device_index(std::string_view id) const;
  [[nodiscard]] Index source_index(std::string_view id) const;
  [[nodiscard]] Index ground_index(std::string_view id) const;

  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] std::span<const Index> incident_edges(Index node) const;
  [[nodiscard]] const std::array<Index, 2>& section_ends(Index s) const { return section_ends_[s]; }
  [[nodiscard]] const std::array<Index, 2>& device_ends(Index d) const { return device_ends_[d]; }
  [[nodiscard]] Index source_node(Index s) const { return source_nodes_[s]; }
  [[nodiscard]] Index ground_node(Index g) const { return ground_nodes_[g]; }

  // Track id (trolley) or feeder group a node belongs to; empty if none.
  [[nodiscard]] const std::string& node_line(Index node) const { return node_lines_[node]; }
  // Line group an operation on this device or ground point is filed under.
  [[nodiscard]] std::string device_line_group(Index d) const;
  [[nodiscard]] std::string ground_line_group(Index g) const;

  [[nodiscard]] bool is_keep_live(std::string_view section_id) const;
  [[nodiscard]] bool device_is_inter_zone(Index d) const;

 private:
  void build_indices();

  TopologyParts parts_;
  std::unordered_map<std::string, Index> node_ix_, section_ix_, device_ix_, source_ix_, ground_ix_,
      switch_ix_, plate_ix_;
  std::vector<std::array<Index, 2>> section_ends_;
  std::vector<std::array<Index, 2>> device_ends_;
  std::vector<Index> source_nodes_;
  std::vector<Index> ground_nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<Index> adjacency_;
  std::vector<std::string> node_lines_;
  std::vector<bool> node_is_trolley_;
};

struct LoadResult {
  std::optional<NetworkTopology> topology;
  std::vector<ValidationIssue> errors;

  [[nodiscard]] bool ok() const { return topology.has_value(); }
};

// Syntax only; throws ParseError. Plate-order records may appear inline.
NetworkTopology parse_topology(std::string_view document);

// Semantic checks; empty result means valid.
std::vector<ValidationIssue> validate_topology(const NetworkTopology& topology);

// Parse + validate. Syntax errors are reported as a single PARSE issue.
LoadResult load_topology(std::string_view document);

// Convenience for callers that treat invalid input as fatal (throws DomainError).
NetworkTopology load_topology_or_throw(std::string_view document);

// Plate order library document: `plate`, `bar` and `block` records only.
std::vector<PlateOrder> parse_plate_library(std::string_view document);

// Adds plate orders from a separate library document to a topology.
NetworkTopology with_plate_orders(const NetworkTopology& topology, std::vector<PlateOrder> library);

// Canonical network document; parse_topology(to_document(t)) reproduces t.
std::string to_document(const NetworkTopology& topology);

struct TopologySummary {
  std::size_t nodes = 0;
  std::size_t phase_zones = 0;
  std::map<std::string, std::size_t> sections_by_kind;
  std::map<std::string, std::size_t> devices_by_kind;
  std::size_t supply_substations = 0;
  std::size_t equalizing_substations = 0;
  std::size_t ground_points = 0;
  std::size_t tracks = 0;
  std::size_t switches = 0;
  std::size_t interlockings = 0;
  std::size_t keep_live_assets = 0;
  std::size_t plate_orders = 0;
  Feet trolley_extent_ft = 0;
};

TopologySummary summarize(const NetworkTopology& topology);

struct WireRunViolation {
  std::string track;
  std::vector<std::string> sections;
  Feet start_ft = 0;
  Feet end_ft = 0;
  Feet length_ft = 0;
};

// Reports each maximal section-connected trolley stretch on a track whose
// total length exceeds `limit_ft`.
std::vector<WireRunViolation> wire_run_check(const NetworkTopology& topology,
                                             Feet limit_ft = kMaxWireRunFt);

}  // namespace tpi
