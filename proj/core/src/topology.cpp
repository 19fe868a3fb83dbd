#include "tpi/topology.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tpi {

std::string_view to_string(SectionKind k) {
  switch (k) {
    case SectionKind::kTrolley: return "trolley";
    case SectionKind::kFeeder: return "feeder";
    case SectionKind::kSupplyTap: return "supply_tap";
    case SectionKind::kSignalFeeder: return "signal_feeder";
  }
  return "?";
}

std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::kBreaker: return "breaker";
    case DeviceKind::kMod: return "mod";
    case DeviceKind::kKnifeSwitch: return "knife_switch";
    case DeviceKind::kTie: return "tie";
  }
  return "?";
}

std::string_view to_string(Control c) { return c == Control::kRemote ? "remote" : "manual"; }

std::string_view to_string(SourceKind k) {
  return k == SourceKind::kSupplySubstation ? "supply_substation" : "equalizing_substation";
}

std::string_view to_string(GroundKind k) {
  switch (k) {
    case GroundKind::kLocal: return "local";
    case GroundKind::kAerial: return "aerial";
    case GroundKind::kBox: return "box";
  }
  return "?";
}

std::string_view to_string(Position p) {
  switch (p) {
    case Position::kOpen: return "open";
    case Position::kClosed: return "closed";
    case Position::kRackedOut: return "racked_out";
  }
  return "?";
}

std::optional<SectionKind> parse_section_kind(std::string_view s) {
  if (s == "trolley") return SectionKind::kTrolley;
  if (s == "feeder") return SectionKind::kFeeder;
  if (s == "supply_tap") return SectionKind::kSupplyTap;
  if (s == "signal_feeder") return SectionKind::kSignalFeeder;
  return std::nullopt;
}

std::optional<DeviceKind> parse_device_kind(std::string_view s) {
  if (s == "breaker") return DeviceKind::kBreaker;
  if (s == "mod") return DeviceKind::kMod;
  if (s == "knife_switch") return DeviceKind::kKnifeSwitch;
  if (s == "tie") return DeviceKind::kTie;
  return std::nullopt;
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  if (s == "supply_substation") return SourceKind::kSupplySubstation;
  if (s == "equalizing_substation") return SourceKind::kEqualizingSubstation;
  return std::nullopt;
}

std::optional<GroundKind> parse_ground_kind(std::string_view s) {
  if (s == "local") return GroundKind::kLocal;
  if (s == "aerial") return GroundKind::kAerial;
  if (s == "box") return GroundKind::kBox;
  return std::nullopt;
}

std::optional<Position> parse_position(std::string_view s) {
  if (s == "open") return Position::kOpen;
  if (s == "closed") return Position::kClosed;
  if (s == "racked_out") return Position::kRackedOut;
  return std::nullopt;
}

NetworkTopology::NetworkTopology(TopologyParts parts) : parts_(std::move(parts)) {
  build_indices();
}

void NetworkTopology::build_indices() {
  auto index_all = [](auto& map, const auto& items) {
    for (Index i = 0; i < items.size(); ++i) map.emplace(items[i].id, i);
  };
  index_all(node_ix_, parts_.nodes);
  index_all(section_ix_, parts_.sections);
  index_all(device_ix_, parts_.devices);
  index_all(source_ix_, parts_.sources);
  index_all(ground_ix_, parts_.ground_points);
  index_all(switch_ix_, parts_.track_layout.switches);
  index_all(plate_ix_, parts_.plate_orders);

  auto resolve = [this](const std::string& id) {
    auto it = node_ix_.find(id);
    return it == node_ix_.end() ? kNoIndex : it->second;
  };

  for (auto& src : parts_.sources) {
    if (auto n = find_node(src.node)) src.phase_zone = parts_.nodes[*n].phase_zone;
  }

  section_ends_.clear();
  device_ends_.clear();
  edges_.clear();
  for (Index s = 0; s < parts_.sections.size(); ++s) {
    const auto& sec = parts_.sections[s];
    section_ends_.push_back({resolve(sec.endpoints[0]), resolve(sec.endpoints[1])});
    if (section_ends_.back()[0] != kNoIndex && section_ends_.back()[1] != kNoIndex) {
      edges_.push_back({section_ends_.back()[0], section_ends_.back()[1], EdgeKind::kSection, s});
    }
  }
  for (Index d = 0; d < parts_.devices.size(); ++d) {
    const auto& dev = parts_.devices[d];
    device_ends_.push_back({resolve(dev.terminals[0]), resolve(dev.terminals[1])});
    if (device_ends_.back()[0] != kNoIndex && device_ends_.back()[1] != kNoIndex) {
      edges_.push_back({device_ends_.back()[0], device_ends_.back()[1], EdgeKind::kDevice, d});
    }
  }
  source_nodes_.clear();
  for (const auto& src : parts_.sources) source_nodes_.push_back(resolve(src.node));
  ground_nodes_.clear();
  for (const auto& gp : parts_.ground_points) ground_nodes_.push_back(resolve(gp.node));

  const std::size_t n = parts_.nodes.size();
  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : edges_) {
    ++degree[e.a];
    if (e.b != e.a) ++degree[e.b];
  }
  adjacency_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) adjacency_offsets_[i + 1] = adjacency_offsets_[i] + degree[i];
  adjacency_.assign(adjacency_offsets_[n], kNoIndex);
  std::vector<std::size_t> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
  for (Index e = 0; e < edges_.size(); ++e) {
    adjacency_[fill[edges_[e].a]++] = e;
    if (edges_[e].b != edges_[e].a) adjacency_[fill[edges_[e].b]++] = e;
  }

  node_lines_.assign(n, std::string());
  node_is_trolley_.assign(n, false);
  for (Index i = 0; i < n; ++i) {
    std::string trolley, feeder, other;
    for (Index e : incident_edges(i)) {
      if (edges_[e].kind != EdgeKind::kSection) continue;
      const auto& sec = parts_.sections[edges_[e].element];
      if (sec.kind == SectionKind::kTrolley && sec.track) {
        if (trolley.empty() || *sec.track < trolley) trolley = *sec.track;
      } else if (sec.kind == SectionKind::kFeeder) {
        std::string g = sec.group.empty() ? std::string("feeder") : sec.group;
        if (feeder.empty() || g < feeder) feeder = g;
      } else if (!sec.group.empty()) {
        if (other.empty() || sec.group < other) other = sec.group;
      }
    }
    node_is_trolley_[i] = !trolley.empty();
    node_lines_[i] = !trolley.empty() ? trolley : !feeder.empty() ? feeder : other;
  }
}

namespace {

template <class Map>
std::optional<Index> lookup(const Map& m, std::string_view id) {
  auto it = m.find(std::string(id));
  if (it == m.end()) return std::nullopt;
  return it->second;
}

[[noreturn]] void unknown(std::string_view what, std::string_view id) {
  throw DomainError("UNKNOWN_ID", {std::string(id)}, "unknown " + std::string(what) + " '" + std::string(id) + "'");
}

}  // namespace

std::optional<Index> NetworkTopology::find_node(std::string_view id) const { return lookup(node_ix_, id); }
std::optional<Index> NetworkTopology::find_section(std::string_view id) const { return lookup(section_ix_, id); }
std::optional<Index> NetworkTopology::find_device(std::string_view id) const { return lookup(device_ix_, id); }
std::optional<Index> NetworkTopology::find_source(std::string_view id) const { return lookup(source_ix_, id); }
std::optional<Index> NetworkTopology::find_ground(std::string_view id) const { return lookup(ground_ix_, id); }
std::optional<Index> NetworkTopology::find_switch(std::string_view id) const { return lookup(switch_ix_, id); }
std::optional<Index> NetworkTopology::find_plate_order(std::string_view id) const { return lookup(plate_ix_, id); }

Index NetworkTopology::node_index(std::string_view id) const {
  if (auto i = find_node(id)) return *i;
  unknown("node", id);
}
Index NetworkTopology::section_index(std::string_view id) const {
  if (auto i = find_section(id)) return *i;
  unknown("section", id);
}
Index NetworkTopology::device_index(std::string_view id) const {
  if (auto i = find_device(id)) return *i;
  unknown("device", id);
}
Index NetworkTopology::source_index(std::string_view id) const {
  if (auto i = find_source(id)) return *i;
  unknown("source", id);
}
Index NetworkTopology::ground_index(std::string_view id) const {
  if (auto i = find_ground(id)) return *i;
  unknown("ground point", id);
}

std::span<const Index> NetworkTopology::incident_edges(Index node) const {
  return {adjacency_.data() + adjacency_offsets_[node], adjacency_offsets_[node + 1] - adjacency_offsets_[node]};
}

std::string NetworkTopology::device_line_group(Index d) const {
  const auto& dev = parts_.devices[d];
  if (!dev.group.empty()) return dev.group;
  std::string trolley, any;
  for (Index n : device_ends_[d]) {
    if (n == kNoIndex || node_lines_[n].empty()) continue;
    if (node_is_trolley_[n] && (trolley.empty() || node_lines_[n] < trolley)) trolley = node_lines_[n];
    if (any.empty() || node_lines_[n] < any) any = node_lines_[n];
  }
  if (!trolley.empty()) return trolley;
  return any.empty() ? "general" : any;
}

std::string NetworkTopology::ground_line_group(Index g) const {
  const auto& gp = parts_.ground_points[g];
  if (!gp.group.empty()) return gp.group;
  Index n = ground_nodes_[g];
  if (n == kNoIndex || node_lines_[n].empty()) return "general";
  return node_lines_[n];
}

bool NetworkTopology::is_keep_live(std::string_view section_id) const {
  const auto& kl = parts_.track_layout.keep_live_assets;
  return std::find(kl.begin(), kl.end(), section_id) != kl.end();
}

bool NetworkTopology::device_is_inter_zone(Index d) const {
  auto [a, b] = device_ends_[d];
  if (a == kNoIndex || b == kNoIndex) return false;
  return parts_.nodes[a].phase_zone != parts_.nodes[b].phase_zone;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

void check_arity(const Record& r, std::size_t n) {
  if (r.fields.size() != n) {
    throw ParseError(r.line, "'" + r.keyword + "' expects " + std::to_string(n) + " positional fields, got " +
                                 std::to_string(r.fields.size()));
  }
}

void check_attrs(const Record& r, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : r.attrs) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ParseError(r.line, "unknown attribute '" + k + "' on '" + r.keyword + "'");
    }
  }
}

void parse_plate_record(const Record& r, std::vector<PlateOrder>& plates) {
  if (r.keyword == "plate") {
    check_attrs(r, {});
    if (r.fields.empty() || r.fields.size() > 2) throw ParseError(r.line, "'plate' expects <id> \"<description>\"");
    PlateOrder p;
    p.id = r.fields[0];
    p.description = r.fields.size() > 1 ? r.fields[1] : std::string();
    p.line = r.line;
    plates.push_back(std::move(p));
    return;
  }
  if (plates.empty()) throw ParseError(r.line, "'" + r.keyword + "' must follow a 'plate' record");
  if (r.keyword == "bar") {
    check_arity(r, 3);
    check_attrs(r, {});
    plates.back().barred_segments.push_back({r.fields[0], r.fields[1], r.fields[2]});
  } else {
    check_arity(r, 1);
    check_attrs(r, {});
    plates.back().blocked_switches.push_back(r.fields[0]);
  }
}

}  // namespace

NetworkTopology parse_topology(std::string_view document) {
  TopologyParts parts;
  for (const auto& r : parse_records(document)) {
    const auto& kw = r.keyword;
    if (kw == "zone") {
      check_arity(r, 1);
      check_attrs(r, {});
      parts.phase_zones.push_back(r.fields[0]);
    } else if (kw == "node") {
      check_arity(r, 3);
      check_attrs(r, {});
      parts.nodes.push_back({r.fields[0], r.fields[1], parse_int(r, r.fields[2]), r.line});
    } else if (kw == "section") {
      check_arity(r, 6);
      check_attrs(r, {"track", "cats", "group"});
      Section s;
      s.id = r.fields[0];
      auto kind = parse_section_kind(r.fields[1]);
      if (!kind) throw ParseError(r.line, "unknown section kind '" + r.fields[1] + "'");
      s.kind = *kind;
      s.track = r.attr("track");
      s.group = r.attr_or("group", "");
      s.endpoints = {r.fields[2], r.fields[3]};
      s.start_ft = parse_int(r, r.fields[4]);
      s.end_ft = parse_int(r, r.fields[5]);
      if (auto c = r.attr("cats")) {
        s.catenary_count = static_cast<int>(parse_int(r, *c));
      } else if (s.kind == SectionKind::kTrolley) {
        s.catenary_count = static_cast<int>(std::max<Feet>(0, s.length()) / kCatenarySpacingFt);
      }
      s.line = r.line;
      parts.sections.push_back(std::move(s));
    } else if (kw == "device") {
      check_arity(r, 4);
      check_attrs(r, {"control", "travel", "loadbreak", "rackable", "normal", "group"});
      Device d;
      d.id = r.fields[0];
      auto kind = parse_device_kind(r.fields[1]);
      if (!kind) throw ParseError(r.line, "unknown device kind '" + r.fields[1] + "'");
      d.kind = *kind;
      d.terminals = {r.fields[2], r.fields[3]};
      d.load_break = d.kind == DeviceKind::kBreaker;
      d.control = d.kind == DeviceKind::kKnifeSwitch ? Control::kManual : Control::kRemote;
      d.normal = d.kind == DeviceKind::kTie ? Position::kOpen : Position::kClosed;
      if (auto c = r.attr("control")) {
        if (*c == "remote") d.control = Control::kRemote;
        else if (*c == "manual") d.control = Control::kManual;
        else throw ParseError(r.line, "control must be remote or manual");
      }
      if (auto t = r.attr("travel")) d.travel_minutes = parse_double(r, *t);
      if (auto lb = r.attr("loadbreak")) d.load_break = parse_flag(r, *lb);
      if (auto rk = r.attr("rackable")) d.rackable = parse_flag(r, *rk);
      if (auto nm = r.attr("normal")) {
        auto p = parse_position(*nm);
        if (!p) throw ParseError(r.line, "normal must be open, closed or racked_out");
        d.normal = *p;
      }
      d.group = r.attr_or("group", "");
      d.line = r.line;
      parts.devices.push_back(std::move(d));
    } else if (kw == "source") {
      check_arity(r, 3);
      check_attrs(r, {});
      auto kind = parse_source_kind(r.fields[1]);
      if (!kind) throw ParseError(r.line, "unknown source kind '" + r.fields[1] + "'");
      parts.sources.push_back({r.fields[0], *kind, r.fields[2], "", r.line});
    } else if (kw == "ground") {
      check_arity(r, 3);
      check_attrs(r, {"group"});
      auto kind = parse_ground_kind(r.fields[1]);
      if (!kind) throw ParseError(r.line, "unknown ground kind '" + r.fields[1] + "'");
      parts.ground_points.push_back(
          {r.fields[0], *kind, r.fields[2], *kind == GroundKind::kAerial, r.attr_or("group", ""), r.line});
    } else if (kw == "track") {
      check_arity(r, 1);
      check_attrs(r, {});
      parts.track_layout.tracks.push_back(r.fields[0]);
    } else if (kw == "switch") {
      check_arity(r, 3);
      check_attrs(r, {});
      auto pair = split(r.fields[1], ':');
      if (pair.size() != 2) throw ParseError(r.line, "switch track pair must be <trackA>:<trackB>");
      parts.track_layout.switches.push_back({r.fields[0], pair[0], pair[1], parse_int(r, r.fields[2]), r.line});
    } else if (kw == "interlocking") {
      check_arity(r, 3);
      check_attrs(r, {"switches"});
      Interlocking il;
      il.id = r.fields[0];
      il.start_ft = parse_int(r, r.fields[1]);
      il.end_ft = parse_int(r, r.fields[2]);
      il.switches = split(r.attr_or("switches", ""), ',');
      il.line = r.line;
      parts.track_layout.interlockings.push_back(std::move(il));
    } else if (kw == "keeplive") {
      check_arity(r, 1);
      check_attrs(r, {});
      parts.track_layout.keep_live_assets.push_back(r.fields[0]);
    } else if (kw == "plate" || kw == "bar" || kw == "block") {
      parse_plate_record(r, parts.plate_orders);
    } else {
      throw ParseError(r.line, "unknown record '" + kw + "'");
    }
  }
  return NetworkTopology(std::move(parts));
}

// ---------------------------------------------------------------------------
// Validation

std::vector<ValidationIssue> validate_topology(const NetworkTopology& t) {
  std::vector<ValidationIssue> issues;
  auto add = [&](std::string code, std::string msg, int line, std::vector<std::string> who) {
    issues.push_back({std::move(code), std::move(msg), line, std::move(who)});
  };

  std::set<std::string> zones;
  for (const auto& z : t.phase_zones()) {
    if (!zones.insert(z).second) add("DUPLICATE_ID", "zone '" + z + "' declared twice", 0, {z});
  }

  // Elements share one id namespace so tags and events can name any of them.
  std::map<std::string, int> seen;
  auto claim = [&](const std::string& id, int line) {
    auto [it, inserted] = seen.emplace(id, line);
    if (!inserted) {
      add("DUPLICATE_ID", "id '" + id + "' already defined on line " + std::to_string(it->second), line, {id});
    }
  };
  for (const auto& n : t.nodes()) claim(n.id, n.line);
  for (const auto& s : t.sections()) claim(s.id, s.line);
  for (const auto& d : t.devices()) claim(d.id, d.line);
  for (const auto& s : t.sources()) claim(s.id, s.line);
  for (const auto& g : t.ground_points()) claim(g.id, g.line);
  for (const auto& sw : t.track_layout().switches) claim(sw.id, sw.line);
  for (const auto& il : t.track_layout().interlockings) claim(il.id, il.line);

  std::set<std::string> tracks;
  for (const auto& tr : t.track_layout().tracks) {
    if (!tracks.insert(tr).second) add("DUPLICATE_ID", "track '" + tr + "' declared twice", 0, {tr});
  }

  for (const auto& n : t.nodes()) {
    if (!zones.count(n.phase_zone)) {
      add("DANGLING_REFERENCE", "node '" + n.id + "' references undeclared zone '" + n.phase_zone + "'", n.line,
          {n.id, n.phase_zone});
    }
  }

  auto node_zone = [&](const std::string& id) -> std::optional<std::string> {
    if (auto i = t.find_node(id)) return t.nodes()[*i].phase_zone;
    return std::nullopt;
  };

  for (const auto& s : t.sections()) {
    bool resolved = true;
    for (const auto& ep : s.endpoints) {
      if (!t.find_node(ep)) {
        add("DANGLING_REFERENCE", "section '" + s.id + "' references unknown node '" + ep + "'", s.line, {s.id, ep});
        resolved = false;
      }
    }
    if (s.endpoints[0] == s.endpoints[1]) {
      add("SAME_ENDPOINTS", "section '" + s.id + "' has identical endpoints", s.line, {s.id});
    }
    if (s.start_ft >= s.end_ft) {
      add("BAD_SPAN", "section '" + s.id + "' has start_ft >= end_ft", s.line, {s.id});
    }
    if (resolved && *node_zone(s.endpoints[0]) != *node_zone(s.endpoints[1])) {
      add("PHASE_CROSSING", "section '" + s.id + "' joins phase zones '" + *node_zone(s.endpoints[0]) + "' and '" +
                                *node_zone(s.endpoints[1]) + "'",
          s.line, {s.id, s.endpoints[0], s.endpoints[1]});
    }
    if (s.kind == SectionKind::kTrolley) {
      if (!s.track) {
        add("MISSING_TRACK", "trolley section '" + s.id + "' has no track", s.line, {s.id});
      } else if (!tracks.count(*s.track)) {
        add("DANGLING_REFERENCE", "section '" + s.id + "' references unknown track '" + *s.track + "'", s.line,
            {s.id, *s.track});
      }
      if (s.catenary_count < 0) add("NEGATIVE_VALUE", "negative catenary count on '" + s.id + "'", s.line, {s.id});
    } else if (s.track) {
      add("UNEXPECTED_TRACK", "only trolley sections carry a track ('" + s.id + "')", s.line, {s.id});
    }
  }

  std::map<std::string, std::vector<const Section*>> by_track;
  for (const auto& s : t.sections()) {
    if (s.kind == SectionKind::kTrolley && s.track) by_track[*s.track].push_back(&s);
  }
  for (auto& [track, secs] : by_track) {
    std::sort(secs.begin(), secs.end(), [](const Section* a, const Section* b) {
      return a->start_ft != b->start_ft ? a->start_ft < b->start_ft : a->id < b->id;
    });
    for (std::size_t i = 1; i < secs.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (secs[i]->start_ft < secs[j]->end_ft) {
          add("OVERLAPPING_TROLLEY",
              "trolley sections '" + secs[j]->id + "' and '" + secs[i]->id + "' overlap on track '" + track + "'",
              secs[i]->line, {secs[j]->id, secs[i]->id});
        }
      }
    }
  }

  for (Index d = 0; d < t.devices().size(); ++d) {
    const auto& dev = t.devices()[d];
    bool resolved = true;
    for (const auto& term : dev.terminals) {
      if (!t.find_node(term)) {
        add("DANGLING_REFERENCE", "device '" + dev.id + "' references unknown node '" + term + "'", dev.line,
            {dev.id, term});
        resolved = false;
      }
    }
    if (dev.terminals[0] == dev.terminals[1]) {
      add("SAME_ENDPOINTS", "device '" + dev.id + "' has identical terminals", dev.line, {dev.id});
    }
    if (dev.kind == DeviceKind::kBreaker && !dev.load_break) {
      add("BAD_DEVICE", "breaker '" + dev.id + "' must be load-break", dev.line, {dev.id});
    }
    if ((dev.kind == DeviceKind::kMod || dev.kind == DeviceKind::kKnifeSwitch) && dev.load_break) {
      add("BAD_DEVICE", "'" + dev.id + "' cannot be load-break", dev.line, {dev.id});
    }
    if (dev.control == Control::kRemote && dev.travel_minutes != 0.0) {
      add("BAD_DEVICE", "remote device '" + dev.id + "' cannot have travel time", dev.line, {dev.id});
    }
    if (dev.travel_minutes < 0.0) add("NEGATIVE_VALUE", "negative travel on '" + dev.id + "'", dev.line, {dev.id});
    if (dev.rackable && dev.kind != DeviceKind::kBreaker) {
      add("BAD_DEVICE", "only breakers are rackable ('" + dev.id + "')", dev.line, {dev.id});
    }
    if (dev.normal == Position::kRackedOut && !dev.rackable) {
      add("BAD_DEVICE", "'" + dev.id + "' is not rackable", dev.line, {dev.id});
    }
    if (resolved && dev.kind != DeviceKind::kTie && t.device_is_inter_zone(d)) {
      add("PHASE_CROSSING", "only tie devices may bridge a phase break ('" + dev.id + "')", dev.line, {dev.id});
    }
  }

  for (const auto& src : t.sources()) {
    if (!t.find_node(src.node)) {
      add("DANGLING_REFERENCE", "source '" + src.id + "' references unknown node '" + src.node + "'", src.line,
          {src.id, src.node});
    }
  }
  for (const auto& gp : t.ground_points()) {
    if (!t.find_node(gp.node)) {
      add("DANGLING_REFERENCE", "ground '" + gp.id + "' references unknown node '" + gp.node + "'", gp.line,
          {gp.id, gp.node});
    }
  }

  const auto& layout = t.track_layout();
  for (const auto& sw : layout.switches) {
    for (const auto& tr : {sw.track_a, sw.track_b}) {
      if (!tracks.count(tr)) {
        add("DANGLING_REFERENCE", "switch '" + sw.id + "' references unknown track '" + tr + "'", sw.line,
            {sw.id, tr});
      }
    }
  }
  std::map<std::string, std::string> switch_owner;
  for (const auto& il : layout.interlockings) {
    if (il.start_ft >= il.end_ft) add("BAD_SPAN", "interlocking '" + il.id + "' has empty span", il.line, {il.id});
    for (const auto& sw : il.switches) {
      if (!t.find_switch(sw)) {
        add("DANGLING_REFERENCE", "interlocking '" + il.id + "' references unknown switch '" + sw + "'", il.line,
            {il.id, sw});
        continue;
      }
      auto [it, inserted] = switch_owner.emplace(sw, il.id);
      if (!inserted) {
        add("SWITCH_IN_TWO_INTERLOCKINGS",
            "switch '" + sw + "' belongs to '" + it->second + "' and '" + il.id + "'", il.line, {sw});
      }
    }
  }
  for (const auto& kl : layout.keep_live_assets) {
    auto s = t.find_section(kl);
    if (!s || t.sections()[*s].kind != SectionKind::kTrolley) {
      add("DANGLING_REFERENCE", "keeplive '" + kl + "' is not a trolley section", 0, {kl});
    }
  }

  std::set<std::string> plate_ids;
  for (const auto& p : t.plate_orders()) {
    if (!plate_ids.insert(p.id).second) add("DUPLICATE_ID", "plate order '" + p.id + "' defined twice", p.line, {p.id});
    std::vector<std::pair<Feet, Feet>> spans;
    std::set<std::string> barred_tracks;
    for (const auto& bar : p.barred_segments) {
      auto from = t.find_switch(bar.from_switch);
      auto to = t.find_switch(bar.to_switch);
      if (!from || !to) {
        add("DANGLING_REFERENCE", "plate '" + p.id + "' bars an unknown switch", p.line, {p.id});
        continue;
      }
      const auto& a = layout.switches[*from];
      const auto& b = layout.switches[*to];
      if (!a.on_track(bar.track) || !b.on_track(bar.track)) {
        add("BAD_PLATE", "plate '" + p.id + "' limit switch is not on track '" + bar.track + "'", p.line,
            {p.id, bar.track});
      }
      spans.emplace_back(std::min(a.location, b.location), std::max(a.location, b.location));
      barred_tracks.insert(bar.track);
    }
    for (const auto& blk : p.blocked_switches) {
      auto si = t.find_switch(blk);
      if (!si) {
        add("DANGLING_REFERENCE", "plate '" + p.id + "' blocks unknown switch '" + blk + "'", p.line, {p.id, blk});
        continue;
      }
      const auto& sw = layout.switches[*si];
      bool inside = false;
      for (std::size_t k = 0; k < p.barred_segments.size() && k < spans.size(); ++k) {
        const auto& bar = p.barred_segments[k];
        if (sw.on_track(bar.track) && sw.location >= spans[k].first && sw.location <= spans[k].second) inside = true;
      }
      if (!inside) {
        add("BAD_PLATE", "plate '" + p.id + "' blocks switch '" + blk + "' outside its barred segments", p.line,
            {p.id, blk});
      }
    }
  }

  std::stable_sort(issues.begin(), issues.end(),
                   [](const ValidationIssue& a, const ValidationIssue& b) { return a.line < b.line; });
  return issues;
}

LoadResult load_topology(std::string_view document) {
  LoadResult result;
  try {
    NetworkTopology t = parse_topology(document);
    result.errors = validate_topology(t);
    if (result.errors.empty()) result.topology = std::move(t);
  } catch (const ParseError& e) {
    result.errors.push_back({"PARSE", e.what(), e.line(), {}});
  }
  return result;
}

NetworkTopology load_topology_or_throw(std::string_view document) {
  auto result = load_topology(document);
  if (!result.ok()) {
    const auto& first = result.errors.front();
    std::string detail = "line " + std::to_string(first.line) + ": " + first.message;
    if (result.errors.size() > 1) detail += " (+" + std::to_string(result.errors.size() - 1) + " more)";
    throw DomainError(first.code, first.participants, detail);
  }
  return std::move(*result.topology);
}

std::vector<PlateOrder> parse_plate_library(std::string_view document) {
  std::vector<PlateOrder> plates;
  for (const auto& r : parse_records(document)) {
    if (r.keyword != "plate" && r.keyword != "bar" && r.keyword != "block") {
      throw ParseError(r.line, "unknown plate library record '" + r.keyword + "'");
    }
    parse_plate_record(r, plates);
  }
  return plates;
}

NetworkTopology with_plate_orders(const NetworkTopology& topology, std::vector<PlateOrder> library) {
  TopologyParts parts = topology.parts();
  for (auto& p : library) parts.plate_orders.push_back(std::move(p));
  return NetworkTopology(std::move(parts));
}

std::string to_document(const NetworkTopology& t) {
  std::ostringstream out;
  for (const auto& z : t.phase_zones()) out << "zone " << z << "\n";
  for (const auto& tr : t.track_layout().tracks) out << "track " << tr << "\n";
  for (const auto& n : t.nodes()) out << "node " << n.id << " " << n.phase_zone << " " << n.location << "\n";
  for (const auto& s : t.sections()) {
    out << "section " << s.id << " " << to_string(s.kind);
    if (s.track) out << " track=" << *s.track;
    out << " " << s.endpoints[0] << " " << s.endpoints[1] << " " << s.start_ft << " " << s.end_ft;
    if (s.kind == SectionKind::kTrolley || s.catenary_count != 0) out << " cats=" << s.catenary_count;
    if (!s.group.empty()) out << " group=" << s.group;
    out << "\n";
  }
  for (const auto& d : t.devices()) {
    out << "device " << d.id << " " << to_string(d.kind) << " " << d.terminals[0] << " " << d.terminals[1]
        << " control=" << to_string(d.control);
    if (d.travel_minutes != 0.0) out << " travel=" << d.travel_minutes;
    out << " loadbreak=" << (d.load_break ? 1 : 0) << " rackable=" << (d.rackable ? 1 : 0)
        << " normal=" << to_string(d.normal);
    if (!d.group.empty()) out << " group=" << d.group;
    out << "\n";
  }
  for (const auto& s : t.sources()) out << "source " << s.id << " " << to_string(s.kind) << " " << s.node << "\n";
  for (const auto& g : t.ground_points()) {
    out << "ground " << g.id << " " << to_string(g.kind) << " " << g.node;
    if (!g.group.empty()) out << " group=" << g.group;
    out << "\n";
  }
  for (const auto& sw : t.track_layout().switches) {
    out << "switch " << sw.id << " " << sw.track_a << ":" << sw.track_b << " " << sw.location << "\n";
  }
  for (const auto& il : t.track_layout().interlockings) {
    out << "interlocking " << il.id << " " << il.start_ft << " " << il.end_ft << " switches=" << join(il.switches, ",")
        << "\n";
  }
  for (const auto& kl : t.track_layout().keep_live_assets) out << "keeplive " << kl << "\n";
  for (const auto& p : t.plate_orders()) {
    out << "plate " << p.id << " " << quote_if_needed(p.description) << "\n";
    for (const auto& b : p.barred_segments) out << "bar " << b.track << " " << b.from_switch << " " << b.to_switch << "\n";
    for (const auto& s : p.blocked_switches) out << "block " << s << "\n";
  }
  return out.str();
}

TopologySummary summarize(const NetworkTopology& t) {
  TopologySummary s;
  s.nodes = t.nodes().size();
  s.phase_zones = t.phase_zones().size();
  Feet lo = 0, hi = 0;
  bool any = false;
  for (const auto& sec : t.sections()) {
    ++s.sections_by_kind[std::string(to_string(sec.kind))];
    if (sec.kind == SectionKind::kTrolley) {
      lo = any ? std::min(lo, sec.start_ft) : sec.start_ft;
      hi = any ? std::max(hi, sec.end_ft) : sec.end_ft;
      any = true;
    }
  }
  s.trolley_extent_ft = any ? hi - lo : 0;
  for (const auto& d : t.devices()) ++s.devices_by_kind[std::string(to_string(d.kind))];
  for (const auto& src : t.sources()) {
    if (src.kind == SourceKind::kSupplySubstation) ++s.supply_substations;
    else ++s.equalizing_substations;
  }
  s.ground_points = t.ground_points().size();
  s.tracks = t.track_layout().tracks.size();
  s.switches = t.track_layout().switches.size();
  s.interlockings = t.track_layout().interlockings.size();
  s.keep_live_assets = t.track_layout().keep_live_assets.size();
  s.plate_orders = t.plate_orders().size();
  return s;
}

std::vector<WireRunViolation> wire_run_check(const NetworkTopology& t, Feet limit_ft) {
  // Union trolley sections per track through shared endpoints.
  const auto& secs = t.sections();
  std::vector<Index> parent(secs.size());
  for (Index i = 0; i < secs.size(); ++i) parent[i] = i;
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::pair<std::string, Index>, Index> first_at_node;
  for (Index i = 0; i < secs.size(); ++i) {
    const auto& s = secs[i];
    if (s.kind != SectionKind::kTrolley || !s.track) continue;
    for (Index n : t.section_ends(i)) {
      if (n == kNoIndex) continue;
      auto [it, inserted] = first_at_node.emplace(std::make_pair(*s.track, n), i);
      if (!inserted) parent[find(i)] = find(it->second);
    }
  }
  std::map<Index, std::vector<Index>> groups;
  for (Index i = 0; i < secs.size(); ++i) {
    if (secs[i].kind == SectionKind::kTrolley && secs[i].track) groups[find(i)].push_back(i);
  }
  std::vector<WireRunViolation> out;
  for (auto& [root, members] : groups) {
    Feet total = 0;
    for (Index m : members) total += secs[m].length();
    if (total <= limit_ft) continue;
    std::sort(members.begin(), members.end(), [&](Index a, Index b) {
      return secs[a].start_ft != secs[b].start_ft ? secs[a].start_ft < secs[b].start_ft : secs[a].id < secs[b].id;
    });
    WireRunViolation v;
    v.track = *secs[members.front()].track;
    v.start_ft = secs[members.front()].start_ft;
    v.end_ft = secs[members.front()].end_ft;
    for (Index m : members) {
      v.sections.push_back(secs[m].id);
      v.end_ft = std::max(v.end_ft, secs[m].end_ft);
    }
    v.length_ft = total;
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const WireRunViolation& a, const WireRunViolation& b) {
    return a.track != b.track ? a.track < b.track : a.start_ft < b.start_ft;
  });
  return out;
}

}  // namespace tpi
