#include "tpi/energization.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

namespace tpi {

NodePair make_node_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

SwitchingState normal_state(const NetworkTopology& topology) {
  SwitchingState s;
  for (const auto& d : topology.devices()) s.device_positions[d.id] = d.normal;
  for (const auto& src : topology.sources()) s.sources_in_service.insert(src.id);
  return s;
}

SwitchingState parse_state(const NetworkTopology& topology, std::string_view document) {
  SwitchingState s = normal_state(topology);
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "position") {
      auto p = parse_position(r.field(1));
      if (!p) throw ParseError(r.line, "unknown position '" + r.field(1) + "'");
      s.device_positions[r.field(0)] = *p;
    } else if (r.keyword == "ground") {
      s.applied_grounds.insert(r.field(0));
    } else if (r.keyword == "source") {
      if (r.field(1) == "in") s.sources_in_service.insert(r.field(0));
      else if (r.field(1) == "out") s.sources_in_service.erase(r.field(0));
      else throw ParseError(r.line, "source state must be in or out");
    } else if (r.keyword == "sources") {
      s.sources_in_service = std::set<std::string>(r.fields.begin(), r.fields.end());
    } else if (r.keyword == "tag") {
      Tag tag{r.field(1), r.fields.size() > 2 ? r.fields[2] : std::string(),
              r.fields.size() > 3 ? parse_int(r, r.fields[3]) : 0};
      s.tags[r.field(0)] = std::move(tag);
    } else if (r.keyword == "bridge") {
      s.pantograph_bridges.insert(make_node_pair(r.field(0), r.field(1)));
    } else {
      throw ParseError(r.line, "unknown state record '" + r.keyword + "'");
    }
  }
  check_state_ids(topology, s);
  return s;
}

std::string to_document(const SwitchingState& s) {
  std::ostringstream out;
  for (const auto& [id, pos] : s.device_positions) out << "position " << id << " " << to_string(pos) << "\n";
  for (const auto& g : s.applied_grounds) out << "ground " << g << "\n";
  out << "sources";
  for (const auto& src : s.sources_in_service) out << " " << src;
  out << "\n";
  for (const auto& [id, tag] : s.tags) {
    out << "tag " << id << " " << quote_if_needed(tag.authority) << " " << quote_if_needed(tag.reason) << " "
        << tag.timestamp << "\n";
  }
  for (const auto& [a, b] : s.pantograph_bridges) out << "bridge " << a << " " << b << "\n";
  return out.str();
}

void check_state_ids(const NetworkTopology& t, const SwitchingState& s) {
  for (const auto& [id, pos] : s.device_positions) {
    auto d = t.device_index(id);
    if (pos == Position::kRackedOut && !t.devices()[d].rackable) {
      throw DomainError("NOT_RACKABLE", {id}, "device '" + id + "' cannot be racked out");
    }
  }
  for (const auto& g : s.applied_grounds) (void)t.ground_index(g);
  for (const auto& src : s.sources_in_service) (void)t.source_index(src);
  for (const auto& [id, tag] : s.tags) {
    if (!t.find_device(id) && !t.find_ground(id)) {
      throw DomainError("UNKNOWN_ID", {id}, "tag on unknown device or ground '" + id + "'");
    }
  }
  for (const auto& [a, b] : s.pantograph_bridges) {
    (void)t.node_index(a);
    (void)t.node_index(b);
  }
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kGroundFault: return "GROUND_FAULT";
    case ViolationKind::kPhaseTie: return "PHASE_TIE";
    case ViolationKind::kBackfeedHazard: return "BACKFEED_HAZARD";
    case ViolationKind::kUnbalance: return "UNBALANCE";
  }
  return "?";
}

std::size_t EnergizationResult::count(ViolationKind k) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

std::string to_document(const EnergizationResult& e) {
  std::ostringstream out;
  for (const auto& n : e.energized) out << "energized " << n << "\n";
  for (const auto& n : e.dead) out << "dead " << n << "\n";
  for (const auto& n : e.grounded) out << "grounded " << n << "\n";
  for (const auto& v : e.violations) {
    out << "violation " << to_string(v.kind) << " " << quote_if_needed(v.detail.empty() ? "-" : v.detail);
    for (const auto& p : v.participants) out << " " << p;
    out << "\n";
  }
  return out.str();
}

bool EnergizationResult::safe() const {
  return count(ViolationKind::kGroundFault) == 0 && count(ViolationKind::kPhaseTie) == 0 &&
         count(ViolationKind::kBackfeedHazard) == 0;
}

bool device_conducts(const SwitchingState& state, const std::string& device_id) {
  auto it = state.device_positions.find(device_id);
  return it != state.device_positions.end() && it->second == Position::kClosed;
}

namespace {

struct Graph {
  const NetworkTopology& t;
  std::vector<char> conducts;  // per edge
  std::vector<std::pair<Index, Index>> bridges;

  Graph(const NetworkTopology& topo, const SwitchingState& state) : t(topo) {
    std::vector<char> closed(t.devices().size(), 0);
    for (Index d = 0; d < t.devices().size(); ++d) {
      auto it = state.device_positions.find(t.devices()[d].id);
      Position p = it == state.device_positions.end() ? t.devices()[d].normal : it->second;
      closed[d] = p == Position::kClosed;
    }
    conducts.resize(t.edges().size());
    for (Index e = 0; e < t.edges().size(); ++e) {
      const auto& edge = t.edges()[e];
      conducts[e] = edge.kind == EdgeKind::kSection || closed[edge.element];
    }
    for (const auto& [a, b] : state.pantograph_bridges) {
      bridges.emplace_back(t.node_index(a), t.node_index(b));
    }
  }

  // Flood fill from seeds; `with_bridges` adds pantograph links.
  std::vector<char> reach(const std::vector<Index>& seeds, bool with_bridges) const {
    const std::size_t n = t.nodes().size();
    std::vector<char> seen(n, 0);
    std::vector<std::vector<Index>> bridge_adj;
    if (with_bridges && !bridges.empty()) {
      bridge_adj.resize(n);
      for (auto [a, b] : bridges) {
        bridge_adj[a].push_back(b);
        bridge_adj[b].push_back(a);
      }
    }
    std::vector<Index> stack;
    for (Index s : seeds) {
      if (s != kNoIndex && !seen[s]) {
        seen[s] = 1;
        stack.push_back(s);
      }
    }
    while (!stack.empty()) {
      Index u = stack.back();
      stack.pop_back();
      for (Index e : t.incident_edges(u)) {
        if (!conducts[e]) continue;
        const auto& edge = t.edges()[e];
        Index v = edge.a == u ? edge.b : edge.a;
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
      if (!bridge_adj.empty()) {
        for (Index v : bridge_adj[u]) {
          if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
        }
      }
    }
    return seen;
  }

  std::vector<Index> components(bool with_bridges) const {
    const std::size_t n = t.nodes().size();
    std::vector<Index> comp(n, kNoIndex);
    std::vector<std::vector<Index>> bridge_adj;
    if (with_bridges && !bridges.empty()) {
      bridge_adj.resize(n);
      for (auto [a, b] : bridges) {
        bridge_adj[a].push_back(b);
        bridge_adj[b].push_back(a);
      }
    }
    std::vector<Index> stack;
    for (Index root = 0; root < n; ++root) {
      if (comp[root] != kNoIndex) continue;
      comp[root] = root;
      stack.push_back(root);
      while (!stack.empty()) {
        Index u = stack.back();
        stack.pop_back();
        auto visit = [&](Index v) {
          if (comp[v] == kNoIndex) {
            comp[v] = root;
            stack.push_back(v);
          }
        };
        for (Index e : t.incident_edges(u)) {
          if (!conducts[e]) continue;
          const auto& edge = t.edges()[e];
          visit(edge.a == u ? edge.b : edge.a);
        }
        if (!bridge_adj.empty()) {
          for (Index v : bridge_adj[u]) visit(v);
        }
      }
    }
    return comp;
  }
};

std::vector<Index> source_seeds(const NetworkTopology& t, const SwitchingState& state) {
  std::vector<Index> seeds;
  for (const auto& id : state.sources_in_service) seeds.push_back(t.source_node(t.source_index(id)));
  return seeds;
}

std::vector<Index> ground_seeds(const NetworkTopology& t, const SwitchingState& state) {
  std::vector<Index> seeds;
  for (const auto& id : state.applied_grounds) seeds.push_back(t.ground_node(t.ground_index(id)));
  return seeds;
}

}  // namespace

NodeMarks mark_nodes(const NetworkTopology& t, const SwitchingState& state, bool include_bridges) {
  Graph g(t, state);
  NodeMarks m;
  m.energized = g.reach(source_seeds(t, state), include_bridges);
  m.grounded = g.reach(ground_seeds(t, state), include_bridges);
  m.component = g.components(false);
  return m;
}

UnbalanceReport unbalance_metric(const NetworkTopology& t, const SwitchingState& state,
                                 const EnergizationOptions& options) {
  UnbalanceReport report;
  Graph g(t, state);
  const std::size_t n = t.nodes().size();
  const auto energized = g.reach(source_seeds(t, state), true);

  std::vector<std::string> sources(state.sources_in_service.begin(), state.sources_in_service.end());
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> dist(sources.size(), std::vector<std::size_t>(n, kInf));
  for (std::size_t s = 0; s < sources.size(); ++s) {
    report.scores[sources[s]] = 0.0;
    Index start = t.source_node(t.source_index(sources[s]));
    std::deque<Index> queue{start};
    dist[s][start] = 0;
    while (!queue.empty()) {
      Index u = queue.front();
      queue.pop_front();
      for (Index e : t.incident_edges(u)) {
        if (!g.conducts[e]) continue;
        const auto& edge = t.edges()[e];
        Index v = edge.a == u ? edge.b : edge.a;
        if (dist[s][v] == kInf) {
          dist[s][v] = dist[s][u] + 1;
          queue.push_back(v);
        }
      }
    }
  }

  for (Index si = 0; si < t.sections().size(); ++si) {
    if (t.sections()[si].kind != SectionKind::kTrolley) continue;
    auto [a, b] = t.section_ends(si);
    if (!energized[a] || !energized[b]) continue;
    std::size_t best = kInf;
    std::vector<std::size_t> winners;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      std::size_t d = std::min(dist[s][a], dist[s][b]);
      if (d == kInf) continue;
      if (d < best) {
        best = d;
        winners = {s};
      } else if (d == best) {
        winners.push_back(s);
      }
    }
    for (std::size_t w : winners) report.scores[sources[w]] += 1.0 / static_cast<double>(winners.size());
  }

  if (!sources.empty()) {
    double total = 0.0;
    for (const auto& [id, score] : report.scores) {
      total += score;
      report.max = std::max(report.max, score);
    }
    report.mean = total / static_cast<double>(sources.size());
  }
  if (sources.size() >= 2 && report.max > options.unbalance_factor * report.mean) {
    Violation v{ViolationKind::kUnbalance, {}, ""};
    for (const auto& [id, score] : report.scores) {
      if (score == report.max) v.participants.push_back(id);
    }
    std::ostringstream detail;
    detail << "max load " << report.max << " sections exceeds " << options.unbalance_factor << " x mean "
           << report.mean;
    v.detail = detail.str();
    report.violation = std::move(v);
  }
  return report;
}

EnergizationResult compute_energization(const NetworkTopology& t, const SwitchingState& state,
                                        const EnergizationOptions& options) {
  check_state_ids(t, state);
  Graph g(t, state);
  const std::size_t n = t.nodes().size();
  const auto energized = g.reach(source_seeds(t, state), true);
  const auto grounded = g.reach(ground_seeds(t, state), true);

  EnergizationResult result;
  for (Index i = 0; i < n; ++i) {
    const auto& id = t.nodes()[i].id;
    if (energized[i]) result.energized.insert(id);
    if (grounded[i]) result.grounded.insert(id);
    if (!energized[i] && !grounded[i]) result.dead.insert(id);
  }

  // One GROUND_FAULT per connected area that is both live and grounded.
  const auto full_comp = g.components(true);
  std::map<Index, std::vector<std::string>> faults;
  for (Index i = 0; i < n; ++i) {
    if (energized[i] && grounded[i]) faults[full_comp[i]].push_back(t.nodes()[i].id);
  }
  for (auto& [root, ids] : faults) {
    std::sort(ids.begin(), ids.end());
    result.violations.push_back({ViolationKind::kGroundFault, ids, "energized and grounded"});
  }

  // PHASE_TIE: a closed area fed by in-service sources from two or more zones.
  const auto comp = g.components(false);
  std::map<Index, std::map<std::string, std::vector<std::string>>> zones_by_comp;
  for (const auto& id : state.sources_in_service) {
    Index s = t.source_index(id);
    zones_by_comp[comp[t.source_node(s)]][t.sources()[s].phase_zone].push_back(id);
  }
  for (const auto& [root, zones] : zones_by_comp) {
    if (zones.size() < 2) continue;
    Violation v{ViolationKind::kPhaseTie, {}, "zones"};
    for (const auto& [zone, ids] : zones) {
      v.detail += " " + zone;
      v.participants.insert(v.participants.end(), ids.begin(), ids.end());
    }
    std::sort(v.participants.begin(), v.participants.end());
    result.violations.push_back(std::move(v));
  }

  if (!g.bridges.empty()) {
    const auto base = g.reach(source_seeds(t, state), false);
    for (const auto& [a, b] : state.pantograph_bridges) {
      Index ia = t.node_index(a), ib = t.node_index(b);
      if (base[ia] != base[ib]) {
        result.violations.push_back(
            {ViolationKind::kBackfeedHazard, {a, b}, "pantograph bridge joins live and dead catenary"});
      }
    }
  }

  auto unbalance = unbalance_metric(t, state, options);
  if (unbalance.violation) result.violations.push_back(std::move(*unbalance.violation));
  return result;
}

}  // namespace tpi
