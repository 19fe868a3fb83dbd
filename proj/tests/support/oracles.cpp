#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>

namespace tpi::test_support {

namespace {

std::size_t node_at(const NetworkTopology& t, const std::string& id) {
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    if (t.nodes()[i].id == id) return i;
  }
  throw std::out_of_range("no node " + id);
}

bool closed_in(const SwitchingState& s, const Device& d) {
  auto it = s.device_positions.find(d.id);
  return (it == s.device_positions.end() ? d.normal : it->second) == Position::kClosed;
}

using Matrix = std::vector<std::vector<char>>;

Matrix closure(Matrix m) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!m[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (m[k][j]) m[i][j] = 1;
      }
    }
  }
  return m;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

OracleEnergization oracle_energization(const NetworkTopology& t, const SwitchingState& s) {
  const std::size_t n = t.nodes().size();
  Matrix base(n, std::vector<char>(n, 0));
  auto link = [](Matrix& m, std::size_t a, std::size_t b) { m[a][b] = m[b][a] = 1; };
  for (const auto& sec : t.sections()) link(base, node_at(t, sec.endpoints[0]), node_at(t, sec.endpoints[1]));
  for (const auto& d : t.devices()) {
    if (closed_in(s, d)) link(base, node_at(t, d.terminals[0]), node_at(t, d.terminals[1]));
  }
  Matrix full = base;
  for (const auto& [a, b] : s.pantograph_bridges) link(full, node_at(t, a), node_at(t, b));
  const Matrix rb = closure(base);
  const Matrix rf = closure(full);

  std::vector<std::size_t> src_nodes, ground_nodes;
  for (const auto& src : t.sources()) {
    if (s.sources_in_service.count(src.id)) src_nodes.push_back(node_at(t, src.node));
  }
  for (const auto& g : t.ground_points()) {
    if (s.applied_grounds.count(g.id)) ground_nodes.push_back(node_at(t, g.node));
  }
  auto reached = [&](const Matrix& r, const std::vector<std::size_t>& seeds, std::size_t i) {
    return std::any_of(seeds.begin(), seeds.end(), [&](std::size_t x) { return r[x][i] != 0; });
  };

  OracleEnergization out;
  std::vector<char> live(n), earthed(n), base_live(n);
  for (std::size_t i = 0; i < n; ++i) {
    live[i] = reached(rf, src_nodes, i);
    earthed[i] = reached(rf, ground_nodes, i);
    base_live[i] = reached(rb, src_nodes, i);
    const auto& id = t.nodes()[i].id;
    if (live[i]) out.energized.insert(id);
    if (earthed[i]) out.grounded.insert(id);
    if (!live[i] && !earthed[i]) out.dead.insert(id);
  }

  // Components are identified by their smallest member.
  auto rep = [&](const Matrix& r, std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (r[i][j]) return j;
    }
    return i;
  };
  std::map<std::size_t, std::vector<std::string>> faults;
  for (std::size_t i = 0; i < n; ++i) {
    if (live[i] && earthed[i]) faults[rep(rf, i)].push_back(t.nodes()[i].id);
  }
  for (auto& [r, ids] : faults) {
    std::sort(ids.begin(), ids.end());
    out.violations.insert({"GROUND_FAULT", ids});
  }

  std::map<std::size_t, std::map<std::string, std::vector<std::string>>> zones;
  for (const auto& src : t.sources()) {
    if (!s.sources_in_service.count(src.id)) continue;
    std::size_t node = node_at(t, src.node);
    zones[rep(rb, node)][t.nodes()[node].phase_zone].push_back(src.id);
  }
  for (const auto& [r, by_zone] : zones) {
    if (by_zone.size() < 2) continue;
    std::vector<std::string> ids;
    for (const auto& [z, v] : by_zone) ids.insert(ids.end(), v.begin(), v.end());
    std::sort(ids.begin(), ids.end());
    out.violations.insert({"PHASE_TIE", ids});
  }

  for (const auto& [a, b] : s.pantograph_bridges) {
    if (base_live[node_at(t, a)] != base_live[node_at(t, b)]) {
      std::vector<std::string> ids{a, b};
      std::sort(ids.begin(), ids.end());
      out.violations.insert({"BACKFEED_HAZARD", ids});
    }
  }

  // Hop distances by Floyd-Warshall over the bridge-free graph.
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    dist[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && base[i][j]) dist[i][j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> in_service;
  for (const auto& src : t.sources()) {
    if (s.sources_in_service.count(src.id)) {
      in_service.emplace_back(src.id, node_at(t, src.node));
      out.unbalance_scores[src.id] = 0.0;
    }
  }
  for (const auto& sec : t.sections()) {
    if (sec.kind != SectionKind::kTrolley) continue;
    std::size_t a = node_at(t, sec.endpoints[0]), b = node_at(t, sec.endpoints[1]);
    if (!live[a] || !live[b]) continue;
    int best = kInf;
    for (const auto& [id, node] : in_service) best = std::min({best, dist[node][a], dist[node][b]});
    if (best >= kInf) continue;
    std::vector<std::string> winners;
    for (const auto& [id, node] : in_service) {
      if (std::min(dist[node][a], dist[node][b]) == best) winners.push_back(id);
    }
    for (const auto& w : winners) out.unbalance_scores[w] += 1.0 / static_cast<double>(winners.size());
  }
  return out;
}

std::multiset<ViolationKey> violation_keys(const std::vector<Violation>& violations) {
  std::multiset<ViolationKey> out;
  for (const auto& v : violations) {
    if (v.kind == ViolationKind::kUnbalance) continue;
    auto ids = v.participants;
    std::sort(ids.begin(), ids.end());
    out.insert({std::string(to_string(v.kind)), ids});
  }
  return out;
}

std::vector<OracleWireRun> oracle_wire_runs(const NetworkTopology& t, Feet limit_ft) {
  const auto& secs = t.sections();
  UnionFind uf(secs.size());
  for (std::size_t i = 0; i < secs.size(); ++i) {
    for (std::size_t j = i + 1; j < secs.size(); ++j) {
      if (secs[i].kind != SectionKind::kTrolley || secs[j].kind != SectionKind::kTrolley) continue;
      if (secs[i].track != secs[j].track) continue;
      for (const auto& x : secs[i].endpoints) {
        for (const auto& y : secs[j].endpoints) {
          if (x == y) uf.unite(i, j);
        }
      }
    }
  }
  std::map<std::size_t, OracleWireRun> runs;
  for (std::size_t i = 0; i < secs.size(); ++i) {
    if (secs[i].kind != SectionKind::kTrolley || !secs[i].track) continue;
    auto& r = runs[uf.find(i)];
    r.track = *secs[i].track;
    r.sections.push_back(secs[i].id);
    r.length_ft += secs[i].end_ft - secs[i].start_ft;
  }
  std::vector<OracleWireRun> out;
  for (auto& [root, r] : runs) {
    if (r.length_ft <= limit_ft) continue;
    std::sort(r.sections.begin(), r.sections.end());
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> section_closure(const NetworkTopology& t, const std::vector<std::string>& sections) {
  std::set<std::string> seen;
  for (const auto& id : sections) {
    for (const auto& s : t.sections()) {
      if (s.id == id) seen.insert(s.endpoints.begin(), s.endpoints.end());
    }
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& s : t.sections()) {
      const bool a = seen.count(s.endpoints[0]) > 0, b = seen.count(s.endpoints[1]) > 0;
      if (a != b) {
        seen.insert(s.endpoints.begin(), s.endpoints.end());
        grew = true;
      }
    }
  }
  return seen;
}

IsolationSearch search_isolation(const NetworkTopology& t, const SwitchingState& initial,
                                 const std::set<std::string>& target_nodes) {
  const std::size_t n = t.nodes().size();
  const auto& devs = t.devices();
  std::vector<std::array<std::size_t, 2>> ends;
  for (const auto& d : devs) ends.push_back({node_at(t, d.terminals[0]), node_at(t, d.terminals[1])});
  std::vector<std::pair<std::size_t, std::string>> sources;
  for (const auto& src : t.sources()) {
    if (initial.sources_in_service.count(src.id)) {
      std::size_t node = node_at(t, src.node);
      sources.emplace_back(node, t.nodes()[node].phase_zone);
    }
  }
  std::vector<char> in_target(n, 0);
  for (std::size_t i = 0; i < n; ++i) in_target[i] = target_nodes.count(t.nodes()[i].id) > 0;

  struct View {
    std::vector<std::size_t> comp;
    std::vector<char> live;
    bool multi_zone = false;
  };
  auto view = [&](unsigned config) {
    UnionFind uf(n);
    for (const auto& sec : t.sections()) uf.unite(node_at(t, sec.endpoints[0]), node_at(t, sec.endpoints[1]));
    for (std::size_t d = 0; d < devs.size(); ++d) {
      if (config >> d & 1u) uf.unite(ends[d][0], ends[d][1]);
    }
    View v{std::vector<std::size_t>(n), std::vector<char>(n, 0), false};
    std::map<std::size_t, std::set<std::string>> zones;
    for (std::size_t i = 0; i < n; ++i) v.comp[i] = uf.find(i);
    for (const auto& [node, zone] : sources) zones[v.comp[node]].insert(zone);
    for (std::size_t i = 0; i < n; ++i) v.live[i] = zones.count(v.comp[i]) > 0;
    for (const auto& [c, z] : zones) v.multi_zone = v.multi_zone || z.size() >= 2;
    return v;
  };

  unsigned start = 0;
  std::vector<char> racked(devs.size(), 0);
  for (std::size_t d = 0; d < devs.size(); ++d) {
    auto it = initial.device_positions.find(devs[d].id);
    Position p = it == initial.device_positions.end() ? devs[d].normal : it->second;
    if (p == Position::kClosed) start |= 1u << d;
    racked[d] = p == Position::kRackedOut;
  }
  const auto initial_live = view(start).live;

  IsolationSearch out;
  std::vector<int> dist(std::size_t{1} << devs.size(), -1);
  std::deque<unsigned> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    unsigned c = queue.front();
    queue.pop_front();
    const View v = view(c);
    bool target_dead = true, keeps = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_target[i] && v.live[i]) target_dead = false;
      if (!in_target[i] && initial_live[i] && !v.live[i]) keeps = false;
    }
    if (target_dead && !out.target_dead_reachable) {
      out.target_dead_reachable = true;
      out.dead_distance = dist[c];
    }
    if (target_dead && keeps && !out.exact_reachable) {
      out.exact_reachable = true;
      out.exact_distance = dist[c];
    }
    for (std::size_t d = 0; d < devs.size(); ++d) {
      const auto [a, b] = ends[d];
      unsigned next = c ^ (1u << d);
      if (c >> d & 1u) {
        if (!devs[d].load_break && v.live[a] && v.live[b]) continue;
      } else {
        if (racked[d]) continue;
        const bool inter_zone = t.nodes()[a].phase_zone != t.nodes()[b].phase_zone;
        if (v.comp[a] != v.comp[b] && devs[d].kind == DeviceKind::kTie && inter_zone && v.live[a] && v.live[b]) continue;
        if (view(next).multi_zone) continue;
      }
      if (dist[next] < 0) {
        dist[next] = dist[c] + 1;
        queue.push_back(next);
      }
    }
  }
  return out;
}

namespace {

CraftCounts oracle_usage(const std::vector<std::pair<const Job*, const JobVariant*>>& chosen) {
  // Director, groundman and dispatcher serve every job riding one isolation.
  auto shared = [](std::size_t craft) { return craft == 1 || craft == 2 || craft == 4; };
  CraftCounts total{};
  std::map<std::string, CraftCounts> per_isolation;
  for (const auto& [job, v] : chosen) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (!v->isolation.empty() && shared(c)) {
        per_isolation[v->isolation][c] = std::max(per_isolation[v->isolation][c], v->demand[c]);
      } else {
        total[c] += v->demand[c];
      }
    }
  }
  for (const auto& [iso, counts] : per_isolation) {
    for (std::size_t c = 0; c < 5; ++c) total[c] += counts[c];
  }
  return total;
}

}  // namespace

std::map<std::string, std::optional<char>> exhaustive_night(const std::vector<Job>& jobs,
                                                            const ResourceCalendar& calendar,
                                                            const std::string& night) {
  std::vector<const Job*> on;
  for (const auto& j : jobs) {
    if (std::find(j.nights.begin(), j.nights.end(), night) != j.nights.end()) on.push_back(&j);
  }
  std::sort(on.begin(), on.end(), [](const Job* a, const Job* b) { return a->priority < b->priority; });
  CraftCounts avail{};
  if (auto it = calendar.availability.find(night); it != calendar.availability.end()) avail = it->second;
  std::optional<int> cap;
  if (auto it = calendar.outage_cap.find(night); it != calendar.outage_cap.end()) cap = it->second;

  std::vector<std::size_t> choice(on.size(), 0), best;
  while (true) {
    std::vector<std::pair<const Job*, const JobVariant*>> chosen;
    std::set<std::string> outages;
    for (std::size_t i = 0; i < on.size(); ++i) {
      if (choice[i] == on[i]->variants.size()) continue;
      const JobVariant* v = &on[i]->variants[choice[i]];
      chosen.emplace_back(on[i], v);
      if (v->track_outage) outages.insert(v->isolation.empty() ? "job:" + on[i]->id : v->isolation);
    }
    auto use = oracle_usage(chosen);
    bool fits = true;
    for (std::size_t c = 0; c < 5; ++c) fits = fits && use[c] <= avail[c];
    if (cap && static_cast<int>(outages.size()) > *cap) fits = false;
    if (fits && (best.empty() || choice < best)) best = choice;

    std::size_t i = 0;
    for (; i < on.size(); ++i) {
      if (++choice[i] <= on[i]->variants.size()) break;
      choice[i] = 0;
    }
    if (i == on.size()) break;
  }
  std::map<std::string, std::optional<char>> out;
  for (std::size_t i = 0; i < on.size(); ++i) {
    if (best[i] < on[i]->variants.size()) {
      out[on[i]->id] = on[i]->variants[best[i]].label;
    } else {
      out[on[i]->id] = std::nullopt;
    }
  }
  return out;
}

namespace {

std::optional<Feet> switch_at(const NetworkTopology& t, const std::string& id) {
  for (const auto& sw : t.track_layout().switches) {
    if (sw.id == id) return sw.location;
  }
  return std::nullopt;
}

}  // namespace

bool oracle_covers(const NetworkTopology& t, const PlateOrder& plate, const IsolationRequest& request,
                   Feet margin_ft) {
  std::vector<std::tuple<std::string, Feet, Feet>> bars;
  for (const auto& bar : plate.barred_segments) {
    auto a = switch_at(t, bar.from_switch), b = switch_at(t, bar.to_switch);
    if (a && b) bars.emplace_back(bar.track, std::min(*a, *b) + margin_ft, std::max(*a, *b) - margin_ft);
  }
  for (const auto& id : request.target_sections) {
    const Section* sec = nullptr;
    for (const auto& s : t.sections()) {
      if (s.id == id) sec = &s;
    }
    if (!sec || sec->kind != SectionKind::kTrolley || !sec->track) continue;
    for (Feet f = sec->start_ft; f < sec->end_ft; ++f) {
      bool hit = false;
      for (const auto& [track, lo, hi] : bars) hit = hit || (track == *sec->track && lo <= f && f + 1 <= hi);
      if (!hit) return false;
    }
  }
  return true;
}

Feet oracle_barred_feet(const NetworkTopology& t, const PlateOrder& plate) {
  Feet total = 0;
  for (const auto& bar : plate.barred_segments) {
    auto a = switch_at(t, bar.from_switch), b = switch_at(t, bar.to_switch);
    if (a && b) total += *a > *b ? *a - *b : *b - *a;
  }
  return total;
}

std::optional<std::string> oracle_select(const NetworkTopology& t, const std::vector<PlateOrder>& library,
                                         const IsolationRequest& request, Feet margin_ft) {
  std::vector<std::pair<Feet, std::string>> covering;
  for (const auto& p : library) {
    if (oracle_covers(t, p, request, margin_ft)) covering.emplace_back(oracle_barred_feet(t, p), p.id);
  }
  if (covering.empty()) return std::nullopt;
  return std::min_element(covering.begin(), covering.end())->second;
}

}  // namespace tpi::test_support
