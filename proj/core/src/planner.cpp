#include "tpi/planner.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tpi {

// ---------------------------------------------------------------------------
// Requests

std::vector<IsolationRequest> parse_requests(std::string_view document) {
  std::vector<IsolationRequest> out;
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "request") {
      IsolationRequest req;
      req.id = r.field(0);
      req.requesting_job = r.attr_or("job", "");
      req.allow_aerial_grounds = parse_flag(r, r.attr_or("aerial", "0"));
      out.push_back(std::move(req));
      continue;
    }
    if (out.empty()) throw ParseError(r.line, "'" + r.keyword + "' must follow a 'request' record");
    if (r.keyword == "target") {
      for (const auto& f : r.fields) out.back().target_sections.push_back(f);
    } else if (r.keyword == "keeplive") {
      if (!out.back().keep_live) out.back().keep_live.emplace();
      for (const auto& f : r.fields) out.back().keep_live->push_back(f);
    } else {
      throw ParseError(r.line, "unknown request record '" + r.keyword + "'");
    }
  }
  return out;
}

std::string to_document(const IsolationRequest& req) {
  std::ostringstream out;
  out << "request " << req.id;
  if (!req.requesting_job.empty()) out << " job=" << req.requesting_job;
  out << " aerial=" << (req.allow_aerial_grounds ? 1 : 0) << "\n";
  for (const auto& s : req.target_sections) out << "target " << s << "\n";
  if (req.keep_live) {
    for (const auto& s : *req.keep_live) out << "keeplive " << s << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Request checks

SpanExceeded::SpanExceeded(std::vector<SplitSuggestion> splits)
    : DomainError("SPAN_EXCEEDED",
                  [&] {
                    std::vector<std::string> who;
                    for (const auto& s : splits) who.push_back(s.track);
                    return who;
                  }(),
                  [&] {
                    std::string detail = "trolley work zone exceeds " + std::to_string(kMaxWorkZoneFt) + " ft; split";
                    for (const auto& s : splits) {
                      for (const auto& r : s.ranges) {
                        detail += " " + s.track + ":" + std::to_string(r.lo) + "-" + std::to_string(r.hi);
                      }
                    }
                    return detail;
                  }()),
      splits_(std::move(splits)) {}

bool IsolationPlan::has_warning(std::string_view code) const {
  return std::any_of(warnings.begin(), warnings.end(), [&](const PlanWarning& w) { return w.code == code; });
}

std::set<Index> target_closure(const NetworkTopology& t, const IsolationRequest& request) {
  std::set<Index> seen;
  std::vector<Index> stack;
  for (const auto& id : request.target_sections) {
    for (Index n : t.section_ends(t.section_index(id))) {
      if (seen.insert(n).second) stack.push_back(n);
    }
  }
  while (!stack.empty()) {
    Index u = stack.back();
    stack.pop_back();
    for (Index e : t.incident_edges(u)) {
      const auto& edge = t.edges()[e];
      if (edge.kind != EdgeKind::kSection) continue;
      Index v = edge.a == u ? edge.b : edge.a;
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return seen;
}

namespace {

std::vector<SplitSuggestion> span_splits(const NetworkTopology& t, const IsolationRequest& request) {
  std::map<std::string, std::vector<const Section*>> by_track;
  for (const auto& id : request.target_sections) {
    const auto& sec = t.sections()[t.section_index(id)];
    if (sec.kind == SectionKind::kTrolley && sec.track) by_track[*sec.track].push_back(&sec);
  }
  std::vector<SplitSuggestion> out;
  for (auto& [track, secs] : by_track) {
    std::sort(secs.begin(), secs.end(), [](const Section* a, const Section* b) {
      return std::tie(a->start_ft, a->id) < std::tie(b->start_ft, b->id);
    });
    Feet lo = secs.front()->start_ft, hi = secs.front()->end_ft;
    for (const auto* s : secs) hi = std::max(hi, s->end_ft);
    if (hi - lo <= kMaxWorkZoneFt) continue;

    SplitSuggestion split{track, {}, {}};
    std::vector<std::string> part;
    Feet part_lo = 0, part_hi = 0;
    auto flush = [&] {
      if (part.empty()) return;
      split.ranges.push_back({part_lo, part_hi});
      split.parts.push_back(part);
      part.clear();
    };
    for (const auto* s : secs) {
      if (s->length() > kMaxWorkZoneFt) {
        flush();
        for (Feet a = s->start_ft; a < s->end_ft; a += kMaxWorkZoneFt) {
          split.ranges.push_back({a, std::min(s->end_ft, a + kMaxWorkZoneFt)});
          split.parts.push_back({s->id});
        }
        continue;
      }
      if (!part.empty() && std::max(part_hi, s->end_ft) - part_lo > kMaxWorkZoneFt) flush();
      if (part.empty()) {
        part_lo = s->start_ft;
        part_hi = s->end_ft;
      }
      part_hi = std::max(part_hi, s->end_ft);
      part.push_back(s->id);
    }
    flush();
    out.push_back(std::move(split));
  }
  return out;
}

}  // namespace

void check_request(const NetworkTopology& t, const IsolationRequest& request) {
  if (request.target_sections.empty()) {
    throw DomainError("INVALID_REQUEST", {request.id}, "request '" + request.id + "' has no target sections");
  }
  for (const auto& id : request.target_sections) {
    auto s = t.find_section(id);
    if (!s) throw DomainError("INVALID_REQUEST", {request.id, id}, "unknown target section '" + id + "'");
    auto kind = t.sections()[*s].kind;
    if (kind == SectionKind::kSignalFeeder) {
      throw DomainError("INVALID_REQUEST", {request.id, id},
                        "signal feeder '" + id + "' must stay in service and cannot be isolated");
    }
    if (kind == SectionKind::kSupplyTap) {
      throw DomainError("INVALID_REQUEST", {request.id, id},
                        "supply tap '" + id + "' is isolated with its substation, not as a target");
    }
  }
  if (request.keep_live) {
    for (const auto& id : *request.keep_live) {
      if (!t.find_section(id)) throw DomainError("INVALID_REQUEST", {request.id, id}, "unknown keep-live section '" + id + "'");
    }
  }
  auto splits = span_splits(t, request);
  if (!splits.empty()) throw SpanExceeded(std::move(splits));
}

// ---------------------------------------------------------------------------
// Planning

namespace {

Position position_in(const NetworkTopology& t, const SwitchingState& s, Index d) {
  auto it = s.device_positions.find(t.devices()[d].id);
  return it == s.device_positions.end() ? t.devices()[d].normal : it->second;
}

class Planner {
 public:
  Planner(const NetworkTopology& t, const SwitchingState& s, const IsolationRequest& r, const PlanOptions& o)
      : t_(t), req_(r), opt_(o), w_(s) {}

  IsolationPlan run(const SwitchingState& initial);

 private:
  std::string form_for_device(Index d) const { return req_.id + "-" + t_.device_line_group(d); }
  std::string form_for_ground(Index g) const { return req_.id + "-" + t_.ground_line_group(g); }
  std::string form_for(OpKind kind, const std::string& target) const {
    if (targets_ground(kind)) return form_for_ground(t_.ground_index(target));
    if (auto d = t_.find_device(target)) return form_for_device(*d);
    return form_for_ground(t_.ground_index(target));
  }

  std::optional<InterlockError> check(const SwitchingState& s, OpKind kind, const std::string& target) {
    SwitchOp op{kind, target, default_actor(t_, kind, target), form_for(kind, target)};
    OpContext ctx{opt_.director, "isolation " + req_.id, opt_.timestamp, dead_tests_[op.order_ref]};
    return validate_op(t_, s, op, ctx);
  }

  std::optional<InterlockError> try_emit(OpKind kind, const std::string& target, int step) {
    SwitchOp op{kind, target, default_actor(t_, kind, target), form_for(kind, target)};
    OpContext ctx{opt_.director, "isolation " + req_.id, opt_.timestamp, dead_tests_[op.order_ref]};
    if (auto err = validate_op(t_, w_, op, ctx)) return err;
    auto r = apply_op_unchecked(t_, w_, op, ctx);
    auto e = compute_energization(t_, r.state, opt_.energization);
    if (!e.safe()) {
      return InterlockError{InterlockKind::kLiveClose, {target}, "op would leave the network in an unsafe state"};
    }
    if (kind == OpKind::kTestPotential && r.record.result == "dead") dead_tests_[op.order_ref].insert(target);
    w_ = std::move(r.state);
    seq_.push_back({op, step});
    return std::nullopt;
  }

  void emit(OpKind kind, const std::string& target, int step) {
    if (auto err = try_emit(kind, target, step)) {
      std::vector<std::string> who = err->participants;
      who.insert(who.begin(), req_.id);
      throw DomainError("ISOLATION_INFEASIBLE", who,
                        "step " + std::to_string(step) + " " + std::string(to_string(kind)) + " " + target + ": " +
                            std::string(to_string(err->kind)) + " " + err->detail);
    }
  }

  void ground_sequence(Index g, int step) {
    const auto& id = t_.ground_points()[g].id;
    if (w_.applied_grounds.count(id)) return;
    emit(OpKind::kTestPotential, id, step);
    emit(OpKind::kApplyGround, id, step);
    if (!w_.tags.count(id)) emit(OpKind::kTag, id, step);
  }

  void warn(std::string code, std::vector<std::string> who, std::string detail) {
    warnings_.push_back({std::move(code), std::move(who), std::move(detail)});
  }

  bool device_less(Index a, Index b) const {
    return std::make_pair(t_.device_line_group(a), t_.devices()[a].id) <
           std::make_pair(t_.device_line_group(b), t_.devices()[b].id);
  }
  bool ground_less(Index a, Index b) const {
    return std::make_pair(t_.ground_line_group(a), t_.ground_points()[a].id) <
           std::make_pair(t_.ground_line_group(b), t_.ground_points()[b].id);
  }
  void sort_devices(std::vector<Index>& v) const {
    std::sort(v.begin(), v.end(), [this](Index a, Index b) { return device_less(a, b); });
  }
  void sort_grounds(std::vector<Index>& v) const {
    std::sort(v.begin(), v.end(), [this](Index a, Index b) { return ground_less(a, b); });
  }

  // Closure through sections and closed non-load-break devices.
  std::vector<char> dead_region(const std::vector<Index>& seeds) const;
  // Closed load-break devices whose opening de-energizes `region`.
  std::vector<Index> feeding_breakers(const std::vector<char>& region) const;
  std::vector<Index> box_grounds() const;
  void find_source_complexes();
  void backfeed(const std::vector<Index>& step1, const std::set<Index>& boundary);
  void aerial_grounds();

  const NetworkTopology& t_;
  const IsolationRequest& req_;
  const PlanOptions& opt_;
  SwitchingState w_;
  std::vector<PlannedOp> seq_;
  std::map<std::string, std::set<std::string>> dead_tests_;
  std::vector<PlanWarning> warnings_;
  std::map<std::string, std::pair<std::string, std::set<std::string>>> shared_;
  std::vector<char> in_nt_;
  std::vector<char> initially_live_;
  std::vector<char> in_complex_;
  std::vector<std::vector<Index>> inside_complexes_;
  std::vector<std::string> keep_live_;
};

std::vector<char> Planner::dead_region(const std::vector<Index>& seeds) const {
  std::vector<char> in(t_.nodes().size(), 0);
  std::vector<Index> stack;
  for (Index s : seeds) {
    if (!in[s]) {
      in[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    Index u = stack.back();
    stack.pop_back();
    for (Index e : t_.incident_edges(u)) {
      const auto& edge = t_.edges()[e];
      if (edge.kind == EdgeKind::kDevice) {
        const auto& dev = t_.devices()[edge.element];
        if (dev.load_break || position_in(t_, w_, edge.element) != Position::kClosed) continue;
      }
      Index v = edge.a == u ? edge.b : edge.a;
      if (!in[v]) {
        in[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return in;
}

std::vector<Index> Planner::feeding_breakers(const std::vector<char>& region) const {
  std::vector<Index> frontier;
  for (Index d = 0; d < t_.devices().size(); ++d) {
    auto [a, b] = t_.device_ends(d);
    if (region[a] == region[b]) continue;
    if (position_in(t_, w_, d) != Position::kClosed || !t_.devices()[d].load_break) continue;
    frontier.push_back(d);
  }
  // Only devices that actually carry supply into the region once every
  // frontier device is open.
  SwitchingState cut = w_;
  for (Index d : frontier) cut.device_positions[t_.devices()[d].id] = Position::kOpen;
  auto marks = mark_nodes(t_, cut);
  std::vector<Index> out;
  for (Index d : frontier) {
    auto [a, b] = t_.device_ends(d);
    Index outer = region[a] ? b : a;
    if (marks.energized[outer]) out.push_back(d);
  }
  sort_devices(out);
  return out;
}

std::vector<Index> Planner::box_grounds() const {
  std::map<std::string, std::vector<Index>> by_line;
  std::set<std::string> lines;
  for (const auto& id : req_.target_sections) {
    auto ends = t_.section_ends(t_.section_index(id));
    lines.insert(t_.node_line(ends[0]));
  }
  for (Index g = 0; g < t_.ground_points().size(); ++g) {
    if (t_.ground_points()[g].kind != GroundKind::kBox) continue;
    Index n = t_.ground_node(g);
    if (!in_nt_[n]) continue;
    by_line[t_.node_line(n)].push_back(g);
  }
  std::vector<Index> out;
  for (const auto& line : lines) {
    auto& gs = by_line[line];
    auto key = [&](Index g) { return std::make_pair(t_.nodes()[t_.ground_node(g)].location, t_.ground_points()[g].id); };
    std::sort(gs.begin(), gs.end(), [&](Index a, Index b) { return key(a) < key(b); });
    if (gs.empty() || key(gs.front()).first == key(gs.back()).first) {
      throw DomainError("NO_BOX_GROUND", {req_.id, line},
                        "no box ground points at both ends of the work zone on '" + line + "'");
    }
    Index hi = gs.back();
    Feet hi_loc = key(hi).first;
    for (Index g : gs) {
      if (key(g).first == hi_loc) {
        hi = g;
        break;
      }
    }
    out.push_back(gs.front());
    out.push_back(hi);
  }
  return out;
}

void Planner::find_source_complexes() {
  const std::size_t n = t_.nodes().size();
  in_complex_.assign(n, 0);
  std::vector<char> line_node(n, 0);
  for (Index s = 0; s < t_.sections().size(); ++s) {
    auto kind = t_.sections()[s].kind;
    if (kind == SectionKind::kTrolley || kind == SectionKind::kFeeder) {
      for (Index x : t_.section_ends(s)) line_node[x] = 1;
    }
  }
  std::vector<std::string> ids(w_.sources_in_service.begin(), w_.sources_in_service.end());
  for (const auto& id : ids) {
    Index root = t_.source_node(t_.source_index(id));
    if (line_node[root]) continue;
    std::vector<char> in(n, 0);
    std::vector<Index> members{root}, stack{root};
    in[root] = 1;
    bool touches_target = false, outside = false;
    while (!stack.empty()) {
      Index u = stack.back();
      stack.pop_back();
      for (Index e : t_.incident_edges(u)) {
        const auto& edge = t_.edges()[e];
        if (edge.kind == EdgeKind::kSection && t_.sections()[edge.element].kind != SectionKind::kSupplyTap) continue;
        Index v = edge.a == u ? edge.b : edge.a;
        if (in[v]) continue;
        if (line_node[v]) {
          (in_nt_[v] ? touches_target : outside) = true;
          continue;
        }
        in[v] = 1;
        members.push_back(v);
        stack.push_back(v);
      }
    }
    if (touches_target && !outside) {
      std::sort(members.begin(), members.end());
      for (Index m : members) in_complex_[m] = 1;
      inside_complexes_.push_back(std::move(members));
    }
  }
}

void Planner::backfeed(const std::vector<Index>& step1, const std::set<Index>& boundary) {
  SwitchingState projected = w_;
  for (Index d : step1) {
    if (!boundary.count(d)) projected.device_positions[t_.devices()[d].id] = Position::kClosed;
  }
  const std::size_t n = t_.nodes().size();
  std::vector<char> keep_live_node(n, 0);
  for (const auto& id : keep_live_) {
    for (Index x : t_.section_ends(t_.section_index(id))) keep_live_node[x] = 1;
  }
  std::set<Index> tried;
  while (true) {
    auto marks = mark_nodes(t_, projected);
    std::vector<char> collateral(n, 0);
    bool any = false;
    for (Index i = 0; i < n; ++i) {
      if (initially_live_[i] && !in_nt_[i] && !in_complex_[i] && !marks.energized[i]) collateral[i] = any = 1;
    }
    if (!any) break;
    std::vector<Index> candidates;
    for (Index d = 0; d < t_.devices().size(); ++d) {
      if (boundary.count(d) || tried.count(d) || w_.tags.count(t_.devices()[d].id)) continue;
      if (position_in(t_, projected, d) != Position::kOpen) continue;
      auto [a, b] = t_.device_ends(d);
      if ((marks.energized[a] && collateral[b]) || (marks.energized[b] && collateral[a])) candidates.push_back(d);
    }
    std::sort(candidates.begin(), candidates.end(), [&](Index x, Index y) {
      auto kl = [&](Index d) {
        auto [a, b] = t_.device_ends(d);
        return !(keep_live_node[a] || keep_live_node[b]);
      };
      if (kl(x) != kl(y)) return kl(x) < kl(y);
      return device_less(x, y);
    });
    bool progressed = false;
    for (Index d : candidates) {
      tried.insert(d);
      const auto& id = t_.devices()[d].id;
      if (check(projected, OpKind::kClose, id)) continue;
      SwitchingState after = projected;
      after.device_positions[id] = Position::kClosed;
      if (!compute_energization(t_, after, opt_.energization).safe()) continue;
      if (try_emit(OpKind::kClose, id, 3)) continue;
      projected = std::move(after);
      progressed = true;
      break;
    }
    if (!progressed) break;
  }

  auto marks = mark_nodes(t_, projected);
  std::vector<std::string> dropped;
  for (const auto& id : keep_live_) {
    auto ends = t_.section_ends(t_.section_index(id));
    if (initially_live_[ends[0]] && (!marks.energized[ends[0]] || !marks.energized[ends[1]])) dropped.push_back(id);
  }
  if (!dropped.empty()) {
    warn("KEEPLIVE_INFEASIBLE", dropped, "no violation-free backfeed keeps these sections live");
  }
  std::vector<std::string> collateral;
  for (Index i = 0; i < n; ++i) {
    if (initially_live_[i] && !in_nt_[i] && !in_complex_[i] && !marks.energized[i]) {
      collateral.push_back(t_.nodes()[i].id);
    }
  }
  if (!collateral.empty()) warn("COLLATERAL_DEAD", collateral, "nodes outside the target lose supply");
}

void Planner::aerial_grounds() {
  std::vector<Index> aerial;
  for (Index g = 0; g < t_.ground_points().size(); ++g) {
    if (t_.ground_points()[g].kind == GroundKind::kAerial && in_nt_[t_.ground_node(g)] &&
        !w_.applied_grounds.count(t_.ground_points()[g].id)) {
      aerial.push_back(g);
    }
  }
  if (aerial.empty()) return;
  sort_grounds(aerial);
  std::vector<std::string> ids;
  for (Index g : aerial) ids.push_back(t_.ground_points()[g].id);
  if (!req_.allow_aerial_grounds) {
    warn("AERIAL_SKIPPED", ids, "aerial grounds need allow_aerial_grounds");
    return;
  }

  // Feeders carried on the same structures must be dead while linemen climb.
  auto marks = mark_nodes(t_, w_);
  std::vector<Index> seeds;
  for (Index s = 0; s < t_.sections().size(); ++s) {
    const auto& sec = t_.sections()[s];
    if (sec.kind != SectionKind::kFeeder) continue;
    auto [a, b] = t_.section_ends(s);
    if (in_nt_[a] || !marks.energized[a]) continue;
    for (Index g : aerial) {
      Feet loc = t_.nodes()[t_.ground_node(g)].location;
      if (sec.start_ft <= loc && loc <= sec.end_ft) {
        seeds.push_back(a);
        seeds.push_back(b);
        break;
      }
    }
  }
  std::vector<Index> widened;
  if (!seeds.empty()) {
    auto region = dead_region(seeds);
    for (const auto& id : w_.sources_in_service) {
      if (region[t_.source_node(t_.source_index(id))]) {
        warn("AERIAL_SKIPPED", ids, "feeder at the aerial ground cannot be de-energized");
        return;
      }
    }
    widened = feeding_breakers(region);
    for (Index d : widened) emit(OpKind::kOpen, t_.devices()[d].id, 5);
  }
  for (Index g : aerial) ground_sequence(g, 5);
  for (Index d : widened) {
    if (try_emit(OpKind::kClose, t_.devices()[d].id, 5)) {
      warn("RECLOSE_SKIPPED", {t_.devices()[d].id}, "widened area could not be re-energized");
    }
  }
}

IsolationPlan Planner::run(const SwitchingState& initial) {
  const std::size_t n = t_.nodes().size();
  auto e0 = compute_energization(t_, initial, opt_.energization);
  if (!e0.safe()) {
    std::vector<std::string> who;
    for (const auto& v : e0.violations) who.insert(who.end(), v.participants.begin(), v.participants.end());
    throw DomainError("UNSAFE_STATE", who, "current state already has violations");
  }
  auto m0 = mark_nodes(t_, initial);
  initially_live_ = m0.energized;
  in_nt_.assign(n, 0);
  std::vector<Index> nt_list;
  for (Index i : target_closure(t_, req_)) {
    in_nt_[i] = 1;
    nt_list.push_back(i);
  }

  for (const auto& id : req_.keep_live ? *req_.keep_live : t_.track_layout().keep_live_assets) {
    auto ends = t_.section_ends(t_.section_index(id));
    if (in_nt_[ends[0]] || in_nt_[ends[1]]) {
      warn("KEEPLIVE_INFEASIBLE", {id}, "keep-live section lies inside the isolation");
    } else {
      keep_live_.push_back(id);
    }
  }

  const auto boxes = box_grounds();
  find_source_complexes();

  // Step 1: de-energize a superset by opening the breakers feeding it.
  auto region = dead_region(nt_list);
  for (const auto& id : w_.sources_in_service) {
    Index sn = t_.source_node(t_.source_index(id));
    if (region[sn]) {
      throw DomainError("ISOLATION_INFEASIBLE", {req_.id, id},
                        "source '" + id + "' connects to the target without a load-break device");
    }
  }
  const auto step1 = feeding_breakers(region);
  for (Index d : step1) emit(OpKind::kOpen, t_.devices()[d].id, 1);

  // Step 2: open and tag every device on the target boundary.
  std::vector<Index> boundary_list;
  for (Index d = 0; d < t_.devices().size(); ++d) {
    auto [a, b] = t_.device_ends(d);
    if (in_nt_[a] != in_nt_[b]) boundary_list.push_back(d);
  }
  sort_devices(boundary_list);
  std::set<Index> boundary(boundary_list.begin(), boundary_list.end());
  for (Index d : boundary_list) {
    const auto& id = t_.devices()[d].id;
    if (auto tag = w_.tags.find(id); tag != w_.tags.end()) {
      if (tag->second.authority != opt_.director) {
        auto& entry = shared_[form_for_device(d)];
        entry.first = tag->second.authority;
        entry.second.insert(id);
        warn("SHARED_DEVICE", {id, tag->second.authority}, "held under another director's tag");
      }
      continue;
    }
    if (position_in(t_, w_, d) == Position::kClosed) emit(OpKind::kOpen, id, 2);
    emit(OpKind::kTag, id, 2);
  }

  // Step 3: backfeed collateral dead area, keep-live assets first.
  backfeed(step1, boundary);

  // Step 4: substations inside the target are opened, racked out and grounded.
  for (const auto& members : inside_complexes_) {
    std::vector<char> in(n, 0);
    for (Index m : members) in[m] = 1;
    std::vector<Index> internal;
    for (Index d = 0; d < t_.devices().size(); ++d) {
      auto [a, b] = t_.device_ends(d);
      if (in[a] && in[b]) internal.push_back(d);
    }
    // Breakers interrupt the load before any disconnect opens.
    sort_devices(internal);
    std::stable_partition(internal.begin(), internal.end(), [&](Index d) { return t_.devices()[d].load_break; });
    for (Index d : internal) {
      const auto& dev = t_.devices()[d];
      if (w_.tags.count(dev.id)) continue;
      if (position_in(t_, w_, d) == Position::kClosed) emit(OpKind::kOpen, dev.id, 4);
      if (dev.rackable && position_in(t_, w_, d) == Position::kOpen) emit(OpKind::kRackOut, dev.id, 4);
      emit(OpKind::kTag, dev.id, 4);
    }
    std::vector<Index> grounds;
    for (Index g = 0; g < t_.ground_points().size(); ++g) {
      if (in[t_.ground_node(g)]) grounds.push_back(g);
    }
    sort_grounds(grounds);
    auto marks = mark_nodes(t_, w_);
    for (Index g : grounds) {
      if (!marks.energized[t_.ground_node(g)]) ground_sequence(g, 4);
    }
  }

  // Step 5: local grounds, then aerial grounds under a temporary widening.
  std::vector<Index> local;
  for (Index g = 0; g < t_.ground_points().size(); ++g) {
    if (t_.ground_points()[g].kind == GroundKind::kLocal && in_nt_[t_.ground_node(g)]) local.push_back(g);
  }
  sort_grounds(local);
  for (Index g : local) ground_sequence(g, 5);
  aerial_grounds();

  // Step 7: re-close the step-1 breakers that are not on the boundary.
  for (Index d : step1) {
    if (boundary.count(d)) continue;
    if (try_emit(OpKind::kClose, t_.devices()[d].id, 7)) {
      warn("RECLOSE_SKIPPED", {t_.devices()[d].id}, "re-closing would violate an interlock");
    }
  }

  // Step 8: box in the work zone.
  std::vector<Index> box = boxes;
  sort_grounds(box);
  for (Index g : box) ground_sequence(g, 8);

  auto final_marks = mark_nodes(t_, w_);
  for (Index i : nt_list) {
    if (final_marks.energized[i]) {
      throw DomainError("ISOLATION_INFEASIBLE", {req_.id, t_.nodes()[i].id},
                        "target node '" + t_.nodes()[i].id + "' stays energized");
    }
  }

  IsolationPlan plan;
  plan.request_id = req_.id;
  plan.director = opt_.director;
  plan.sequence = std::move(seq_);
  for (auto it = plan.sequence.rbegin(); it != plan.sequence.rend(); ++it) {
    SwitchOp op = it->op;
    op.kind = inverse(op.kind);
    op.order_ref += "-R";
    plan.restore_sequence.push_back({op, it->step});
  }
  plan.exact = true;
  for (Index i = 0; i < n; ++i) {
    if (!final_marks.energized[i]) {
      plan.expected_dead.insert(t_.nodes()[i].id);
      if (initially_live_[i] && !in_nt_[i] && !in_complex_[i]) plan.exact = false;
    }
  }
  if (auto u = unbalance_metric(t_, w_, opt_.energization).violation) {
    warn("UNBALANCE", u->participants, u->detail);
  }
  plan.warnings = std::move(warnings_);
  plan.shared = std::move(shared_);
  return plan;
}

}  // namespace

std::vector<OperatingOrder> build_forms(const std::vector<PlannedOp>& sequence, const std::string& request_id,
                                        const std::string& director, const std::string& plate_order, bool restore) {
  std::map<std::string, OperatingOrder> forms;
  const std::string prefix = request_id + "-";
  for (const auto& p : sequence) {
    auto& f = forms[p.op.order_ref];
    if (f.id.empty()) {
      f.id = p.op.order_ref;
      std::string group = f.id.substr(f.id.rfind(prefix, 0) == 0 ? prefix.size() : 0);
      if (restore && group.size() >= 2 && group.compare(group.size() - 2, 2, "-R") == 0) group.resize(group.size() - 2);
      f.line_group = group;
      f.director = director;
      f.plate_order = plate_order;
      f.restore = restore;
    }
    f.ops.push_back(p.op);
  }
  std::vector<OperatingOrder> out;
  for (auto& [id, f] : forms) out.push_back(std::move(f));
  return out;
}

namespace {

void attach_shared(IsolationPlan& plan) {
  for (auto* forms : {&plan.forms, &plan.restore_forms}) {
    for (auto& f : *forms) {
      std::string key = f.restore ? f.id.substr(0, f.id.size() - 2) : f.id;
      auto it = plan.shared.find(key);
      if (it == plan.shared.end()) continue;
      f.shared_with = it->second.first;
      f.shared_targets = it->second.second;
    }
  }
}

void finish_forms(IsolationPlan& plan, const std::string& date) {
  plan.forms = build_forms(plan.sequence, plan.request_id, plan.director, plan.plate_order, false);
  plan.restore_forms = build_forms(plan.restore_sequence, plan.request_id, plan.director, plan.plate_order, true);
  for (auto* forms : {&plan.forms, &plan.restore_forms}) {
    for (auto& f : *forms) f.date = date;
  }
  attach_shared(plan);
}

}  // namespace

IsolationPlan plan_isolation(const NetworkTopology& topology, const SwitchingState& state,
                             const IsolationRequest& request, const PlanOptions& options) {
  check_request(topology, request);
  check_state_ids(topology, state);
  std::string plate;
  if (options.require_plate_order) {
    plate = select_plate_order(topology, topology.plate_orders(), request, options.margin_ft).id;
  }
  Planner planner(topology, state, request, options);
  IsolationPlan plan = planner.run(state);
  plan.plate_order = plate;
  finish_forms(plan, options.date);

  // The reverse sequence must itself pass every interlock and land back on
  // the starting state.
  SwitchingState end = run_sequence(topology, state, plan.sequence, options.director);
  SwitchingState back;
  try {
    back = run_sequence(topology, end, plan.restore_sequence, options.director);
  } catch (const InterlockException& e) {
    throw DomainError("RESTORE_INFEASIBLE", e.participants(), e.what());
  }
  if (back.device_positions != state.device_positions || back.applied_grounds != state.applied_grounds ||
      back.tags != state.tags) {
    throw DomainError("RESTORE_INFEASIBLE", {request.id}, "restore does not return to the starting state");
  }
  return plan;
}

SwitchingState run_sequence(const NetworkTopology& topology, SwitchingState state, const std::vector<PlannedOp>& ops,
                            const std::string& director) {
  return run_sequence(topology, std::move(state), ops, director, [](const PlannedOp&, const SwitchingState&) {});
}

// ---------------------------------------------------------------------------
// Plan documents

std::string to_document(const IsolationPlan& plan) {
  std::ostringstream out;
  out << "plan " << plan.request_id << " director=" << plan.director;
  if (!plan.plate_order.empty()) out << " plate=" << plan.plate_order;
  out << " exact=" << (plan.exact ? 1 : 0) << " isolation_ops=" << plan.sequence.size()
      << " restore_ops=" << plan.restore_sequence.size() << "\n";
  if (!plan.forms.empty() && !plan.forms.front().date.empty()) out << "date " << plan.forms.front().date << "\n";
  auto row = [&](const char* kw, std::size_t i, const PlannedOp& p) {
    out << kw << " " << (i + 1) << " " << p.step << " " << to_string(p.op.kind) << " " << p.op.target << " "
        << to_string(p.op.actor) << " " << p.op.order_ref << "\n";
  };
  for (std::size_t i = 0; i < plan.sequence.size(); ++i) row("seq", i, plan.sequence[i]);
  for (std::size_t i = 0; i < plan.restore_sequence.size(); ++i) row("rseq", i, plan.restore_sequence[i]);
  for (const auto& [form, entry] : plan.shared) {
    for (const auto& dev : entry.second) out << "share " << form << " " << entry.first << " " << dev << "\n";
  }
  for (const auto& id : plan.expected_dead) out << "dead " << id << "\n";
  for (const auto& w : plan.warnings) {
    out << "warning " << w.code << " " << quote_if_needed(w.detail);
    for (const auto& p : w.participants) out << " " << p;
    out << "\n";
  }
  return out.str();
}

IsolationPlan parse_plan(std::string_view document) {
  IsolationPlan plan;
  std::string date;
  bool header = false;
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "plan") {
      plan.request_id = r.field(0);
      plan.director = r.attr_or("director", "");
      plan.plate_order = r.attr_or("plate", "");
      plan.exact = parse_flag(r, r.attr_or("exact", "1"));
      header = true;
      continue;
    }
    if (!header) throw ParseError(r.line, "plan documents start with a 'plan' record");
    if (r.keyword == "seq" || r.keyword == "rseq") {
      if (r.fields.size() != 6) throw ParseError(r.line, "'" + r.keyword + "' expects 6 fields");
      auto kind = parse_op_kind(r.fields[2]);
      auto actor = parse_actor(r.fields[4]);
      if (!kind || !actor) throw ParseError(r.line, "bad op kind or actor");
      PlannedOp p{{*kind, r.fields[3], *actor, r.fields[5]}, static_cast<int>(parse_int(r, r.fields[1]))};
      (r.keyword == "seq" ? plan.sequence : plan.restore_sequence).push_back(std::move(p));
    } else if (r.keyword == "share") {
      auto& entry = plan.shared[r.field(0)];
      entry.first = r.field(1);
      entry.second.insert(r.field(2));
    } else if (r.keyword == "dead") {
      plan.expected_dead.insert(r.field(0));
    } else if (r.keyword == "date") {
      date = r.field(0);
    } else if (r.keyword == "warning") {
      PlanWarning w{r.field(0), {}, r.fields.size() > 1 ? r.fields[1] : ""};
      for (std::size_t i = 2; i < r.fields.size(); ++i) w.participants.push_back(r.fields[i]);
      plan.warnings.push_back(std::move(w));
    } else {
      throw ParseError(r.line, "unknown plan record '" + r.keyword + "'");
    }
  }
  finish_forms(plan, date);
  return plan;
}

}  // namespace tpi
