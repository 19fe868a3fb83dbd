#include "tpi/switching.hpp"

#include <map>

namespace tpi {

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::kOpen: return "open";
    case OpKind::kClose: return "close";
    case OpKind::kRackOut: return "rack_out";
    case OpKind::kRackIn: return "rack_in";
    case OpKind::kApplyGround: return "apply_ground";
    case OpKind::kRemoveGround: return "remove_ground";
    case OpKind::kTag: return "tag";
    case OpKind::kUntag: return "untag";
    case OpKind::kTestPotential: return "test_potential";
  }
  return "?";
}

std::string_view to_string(Actor a) { return a == Actor::kRemoteScada ? "remote_scada" : "field_lineman"; }

std::optional<OpKind> parse_op_kind(std::string_view s) {
  for (auto k : {OpKind::kOpen, OpKind::kClose, OpKind::kRackOut, OpKind::kRackIn, OpKind::kApplyGround,
                 OpKind::kRemoveGround, OpKind::kTag, OpKind::kUntag, OpKind::kTestPotential}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<Actor> parse_actor(std::string_view s) {
  if (s == "remote_scada") return Actor::kRemoteScada;
  if (s == "field_lineman") return Actor::kFieldLineman;
  return std::nullopt;
}

OpKind inverse(OpKind k) {
  switch (k) {
    case OpKind::kOpen: return OpKind::kClose;
    case OpKind::kClose: return OpKind::kOpen;
    case OpKind::kRackOut: return OpKind::kRackIn;
    case OpKind::kRackIn: return OpKind::kRackOut;
    case OpKind::kApplyGround: return OpKind::kRemoveGround;
    case OpKind::kRemoveGround: return OpKind::kApplyGround;
    case OpKind::kTag: return OpKind::kUntag;
    case OpKind::kUntag: return OpKind::kTag;
    case OpKind::kTestPotential: return OpKind::kTestPotential;
  }
  return k;
}

bool targets_ground(OpKind k) {
  return k == OpKind::kApplyGround || k == OpKind::kRemoveGround || k == OpKind::kTestPotential;
}

bool targets_either(OpKind k) { return k == OpKind::kTag || k == OpKind::kUntag; }

Actor default_actor(const NetworkTopology& t, OpKind kind, std::string_view target) {
  if (targets_ground(kind)) return Actor::kFieldLineman;
  if (kind == OpKind::kRackOut || kind == OpKind::kRackIn) return Actor::kFieldLineman;
  if (auto d = t.find_device(target)) {
    return t.devices()[*d].control == Control::kRemote ? Actor::kRemoteScada : Actor::kFieldLineman;
  }
  return Actor::kFieldLineman;
}

std::string_view to_string(InterlockKind k) {
  switch (k) {
    case InterlockKind::kTagged: return "TAGGED";
    case InterlockKind::kLiveClose: return "LIVE_CLOSE";
    case InterlockKind::kLoadOpen: return "LOAD_OPEN";
    case InterlockKind::kHotGround: return "HOT_GROUND";
    case InterlockKind::kPhaseClose: return "PHASE_CLOSE";
    case InterlockKind::kRackClosed: return "RACK_CLOSED";
    case InterlockKind::kInvalidOp: return "INVALID_OP";
  }
  return "?";
}

std::optional<InterlockKind> parse_interlock_kind(std::string_view s) {
  for (auto k : {InterlockKind::kTagged, InterlockKind::kLiveClose, InterlockKind::kLoadOpen, InterlockKind::kHotGround,
                 InterlockKind::kPhaseClose, InterlockKind::kRackClosed, InterlockKind::kInvalidOp}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

InterlockException::InterlockException(InterlockError error)
    : DomainError(std::string(to_string(error.kind)), error.participants, error.detail), error_(std::move(error)) {}

namespace {

InterlockError reject(InterlockKind kind, std::vector<std::string> who, std::string detail) {
  return {kind, std::move(who), std::move(detail)};
}

Position position_of(const NetworkTopology& t, const SwitchingState& s, Index d) {
  auto it = s.device_positions.find(t.devices()[d].id);
  return it == s.device_positions.end() ? t.devices()[d].normal : it->second;
}

// Phase zones of in-service sources inside a closed component.
std::set<std::string> component_zones(const NetworkTopology& t, const SwitchingState& s, const NodeMarks& m,
                                      Index component) {
  std::set<std::string> zones;
  for (const auto& id : s.sources_in_service) {
    Index src = t.source_index(id);
    if (m.component[t.source_node(src)] == component) zones.insert(t.sources()[src].phase_zone);
  }
  return zones;
}

std::optional<InterlockError> validate_device_op(const NetworkTopology& t, const SwitchingState& s,
                                                 const SwitchOp& op, Index d) {
  const auto& dev = t.devices()[d];
  if (auto tag = s.tags.find(dev.id); tag != s.tags.end()) {
    return reject(InterlockKind::kTagged, {dev.id, tag->second.authority},
                  "'" + dev.id + "' is tagged by " + tag->second.authority);
  }
  const Position pos = position_of(t, s, d);
  const auto [a, b] = t.device_ends(d);
  switch (op.kind) {
    case OpKind::kOpen: {
      if (pos != Position::kClosed) {
        return reject(InterlockKind::kInvalidOp, {dev.id}, "'" + dev.id + "' is already " + std::string(to_string(pos)));
      }
      if (!dev.load_break) {
        auto m = mark_nodes(t, s);
        if (m.energized[a] && m.energized[b]) {
          return reject(InterlockKind::kLoadOpen, {dev.id, dev.terminals[0], dev.terminals[1]},
                        "'" + dev.id + "' cannot be opened under load");
        }
      }
      return std::nullopt;
    }
    case OpKind::kClose: {
      if (pos == Position::kRackedOut) {
        return reject(InterlockKind::kInvalidOp, {dev.id}, "'" + dev.id + "' is racked out; rack in first");
      }
      if (pos == Position::kClosed) {
        return reject(InterlockKind::kInvalidOp, {dev.id}, "'" + dev.id + "' is already closed");
      }
      auto m = mark_nodes(t, s);
      if ((m.energized[a] && m.grounded[b]) || (m.grounded[a] && m.energized[b])) {
        return reject(InterlockKind::kLiveClose, {dev.id, dev.terminals[0], dev.terminals[1]},
                      "closing '" + dev.id + "' would connect an energized circuit to a grounded one");
      }
      if (m.component[a] != m.component[b]) {
        if (dev.kind == DeviceKind::kTie && t.device_is_inter_zone(d) && m.energized[a] && m.energized[b]) {
          return reject(InterlockKind::kPhaseClose, {dev.id, dev.terminals[0], dev.terminals[1]},
                        "tie '" + dev.id + "' would join two energized phase zones");
        }
        auto za = component_zones(t, s, m, m.component[a]);
        auto zb = component_zones(t, s, m, m.component[b]);
        std::set<std::string> merged = za;
        merged.insert(zb.begin(), zb.end());
        if (merged.size() >= 2 && za.size() < 2 && zb.size() < 2) {
          return reject(InterlockKind::kPhaseClose, {dev.id, dev.terminals[0], dev.terminals[1]},
                        "closing '" + dev.id + "' would connect sources from different phase zones");
        }
      }
      return std::nullopt;
    }
    case OpKind::kRackOut:
      if (!dev.rackable) return reject(InterlockKind::kInvalidOp, {dev.id}, "'" + dev.id + "' is not rackable");
      if (pos == Position::kClosed) {
        return reject(InterlockKind::kRackClosed, {dev.id}, "breaker '" + dev.id + "' must be open before racking out");
      }
      if (pos == Position::kRackedOut) {
        return reject(InterlockKind::kInvalidOp, {dev.id}, "'" + dev.id + "' is already racked out");
      }
      return std::nullopt;
    case OpKind::kRackIn:
      if (pos != Position::kRackedOut) {
        return reject(InterlockKind::kInvalidOp, {dev.id}, "'" + dev.id + "' is not racked out");
      }
      return std::nullopt;
    default:
      return reject(InterlockKind::kInvalidOp, {dev.id}, "operation does not apply to a device");
  }
}

}  // namespace

std::optional<InterlockError> validate_op(const NetworkTopology& t, const SwitchingState& s, const SwitchOp& op,
                                          const OpContext& ctx) {
  if (targets_either(op.kind)) {
    const bool known = t.find_device(op.target) || t.find_ground(op.target);
    if (!known) return reject(InterlockKind::kInvalidOp, {op.target}, "unknown target '" + op.target + "'");
    auto tag = s.tags.find(op.target);
    if (op.kind == OpKind::kTag) {
      if (ctx.authority.empty()) return reject(InterlockKind::kInvalidOp, {op.target}, "tag requires an authority");
      if (tag != s.tags.end()) {
        return reject(InterlockKind::kTagged, {op.target, tag->second.authority},
                      "'" + op.target + "' already carries a tag by " + tag->second.authority);
      }
      return std::nullopt;
    }
    if (tag == s.tags.end()) return reject(InterlockKind::kInvalidOp, {op.target}, "'" + op.target + "' is not tagged");
    if (tag->second.authority != ctx.authority) {
      return reject(InterlockKind::kTagged, {op.target, tag->second.authority},
                    "'" + op.target + "' is tagged by " + tag->second.authority);
    }
    return std::nullopt;
  }

  if (targets_ground(op.kind)) {
    auto g = t.find_ground(op.target);
    if (!g) return reject(InterlockKind::kInvalidOp, {op.target}, "'" + op.target + "' is not a ground point");
    if (op.kind == OpKind::kTestPotential) return std::nullopt;
    if (auto tag = s.tags.find(op.target); tag != s.tags.end()) {
      return reject(InterlockKind::kTagged, {op.target, tag->second.authority},
                    "ground '" + op.target + "' is tagged by " + tag->second.authority);
    }
    const bool applied = s.applied_grounds.count(op.target) > 0;
    if (op.kind == OpKind::kRemoveGround) {
      if (!applied) return reject(InterlockKind::kInvalidOp, {op.target}, "ground '" + op.target + "' is not applied");
      return std::nullopt;
    }
    if (applied) return reject(InterlockKind::kInvalidOp, {op.target}, "ground '" + op.target + "' already applied");
    auto m = mark_nodes(t, s);
    const Index node = t.ground_node(*g);
    if (m.energized[node]) {
      return reject(InterlockKind::kHotGround, {op.target, t.nodes()[node].id},
                    "node '" + t.nodes()[node].id + "' is energized");
    }
    if (!ctx.tested_dead.count(op.target)) {
      return reject(InterlockKind::kHotGround, {op.target, t.nodes()[node].id},
                    "no dead potential test recorded for '" + op.target + "' in this order");
    }
    return std::nullopt;
  }

  auto d = t.find_device(op.target);
  if (!d) return reject(InterlockKind::kInvalidOp, {op.target}, "'" + op.target + "' is not a device");
  return validate_device_op(t, s, op, *d);
}

ExecuteResult apply_op_unchecked(const NetworkTopology& t, const SwitchingState& s, const SwitchOp& op,
                                 const OpContext& ctx, double duration_s) {
  ExecuteResult out{s, OpRecord{ctx.authority, ctx.timestamp, "ok", op.actor, duration_s}};
  auto& st = out.state;
  switch (op.kind) {
    case OpKind::kOpen: st.device_positions[t.devices()[t.device_index(op.target)].id] = Position::kOpen; break;
    case OpKind::kClose: st.device_positions[t.devices()[t.device_index(op.target)].id] = Position::kClosed; break;
    case OpKind::kRackOut:
      st.device_positions[t.devices()[t.device_index(op.target)].id] = Position::kRackedOut;
      break;
    case OpKind::kRackIn: st.device_positions[t.devices()[t.device_index(op.target)].id] = Position::kOpen; break;
    case OpKind::kApplyGround: st.applied_grounds.insert(t.ground_points()[t.ground_index(op.target)].id); break;
    case OpKind::kRemoveGround: st.applied_grounds.erase(op.target); break;
    case OpKind::kTag:
      if (!t.find_device(op.target)) (void)t.ground_index(op.target);
      st.tags[op.target] = Tag{ctx.authority, ctx.reason, ctx.timestamp};
      break;
    case OpKind::kUntag: st.tags.erase(op.target); break;
    case OpKind::kTestPotential: {
      auto m = mark_nodes(t, s);
      out.record.result = m.energized[t.ground_node(t.ground_index(op.target))] ? "live" : "dead";
      break;
    }
  }
  return out;
}

ExecuteResult execute_op(const NetworkTopology& t, const SwitchingState& s, const SwitchOp& op,
                         const OpContext& ctx, double duration_s) {
  if (auto err = validate_op(t, s, op, ctx)) throw InterlockException(std::move(*err));
  return apply_op_unchecked(t, s, op, ctx, duration_s);
}

}  // namespace tpi
