#include "tpi/control_room.hpp"

#include <cstdio>
#include <sstream>

namespace tpi {

namespace {

std::string escape(std::string_view v) {
  std::string out;
  for (char c : v) {
    if (c == ' ' || c == '%' || c == '=' || c == '"' || c == '#' || c == '\n' || c == '\t' || c == '\r') {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '%' && i + 2 < v.size()) {
      out.push_back(static_cast<char>(std::stoi(std::string(v.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

}  // namespace

std::string Event::to_line() const {
  std::string out = "seq=" + std::to_string(seq) + " kind=" + escape(kind);
  for (const auto& [k, v] : fields) out += " " + k + "=" + escape(v);
  return out;
}

const std::string& Event::at(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end()) throw ParseError(0, "event " + std::to_string(seq) + " lacks '" + key + "'");
  return it->second;
}

Event parse_event(std::string_view line) {
  Event e;
  std::istringstream in{std::string(line)};
  std::string tok;
  bool have_seq = false;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError(0, "event token '" + tok + "' is not key=value");
    std::string key = tok.substr(0, eq);
    std::string value = unescape(std::string_view(tok).substr(eq + 1));
    if (key == "seq") {
      e.seq = std::stoull(value);
      have_seq = true;
    } else if (key == "kind") {
      e.kind = value;
    } else {
      e.fields[key] = value;
    }
  }
  if (!have_seq || e.kind.empty()) throw ParseError(0, "event needs seq= and kind=");
  return e;
}

std::vector<Event> parse_events(std::string_view text) {
  std::vector<Event> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_event(line));
  }
  return out;
}

SwitchingState fold_events(const NetworkTopology& t, const std::vector<Event>& events) {
  std::string init;
  for (const auto& e : events) {
    if (e.kind == "init") init += e.at("record") + "\n";
  }
  SwitchingState s = parse_state(t, init);
  for (const auto& e : events) {
    if (e.kind != "op") continue;
    auto kind = parse_op_kind(e.at("op"));
    auto actor = parse_actor(e.at("actor"));
    if (!kind || !actor) throw ParseError(0, "bad op event " + std::to_string(e.seq));
    OpContext ctx{e.at("who"), e.at("reason"), std::stoll(e.at("when")), {}};
    s = apply_op_unchecked(t, s, {*kind, e.at("target"), *actor, e.at("order")}, ctx).state;
  }
  return s;
}

ControlRoom::ControlRoom(NetworkTopology topology, SwitchingState initial, PlanOptions options)
    : topology_(std::move(topology)), options_(std::move(options)), state_(std::move(initial)) {
  check_state_ids(topology_, state_);
  // Record the starting configuration as differences from normal so the log
  // alone reproduces the state.
  SwitchingState normal = normal_state(topology_);
  auto lines = [](const SwitchingState& s) {
    std::vector<std::string> out;
    std::istringstream in(to_document(s));
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
  };
  for (const auto& [id, pos] : state_.device_positions) {
    auto it = normal.device_positions.find(id);
    if (it == normal.device_positions.end() || it->second != pos) {
      append("init", {{"record", "position " + id + " " + std::string(to_string(pos))}});
    }
  }
  SwitchingState rest;
  rest.applied_grounds = state_.applied_grounds;
  rest.sources_in_service = state_.sources_in_service;
  rest.tags = state_.tags;
  rest.pantograph_bridges = state_.pantograph_bridges;
  for (const auto& line : lines(rest)) append("init", {{"record", line}});
}

SwitchingState ControlRoom::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::uint64_t ControlRoom::last_seq() const {
  std::lock_guard lock(mu_);
  return events_.empty() ? 0 : events_.back().seq;
}

std::pair<SwitchingState, std::uint64_t> ControlRoom::snapshot() const {
  std::lock_guard lock(mu_);
  return {state_, events_.empty() ? 0 : events_.back().seq};
}

void ControlRoom::append(std::string kind, std::map<std::string, std::string> fields) {
  Event e{events_.size() + 1, std::move(kind), std::move(fields)};
  events_.push_back(std::move(e));
  cv_.notify_all();
}

OperatingOrder& ControlRoom::order_ref(const std::string& id) {
  auto it = orders_.find(id);
  if (it == orders_.end()) throw DomainError("UNKNOWN_ID", {id}, "unknown order '" + id + "'");
  return it->second;
}

IsolationPlan ControlRoom::create_isolation(const IsolationRequest& request, const std::string& director) {
  std::lock_guard lock(mu_);
  if (plans_.count(request.id)) {
    throw DomainError("DUPLICATE_ID", {request.id}, "request '" + request.id + "' is already planned");
  }
  PlanOptions opts = options_;
  if (!director.empty()) opts.director = director;
  IsolationPlan plan = plan_isolation(topology_, state_, request, opts);
  std::vector<std::string> ids, restore_ids;
  for (const auto& f : plan.forms) {
    if (orders_.count(f.id)) throw DomainError("DUPLICATE_ID", {f.id}, "order '" + f.id + "' already exists");
  }
  for (const auto& f : plan.forms) {
    orders_[f.id] = f;
    ids.push_back(f.id);
  }
  for (const auto& f : plan.restore_forms) {
    orders_[f.id] = f;
    restore_ids.push_back(f.id);
  }
  if (!plan.plate_order.empty()) {
    auto it = sessions_.find(plan.plate_order);
    if (it == sessions_.end() || it->second.state == PopsState::kReleased) {
      sessions_[plan.plate_order] = PopsSession{plan.plate_order, PopsState::kIdle, opts.director, "", {}};
    }
  }
  plans_[request.id] = plan;
  append("plan", {{"request", request.id},
                  {"director", opts.director},
                  {"plate", plan.plate_order},
                  {"orders", join(ids, ",")},
                  {"restore", join(restore_ids, ",")}});
  return plan;
}

void ControlRoom::add_order(OperatingOrder order) {
  std::lock_guard lock(mu_);
  if (order.id.empty()) throw DomainError("INVALID_ORDER", {}, "order needs an id");
  if (orders_.count(order.id)) throw DomainError("DUPLICATE_ID", {order.id}, "order '" + order.id + "' already exists");
  for (const auto& op : order.ops) {
    bool known = targets_ground(op.kind) ? topology_.find_ground(op.target).has_value()
                                         : topology_.find_device(op.target) || topology_.find_ground(op.target);
    if (!known) throw DomainError("UNKNOWN_ID", {op.target}, "order references unknown '" + op.target + "'");
  }
  order.records.clear();
  append("order", {{"order", order.id}, {"director", order.director}, {"ops", std::to_string(order.ops.size())}});
  orders_[order.id] = std::move(order);
}

OperatingOrder ControlRoom::order(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = orders_.find(id);
  if (it == orders_.end()) throw DomainError("UNKNOWN_ID", {id}, "unknown order '" + id + "'");
  return it->second;
}

std::vector<std::string> ControlRoom::order_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, o] : orders_) out.push_back(id);
  return out;
}

StepOutcome ControlRoom::step(const std::string& order_id, const std::string& director) {
  std::lock_guard lock(mu_);
  OperatingOrder& o = order_ref(order_id);
  if (director != o.director) {
    throw DomainError("NOT_ORDER_DIRECTOR", {order_id, director},
                      "order '" + order_id + "' belongs to " + o.director);
  }
  if (o.complete()) throw DomainError("ORDER_COMPLETE", {order_id}, "order '" + order_id + "' has no remaining ops");
  if (!o.plate_order.empty()) {
    auto it = sessions_.find(o.plate_order);
    PopsState ps = it == sessions_.end() ? PopsState::kIdle : it->second.state;
    if (!o.restore && ps != PopsState::kInEffect) {
      throw DomainError("POPS_NOT_IN_EFFECT", {o.plate_order, std::string(to_string(ps))},
                        "plate order '" + o.plate_order + "' must be in effect before isolation steps");
    }
    if (o.restore && ps != PopsState::kReleaseRequested && ps != PopsState::kReleased) {
      throw DomainError("POPS_NOT_RELEASED", {o.plate_order, std::string(to_string(ps))},
                        "restore steps wait for the release request on '" + o.plate_order + "'");
    }
  }
  if (o.shared_with && o.next_index() == 0) {
    auto c = o.confirmations.find(0);
    if (c == o.confirmations.end() || !c->second.count(*o.shared_with)) {
      throw DomainError("CONFIRMATION_REQUIRED", {order_id, *o.shared_with},
                        "double-header order '" + order_id + "' needs confirmation from " + *o.shared_with);
    }
  }
  const std::size_t index = o.next_index();
  const SwitchOp op = *o.next_op();
  state_ = execute_next(topology_, state_, o, clock_ + 1);
  ++clock_;
  const OpRecord& rec = o.records.back();
  append("op", {{"order", o.id},
                {"index", std::to_string(index + 1)},
                {"op", std::string(to_string(op.kind))},
                {"target", op.target},
                {"actor", std::string(to_string(op.actor))},
                {"who", rec.who},
                {"reason", (o.restore ? "restore " : "isolation ") + o.id},
                {"when", std::to_string(rec.when)},
                {"result", rec.result}});
  return {o.id, index, op, rec, o.complete()};
}

void ControlRoom::confirm(const std::string& order_id, const std::string& director) {
  std::lock_guard lock(mu_);
  OperatingOrder& o = order_ref(order_id);
  confirm_next(o, director);
  append("confirm", {{"order", o.id}, {"director", director}, {"index", std::to_string(o.next_index() + 1)}});
}

PopsSession ControlRoom::pops(const std::string& plate_order, PopsEvent event, Role role, const std::string& actor) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(plate_order);
  if (it == sessions_.end()) {
    throw DomainError("UNKNOWN_ID", {plate_order}, "no POPS session for plate order '" + plate_order + "'");
  }
  PopsState from = it->second.state;
  it->second = pops_transition(it->second, event, role, actor, ++clock_);
  append("pops", {{"plate", plate_order},
                  {"event", std::string(to_string(event))},
                  {"from", std::string(to_string(from))},
                  {"to", std::string(to_string(it->second.state))},
                  {"role", std::string(to_string(role))},
                  {"actor", actor}});
  return it->second;
}

std::optional<PopsSession> ControlRoom::pops_session(const std::string& plate_order) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(plate_order);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<PopsSession> ControlRoom::pops_sessions() const {
  std::lock_guard lock(mu_);
  std::vector<PopsSession> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::optional<IsolationPlan> ControlRoom::plan(const std::string& request_id) const {
  std::lock_guard lock(mu_);
  auto it = plans_.find(request_id);
  if (it == plans_.end()) return std::nullopt;
  return it->second;
}

std::vector<Event> ControlRoom::events_since(std::uint64_t since, std::chrono::milliseconds wait) const {
  std::unique_lock lock(mu_);
  if (wait.count() > 0) {
    cv_.wait_for(lock, wait, [&] { return events_.size() > since; });
  }
  std::vector<Event> out;
  for (std::size_t i = since; i < events_.size(); ++i) out.push_back(events_[i]);
  return out;
}

}  // namespace tpi
