#include "tpi/operating_order.hpp"

#include <sstream>

namespace tpi {

std::set<std::string> tested_dead(const OperatingOrder& order) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < order.records.size(); ++i) {
    if (order.ops[i].kind != OpKind::kTestPotential) continue;
    if (order.records[i].result == "dead") out.insert(order.ops[i].target);
    else out.erase(order.ops[i].target);
  }
  return out;
}

bool awaiting_confirmation(const OperatingOrder& order) {
  const SwitchOp* op = order.next_op();
  if (!op || !order.shared_with || !order.shared_targets.count(op->target)) return false;
  auto it = order.confirmations.find(order.next_index());
  if (it == order.confirmations.end()) return true;
  return !(it->second.count(order.director) && it->second.count(*order.shared_with));
}

void confirm_next(OperatingOrder& order, const std::string& director) {
  if (director != order.director && (!order.shared_with || director != *order.shared_with)) {
    throw DomainError("NOT_SHARED_DIRECTOR", {order.id, director},
                      "'" + director + "' does not share control of order '" + order.id + "'");
  }
  if (order.complete()) throw DomainError("ORDER_COMPLETE", {order.id}, "order '" + order.id + "' is complete");
  order.confirmations[order.next_index()].insert(director);
}

namespace {

std::set<std::string> device_targets(const OperatingOrder& order) {
  std::set<std::string> out;
  for (const auto& op : order.ops) {
    if (!targets_ground(op.kind)) out.insert(op.target);
  }
  return out;
}

}  // namespace

OperatingOrder request_shared_control(OperatingOrder order, const std::string& second_director,
                                      const std::vector<OperatingOrder>& others) {
  bool known = false;
  std::set<std::string> theirs;
  for (const auto& o : others) {
    if (o.director != second_director) continue;
    known = true;
    auto ids = device_targets(o);
    theirs.insert(ids.begin(), ids.end());
  }
  if (!known || second_director.empty()) {
    throw DomainError("DIRECTOR_UNKNOWN", {second_director}, "no active order for director '" + second_director + "'");
  }
  order.shared_with = second_director;
  for (const auto& id : device_targets(order)) {
    if (theirs.count(id)) order.shared_targets.insert(id);
  }
  return order;
}

SwitchingState execute_next(const NetworkTopology& topology, const SwitchingState& state, OperatingOrder& order,
                            std::int64_t timestamp, double duration_s, bool interlocks) {
  const SwitchOp* op = order.next_op();
  if (!op) throw DomainError("ORDER_COMPLETE", {order.id}, "order '" + order.id + "' has no remaining ops");
  if (interlocks && awaiting_confirmation(order)) {
    throw DomainError("CONFIRMATION_REQUIRED", {order.id, op->target, *order.shared_with},
                      "'" + op->target + "' is under shared control; both directors must confirm");
  }
  OpContext ctx{order.director, order.restore ? "restore " + order.id : "isolation " + order.id, timestamp,
                tested_dead(order)};
  ExecuteResult r = interlocks ? execute_op(topology, state, *op, ctx, duration_s)
                               : apply_op_unchecked(topology, state, *op, ctx, duration_s);
  order.records.push_back(r.record);
  return std::move(r.state);
}

FormSubsets form_subsets(const OperatingOrder& order) {
  FormSubsets s;
  for (std::size_t i = 0; i < order.ops.size(); ++i) {
    const auto& op = order.ops[i];
    if (targets_ground(op.kind)) {
      s.grounds.push_back(i);
    } else if (targets_either(op.kind) || op.actor == Actor::kRemoteScada) {
      s.scada_and_tags.push_back(i);
    } else {
      s.switching_orders.push_back(i);
    }
  }
  return s;
}

namespace {

std::string seq_list(const std::vector<std::size_t>& rows) {
  std::vector<std::string> parts;
  for (auto r : rows) parts.push_back(std::to_string(r + 1));
  return parts.empty() ? "-" : join(parts, ",");
}

}  // namespace

std::string to_document(const OperatingOrder& o) {
  std::ostringstream out;
  out << "order " << o.id << " group=" << quote_if_needed(o.line_group) << " director=" << quote_if_needed(o.director);
  if (o.shared_with) out << " shared_with=" << quote_if_needed(*o.shared_with);
  if (!o.date.empty()) out << " date=" << quote_if_needed(o.date);
  if (!o.plate_order.empty()) out << " plate=" << quote_if_needed(o.plate_order);
  out << " kind=" << (o.restore ? "restore" : "isolation") << "\n";
  for (const auto& id : o.shared_targets) out << "shared " << id << "\n";
  for (std::size_t i = 0; i < o.ops.size(); ++i) {
    const auto& op = o.ops[i];
    out << "op " << (i + 1) << " " << to_string(op.kind) << " " << op.target << " " << to_string(op.actor);
    if (i < o.records.size()) {
      const auto& r = o.records[i];
      out << " who=" << quote_if_needed(r.who) << " when=" << r.when << " result=" << r.result
          << " duration=" << r.duration_s;
    }
    out << "\n";
  }
  for (const auto& [idx, who] : o.confirmations) {
    for (const auto& d : who) out << "confirm " << (idx + 1) << " " << quote_if_needed(d) << "\n";
  }
  auto subsets = form_subsets(o);
  out << "subset \"SCADA Operations & Tags\" " << seq_list(subsets.scada_and_tags) << "\n";
  out << "subset \"Switching Orders\" " << seq_list(subsets.switching_orders) << "\n";
  out << "subset Grounds " << seq_list(subsets.grounds) << "\n";
  out << "subset \"Plate Orders\" " << (o.plate_order.empty() ? "-" : o.plate_order) << "\n";
  return out.str();
}

std::string to_document(const std::vector<OperatingOrder>& orders) {
  std::string out;
  for (const auto& o : orders) {
    if (!out.empty()) out += "\n";
    out += to_document(o);
  }
  return out;
}

std::vector<OperatingOrder> parse_operating_orders(std::string_view document) {
  std::vector<OperatingOrder> orders;
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "order") {
      OperatingOrder o;
      o.id = r.field(0);
      o.line_group = r.attr_or("group", "");
      o.director = r.attr_or("director", "");
      if (auto sw = r.attr("shared_with")) o.shared_with = *sw;
      o.date = r.attr_or("date", "");
      o.plate_order = r.attr_or("plate", "");
      o.restore = r.attr_or("kind", "isolation") == "restore";
      orders.push_back(std::move(o));
      continue;
    }
    if (orders.empty()) throw ParseError(r.line, "'" + r.keyword + "' must follow an 'order' record");
    auto& o = orders.back();
    if (r.keyword == "op") {
      if (r.fields.size() != 4) throw ParseError(r.line, "'op' expects <seq> <kind> <target> <actor>");
      if (parse_int(r, r.fields[0]) != static_cast<std::int64_t>(o.ops.size() + 1)) {
        throw ParseError(r.line, "op sequence numbers must be consecutive from 1");
      }
      auto kind = parse_op_kind(r.fields[1]);
      auto actor = parse_actor(r.fields[3]);
      if (!kind) throw ParseError(r.line, "unknown op kind '" + r.fields[1] + "'");
      if (!actor) throw ParseError(r.line, "unknown actor '" + r.fields[3] + "'");
      o.ops.push_back({*kind, r.fields[2], *actor, o.id});
      if (auto result = r.attr("result")) {
        if (o.records.size() + 1 != o.ops.size()) throw ParseError(r.line, "records must be contiguous from row 1");
        o.records.push_back({r.attr_or("who", ""), parse_int(r, r.attr_or("when", "0")), *result, *actor,
                             parse_double(r, r.attr_or("duration", "0"))});
      }
    } else if (r.keyword == "shared") {
      o.shared_targets.insert(r.field(0));
    } else if (r.keyword == "confirm") {
      o.confirmations[static_cast<std::size_t>(parse_int(r, r.field(0)) - 1)].insert(r.field(1));
    } else if (r.keyword != "subset") {
      throw ParseError(r.line, "unknown order record '" + r.keyword + "'");
    }
  }
  return orders;
}

}  // namespace tpi
