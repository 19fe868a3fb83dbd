#include "tpi/http_service.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <thread>

#include "httplib.h"

namespace tpi {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Raised inside handlers to short-circuit with a status.
struct HttpError {
  int status;
  std::string kind;
  std::vector<std::string> participants;
  std::string detail;
};

ServiceResponse error_response(int status, const std::string& kind, const std::vector<std::string>& participants,
                               const std::string& detail) {
  return {status, render_envelope({{"error", kind}, {"participants", join(participants, ",")}, {"detail", detail}})};
}

int status_for(const std::string& kind) {
  if (kind == "UNKNOWN_ID") return 404;
  static const char* conflicts[] = {"ILLEGAL_TRANSITION", "NOT_ORDER_DIRECTOR", "POPS_NOT_IN_EFFECT",
                                    "POPS_NOT_RELEASED",  "CONFIRMATION_REQUIRED", "ORDER_COMPLETE",
                                    "DUPLICATE_ID",       "NOT_SHARED_DIRECTOR"};
  for (const char* c : conflicts) {
    if (kind == c) return 409;
  }
  return 422;
}

std::string header(const ServiceRequest& r, const std::string& name) {
  for (const auto& [k, v] : r.headers) {
    if (lower(k) == lower(name)) return v;
  }
  return {};
}

Role require_role(const ServiceRequest& r) {
  auto text = header(r, "X-Role");
  if (text.empty()) throw HttpError{400, "MISSING_ROLE", {}, "X-Role header is required"};
  auto role = parse_role(lower(text));
  if (!role) throw HttpError{400, "BAD_ROLE", {text}, "X-Role must be director or dispatcher"};
  return *role;
}

std::string require_actor(const ServiceRequest& r) {
  auto actor = header(r, "X-Actor");
  if (actor.empty()) throw HttpError{400, "MISSING_ACTOR", {}, "X-Actor header is required"};
  return actor;
}

std::string render_session(const PopsSession& s) {
  std::ostringstream out;
  out << "pops " << s.plate_order << " state=" << to_string(s.state) << " director=" << quote_if_needed(s.director);
  if (!s.dispatcher.empty()) out << " dispatcher=" << quote_if_needed(s.dispatcher);
  out << "\n";
  for (const auto& e : s.log) {
    out << "transition " << to_string(e.event) << " " << to_string(e.from) << " " << to_string(e.to) << " "
        << quote_if_needed(e.actor) << " " << e.timestamp << "\n";
  }
  return out.str();
}

std::string render_state(const NetworkTopology& t, const SwitchingState& s) {
  return to_document(s) + to_document(compute_energization(t, s));
}

}  // namespace

Envelope parse_envelope(const std::string& body) {
  Envelope env;
  std::istringstream in(body);
  std::string line;
  std::size_t consumed = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    const std::size_t next = consumed + line.size() + 1;
    std::string t = trim(line);
    if (t.empty()) {
      if (saw_header) consumed = next;
      break;
    }
    auto first_space = t.find_first_of(" \t");
    std::string first = t.substr(0, first_space);
    if (first.size() < 2 || first.back() != ':') break;
    env.headers[lower(first.substr(0, first.size() - 1))] =
        first_space == std::string::npos ? std::string() : trim(t.substr(first_space));
    saw_header = true;
    consumed = next;
  }
  env.document = consumed >= body.size() ? std::string() : body.substr(consumed);
  return env;
}

std::string render_envelope(const std::map<std::string, std::string>& headers, const std::string& document) {
  std::string out;
  for (const auto& [k, v] : headers) out += k + ": " + v + "\n";
  out += "\n";
  out += document;
  return out;
}

Service::Service(std::vector<std::shared_ptr<ControlRoom>> rooms, ServiceOptions options)
    : rooms_(std::move(rooms)), options_(std::move(options)) {
  if (rooms_.empty()) throw DomainError("NO_ROOMS", {}, "service needs at least one control room");
}

ServiceResponse Service::handle(const ServiceRequest& req) const {
  try {
    auto parts = split(req.path, '/');
    parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
    std::size_t room_index = 0;
    if (parts.size() >= 2 && parts[0] == "rooms") {
      try {
        room_index = std::stoul(parts[1]);
      } catch (const std::exception&) {
        throw HttpError{400, "BAD_ROOM", {parts[1]}, "room must be a number"};
      }
      if (room_index >= rooms_.size()) throw HttpError{404, "UNKNOWN_ID", {parts[1]}, "no such room"};
      parts.erase(parts.begin(), parts.begin() + 2);
    }
    ControlRoom& room = *rooms_[room_index];
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    auto route = [&](std::initializer_list<const char*> pattern) {
      if (parts.size() != pattern.size()) return false;
      std::size_t i = 0;
      for (const char* p : pattern) {
        if (std::string_view(p) != "*" && parts[i] != p) return false;
        ++i;
      }
      return true;
    };

    if (get && route({"network"})) return {200, to_document(room.topology())};

    if (get && route({"state"})) {
      auto [state, seq] = room.snapshot();
      return {200, render_envelope({{"seq", std::to_string(seq)}}, render_state(room.topology(), state))};
    }

    if (post && route({"isolations"})) {
      if (require_role(req) != Role::kDirector) throw HttpError{403, "WRONG_ROLE", {}, "isolations are planned by a director"};
      const std::string director = require_actor(req);
      const auto env = parse_envelope(req.body);
      auto requests = parse_requests(env.document);
      if (requests.size() != 1) {
        throw HttpError{400, "BAD_REQUEST_BODY", {}, "body must hold exactly one isolation request"};
      }
      IsolationPlan plan = room.create_isolation(requests[0], director);
      std::vector<std::string> ids, restore;
      for (const auto& f : plan.forms) ids.push_back(f.id);
      for (const auto& f : plan.restore_forms) restore.push_back(f.id);
      return {201, render_envelope({{"request", plan.request_id},
                                    {"orders", join(ids, ",")},
                                    {"restore", join(restore, ",")},
                                    {"plate", plan.plate_order}},
                                   to_document(plan))};
    }

    if (get && route({"orders"})) {
      std::string out;
      for (const auto& id : room.order_ids()) out += id + "\n";
      return {200, out};
    }

    if (post && route({"orders"})) {
      if (require_role(req) != Role::kDirector) throw HttpError{403, "WRONG_ROLE", {}, "orders are filed by a director"};
      auto orders = parse_operating_orders(parse_envelope(req.body).document);
      if (orders.empty()) throw HttpError{400, "BAD_REQUEST_BODY", {}, "body holds no order"};
      std::vector<std::string> ids;
      for (auto& o : orders) {
        ids.push_back(o.id);
        room.add_order(std::move(o));
      }
      return {201, render_envelope({{"orders", join(ids, ",")}})};
    }

    if (get && route({"orders", "*"})) return {200, to_document(room.order(parts[1]))};

    if (post && route({"orders", "*", "step"})) {
      if (require_role(req) != Role::kDirector) throw HttpError{403, "WRONG_ROLE", {}, "only a director steps orders"};
      auto out = room.step(parts[1], require_actor(req));
      return {200, render_envelope({{"order", out.order_id},
                                    {"index", std::to_string(out.index + 1)},
                                    {"op", std::string(to_string(out.op.kind))},
                                    {"target", out.op.target},
                                    {"actor", std::string(to_string(out.op.actor))},
                                    {"result", out.record.result},
                                    {"complete", out.complete ? "true" : "false"}})};
    }

    if (post && route({"orders", "*", "confirm"})) {
      if (require_role(req) != Role::kDirector) throw HttpError{403, "WRONG_ROLE", {}, "only a director confirms"};
      room.confirm(parts[1], require_actor(req));
      auto o = room.order(parts[1]);
      return {200, render_envelope({{"order", o.id}, {"index", std::to_string(o.next_index() + 1)}})};
    }

    if (get && route({"pops"})) {
      std::string out;
      for (const auto& s : room.pops_sessions()) out += render_session(s);
      return {200, out};
    }

    if (get && route({"pops", "*"})) {
      auto s = room.pops_session(parts[1]);
      if (!s) throw HttpError{404, "UNKNOWN_ID", {parts[1]}, "no POPS session for this plate order"};
      return {200, render_session(*s)};
    }

    if (post && route({"pops", "*", "*"})) {
      auto event = parse_pops_event(parts[2]);
      if (!event) throw HttpError{404, "UNKNOWN_ID", {parts[2]}, "unknown POPS event"};
      const Role role = require_role(req);
      if (!room.pops_session(parts[1])) throw HttpError{404, "UNKNOWN_ID", {parts[1]}, "no POPS session for this plate order"};
      if (!role_may_issue(role, *event)) {
        throw HttpError{403, "WRONG_ROLE", {std::string(to_string(role)), parts[2]},
                        std::string(to_string(role)) + " may not issue " + parts[2]};
      }
      return {200, render_session(room.pops(parts[1], *event, role, require_actor(req)))};
    }

    if (get && route({"events"})) {
      std::uint64_t since = 0;
      long long wait_ms = 0;
      try {
        if (auto it = req.query.find("since"); it != req.query.end()) since = std::stoull(it->second);
        if (auto it = req.query.find("wait"); it != req.query.end()) wait_ms = std::stoll(it->second);
      } catch (const std::exception&) {
        throw HttpError{400, "BAD_QUERY", {}, "since and wait must be integers"};
      }
      wait_ms = std::clamp<long long>(wait_ms, 0, options_.max_poll_wait.count());
      std::string out;
      for (const auto& e : room.events_since(since, std::chrono::milliseconds(wait_ms))) out += e.to_line() + "\n";
      return {200, out};
    }

    if (post && route({"simulate"})) {
      const auto env = parse_envelope(req.body);
      auto it = env.headers.find("request");
      if (it == env.headers.end()) throw HttpError{400, "BAD_REQUEST_BODY", {}, "simulate needs a 'request:' header"};
      auto plan = room.plan(it->second);
      if (!plan) throw HttpError{404, "UNKNOWN_ID", {it->second}, "no plan for this request"};
      DurationModel model = options_.durations;
      if (auto s = env.headers.find("seed"); s != env.headers.end()) model.seed = std::stoull(s->second);
      SimMode mode = SimMode::kSampled;
      if (auto m = env.headers.find("mode"); m != env.headers.end()) {
        if (m->second == "expected") mode = SimMode::kExpected;
        else if (m->second != "sampled") throw HttpError{400, "BAD_REQUEST_BODY", {m->second}, "mode is expected or sampled"};
      }
      auto windows = parse_windows(env.document);
      if (windows.empty()) windows.push_back(NightWindow{});
      std::string out;
      for (const auto& w : windows) out += to_csv(simulate_night(room.topology(), *plan, w, model, mode));
      return {200, out};
    }

    throw HttpError{404, "NOT_FOUND", {req.method, req.path}, "no such endpoint"};
  } catch (const HttpError& e) {
    return error_response(e.status, e.kind, e.participants, e.detail);
  } catch (const InterlockException& e) {
    return {409, render_envelope({{"error", "INTERLOCK"},
                                  {"kind", std::string(to_string(e.error().kind))},
                                  {"participants", join(e.error().participants, ",")},
                                  {"detail", e.error().detail}})};
  } catch (const DomainError& e) {
    return error_response(status_for(e.kind()), e.kind(), e.participants(), e.detail());
  } catch (const ParseError& e) {
    return error_response(400, "PARSE_ERROR", {std::to_string(e.line())}, e.what());
  } catch (const std::invalid_argument& e) {
    return error_response(400, "PARSE_ERROR", {}, e.what());
  } catch (const std::out_of_range& e) {
    return error_response(400, "PARSE_ERROR", {}, e.what());
  }
}

struct HttpServer::Impl {
  std::shared_ptr<Service> service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(std::shared_ptr<Service> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto handler = [svc = impl_->service](const httplib::Request& req, httplib::Response& res) {
    ServiceRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) r.headers[k] = v;
    r.body = req.body;
    auto out = svc->handle(r);
    res.status = out.status;
    res.set_content(out.body, "text/plain");
  };
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Post(R"(/.*)", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) throw DomainError("BIND_FAILED", {host}, "could not bind " + host);
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = bind(host, port);
  impl_->thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tpi
