#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tpi/control_room.hpp"
#include "tpi/timeline.hpp"

namespace tpi {

// Transport-neutral request/response so routing can be exercised without
// sockets. Header names are matched case-insensitively.
struct ServiceRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct ServiceResponse {
  int status = 200;
  std::string body;
};

struct ServiceOptions {
  DurationModel durations;
  // Upper bound on a single long-poll wait.
  std::chrono::milliseconds max_poll_wait{30000};
};

// Bodies are `key: value` lines, a blank line, then a module document.
struct Envelope {
  std::map<std::string, std::string> headers;
  std::string document;
};

Envelope parse_envelope(const std::string& body);
std::string render_envelope(const std::map<std::string, std::string>& headers, const std::string& document = {});

// Routes for one process. Paths may carry a `/rooms/<n>` prefix; room 0 is
// the default.
class Service {
 public:
  explicit Service(std::vector<std::shared_ptr<ControlRoom>> rooms, ServiceOptions options = {});

  ServiceResponse handle(const ServiceRequest& request) const;

  [[nodiscard]] std::size_t room_count() const { return rooms_.size(); }
  [[nodiscard]] ControlRoom& room(std::size_t i) const { return *rooms_.at(i); }

 private:
  std::vector<std::shared_ptr<ControlRoom>> rooms_;
  ServiceOptions options_;
};

// HTTP/1.1 front end over Service.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Service> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  // bind() then run() on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tpi
