#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tpi {

struct IsolationRequest {
  std::string id;
  std::vector<std::string> target_sections;
  // Unset means "use the topology's keep-live assets".
  std::optional<std::vector<std::string>> keep_live;
  std::string requesting_job;
  bool allow_aerial_grounds = false;

  friend bool operator==(const IsolationRequest&, const IsolationRequest&) = default;
};

// Request file:
//   request <id> [job=<job>] [aerial=0|1]
//   target <section>          (repeatable)
//   keeplive <section>        (repeatable; any keeplive line overrides the defaults)
std::vector<IsolationRequest> parse_requests(std::string_view document);
std::string to_document(const IsolationRequest& request);

}  // namespace tpi
