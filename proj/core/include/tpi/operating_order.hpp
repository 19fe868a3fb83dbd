#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tpi/switching.hpp"

namespace tpi {

// One numbered checklist form, scoped to a single line group.
struct OperatingOrder {
  std::string id;
  std::string line_group;
  std::string director;
  // Second director for double-header control of shared equipment.
  std::optional<std::string> shared_with;
  std::string date;
  std::string plate_order;
  bool restore = false;
  std::vector<SwitchOp> ops;
  std::vector<OpRecord> records;
  // Targets that need confirmations from both directors before they execute.
  std::set<std::string> shared_targets;
  // Directors that confirmed the op at a given index.
  std::map<std::size_t, std::set<std::string>> confirmations;

  [[nodiscard]] std::size_t next_index() const { return records.size(); }
  [[nodiscard]] bool complete() const { return records.size() == ops.size(); }
  [[nodiscard]] const SwitchOp* next_op() const { return complete() ? nullptr : &ops[records.size()]; }

  friend bool operator==(const OperatingOrder&, const OperatingOrder&) = default;
};

// Ground points whose dead test has been recorded in this order.
std::set<std::string> tested_dead(const OperatingOrder& order);

// True if the next op needs a second-director confirmation it does not have.
bool awaiting_confirmation(const OperatingOrder& order);

// Records `director`'s confirmation of the next op. Throws DomainError
// NOT_SHARED_DIRECTOR if the director is neither owner nor co-director.
void confirm_next(OperatingOrder& order, const std::string& director);

// Marks the devices `order` shares with any order of `second_director` as
// requiring dual confirmation. Throws DomainError DIRECTOR_UNKNOWN if no
// order in `others` belongs to `second_director`.
OperatingOrder request_shared_control(OperatingOrder order, const std::string& second_director,
                                      const std::vector<OperatingOrder>& others);

// Validates and executes the next op under the order's director. Throws
// InterlockException, or DomainError ORDER_COMPLETE / CONFIRMATION_REQUIRED.
SwitchingState execute_next(const NetworkTopology& topology, const SwitchingState& state, OperatingOrder& order,
                            std::int64_t timestamp, double duration_s = 0.0, bool interlocks = true);

// Form rendering: header, numbered rows, then the four subset listings.
std::string to_document(const OperatingOrder& order);
std::string to_document(const std::vector<OperatingOrder>& orders);

// Parses one or more orders; subset listings are derived and ignored.
std::vector<OperatingOrder> parse_operating_orders(std::string_view document);

// Row indexes (0-based) belonging to each form subset.
struct FormSubsets {
  std::vector<std::size_t> scada_and_tags;
  std::vector<std::size_t> switching_orders;
  std::vector<std::size_t> grounds;
};

FormSubsets form_subsets(const OperatingOrder& order);

}  // namespace tpi
