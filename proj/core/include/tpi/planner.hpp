#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpi/energization.hpp"
#include "tpi/isolation_request.hpp"
#include "tpi/operating_order.hpp"
#include "tpi/plate_orders.hpp"
#include "tpi/switching.hpp"
#include "tpi/topology.hpp"

namespace tpi {

struct PlanOptions {
  std::string director = "PD1";
  std::string date;
  // When false, planning proceeds without a plate order (unit tests, what-if runs).
  bool require_plate_order = true;
  Feet margin_ft = 0;
  EnergizationOptions energization;
  std::int64_t timestamp = 0;
};

struct PlanWarning {
  // KEEPLIVE_INFEASIBLE, COLLATERAL_DEAD, AERIAL_SKIPPED, UNBALANCE,
  // RECLOSE_SKIPPED, SHARED_DEVICE.
  std::string code;
  std::vector<std::string> participants;
  std::string detail;

  friend bool operator==(const PlanWarning&, const PlanWarning&) = default;
};

// Ordered op with the procedure step (1..8) that produced it.
struct PlannedOp {
  SwitchOp op;
  int step = 0;

  friend bool operator==(const PlannedOp&, const PlannedOp&) = default;
};

struct IsolationPlan {
  std::string request_id;
  std::string director;
  std::string plate_order;
  // Global execution order; each op's order_ref names its form.
  std::vector<PlannedOp> sequence;
  std::vector<PlannedOp> restore_sequence;
  std::vector<OperatingOrder> forms;
  std::vector<OperatingOrder> restore_forms;
  std::vector<PlanWarning> warnings;
  // Nodes not energized once the isolation completes.
  std::set<std::string> expected_dead;
  // Form id -> (co-director, devices that director holds tags on).
  std::map<std::string, std::pair<std::string, std::set<std::string>>> shared;
  // True when exactly the target closure (plus nodes already dead) ends up dead.
  bool exact = true;

  [[nodiscard]] std::pair<std::size_t, std::size_t> predicted_counts() const {
    return {sequence.size(), restore_sequence.size()};
  }
  [[nodiscard]] bool has_warning(std::string_view code) const;

  friend bool operator==(const IsolationPlan&, const IsolationPlan&) = default;
};

struct SplitSuggestion {
  std::string track;
  std::vector<Interval> ranges;
  std::vector<std::vector<std::string>> parts;
};

// SPAN_EXCEEDED carries the suggested split.
class SpanExceeded : public DomainError {
 public:
  explicit SpanExceeded(std::vector<SplitSuggestion> splits);
  [[nodiscard]] const std::vector<SplitSuggestion>& splits() const { return splits_; }

 private:
  std::vector<SplitSuggestion> splits_;
};

// Nodes reachable from the target sections' endpoints through sections only.
std::set<Index> target_closure(const NetworkTopology& topology, const IsolationRequest& request);

// Checks request shape and span; throws DomainError INVALID_REQUEST or SpanExceeded.
void check_request(const NetworkTopology& topology, const IsolationRequest& request);

// Deterministic eight-step isolation sequence and its exact reverse.
// Throws DomainError: INVALID_REQUEST, SPAN_EXCEEDED, NO_PLATE_ORDER,
// NO_BOX_GROUND, ISOLATION_INFEASIBLE, UNSAFE_STATE.
IsolationPlan plan_isolation(const NetworkTopology& topology, const SwitchingState& state,
                             const IsolationRequest& request, const PlanOptions& options = {});

// Executes ops in order under interlocks, invoking `after` with each new state.
// Test potentials count as dead tests within their own form.
template <class Fn>
SwitchingState run_sequence(const NetworkTopology& topology, SwitchingState state, const std::vector<PlannedOp>& ops,
                            const std::string& director, Fn&& after);

SwitchingState run_sequence(const NetworkTopology& topology, SwitchingState state, const std::vector<PlannedOp>& ops,
                            const std::string& director);

// Plan document: header, sequence and restore rows, warnings. Forms are rebuilt on parse.
std::string to_document(const IsolationPlan& plan);
IsolationPlan parse_plan(std::string_view document);

// Groups a global sequence into forms keyed by order_ref, sorted by form id.
std::vector<OperatingOrder> build_forms(const std::vector<PlannedOp>& sequence, const std::string& request_id,
                                        const std::string& director, const std::string& plate_order, bool restore);

template <class Fn>
SwitchingState run_sequence(const NetworkTopology& topology, SwitchingState state, const std::vector<PlannedOp>& ops,
                            const std::string& director, Fn&& after) {
  std::map<std::string, std::set<std::string>> dead_tests;
  for (const auto& p : ops) {
    OpContext ctx{director, "plan " + p.op.order_ref, 0, dead_tests[p.op.order_ref]};
    auto r = execute_op(topology, state, p.op, ctx);
    if (p.op.kind == OpKind::kTestPotential && r.record.result == "dead") {
      dead_tests[p.op.order_ref].insert(p.op.target);
    }
    state = std::move(r.state);
    after(p, state);
  }
  return state;
}

}  // namespace tpi
