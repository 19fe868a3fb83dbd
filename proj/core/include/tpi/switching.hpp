#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tpi/energization.hpp"
#include "tpi/topology.hpp"

namespace tpi {

enum class OpKind { kOpen, kClose, kRackOut, kRackIn, kApplyGround, kRemoveGround, kTag, kUntag, kTestPotential };
enum class Actor { kRemoteScada, kFieldLineman };

std::string_view to_string(OpKind k);
std::string_view to_string(Actor a);
std::optional<OpKind> parse_op_kind(std::string_view s);
std::optional<Actor> parse_actor(std::string_view s);

// The op that undoes `k` (test_potential is its own inverse).
OpKind inverse(OpKind k);
bool targets_ground(OpKind k);
// Tag/untag may name either a device or a ground point.
bool targets_either(OpKind k);

struct SwitchOp {
  OpKind kind = OpKind::kOpen;
  std::string target;
  Actor actor = Actor::kRemoteScada;
  std::string order_ref;

  friend bool operator==(const SwitchOp&, const SwitchOp&) = default;
};

// Remote SCADA for remotely controlled devices, a field lineman for
// everything else (manual devices, racking, grounds, potential tests).
Actor default_actor(const NetworkTopology& topology, OpKind kind, std::string_view target);

enum class InterlockKind {
  kTagged,
  kLiveClose,
  kLoadOpen,
  kHotGround,
  kPhaseClose,
  kRackClosed,
  // Malformed ops: wrong target type, no-op position change, not rackable.
  kInvalidOp,
};

std::string_view to_string(InterlockKind k);
std::optional<InterlockKind> parse_interlock_kind(std::string_view s);

struct InterlockError {
  InterlockKind kind = InterlockKind::kInvalidOp;
  std::vector<std::string> participants;
  std::string detail;
};

class InterlockException : public DomainError {
 public:
  explicit InterlockException(InterlockError error);
  [[nodiscard]] const InterlockError& error() const { return error_; }

 private:
  InterlockError error_;
};

// Per-order facts the interlocks consult.
struct OpContext {
  std::string authority;
  std::string reason;
  std::int64_t timestamp = 0;
  // Ground points with a completed dead potential test in the current order.
  std::set<std::string> tested_dead;
};

std::optional<InterlockError> validate_op(const NetworkTopology& topology, const SwitchingState& state,
                                          const SwitchOp& op, const OpContext& context);

struct OpRecord {
  std::string who;
  std::int64_t when = 0;
  // "ok" for state changes; "dead" or "live" for potential tests.
  std::string result;
  Actor actor = Actor::kRemoteScada;
  double duration_s = 0.0;

  friend bool operator==(const OpRecord&, const OpRecord&) = default;
};

struct ExecuteResult {
  SwitchingState state;
  OpRecord record;
};

// Validates, then applies. Throws InterlockException on rejection.
ExecuteResult execute_op(const NetworkTopology& topology, const SwitchingState& state, const SwitchOp& op,
                         const OpContext& context, double duration_s = 0.0);

// Applies without interlocks (replay --no-interlock, event folding).
// Structurally impossible ops (unknown target) still throw.
ExecuteResult apply_op_unchecked(const NetworkTopology& topology, const SwitchingState& state,
                                 const SwitchOp& op, const OpContext& context, double duration_s = 0.0);

}  // namespace tpi
