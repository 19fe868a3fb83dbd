#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "tpi/energization.hpp"
#include "tpi/planner.hpp"
#include "tpi/plate_orders.hpp"
#include "tpi/topology.hpp"

namespace tpi {

// Clock values are seconds since midnight of the night's start day; times
// after midnight therefore exceed 86,400.
using Seconds = std::int64_t;

struct DurationModel {
  Seconds remote_min_s = 30;
  Seconds remote_max_s = 90;
  double manual_base_min = 5.0;
  double manual_cap_min = 15.0;
  double track_removal_min = 30.0;
  double briefing_min = 10.0;
  std::uint64_t seed = 1;
};

struct NightWindow {
  std::string night = "night";
  Seconds nominal_start = 22 * 3600;
  Seconds nominal_end = 29 * 3600;
  Seconds service_clear = 22 * 3600;
  double extension_min = 0.0;
  // Phase totals given directly instead of derived from the plan's ops.
  std::optional<double> track_removal_min;
  std::optional<double> remote_min;
  std::optional<double> field_min;
  std::optional<double> briefing_min;
  std::optional<double> restoration_min;
};

enum class SimMode { kExpected, kSampled };

struct Phase {
  std::string name;
  Seconds start = 0;
  Seconds end = 0;

  [[nodiscard]] Seconds duration() const { return end - start; }
  friend bool operator==(const Phase&, const Phase&) = default;
};

struct TimelineReport {
  std::string night;
  Seconds nominal_start = 0;
  Seconds nominal_end = 0;
  std::vector<Phase> phases;
  Seconds on_track = 0;
  Seconds opened_to_traffic = 0;
  bool infeasible = false;  // INFEASIBLE_WINDOW

  [[nodiscard]] const Phase& phase(std::string_view name) const;
  friend bool operator==(const TimelineReport&, const TimelineReport&) = default;
};

inline constexpr const char* kPhaseNames[] = {"service_residual", "track_removal", "remote_switching",
                                              "field_switching",  "briefing",      "contractor_work",
                                              "restoration"};

// "HH:MM" or "HH:MM:SS"; values earlier than `after` roll to the next day.
Seconds parse_clock(std::string_view text, Seconds after = 0);
std::string format_clock(Seconds t);

// Window file: `window <night> start=HH:MM end=HH:MM clear=HH:MM [extension=<min>]`
// optionally followed by `phase <name> <minutes>` overrides.
std::vector<NightWindow> parse_windows(std::string_view document);

// Expected seconds for one op: remote = midpoint; manual = min(base + travel, cap);
// tags are bookkeeping and take no time.
double expected_op_seconds(const NetworkTopology& topology, const SwitchOp& op, const DurationModel& model);
// Uniform draw with the expected value above.
Seconds sample_op_seconds(const NetworkTopology& topology, const SwitchOp& op, const DurationModel& model,
                          std::mt19937_64& rng);

// Composes the night; switching phases from the plan unless overridden.
TimelineReport simulate_night(const NetworkTopology& topology, const IsolationPlan& plan, const NightWindow& window,
                              const DurationModel& model, SimMode mode);

// Pure composition from phase totals (minutes); used directly for overrides.
TimelineReport compose_night(const NightWindow& window, double track_removal_min, double remote_s, double field_s,
                             double briefing_min, double restoration_s);

// One row per phase `<night>,<phase>,<start>,<end>,<minutes>` and a summary row.
std::string to_csv(const TimelineReport& report);

struct WindowRow {
  std::string night;
  double nominal_min = 0;
  double on_track_min = 0;
  double ratio = 0;
  std::map<std::string, double> phase_min;
};

struct WorkWindowSummary {
  std::vector<WindowRow> nights;
  WindowRow mean;
};

WorkWindowSummary work_window_report(const std::vector<TimelineReport>& reports);
std::string to_csv(const WorkWindowSummary& summary);

// A train move over [from_ft, to_ft] on `track` is refused if it touches any
// barred interval of a plate order currently in effect.
bool admit_train_move(const NetworkTopology& topology, const std::vector<PopsSession>& sessions,
                      const std::string& track, Feet from_ft, Feet to_ft);

// Node pair a pantograph bridges when standing at `at_ft` on `track` (an
// insulation gap between two trolley sections), if any.
std::optional<NodePair> pantograph_bridge_at(const NetworkTopology& topology, const std::string& track, Feet at_ft);

}  // namespace tpi
