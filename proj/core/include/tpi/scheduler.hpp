#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpi/isolation_request.hpp"
#include "tpi/planner.hpp"
#include "tpi/topology.hpp"

namespace tpi {

enum class Craft { kLineman, kGroundman, kPowerDirector, kFlagman, kDispatcher };
inline constexpr std::array<Craft, 5> kAllCrafts = {Craft::kLineman, Craft::kGroundman, Craft::kPowerDirector,
                                                    Craft::kFlagman, Craft::kDispatcher};

std::string_view to_string(Craft c);
// Accepts the canonical names plus `director` for power_director.
std::optional<Craft> parse_craft(std::string_view s);

using CraftCounts = std::array<int, 5>;
inline int& at(CraftCounts& c, Craft k) { return c[static_cast<std::size_t>(k)]; }
inline int at(const CraftCounts& c, Craft k) { return c[static_cast<std::size_t>(k)]; }

// Crafts whose headcount is shared by jobs piggybacking on one isolation.
bool shared_by_isolation(Craft c);

struct JobVariant {
  char label = 'A';
  CraftCounts demand{};
  std::string isolation;
  bool track_outage = false;
  double expected_progress = 1.0;

  friend bool operator==(const JobVariant&, const JobVariant&) = default;
};

struct Job {
  std::string id;
  int priority = 0;
  std::string owner = "in_house";
  std::vector<std::string> nights;
  std::vector<JobVariant> variants;

  friend bool operator==(const Job&, const Job&) = default;
};

struct ResourceCalendar {
  // Nights in calendar order.
  std::vector<std::string> nights;
  std::map<std::string, CraftCounts> availability;
  // Optional per-night cap on track outages; absent means unlimited.
  std::map<std::string, int> outage_cap;
  std::map<std::string, int> contractor_crews;

  [[nodiscard]] bool has_night(const std::string& night) const;

  friend bool operator==(const ResourceCalendar&, const ResourceCalendar&) = default;
};

// Jobs file: `job <id> prio=<n> owner=<o> nights=<csv>` then
// `variant <A|B|C> lineman= groundman= director= flagman= dispatcher= [isolation=<req>] [outage=0|1] progress=<u>`.
std::vector<Job> parse_jobs(std::string_view document);
// Calendar file: `avail <night> <craft> <n>`, `outages <night> <n>`, `crews <night> <n>`.
ResourceCalendar parse_calendar(std::string_view document);
std::string to_document(const std::vector<Job>& jobs);
std::string to_document(const ResourceCalendar& calendar);

struct CapacityReport {
  CraftCounts available{};
  CraftCounts demanded{};
  std::vector<Craft> binding;
};

// Binding crafts minimize availability / demand; zero-demand crafts never bind.
CapacityReport effective_capacity(const CraftCounts& available, const CraftCounts& demanded);
// Demand = variant A of every job submitted for `night`.
CapacityReport effective_capacity(const ResourceCalendar& calendar, const std::vector<Job>& jobs,
                                  const std::string& night);

enum class PipelineStage { kLookAhead, kPrioritiesSet, kRequested, kApproved, kExecuting };
std::string_view to_string(PipelineStage s);
std::optional<PipelineStage> parse_pipeline_stage(std::string_view s);

struct Assignment {
  std::optional<char> variant;
  std::string reason;  // set when cancelled

  [[nodiscard]] bool cancelled() const { return !variant.has_value(); }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

using NightJob = std::pair<std::string, std::string>;

struct WeeklyPlan {
  std::vector<Job> jobs;
  ResourceCalendar calendar;
  PipelineStage stage = PipelineStage::kLookAhead;
  std::map<NightJob, Assignment> assignments;
  std::map<std::string, CraftCounts> residual;
  // Jobs withdrawn at a gate or by the contractor, with the reason.
  std::map<std::string, std::string> excluded;
  std::set<std::string> weather_nights;
  // Isolation request id -> empty when feasible, else the cancel reason.
  std::map<std::string, std::string> isolation_status;

  [[nodiscard]] const Assignment* find(const std::string& night, const std::string& job) const;

  friend bool operator==(const WeeklyPlan&, const WeeklyPlan&) = default;
};

// What the scheduler needs to check an isolation-bearing variant.
struct IsolationContext {
  const NetworkTopology* topology = nullptr;
  const SwitchingState* state = nullptr;
  std::map<std::string, IsolationRequest> requests;
  PlanOptions options;
};

// Monday: collect the jobs whose nights fall in the calendar. Throws
// DomainError UNKNOWN_NIGHT for a job night outside the calendar.
WeeklyPlan monday_look_ahead(std::vector<Job> jobs, ResourceCalendar calendar, const IsolationContext& context = {});
// Tuesday: priorities fixed (DUPLICATE_PRIORITY if not unique); greedy assignment.
void tuesday_set_priorities(WeeklyPlan& plan);
// Wednesday: outage requests submitted; `rejected` jobs are withdrawn.
void wednesday_request(WeeklyPlan& plan, const std::set<std::string>& rejected = {});
// Thursday: approvals; `denied` jobs are withdrawn.
void thursday_approve(WeeklyPlan& plan, const std::set<std::string>& denied = {});

// All four gates with no rejections.
WeeklyPlan build_weekly_plan(std::vector<Job> jobs, ResourceCalendar calendar, const IsolationContext& context = {});

// Greedy assignment of the given nights. With `prior`, a job keeps its prior
// variant whenever that variant still fits.
void assign_nights(WeeklyPlan& plan, const std::vector<std::string>& nights, const WeeklyPlan* prior = nullptr);

// Per-night craft usage of the current assignments (isolation sharing applied).
CraftCounts night_usage(const WeeklyPlan& plan, const std::string& night);

struct Disruption {
  enum class Kind { kSickCall, kContractorCancel, kWeatherCancel, kServiceEmergency };
  Kind kind = Kind::kSickCall;
  Craft craft = Craft::kLineman;
  std::string night;
  int count = 0;
  std::string job;
  std::vector<std::string> nights;
  CraftCounts crafts_lost{};
  int outages_lost = 0;
};

// `sick_call <craft> <night> <n>`, `contractor_cancel <job>`,
// `weather_cancel <csv>`, `service_emergency <night> crafts=<craft:n,...> outages=<n>`.
Disruption parse_disruption(std::string_view text);
std::vector<Disruption> parse_disruptions(std::string_view document);
std::string to_string(const Disruption& d);

struct DiffEntry {
  std::string job;
  std::string night;
  std::string from;  // variant label or CANCELLED
  std::string to;
  std::string reason;

  friend bool operator==(const DiffEntry&, const DiffEntry&) = default;
};

struct DisruptionResult {
  WeeklyPlan plan;
  std::vector<DiffEntry> diff;
};

// Throws DomainError STAGE (before approval) or UNKNOWN_ID.
DisruptionResult apply_disruption(const WeeklyPlan& plan, const Disruption& event);

// Weekly plan document carries jobs and calendar so it can be re-planned alone.
std::string to_document(const WeeklyPlan& plan);
WeeklyPlan parse_weekly_plan(std::string_view document);

// Throws DomainError RESOURCE_OVERCOMMIT if any night/craft sum exceeds availability.
void check_feasible(const WeeklyPlan& plan);

}  // namespace tpi
