#include "tpi/scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tpi {

std::string_view to_string(Craft c) {
  switch (c) {
    case Craft::kLineman: return "lineman";
    case Craft::kGroundman: return "groundman";
    case Craft::kPowerDirector: return "power_director";
    case Craft::kFlagman: return "flagman";
    case Craft::kDispatcher: return "dispatcher";
  }
  return "?";
}

std::optional<Craft> parse_craft(std::string_view s) {
  if (s == "director") return Craft::kPowerDirector;
  for (auto c : kAllCrafts) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

bool shared_by_isolation(Craft c) {
  return c == Craft::kPowerDirector || c == Craft::kGroundman || c == Craft::kDispatcher;
}

bool ResourceCalendar::has_night(const std::string& night) const {
  return std::find(nights.begin(), nights.end(), night) != nights.end();
}

const Assignment* WeeklyPlan::find(const std::string& night, const std::string& job) const {
  auto it = assignments.find({night, job});
  return it == assignments.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Files

namespace {

// Job files use the short `director` key for power directors.
std::string_view file_key(Craft c) { return c == Craft::kPowerDirector ? "director" : to_string(c); }

}  // namespace

std::vector<Job> parse_jobs(std::string_view document) {
  std::vector<Job> jobs;
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "job") {
      Job j;
      j.id = r.field(0);
      auto prio = r.attr("prio");
      if (!prio) throw ParseError(r.line, "job '" + j.id + "' needs prio=");
      j.priority = static_cast<int>(parse_int(r, *prio));
      j.owner = r.attr_or("owner", "in_house");
      j.nights = split(r.attr_or("nights", ""), ',');
      jobs.push_back(std::move(j));
    } else if (r.keyword == "variant") {
      if (jobs.empty()) throw ParseError(r.line, "'variant' must follow a 'job' record");
      const auto& label = r.field(0);
      if (label.size() != 1 || label[0] < 'A' || label[0] > 'C') {
        throw ParseError(r.line, "variant label must be A, B or C");
      }
      JobVariant v;
      v.label = label[0];
      for (auto c : kAllCrafts) {
        int n = static_cast<int>(parse_int(r, r.attr_or(std::string(file_key(c)), "0")));
        if (n < 0) throw ParseError(r.line, "negative headcount");
        at(v.demand, c) = n;
      }
      v.isolation = r.attr_or("isolation", "");
      v.track_outage = parse_flag(r, r.attr_or("outage", v.isolation.empty() ? "0" : "1"));
      v.expected_progress = parse_double(r, r.attr_or("progress", "1"));
      if (v.expected_progress <= 0) throw ParseError(r.line, "progress must be positive");
      jobs.back().variants.push_back(std::move(v));
    } else {
      throw ParseError(r.line, "unknown jobs record '" + r.keyword + "'");
    }
  }
  for (const auto& j : jobs) {
    if (j.variants.empty()) throw DomainError("NO_VARIANT", {j.id}, "job '" + j.id + "' has no variants");
  }
  return jobs;
}

ResourceCalendar parse_calendar(std::string_view document) {
  ResourceCalendar cal;
  auto touch = [&](const std::string& night) -> CraftCounts& {
    if (!cal.has_night(night)) cal.nights.push_back(night);
    return cal.availability[night];
  };
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "avail") {
      auto craft = parse_craft(r.field(1));
      if (!craft) throw ParseError(r.line, "unknown craft '" + r.field(1) + "'");
      int n = static_cast<int>(parse_int(r, r.field(2)));
      if (n < 0) throw ParseError(r.line, "negative headcount");
      at(touch(r.field(0)), *craft) = n;
    } else if (r.keyword == "outages") {
      touch(r.field(0));
      cal.outage_cap[r.field(0)] = static_cast<int>(parse_int(r, r.field(1)));
    } else if (r.keyword == "crews") {
      touch(r.field(0));
      cal.contractor_crews[r.field(0)] = static_cast<int>(parse_int(r, r.field(1)));
    } else {
      throw ParseError(r.line, "unknown calendar record '" + r.keyword + "'");
    }
  }
  return cal;
}

std::string to_document(const std::vector<Job>& jobs) {
  std::ostringstream out;
  for (const auto& j : jobs) {
    out << "job " << j.id << " prio=" << j.priority << " owner=" << j.owner << " nights=" << join(j.nights, ",")
        << "\n";
    for (const auto& v : j.variants) {
      out << "variant " << v.label;
      for (auto c : kAllCrafts) out << " " << file_key(c) << "=" << at(v.demand, c);
      if (!v.isolation.empty()) out << " isolation=" << v.isolation;
      out << " outage=" << (v.track_outage ? 1 : 0) << " progress=" << v.expected_progress << "\n";
    }
  }
  return out.str();
}

std::string to_document(const ResourceCalendar& cal) {
  std::ostringstream out;
  for (const auto& night : cal.nights) {
    auto it = cal.availability.find(night);
    for (auto c : kAllCrafts) {
      out << "avail " << night << " " << to_string(c) << " " << (it == cal.availability.end() ? 0 : at(it->second, c))
          << "\n";
    }
    if (auto o = cal.outage_cap.find(night); o != cal.outage_cap.end()) out << "outages " << night << " " << o->second << "\n";
    if (auto c = cal.contractor_crews.find(night); c != cal.contractor_crews.end()) {
      out << "crews " << night << " " << c->second << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Capacity

CapacityReport effective_capacity(const CraftCounts& available, const CraftCounts& demanded) {
  CapacityReport report{available, demanded, {}};
  std::optional<Craft> best;
  for (auto c : kAllCrafts) {
    if (at(demanded, c) <= 0) continue;
    if (!best) {
      best = c;
      continue;
    }
    // Compare available/demanded ratios exactly.
    long lhs = static_cast<long>(at(available, c)) * at(demanded, *best);
    long rhs = static_cast<long>(at(available, *best)) * at(demanded, c);
    if (lhs < rhs) best = c;
  }
  if (!best) return report;
  for (auto c : kAllCrafts) {
    if (at(demanded, c) <= 0) continue;
    long lhs = static_cast<long>(at(available, c)) * at(demanded, *best);
    long rhs = static_cast<long>(at(available, *best)) * at(demanded, c);
    if (lhs == rhs) report.binding.push_back(c);
  }
  return report;
}

CapacityReport effective_capacity(const ResourceCalendar& calendar, const std::vector<Job>& jobs,
                                  const std::string& night) {
  CraftCounts demand{};
  for (const auto& j : jobs) {
    if (std::find(j.nights.begin(), j.nights.end(), night) == j.nights.end() || j.variants.empty()) continue;
    for (auto c : kAllCrafts) at(demand, c) += at(j.variants.front().demand, c);
  }
  auto it = calendar.availability.find(night);
  return effective_capacity(it == calendar.availability.end() ? CraftCounts{} : it->second, demand);
}

// ---------------------------------------------------------------------------
// Assignment

std::string_view to_string(PipelineStage s) {
  switch (s) {
    case PipelineStage::kLookAhead: return "look_ahead";
    case PipelineStage::kPrioritiesSet: return "priorities_set";
    case PipelineStage::kRequested: return "requested";
    case PipelineStage::kApproved: return "approved";
    case PipelineStage::kExecuting: return "executing";
  }
  return "?";
}

std::optional<PipelineStage> parse_pipeline_stage(std::string_view s) {
  for (auto v : {PipelineStage::kLookAhead, PipelineStage::kPrioritiesSet, PipelineStage::kRequested,
                 PipelineStage::kApproved, PipelineStage::kExecuting}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

namespace {

const Job& job_by_id(const WeeklyPlan& plan, const std::string& id) {
  for (const auto& j : plan.jobs) {
    if (j.id == id) return j;
  }
  throw DomainError("UNKNOWN_ID", {id}, "unknown job '" + id + "'");
}

const JobVariant* variant_of(const Job& job, char label) {
  for (const auto& v : job.variants) {
    if (v.label == label) return &v;
  }
  return nullptr;
}

struct Commitment {
  const JobVariant* variant;
  const Job* job;
};

CraftCounts usage_of(const std::vector<Commitment>& commits) {
  CraftCounts total{};
  std::map<std::string, CraftCounts> shared;
  for (const auto& c : commits) {
    for (auto craft : kAllCrafts) {
      int n = at(c.variant->demand, craft);
      if (!c.variant->isolation.empty() && shared_by_isolation(craft)) {
        int& slot = at(shared[c.variant->isolation], craft);
        slot = std::max(slot, n);
      } else {
        at(total, craft) += n;
      }
    }
  }
  for (const auto& [iso, counts] : shared) {
    for (auto craft : kAllCrafts) at(total, craft) += at(counts, craft);
  }
  return total;
}

int outages_of(const std::vector<Commitment>& commits) {
  std::set<std::string> keys;
  for (const auto& c : commits) {
    if (c.variant->track_outage) keys.insert(c.variant->isolation.empty() ? "job:" + c.job->id : c.variant->isolation);
  }
  return static_cast<int>(keys.size());
}

std::vector<Commitment> commitments(const WeeklyPlan& plan, const std::string& night) {
  std::vector<Commitment> out;
  for (const auto& j : plan.jobs) {
    const Assignment* a = plan.find(night, j.id);
    if (!a || a->cancelled()) continue;
    if (const JobVariant* v = variant_of(j, *a->variant)) out.push_back({v, &j});
  }
  return out;
}

// Empty string when the variant fits; otherwise why not.
std::string variant_blocker(const WeeklyPlan& plan, const std::string& night, const std::vector<Commitment>& committed,
                            const Job& job, const JobVariant& v) {
  if (!v.isolation.empty()) {
    if (plan.weather_nights.count(night)) return "weather";
    if (auto it = plan.isolation_status.find(v.isolation); it != plan.isolation_status.end() && !it->second.empty()) {
      return it->second;
    }
  }
  auto with = committed;
  with.push_back({&v, &job});
  auto use = usage_of(with);
  const auto& avail = plan.calendar.availability.at(night);
  for (auto c : kAllCrafts) {
    if (at(use, c) > at(avail, c)) return "insufficient_" + std::string(to_string(c));
  }
  if (auto cap = plan.calendar.outage_cap.find(night); cap != plan.calendar.outage_cap.end() && v.track_outage) {
    if (outages_of(with) > cap->second) return "outage_limit";
  }
  return {};
}

std::vector<const Job*> by_priority(const WeeklyPlan& plan) {
  std::vector<const Job*> out;
  for (const auto& j : plan.jobs) out.push_back(&j);
  std::sort(out.begin(), out.end(),
            [](const Job* a, const Job* b) { return std::tie(a->priority, a->id) < std::tie(b->priority, b->id); });
  return out;
}

}  // namespace

CraftCounts night_usage(const WeeklyPlan& plan, const std::string& night) {
  return usage_of(commitments(plan, night));
}

void assign_nights(WeeklyPlan& plan, const std::vector<std::string>& nights, const WeeklyPlan* prior) {
  for (const auto& night : nights) {
    for (auto it = plan.assignments.begin(); it != plan.assignments.end();) {
      it = it->first.first == night ? plan.assignments.erase(it) : std::next(it);
    }
    std::vector<Commitment> committed;
    for (const Job* job : by_priority(plan)) {
      if (std::find(job->nights.begin(), job->nights.end(), night) == job->nights.end()) continue;
      Assignment a;
      if (auto ex = plan.excluded.find(job->id); ex != plan.excluded.end()) {
        a.reason = ex->second;
        plan.assignments[{night, job->id}] = a;
        continue;
      }
      const JobVariant* chosen = nullptr;
      if (prior) {
        const Assignment* before = prior->find(night, job->id);
        if (before && !before->cancelled()) {
          const JobVariant* v = variant_of(*job, *before->variant);
          if (v && variant_blocker(plan, night, committed, *job, *v).empty()) chosen = v;
        }
      }
      if (!chosen) {
        for (const auto& v : job->variants) {
          std::string why = variant_blocker(plan, night, committed, *job, v);
          if (why.empty()) {
            chosen = &v;
            break;
          }
          if (a.reason.empty()) a.reason = why;
        }
      }
      if (chosen) {
        a = Assignment{chosen->label, {}};
        committed.push_back({chosen, job});
      }
      plan.assignments[{night, job->id}] = a;
    }
    CraftCounts residual = plan.calendar.availability.at(night);
    auto use = usage_of(committed);
    for (auto c : kAllCrafts) at(residual, c) -= at(use, c);
    plan.residual[night] = residual;
  }
}

WeeklyPlan monday_look_ahead(std::vector<Job> jobs, ResourceCalendar calendar, const IsolationContext& context) {
  WeeklyPlan plan;
  for (const auto& j : jobs) {
    for (const auto& night : j.nights) {
      if (!calendar.has_night(night)) {
        throw DomainError("UNKNOWN_NIGHT", {j.id, night}, "job '" + j.id + "' names night '" + night + "' outside the calendar");
      }
    }
  }
  for (const auto& night : calendar.nights) calendar.availability[night];
  plan.jobs = std::move(jobs);
  plan.calendar = std::move(calendar);
  std::set<std::string> isolations;
  for (const auto& j : plan.jobs) {
    for (const auto& v : j.variants) {
      if (!v.isolation.empty()) isolations.insert(v.isolation);
    }
  }
  for (const auto& iso : isolations) {
    std::string status;
    if (context.topology) {
      auto req = context.requests.find(iso);
      if (req == context.requests.end()) {
        status = "unknown_isolation";
      } else {
        try {
          SwitchingState s = context.state ? *context.state : normal_state(*context.topology);
          (void)plan_isolation(*context.topology, s, req->second, context.options);
        } catch (const DomainError& e) {
          status = e.kind();
          std::transform(status.begin(), status.end(), status.begin(),
                         [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        }
      }
    }
    plan.isolation_status[iso] = status;
  }
  plan.stage = PipelineStage::kLookAhead;
  return plan;
}

void tuesday_set_priorities(WeeklyPlan& plan) {
  std::map<int, std::string> seen;
  for (const auto& j : plan.jobs) {
    auto [it, fresh] = seen.emplace(j.priority, j.id);
    if (!fresh) {
      throw DomainError("DUPLICATE_PRIORITY", {it->second, j.id}, "priority " + std::to_string(j.priority) + " is used twice");
    }
  }
  assign_nights(plan, plan.calendar.nights);
  plan.stage = PipelineStage::kPrioritiesSet;
}

namespace {

void withdraw(WeeklyPlan& plan, const std::set<std::string>& ids, const std::string& reason) {
  for (const auto& id : ids) {
    (void)job_by_id(plan, id);
    plan.excluded.emplace(id, reason);
  }
  assign_nights(plan, plan.calendar.nights);
}

void require_stage(const WeeklyPlan& plan, PipelineStage want, const char* gate) {
  if (plan.stage != want) {
    throw DomainError("STAGE", {std::string(to_string(plan.stage))},
                      std::string(gate) + " requires stage " + std::string(to_string(want)));
  }
}

}  // namespace

void wednesday_request(WeeklyPlan& plan, const std::set<std::string>& rejected) {
  require_stage(plan, PipelineStage::kPrioritiesSet, "wednesday_request");
  withdraw(plan, rejected, "request_rejected");
  plan.stage = PipelineStage::kRequested;
}

void thursday_approve(WeeklyPlan& plan, const std::set<std::string>& denied) {
  require_stage(plan, PipelineStage::kRequested, "thursday_approve");
  withdraw(plan, denied, "approval_denied");
  plan.stage = PipelineStage::kApproved;
}

WeeklyPlan build_weekly_plan(std::vector<Job> jobs, ResourceCalendar calendar, const IsolationContext& context) {
  WeeklyPlan plan = monday_look_ahead(std::move(jobs), std::move(calendar), context);
  tuesday_set_priorities(plan);
  wednesday_request(plan);
  thursday_approve(plan);
  return plan;
}

void check_feasible(const WeeklyPlan& plan) {
  for (const auto& night : plan.calendar.nights) {
    auto use = night_usage(plan, night);
    const auto& avail = plan.calendar.availability.at(night);
    for (auto c : kAllCrafts) {
      if (at(use, c) > at(avail, c)) {
        throw DomainError("RESOURCE_OVERCOMMIT", {night, std::string(to_string(c))},
                          std::to_string(at(use, c)) + " " + std::string(to_string(c)) + " committed, " +
                              std::to_string(at(avail, c)) + " available");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Disruptions

Disruption parse_disruption(std::string_view text) {
  auto records = parse_records(text);
  if (records.size() != 1) throw ParseError(0, "expected exactly one disruption event");
  const auto& r = records.front();
  Disruption d;
  if (r.keyword == "sick_call") {
    d.kind = Disruption::Kind::kSickCall;
    auto craft = parse_craft(r.field(0));
    if (!craft) throw ParseError(r.line, "unknown craft '" + r.field(0) + "'");
    d.craft = *craft;
    d.night = r.field(1);
    d.count = static_cast<int>(parse_int(r, r.fields.size() > 2 ? r.fields[2] : "1"));
  } else if (r.keyword == "contractor_cancel") {
    d.kind = Disruption::Kind::kContractorCancel;
    d.job = r.field(0);
  } else if (r.keyword == "weather_cancel") {
    d.kind = Disruption::Kind::kWeatherCancel;
    for (const auto& f : r.fields) {
      auto parts = split(f, ',');
      d.nights.insert(d.nights.end(), parts.begin(), parts.end());
    }
    if (d.nights.empty()) throw ParseError(r.line, "weather_cancel needs nights");
  } else if (r.keyword == "service_emergency") {
    d.kind = Disruption::Kind::kServiceEmergency;
    d.night = r.field(0);
    for (const auto& item : split(r.attr_or("crafts", ""), ',')) {
      if (item.empty()) continue;
      auto kv = split(item, ':');
      auto craft = kv.size() == 2 ? parse_craft(kv[0]) : std::nullopt;
      if (!craft) throw ParseError(r.line, "crafts= entries are <craft>:<n>");
      at(d.crafts_lost, *craft) += static_cast<int>(parse_int(r, kv[1]));
    }
    d.outages_lost = static_cast<int>(parse_int(r, r.attr_or("outages", "0")));
  } else {
    throw ParseError(r.line, "unknown disruption '" + r.keyword + "'");
  }
  return d;
}

std::vector<Disruption> parse_disruptions(std::string_view document) {
  std::vector<Disruption> out;
  std::istringstream in{std::string(document)};
  std::string line;
  while (std::getline(in, line)) {
    auto records = parse_records(line);
    if (records.empty()) continue;
    out.push_back(parse_disruption(line));
  }
  return out;
}

std::string to_string(const Disruption& d) {
  std::ostringstream out;
  switch (d.kind) {
    case Disruption::Kind::kSickCall:
      out << "sick_call " << to_string(d.craft) << " " << d.night << " " << d.count;
      break;
    case Disruption::Kind::kContractorCancel:
      out << "contractor_cancel " << d.job;
      break;
    case Disruption::Kind::kWeatherCancel:
      out << "weather_cancel " << join(d.nights, ",");
      break;
    case Disruption::Kind::kServiceEmergency: {
      std::vector<std::string> lost;
      for (auto c : kAllCrafts) {
        if (at(d.crafts_lost, c) > 0) lost.push_back(std::string(to_string(c)) + ":" + std::to_string(at(d.crafts_lost, c)));
      }
      out << "service_emergency " << d.night << " crafts=" << join(lost, ",") << " outages=" << d.outages_lost;
      break;
    }
  }
  return out.str();
}

namespace {

void require_night(const WeeklyPlan& plan, const std::string& night) {
  if (!plan.calendar.has_night(night)) throw DomainError("UNKNOWN_ID", {night}, "unknown night '" + night + "'");
}

std::string label(const Assignment* a) {
  if (!a) return "-";
  return a->cancelled() ? "CANCELLED" : std::string(1, *a->variant);
}

}  // namespace

DisruptionResult apply_disruption(const WeeklyPlan& plan, const Disruption& event) {
  if (plan.stage != PipelineStage::kApproved && plan.stage != PipelineStage::kExecuting) {
    throw DomainError("STAGE", {std::string(to_string(plan.stage))}, "disruptions apply to approved plans only");
  }
  WeeklyPlan next = plan;
  std::vector<std::string> affected;
  switch (event.kind) {
    case Disruption::Kind::kSickCall: {
      require_night(plan, event.night);
      int& n = at(next.calendar.availability[event.night], event.craft);
      n = std::max(0, n - event.count);
      affected.push_back(event.night);
      break;
    }
    case Disruption::Kind::kContractorCancel: {
      const Job& job = job_by_id(plan, event.job);
      next.excluded[job.id] = "contractor_cancel";
      affected = job.nights;
      break;
    }
    case Disruption::Kind::kWeatherCancel:
      for (const auto& night : event.nights) {
        require_night(plan, night);
        next.weather_nights.insert(night);
        affected.push_back(night);
      }
      break;
    case Disruption::Kind::kServiceEmergency: {
      require_night(plan, event.night);
      auto& avail = next.calendar.availability[event.night];
      for (auto c : kAllCrafts) at(avail, c) = std::max(0, at(avail, c) - at(event.crafts_lost, c));
      if (event.outages_lost > 0) {
        auto cap = plan.calendar.outage_cap.find(event.night);
        int base = cap != plan.calendar.outage_cap.end() ? cap->second : outages_of(commitments(plan, event.night));
        next.calendar.outage_cap[event.night] = std::max(0, base - event.outages_lost);
      }
      affected.push_back(event.night);
      break;
    }
  }
  std::vector<std::string> ordered;
  for (const auto& night : next.calendar.nights) {
    if (std::find(affected.begin(), affected.end(), night) != affected.end()) ordered.push_back(night);
  }
  assign_nights(next, ordered, &plan);
  next.stage = PipelineStage::kExecuting;

  DisruptionResult result{std::move(next), {}};
  for (const auto& night : ordered) {
    for (const Job* job : by_priority(result.plan)) {
      const Assignment* before = plan.find(night, job->id);
      const Assignment* after = result.plan.find(night, job->id);
      if (label(before) == label(after)) continue;
      std::string reason = after && after->cancelled() ? after->reason : "reassigned";
      result.diff.push_back({job->id, night, label(before), label(after), reason});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Plan documents

std::string to_document(const WeeklyPlan& plan) {
  std::ostringstream out;
  out << "stage " << to_string(plan.stage) << "\n";
  out << to_document(plan.jobs);
  out << to_document(plan.calendar);
  for (const auto& [job, reason] : plan.excluded) out << "exclude " << job << " " << reason << "\n";
  for (const auto& night : plan.weather_nights) out << "weather " << night << "\n";
  for (const auto& [iso, status] : plan.isolation_status) {
    out << "isolation " << iso << " " << (status.empty() ? "ok" : status) << "\n";
  }
  for (const auto& night : plan.calendar.nights) {
    for (const Job* job : by_priority(plan)) {
      const Assignment* a = plan.find(night, job->id);
      if (!a) continue;
      out << "assign " << night << " " << job->id << " " << label(a);
      if (a->cancelled()) out << " reason=" << a->reason;
      out << "\n";
    }
  }
  return out.str();
}

WeeklyPlan parse_weekly_plan(std::string_view document) {
  std::string jobs_doc, cal_doc;
  WeeklyPlan plan;
  std::vector<Record> rest;
  std::istringstream in{std::string(document)};
  std::string line;
  while (std::getline(in, line)) {
    auto records = parse_records(line);
    if (records.empty()) continue;
    const auto& kw = records.front().keyword;
    if (kw == "job" || kw == "variant") {
      jobs_doc += line + "\n";
    } else if (kw == "avail" || kw == "outages" || kw == "crews") {
      cal_doc += line + "\n";
    } else {
      rest.push_back(records.front());
    }
  }
  plan.jobs = parse_jobs(jobs_doc);
  plan.calendar = parse_calendar(cal_doc);
  for (const auto& r : rest) {
    if (r.keyword == "stage") {
      auto s = parse_pipeline_stage(r.field(0));
      if (!s) throw ParseError(r.line, "unknown stage '" + r.field(0) + "'");
      plan.stage = *s;
    } else if (r.keyword == "exclude") {
      plan.excluded[r.field(0)] = r.field(1);
    } else if (r.keyword == "weather") {
      plan.weather_nights.insert(r.field(0));
    } else if (r.keyword == "isolation") {
      plan.isolation_status[r.field(0)] = r.field(1) == "ok" ? "" : r.field(1);
    } else if (r.keyword == "assign") {
      Assignment a;
      if (r.field(2) != "CANCELLED") a.variant = r.field(2).at(0);
      a.reason = r.attr_or("reason", "");
      plan.assignments[{r.field(0), r.field(1)}] = a;
    } else {
      throw ParseError(r.line, "unknown weekly plan record '" + r.keyword + "'");
    }
  }
  for (const auto& night : plan.calendar.nights) {
    CraftCounts residual = plan.calendar.availability.at(night);
    auto use = night_usage(plan, night);
    for (auto c : kAllCrafts) at(residual, c) -= at(use, c);
    plan.residual[night] = residual;
  }
  return plan;
}

}  // namespace tpi
