#include "tpi/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace tpi {

const Phase& TimelineReport::phase(std::string_view name) const {
  for (const auto& p : phases) {
    if (p.name == name) return p;
  }
  throw DomainError("UNKNOWN_ID", {std::string(name)}, "no phase '" + std::string(name) + "'");
}

Seconds parse_clock(std::string_view text, Seconds after) {
  auto parts = split(text, ':');
  if (parts.size() < 2 || parts.size() > 3) throw ParseError(0, "clock must be HH:MM, got '" + std::string(text) + "'");
  Record where;
  const Seconds limits[] = {23, 59, 59};
  Seconds fields[3] = {0, 0, 0};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      fields[i] = parse_int(where, parts[i]);
    } catch (const ParseError&) {
      throw ParseError(0, "bad clock value '" + std::string(text) + "'");
    }
    if (fields[i] < 0 || fields[i] > limits[i]) throw ParseError(0, "clock out of range '" + std::string(text) + "'");
  }
  Seconds t = fields[0] * 3600 + fields[1] * 60 + fields[2];
  while (t < after) t += 24 * 3600;
  return t;
}

std::string format_clock(Seconds t) {
  Seconds day = ((t % 86400) + 86400) % 86400;
  std::ostringstream out;
  out << std::setfill('0') << std::setw(2) << day / 3600 << ":" << std::setw(2) << (day / 60) % 60;
  if (day % 60) out << ":" << std::setw(2) << day % 60;
  return out.str();
}

std::vector<NightWindow> parse_windows(std::string_view document) {
  std::vector<NightWindow> out;
  for (const auto& r : parse_records(document)) {
    if (r.keyword == "window") {
      NightWindow w;
      w.night = r.field(0);
      try {
        w.nominal_start = parse_clock(r.attr_or("start", "22:00"));
        w.nominal_end = parse_clock(r.attr_or("end", "05:00"), w.nominal_start + 1);
        w.service_clear = parse_clock(r.attr_or("clear", format_clock(w.nominal_start)), w.nominal_start);
      } catch (const ParseError& e) {
        throw ParseError(r.line, e.what());
      }
      w.extension_min = parse_double(r, r.attr_or("extension", "0"));
      out.push_back(std::move(w));
    } else if (r.keyword == "phase") {
      if (out.empty()) throw ParseError(r.line, "'phase' must follow a 'window' record");
      auto& w = out.back();
      double minutes = parse_double(r, r.field(1));
      const auto& name = r.field(0);
      if (name == "track_removal") w.track_removal_min = minutes;
      else if (name == "remote_switching" || name == "remote") w.remote_min = minutes;
      else if (name == "field_switching" || name == "field") w.field_min = minutes;
      else if (name == "briefing") w.briefing_min = minutes;
      else if (name == "restoration") w.restoration_min = minutes;
      else throw ParseError(r.line, "unknown phase '" + name + "'");
    } else {
      throw ParseError(r.line, "unknown window record '" + r.keyword + "'");
    }
  }
  return out;
}

double expected_op_seconds(const NetworkTopology& t, const SwitchOp& op, const DurationModel& model) {
  if (targets_either(op.kind)) return 0.0;
  if (op.actor == Actor::kRemoteScada) return 0.5 * static_cast<double>(model.remote_min_s + model.remote_max_s);
  double travel = 0.0;
  if (auto d = t.find_device(op.target)) travel = t.devices()[*d].travel_minutes;
  return 60.0 * std::min(model.manual_base_min + travel, model.manual_cap_min);
}

Seconds sample_op_seconds(const NetworkTopology& t, const SwitchOp& op, const DurationModel& model,
                          std::mt19937_64& rng) {
  if (targets_either(op.kind)) return 0;
  if (op.actor == Actor::kRemoteScada) {
    return std::uniform_int_distribution<Seconds>(model.remote_min_s, model.remote_max_s)(rng);
  }
  const Seconds cap = std::llround(60.0 * model.manual_cap_min);
  const Seconds floor_s = model.remote_min_s;
  const Seconds e = std::llround(expected_op_seconds(t, op, model));
  const Seconds lo = std::max(floor_s, 2 * e - cap);
  const Seconds hi = std::min(cap, 2 * e - floor_s);
  if (lo >= hi) return e;
  return std::uniform_int_distribution<Seconds>(lo, hi)(rng);
}

TimelineReport compose_night(const NightWindow& w, double track_removal_min, double remote_s, double field_s,
                             double briefing_min, double restoration_s) {
  TimelineReport r;
  r.night = w.night;
  r.nominal_start = w.nominal_start;
  r.nominal_end = w.nominal_end;
  Seconds t = w.nominal_start;
  auto push = [&](const char* name, Seconds length) {
    r.phases.push_back({name, t, t + length});
    t += length;
  };
  push("service_residual", std::max<Seconds>(0, w.service_clear - w.nominal_start));
  push("track_removal", std::llround(track_removal_min * 60.0));
  push("remote_switching", std::llround(remote_s));
  push("field_switching", std::llround(field_s));
  push("briefing", std::llround(briefing_min * 60.0));
  const Seconds restoration = std::llround(restoration_s);
  const Seconds work_end = w.nominal_end + std::llround(w.extension_min * 60.0) - restoration;
  if (work_end < t) r.infeasible = true;
  push("contractor_work", std::max<Seconds>(0, work_end - t));
  push("restoration", restoration);
  r.on_track = r.phase("contractor_work").duration();
  r.opened_to_traffic = t;
  return r;
}

TimelineReport simulate_night(const NetworkTopology& t, const IsolationPlan& plan, const NightWindow& w,
                              const DurationModel& model, SimMode mode) {
  std::mt19937_64 rng(model.seed);
  auto duration = [&](const SwitchOp& op) -> double {
    return mode == SimMode::kExpected ? expected_op_seconds(t, op, model)
                                      : static_cast<double>(sample_op_seconds(t, op, model, rng));
  };
  // Exact second totals in sampled mode; expected mode may carry fractions.
  double remote = 0, field = 0, restore = 0;
  for (const auto& p : plan.sequence) {
    double d = duration(p.op);
    (p.op.actor == Actor::kRemoteScada ? remote : field) += d;
  }
  for (const auto& p : plan.restore_sequence) restore += duration(p.op);
  if (w.remote_min) remote = *w.remote_min * 60.0;
  if (w.field_min) field = *w.field_min * 60.0;
  if (w.restoration_min) restore = *w.restoration_min * 60.0;
  return compose_night(w, w.track_removal_min.value_or(model.track_removal_min), remote, field,
                       w.briefing_min.value_or(model.briefing_min), restore);
}

namespace {

std::string minutes_text(double m) {
  std::ostringstream out;
  if (std::abs(m - std::round(m)) < 1e-9) {
    out << static_cast<long long>(std::llround(m));
  } else {
    out << std::fixed << std::setprecision(2) << m;
  }
  return out.str();
}

}  // namespace

std::string to_csv(const TimelineReport& r) {
  std::ostringstream out;
  for (const auto& p : r.phases) {
    out << r.night << "," << p.name << "," << format_clock(p.start) << "," << format_clock(p.end) << ","
        << minutes_text(static_cast<double>(p.duration()) / 60.0) << "\n";
  }
  out << r.night << ",summary," << format_clock(r.nominal_start) << "," << format_clock(r.opened_to_traffic) << ","
      << minutes_text(static_cast<double>(r.opened_to_traffic - r.nominal_start) / 60.0)
      << ",on_track=" << minutes_text(static_cast<double>(r.on_track) / 60.0)
      << ",nominal=" << minutes_text(static_cast<double>(r.nominal_end - r.nominal_start) / 60.0)
      << ",status=" << (r.infeasible ? "INFEASIBLE_WINDOW" : "ok") << "\n";
  return out.str();
}

WorkWindowSummary work_window_report(const std::vector<TimelineReport>& reports) {
  WorkWindowSummary s;
  s.mean.night = "mean";
  for (const auto& r : reports) {
    WindowRow row;
    row.night = r.night;
    row.nominal_min = static_cast<double>(r.nominal_end - r.nominal_start) / 60.0;
    row.on_track_min = static_cast<double>(r.on_track) / 60.0;
    row.ratio = row.nominal_min > 0 ? row.on_track_min / row.nominal_min : 0.0;
    for (const auto& p : r.phases) {
      if (p.name != "contractor_work") row.phase_min[p.name] = static_cast<double>(p.duration()) / 60.0;
    }
    s.nights.push_back(row);
  }
  if (s.nights.empty()) return s;
  const double n = static_cast<double>(s.nights.size());
  for (const auto& row : s.nights) {
    s.mean.nominal_min += row.nominal_min / n;
    s.mean.on_track_min += row.on_track_min / n;
    for (const auto& [name, m] : row.phase_min) s.mean.phase_min[name] += m / n;
  }
  s.mean.ratio = s.mean.nominal_min > 0 ? s.mean.on_track_min / s.mean.nominal_min : 0.0;
  return s;
}

std::string to_csv(const WorkWindowSummary& s) {
  std::ostringstream out;
  out << "night,nominal_min,on_track_min,ratio";
  for (const char* name : kPhaseNames) {
    if (std::string_view(name) != "contractor_work") out << "," << name;
  }
  out << "\n";
  auto row = [&](const WindowRow& r) {
    out << r.night << "," << minutes_text(r.nominal_min) << "," << minutes_text(r.on_track_min) << ","
        << std::fixed << std::setprecision(3) << r.ratio << std::defaultfloat;
    for (const char* name : kPhaseNames) {
      if (std::string_view(name) == "contractor_work") continue;
      auto it = r.phase_min.find(name);
      out << "," << minutes_text(it == r.phase_min.end() ? 0.0 : it->second);
    }
    out << "\n";
  };
  for (const auto& r : s.nights) row(r);
  if (!s.nights.empty()) row(s.mean);
  return out.str();
}

bool admit_train_move(const NetworkTopology& t, const std::vector<PopsSession>& sessions, const std::string& track,
                      Feet from_ft, Feet to_ft) {
  const Feet lo = std::min(from_ft, to_ft), hi = std::max(from_ft, to_ft);
  for (const auto& s : sessions) {
    if (!s.locked()) continue;
    auto p = t.find_plate_order(s.plate_order);
    if (!p) continue;
    for (const auto& [bar_track, iv] : barred_intervals(t, t.plate_orders()[*p])) {
      if (bar_track == track && lo <= iv.hi && iv.lo <= hi) return false;
    }
  }
  return true;
}

std::optional<NodePair> pantograph_bridge_at(const NetworkTopology& t, const std::string& track, Feet at_ft) {
  std::optional<std::string> ending, starting;
  for (Index s = 0; s < t.sections().size(); ++s) {
    const auto& sec = t.sections()[s];
    if (sec.kind != SectionKind::kTrolley || sec.track != track) continue;
    const auto ends = t.section_ends(s);
    const auto& lo_node = t.nodes()[ends[0]].location <= t.nodes()[ends[1]].location ? ends[0] : ends[1];
    const auto& hi_node = lo_node == ends[0] ? ends[1] : ends[0];
    if (sec.end_ft == at_ft) ending = t.nodes()[hi_node].id;
    if (sec.start_ft == at_ft) starting = t.nodes()[lo_node].id;
  }
  if (!ending || !starting || *ending == *starting) return std::nullopt;
  return make_node_pair(*ending, *starting);
}

}  // namespace tpi
