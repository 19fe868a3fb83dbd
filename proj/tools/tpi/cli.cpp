#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "tpi/control_room.hpp"
#include "tpi/energization.hpp"
#include "tpi/http_service.hpp"
#include "tpi/planner.hpp"
#include "tpi/plate_orders.hpp"
#include "tpi/scheduler.hpp"
#include "tpi/timeline.hpp"
#include "tpi/topology.hpp"

namespace tpi::cli {

namespace {

// Raised for a usage problem detected after argument parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an input fails validation; details were already printed.
struct InvalidInput {};

struct Common {
  std::string format = "table";
  std::string plates;
  Feet margin_ft = 0;
  double unbalance_factor = 2.0;
  std::string director = "PD1";
  std::string date;
};

std::string read_input(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

NetworkTopology load_net(const std::string& path, const Common& c, std::ostream& err) {
  auto res = load_topology(read_input(path));
  if (!res.ok()) {
    for (const auto& e : res.errors) err << "error " << e.code << " line " << e.line << ": " << e.message << "\n";
    throw InvalidInput{};
  }
  NetworkTopology t = std::move(*res.topology);
  if (!c.plates.empty()) t = with_plate_orders(t, parse_plate_library(read_input(c.plates)));
  return t;
}

SwitchingState load_state(const NetworkTopology& t, const std::string& path) {
  if (path.empty()) return normal_state(t);
  SwitchingState s = parse_state(t, read_input(path));
  check_state_ids(t, s);
  return s;
}

IsolationRequest load_request(const std::string& path) {
  auto reqs = parse_requests(read_input(path));
  if (reqs.empty()) throw UsageError("no request in " + path);
  if (reqs.size() > 1) throw UsageError(path + " holds more than one request");
  if (reqs[0].target_sections.empty()) throw UsageError("request '" + reqs[0].id + "' has no target sections");
  return reqs[0];
}

PlanOptions plan_options(const Common& c) {
  PlanOptions o;
  o.director = c.director;
  o.date = c.date;
  o.margin_ft = c.margin_ft;
  o.energization.unbalance_factor = c.unbalance_factor;
  return o;
}

void row(std::ostream& out, const std::string& key, const std::string& value) {
  out << std::left << std::setw(26) << key << value << "\n";
}

std::string counts(const std::map<std::string, std::size_t>& m) {
  std::string s;
  for (const auto& [k, v] : m) s += (s.empty() ? "" : " ") + k + "=" + std::to_string(v);
  return s;
}

// --- verbs --------------------------------------------------------------------

int cmd_validate(const std::string& net, const Common& c, std::ostream& out, std::ostream& err) {
  NetworkTopology t = load_net(net, c, err);
  auto s = summarize(t);
  auto runs = wire_run_check(t);
  if (c.format == "records") {
    out << "summary nodes " << s.nodes << "\n"
        << "summary phase_zones " << s.phase_zones << "\n";
    for (const auto& [k, v] : s.sections_by_kind) out << "summary sections." << k << " " << v << "\n";
    for (const auto& [k, v] : s.devices_by_kind) out << "summary devices." << k << " " << v << "\n";
    out << "summary supply_substations " << s.supply_substations << "\n"
        << "summary equalizing_substations " << s.equalizing_substations << "\n"
        << "summary ground_points " << s.ground_points << "\n"
        << "summary tracks " << s.tracks << "\n"
        << "summary switches " << s.switches << "\n"
        << "summary interlockings " << s.interlockings << "\n"
        << "summary keep_live_assets " << s.keep_live_assets << "\n"
        << "summary plate_orders " << s.plate_orders << "\n"
        << "summary trolley_extent_ft " << s.trolley_extent_ft << "\n";
    for (const auto& v : runs) {
      out << "wirerun " << v.track << " " << v.start_ft << " " << v.end_ft << " " << v.length_ft << " "
          << join(v.sections, ",") << "\n";
    }
  } else {
    row(out, "nodes", std::to_string(s.nodes));
    row(out, "phase zones", std::to_string(s.phase_zones));
    row(out, "sections", counts(s.sections_by_kind));
    row(out, "devices", counts(s.devices_by_kind));
    row(out, "supply substations", std::to_string(s.supply_substations));
    row(out, "equalizing substations", std::to_string(s.equalizing_substations));
    row(out, "ground points", std::to_string(s.ground_points));
    row(out, "tracks", std::to_string(s.tracks));
    row(out, "switches", std::to_string(s.switches));
    row(out, "interlockings", std::to_string(s.interlockings));
    row(out, "keep-live assets", std::to_string(s.keep_live_assets));
    row(out, "plate orders", std::to_string(s.plate_orders));
    row(out, "trolley extent (ft)", std::to_string(s.trolley_extent_ft));
    row(out, "wire runs over limit", std::to_string(runs.size()));
    for (const auto& v : runs) {
      out << "  track " << v.track << " " << v.start_ft << "-" << v.end_ft << " ft (" << v.length_ft
          << " ft > " << kMaxWireRunFt << "): " << join(v.sections, ",") << "\n";
    }
  }
  if (!runs.empty()) {
    err << "error WIRE_RUN_EXCEEDED: " << runs.size() << " trolley run(s) exceed " << kMaxWireRunFt << " ft\n";
    return 1;
  }
  return 0;
}

int cmd_energize(const std::string& net, const std::string& state, const Common& c, std::ostream& out,
                 std::ostream& err) {
  NetworkTopology t = load_net(net, c, err);
  SwitchingState s = load_state(t, state);
  EnergizationOptions opts;
  opts.unbalance_factor = c.unbalance_factor;
  auto e = compute_energization(t, s, opts);
  if (c.format == "records") {
    out << to_document(e);
    return 0;
  }
  row(out, "energized nodes", std::to_string(e.energized.size()));
  row(out, "dead nodes", std::to_string(e.dead.size()));
  row(out, "grounded nodes", std::to_string(e.grounded.size()));
  row(out, "violations", std::to_string(e.violations.size()));
  for (const auto& v : e.violations) {
    out << "  " << to_string(v.kind) << " [" << join(v.participants, ",") << "] " << v.detail << "\n";
  }
  if (!e.dead.empty() && e.dead.size() <= 40) {
    out << "dead:";
    for (const auto& n : e.dead) out << " " << n;
    out << "\n";
  }
  return 0;
}

void print_plan_table(const IsolationPlan& plan, std::ostream& out) {
  row(out, "request", plan.request_id);
  row(out, "director", plan.director);
  row(out, "plate order", plan.plate_order.empty() ? "-" : plan.plate_order);
  row(out, "forms", std::to_string(plan.forms.size()));
  row(out, "isolation ops", std::to_string(plan.sequence.size()));
  row(out, "restore ops", std::to_string(plan.restore_sequence.size()));
  row(out, "exact", plan.exact ? "yes" : "no");
  for (const auto& w : plan.warnings) {
    out << "warning " << w.code << " [" << join(w.participants, ",") << "] " << w.detail << "\n";
  }
  out << "\n";
  for (const auto& f : plan.forms) out << to_document(f) << "\n";
}

int cmd_isolate(const std::string& net, const std::string& state, const std::string& request,
                const std::string& orders_out, bool no_plate, const Common& c, std::ostream& out,
                std::ostream& err) {
  IsolationRequest req = load_request(request);
  NetworkTopology t = load_net(net, c, err);
  SwitchingState s = load_state(t, state);
  PlanOptions opts = plan_options(c);
  opts.require_plate_order = !no_plate;
  IsolationPlan plan = plan_isolation(t, s, req, opts);
  if (!orders_out.empty()) {
    std::vector<OperatingOrder> all = plan.forms;
    all.insert(all.end(), plan.restore_forms.begin(), plan.restore_forms.end());
    std::ofstream f(orders_out);
    if (!f) throw UsageError("cannot write " + orders_out);
    f << to_document(all);
  }
  if (c.format == "records") {
    out << to_document(plan);
  } else {
    print_plan_table(plan, out);
  }
  return 0;
}

int cmd_plate_order(const std::string& net, const std::string& request, const Common& c, std::ostream& out,
                    std::ostream& err) {
  IsolationRequest req = load_request(request);
  NetworkTopology t = load_net(net, c, err);
  try {
    const PlateOrder& p = select_plate_order(t, t.plate_orders(), req, c.margin_ft);
    if (c.format == "records") {
      out << "selected " << p.id << " barred_ft=" << barred_track_feet(t, p) << "\n";
      for (const auto& [track, iv] : barred_intervals(t, p, c.margin_ft)) {
        out << "barred " << track << " " << iv.lo << " " << iv.hi << "\n";
      }
      out << "coverage covered\n";
    } else {
      row(out, "plate order", p.id + " \"" + p.description + "\"");
      row(out, "barred track-feet", std::to_string(barred_track_feet(t, p)));
      for (const auto& [track, iv] : barred_intervals(t, p, c.margin_ft)) {
        row(out, "  track " + track, std::to_string(iv.lo) + "-" + std::to_string(iv.hi));
      }
      row(out, "blocked switches", join(p.blocked_switches, ","));
      row(out, "coverage", "covered");
    }
    return 0;
  } catch (const DomainError& e) {
    if (e.kind() != "NO_PLATE_ORDER") throw;
    // Report the closest candidate so the gap is visible.
    const PlateOrder* best = nullptr;
    CoverageResult best_cov;
    for (const auto& p : t.plate_orders()) {
      auto cov = coverage_check(t, p, req, c.margin_ft);
      if (!best || cov.gap_feet() < best_cov.gap_feet()) {
        best = &p;
        best_cov = cov;
      }
    }
    if (best) {
      err << "closest " << best->id << " leaves " << best_cov.gap_feet() << " ft uncovered\n";
      for (const auto& g : best_cov.gaps) {
        err << "gap " << g.section << " " << g.track << " " << g.span.lo << " " << g.span.hi << "\n";
      }
    }
    throw;
  }
}

IsolationContext isolation_context(const NetworkTopology* t, const SwitchingState* s, const std::string& requests,
                                   const Common& c) {
  IsolationContext ctx;
  ctx.topology = t;
  ctx.state = s;
  ctx.options = plan_options(c);
  if (!requests.empty()) {
    for (auto& r : parse_requests(read_input(requests))) ctx.requests[r.id] = r;
  }
  return ctx;
}

void print_weekly_table(const WeeklyPlan& plan, std::ostream& out) {
  row(out, "stage", std::string(to_string(plan.stage)));
  for (const auto& night : plan.calendar.nights) {
    out << "night " << night << "\n";
    for (const auto& [key, a] : plan.assignments) {
      if (key.first != night) continue;
      out << "  " << std::left << std::setw(12) << key.second
          << (a.cancelled() ? "CANCELLED " + a.reason : std::string("variant ") + *a.variant) << "\n";
    }
    auto used = night_usage(plan, night);
    out << "  usage   ";
    for (Craft k : kAllCrafts) out << " " << to_string(k) << "=" << at(used, k);
    out << "\n";
  }
  for (const auto& [job, reason] : plan.excluded) out << "excluded " << job << " " << reason << "\n";
}

int cmd_schedule(const std::string& net, const std::string& jobs, const std::string& cal, const std::string& requests,
                 const std::string& state, const std::string& reject, const std::string& deny, const Common& c,
                 std::ostream& out, std::ostream& err) {
  NetworkTopology t = load_net(net, c, err);
  SwitchingState s = load_state(t, state);
  auto ctx = isolation_context(&t, &s, requests, c);
  auto to_set = [](const std::string& csv) {
    std::set<std::string> out;
    for (auto& x : split(csv, ',')) {
      if (!x.empty()) out.insert(x);
    }
    return out;
  };
  WeeklyPlan plan = monday_look_ahead(parse_jobs(read_input(jobs)), parse_calendar(read_input(cal)), ctx);
  tuesday_set_priorities(plan);
  wednesday_request(plan, to_set(reject));
  thursday_approve(plan, to_set(deny));
  if (c.format == "records") {
    out << to_document(plan);
  } else {
    print_weekly_table(plan, out);
  }
  return 0;
}

int cmd_disrupt(const std::string& plan_path, const std::string& event, const std::string& out_path,
                const Common& c, std::ostream& out) {
  WeeklyPlan plan = parse_weekly_plan(read_input(plan_path));
  std::string text = std::filesystem::exists(event) ? read_input(event) : event;
  auto events = parse_disruptions(text);
  if (events.empty()) throw UsageError("no disruption given");
  std::vector<DiffEntry> diff;
  for (const auto& d : events) {
    auto r = apply_disruption(plan, d);
    plan = std::move(r.plan);
    diff.insert(diff.end(), r.diff.begin(), r.diff.end());
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw UsageError("cannot write " + out_path);
    f << to_document(plan);
  }
  for (const auto& d : diff) {
    if (c.format == "records") {
      out << "change " << d.night << " " << d.job << " " << d.from << " " << d.to << " " << quote_if_needed(d.reason)
          << "\n";
    } else {
      out << std::left << std::setw(8) << d.night << std::setw(10) << d.job << d.from << " -> " << d.to
          << (d.reason.empty() ? "" : "  (" + d.reason + ")") << "\n";
    }
  }
  if (diff.empty() && c.format != "records") out << "no changes\n";
  return 0;
}

IsolationPlan load_plan_input(const NetworkTopology& t, const std::string& path, const Common& c) {
  std::string text = read_input(path);
  auto recs = parse_records(text);
  if (!recs.empty() && recs.front().keyword == "request") {
    auto reqs = parse_requests(text);
    if (reqs.size() != 1 || reqs[0].target_sections.empty()) throw UsageError(path + " must hold one non-empty request");
    return plan_isolation(t, normal_state(t), reqs[0], plan_options(c));
  }
  return parse_plan(text);
}

int cmd_simulate(const std::string& net, const std::string& plan_path, const std::string& window,
                 std::uint64_t seed, bool expected, const std::string& nights, const Common& c, std::ostream& out,
                 std::ostream& err) {
  NetworkTopology t = load_net(net, c, err);
  IsolationPlan plan = load_plan_input(t, plan_path, c);
  auto windows = parse_windows(read_input(window));
  if (!nights.empty()) {
    auto wanted = split(nights, ',');
    std::erase_if(windows, [&](const NightWindow& w) {
      return std::find(wanted.begin(), wanted.end(), w.night) == wanted.end();
    });
  }
  if (windows.empty()) throw UsageError("no night windows selected");
  DurationModel model;
  model.seed = seed;
  const SimMode mode = expected ? SimMode::kExpected : SimMode::kSampled;
  // Nights are independent; each gets its own seeded generator.
  std::vector<std::future<TimelineReport>> jobs;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    DurationModel m = model;
    m.seed = model.seed + i;
    jobs.push_back(std::async(std::launch::async, [&, i, m] { return simulate_night(t, plan, windows[i], m, mode); }));
  }
  std::vector<TimelineReport> reports;
  for (auto& j : jobs) reports.push_back(j.get());
  bool infeasible = false;
  for (const auto& r : reports) {
    infeasible = infeasible || r.infeasible;
    if (c.format == "records") {
      out << to_csv(r);
      continue;
    }
    out << "night " << r.night << "\n";
    for (const auto& p : r.phases) {
      out << "  " << std::left << std::setw(18) << p.name << format_clock(p.start) << "-" << format_clock(p.end)
          << "  " << std::right << std::setw(5) << p.duration() / 60 << " min\n";
    }
    row(out, "  on_track (min)", std::to_string(r.on_track / 60));
    row(out, "  nominal (min)", std::to_string((r.nominal_end - r.nominal_start) / 60));
    row(out, "  opened to traffic", format_clock(r.opened_to_traffic));
    if (r.infeasible) out << "  INFEASIBLE_WINDOW\n";
  }
  if (reports.size() > 1) out << to_csv(work_window_report(reports));
  if (infeasible) err << "warning INFEASIBLE_WINDOW: switching overruns the work window\n";
  return 0;
}

int cmd_serve(const std::string& net, const std::string& state, const std::string& host, int port, int rooms,
              const Common& c, std::ostream& out, std::ostream& err) {
  if (rooms < 1) throw UsageError("--rooms must be at least 1");
  NetworkTopology t = load_net(net, c, err);
  SwitchingState s = load_state(t, state);
  std::vector<std::shared_ptr<ControlRoom>> list;
  for (int i = 0; i < rooms; ++i) list.push_back(std::make_shared<ControlRoom>(t, s, plan_options(c)));
  auto service = std::make_shared<Service>(std::move(list));
  HttpServer server(service);
  int bound = server.bind(host, port);
  out << "listening on " << host << ":" << bound << " rooms=" << rooms << std::endl;
  server.run();
  return 0;
}

int cmd_replay(const std::string& log, const std::string& net, const std::string& state, bool no_interlock,
               const Common& c, std::ostream& out, std::ostream& err) {
  if (net.empty()) throw UsageError("replay needs --net");
  NetworkTopology t = load_net(net, c, err);
  std::string text = read_input(log);
  SwitchingState s;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text.compare(first, 4, "seq=") == 0) {
    s = fold_events(t, parse_events(text));
  } else {
    s = load_state(t, state);
    auto orders = parse_operating_orders(text);
    if (orders.empty()) throw UsageError("no order in " + log);
    // Forms of one plan interleave, so each step takes the earliest form whose
    // next op is accepted: recorded times first, then file order. Restore forms
    // wait until every isolation form is complete.
    std::vector<std::vector<OpRecord>> recorded;
    for (auto& o : orders) {
      recorded.push_back(o.records);
      o.records.clear();
    }
    std::int64_t clock = 0;
    for (const auto& r : recorded) {
      for (const auto& rec : r) clock = std::max(clock, rec.when);
    }
    auto recorded_when = [&](std::size_t k) {
      const std::size_t i = orders[k].next_index();
      return i < recorded[k].size() ? recorded[k][i].when : std::numeric_limits<std::int64_t>::max();
    };
    for (;;) {
      const bool isolating = std::any_of(orders.begin(), orders.end(),
                                         [](const OperatingOrder& o) { return !o.restore && !o.complete(); });
      std::vector<std::size_t> ready;
      for (std::size_t k = 0; k < orders.size(); ++k) {
        if (!orders[k].complete() && (!orders[k].restore || !isolating)) ready.push_back(k);
      }
      if (ready.empty()) break;
      std::stable_sort(ready.begin(), ready.end(),
                       [&](std::size_t a, std::size_t b) { return recorded_when(a) < recorded_when(b); });
      std::optional<InterlockException> first_rejection;
      std::size_t stuck = ready.front();
      bool advanced = false;
      for (std::size_t k : ready) {
        OperatingOrder& o = orders[k];
        const std::size_t i = o.next_index();
        const SwitchOp op = *o.next_op();
        const std::int64_t when = i < recorded[k].size() ? recorded[k][i].when : clock + 1;
        try {
          s = execute_next(t, s, o, when, 0.0, !no_interlock);
        } catch (const InterlockException& e) {
          if (!first_rejection) first_rejection = e;
          continue;
        }
        clock = std::max(clock, when);
        const auto& rec = o.records.back();
        out << o.id << " " << (i + 1) << " " << to_string(op.kind) << " " << op.target << " " << rec.result;
        if (i < recorded[k].size() && !recorded[k][i].result.empty() && recorded[k][i].result != rec.result) {
          out << " (recorded " << recorded[k][i].result << ")";
        }
        out << "\n";
        advanced = true;
        break;
      }
      if (!advanced) {
        const SwitchOp op = *orders[stuck].next_op();
        out << orders[stuck].id << " " << (orders[stuck].next_index() + 1) << " " << to_string(op.kind) << " "
            << op.target << " REJECTED " << to_string(first_rejection->error().kind) << "\n";
        throw *first_rejection;
      }
    }
  }
  if (c.format == "records") {
    out << to_document(s);
  } else {
    auto e = compute_energization(t, s);
    row(out, "dead nodes", std::to_string(e.dead.size()));
    row(out, "grounds applied", std::to_string(s.applied_grounds.size()));
    row(out, "tags", std::to_string(s.tags.size()));
    row(out, "violations", std::to_string(e.violations.size()));
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traction power isolation planning and control", "tpi"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"table", "records"}));
    sub->add_option("--plates", c.plates, "Plate order library added to the network");
    sub->add_option("--margin-ft", c.margin_ft, "Plate coverage margin in feet")->check(CLI::NonNegativeNumber);
    sub->add_option("--unbalance-factor", c.unbalance_factor, "Unbalance threshold factor")
        ->check(CLI::PositiveNumber);
    sub->add_option("--director", c.director, "Acting power director");
    sub->add_option("--date", c.date, "Date written on the forms");
  };

  std::string net, state, request, jobs, cal, requests, plan, event, window, log, orders_out, out_path, reject, deny,
      nights, host = "127.0.0.1";
  std::uint64_t seed = 1;
  bool expected = false, no_interlock = false, no_plate = false;
  int port = 8080, rooms = 1;

  auto* validate = app.add_subcommand("validate", "Validate a network and check wire runs");
  validate->add_option("net", net)->required();
  add_common(validate);

  auto* energize = app.add_subcommand("energize", "Energization partition and violations");
  energize->add_option("net", net)->required();
  energize->add_option("state", state)->required();
  add_common(energize);

  auto* isolate = app.add_subcommand("isolate", "Plan an isolation and its operating orders");
  isolate->add_option("net", net)->required();
  isolate->add_option("state", state)->required();
  isolate->add_option("request", request)->required();
  isolate->add_option("--orders-out", orders_out, "Write isolation and restore forms here");
  isolate->add_flag("--no-plate", no_plate, "Plan without selecting a plate order");
  add_common(isolate);

  auto* plate = app.add_subcommand("plate-order", "Select a covering plate order");
  plate->add_option("net", net)->required();
  plate->add_option("request", request)->required();
  add_common(plate);

  auto* schedule = app.add_subcommand("schedule", "Build the weekly plan");
  schedule->add_option("net", net)->required();
  schedule->add_option("jobs", jobs)->required();
  schedule->add_option("calendar", cal)->required();
  schedule->add_option("--requests", requests, "Isolation requests referenced by job variants");
  schedule->add_option("--state", state, "Switching state for isolation checks");
  schedule->add_option("--reject", reject, "Jobs whose outage requests are rejected (csv)");
  schedule->add_option("--deny", deny, "Jobs denied at approval (csv)");
  add_common(schedule);

  auto* disrupt = app.add_subcommand("disrupt", "Apply a disruption to a weekly plan");
  disrupt->add_option("plan", plan)->required();
  disrupt->add_option("event", event, "Event file or inline event text")->required();
  disrupt->add_option("--out", out_path, "Write the replanned weekly plan here");
  add_common(disrupt);

  auto* simulate = app.add_subcommand("simulate", "Simulate outage nights");
  simulate->add_option("net", net)->required();
  simulate->add_option("plan", plan, "Plan document or isolation request")->required();
  simulate->add_option("window", window)->required();
  simulate->add_option("--seed", seed, "Seed for sampled durations");
  simulate->add_flag("--expected", expected, "Use expected durations instead of samples");
  simulate->add_option("--nights", nights, "Nights to simulate (csv); default all");
  add_common(simulate);

  auto* serve = app.add_subcommand("serve", "Run the control-room service");
  serve->add_option("net", net)->required();
  serve->add_option("state", state);
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--rooms", rooms, "Control rooms sharing the topology");
  add_common(serve);

  auto* replay = app.add_subcommand("replay", "Re-execute a recorded order or event log");
  replay->add_option("orderlog", log)->required();
  replay->add_option("--net", net, "Network the log was recorded on");
  replay->add_option("--state", state, "Starting state (orders only)");
  replay->add_flag("--no-interlock", no_interlock, "Skip interlock validation");
  add_common(replay);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*validate) return cmd_validate(net, c, out, err);
    if (*energize) return cmd_energize(net, state, c, out, err);
    if (*isolate) return cmd_isolate(net, state, request, orders_out, no_plate, c, out, err);
    if (*plate) return cmd_plate_order(net, request, c, out, err);
    if (*schedule) return cmd_schedule(net, jobs, cal, requests, state, reject, deny, c, out, err);
    if (*disrupt) return cmd_disrupt(plan, event, out_path, c, out);
    if (*simulate) return cmd_simulate(net, plan, window, seed, expected, nights, c, out, err);
    if (*serve) return cmd_serve(net, state, host, port, rooms, c, out, err);
    if (*replay) return cmd_replay(log, net, state, no_interlock, c, out, err);
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput&) {
    return 1;
  } catch (const DomainError& e) {
    err << "error " << e.kind() << " [" << join(e.participants(), ",") << "]: " << e.detail() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "error PARSE line " << e.line() << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace tpi::cli
