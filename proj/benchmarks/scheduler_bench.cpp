#include <benchmark/benchmark.h>

#include <string>

#include "tpi/scheduler.hpp"

namespace {

// `jobs` jobs over one night, each with three variants of shrinking demand.
std::vector<tpi::Job> synthetic_jobs(int jobs) {
  std::string doc;
  for (int j = 0; j < jobs; ++j) {
    doc += "job J" + std::to_string(j) + " prio=" + std::to_string(j + 1) + " nights=mon\n";
    for (int v = 0; v < 3; ++v) {
      const int n = 3 - v;
      doc += std::string("variant ") + static_cast<char>('A' + v) + " lineman=" + std::to_string(n) +
             " groundman=" + std::to_string(n) + " director=1 flagman=1 dispatcher=1 outage=1\n";
    }
  }
  return tpi::parse_jobs(doc);
}

void BM_BuildWeeklyPlan(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  auto list = synthetic_jobs(jobs);
  auto cal = tpi::parse_calendar("avail mon lineman " + std::to_string(jobs) + "\navail mon groundman " +
                                 std::to_string(jobs) + "\navail mon director " + std::to_string(jobs / 2) +
                                 "\navail mon flagman " + std::to_string(jobs) + "\navail mon dispatcher " +
                                 std::to_string(jobs / 2) + "\n");
  for (auto _ : state) benchmark::DoNotOptimize(tpi::build_weekly_plan(list, cal));
  state.SetComplexityN(jobs);
}
BENCHMARK(BM_BuildWeeklyPlan)->RangeMultiplier(4)->Range(4, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
