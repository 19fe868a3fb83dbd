#include <benchmark/benchmark.h>

#include "tpi/energization.hpp"

namespace {

std::string fixture(const std::string& rel) { return tpi::read_file(std::string(TPI_FIXTURE_DIR) + "/" + rel); }

void BM_EnergizeFourtrack(benchmark::State& state) {
  auto t = tpi::load_topology_or_throw(fixture("fourtrack/fourtrack.net"));
  auto s = tpi::parse_state(t, fixture("fourtrack/fourtrack.state"));
  for (auto _ : state) benchmark::DoNotOptimize(tpi::compute_energization(t, s));
  state.counters["nodes"] = static_cast<double>(t.nodes().size());
}
BENCHMARK(BM_EnergizeFourtrack);

void BM_LoadFourtrack(benchmark::State& state) {
  const auto doc = fixture("fourtrack/fourtrack.net");
  for (auto _ : state) benchmark::DoNotOptimize(tpi::load_topology_or_throw(doc));
}
BENCHMARK(BM_LoadFourtrack);

}  // namespace

BENCHMARK_MAIN();
