// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <sstream>
#include <vector>

#include "mimpact/farmer_model.hpp"
#include "mimpact/impact_engine.hpp"
#include "mimpact/reconstruction.hpp"
#include "mimpact/synthetic_market.hpp"

using namespace mimpact;

namespace {

struct Fixture {
  std::vector<Metaorder> metaorders;
  TapeSet tapes;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    GeneratorConfig cfg;
    cfg.count = 20000;
    const auto sims = simulate_all(MarketModel(cfg));
    std::vector<Fill> fills;
    std::ostringstream tape;
    write_tape_header(tape, true);
    for (const auto& s : sims) {
      fills.insert(fills.end(), s.fills.begin(), s.fills.end());
      for (const auto& row : s.tape) write_tape_row(tape, row, true);
    }
    std::istringstream in(tape.str());
    Fixture out;
    out.tapes = parse_market_tape(in, ExchangeCalendar(cfg.zone)).tapes;
    out.metaorders = enrich_all(reconstruct_metaorders(fills).metaorders, out.tapes);
    return out;
  }();
  return f;
}

void BM_ImpactPathsSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(compute_impact_paths_serial(f.metaorders, f.tapes));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.metaorders.size()));
}

void BM_ImpactPathsParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(compute_impact_paths(f.metaorders, f.tapes));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.metaorders.size()));
}

void BM_Simulate(benchmark::State& state) {
  GeneratorConfig cfg;
  cfg.count = 5000;
  const MarketModel model(cfg);
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_all(model, parallel));
  state.SetLabel(parallel ? "openmp" : "serial");
}

void BM_ScheduleSerial(benchmark::State& state) {
  const FarmerParams p{1.5, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(ImpactSchedule(p));
}

void BM_ScheduleParallel(benchmark::State& state) {
  const FarmerParams p{1.5, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(ImpactSchedule::parallel(p));
}

}  // namespace

BENCHMARK(BM_ImpactPathsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImpactPathsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScheduleSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScheduleParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
