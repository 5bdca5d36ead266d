// Serial reference kernels against their OpenMP counterparts on one
// synthetic scenario.

#include "cexdex/detect.hpp"
#include "cexdex/horizon.hpp"
#include "cexdex/ingest.hpp"
#include "cexdex/markout.hpp"
#include "cexdex/synth.hpp"

#include <benchmark/benchmark.h>
#include <unistd.h>

#include <filesystem>

namespace fs = std::filesystem;
using namespace cexdex;

namespace {

struct Fixture {
  TokenRegistry registry;
  SearcherLabels labels;
  std::vector<RawTransaction> txs;
  QuoteStore store;
  PipelineConfig cfg;
  markout::MarkoutGrid grid{markout::MarkoutGrid::from_config(PipelineConfig{})};
  std::vector<ArbTrade> trades;
  std::vector<markout::MarkoutCurve> curves;
  std::vector<const markout::MarkoutCurve*> curve_ptrs;

  Fixture() {
    synth::SynthConfig sc;
    sc.seed = 5;
    sc.n_days = 3;
    sc.base_volatility = 1e-4;
    for (int i = 0; i < 6; ++i) {
      synth::SynthSearcher s;
      s.label = "s" + std::to_string(i);
      s.true_hedge_delay_s = 0.5 * (i + 1);
      s.trades_per_day = 800;
      sc.searchers.push_back(s);
    }
    const fs::path dir = fs::temp_directory_path() / ("cexdex_bench_" + std::to_string(::getpid()));
    synth::write_scenario(synth::generate(sc), dir);
    registry = ingest::load_tokens(dir / "tokens.csv");
    labels = ingest::load_searcher_labels(dir / "searchers.json");
    txs = ingest::load_transactions(dir / "transactions.csv");
    store = ingest::load_quotes(dir / "quotes.csv");
    cfg = ingest::load_config(dir / "config.json");
    fs::remove_all(dir);
    grid = markout::MarkoutGrid::from_config(cfg);
    trades = detect::detect_all(txs, registry, labels).trades;
    curves = markout::compute_markouts(trades, grid, store, registry, cfg);
    for (const auto& c : curves) curve_ptrs.push_back(&c);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void detect_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(detect::serial::detect_all(f.txs, f.registry, f.labels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.txs.size()));
}

void detect_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(detect::detect_all(f.txs, f.registry, f.labels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.txs.size()));
}

void markouts_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(markout::serial::compute_markouts(f.trades, f.grid, f.store, f.registry, f.cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.trades.size()));
}

void markouts_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(markout::compute_markouts(f.trades, f.grid, f.store, f.registry, f.cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.trades.size()));
}

void median_curve_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(horizon::serial::median_curve("all", f.curve_ptrs, f.grid.size()));
}

void median_curve_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(horizon::median_curve("all", f.curve_ptrs, f.grid.size()));
}

void profiles_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(horizon::serial::build_profiles(f.trades, f.curves, f.grid, f.cfg));
}

void profiles_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(horizon::build_profiles(f.trades, f.curves, f.grid, f.cfg));
}

}  // namespace

BENCHMARK(detect_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(detect_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(markouts_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(markouts_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(median_curve_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(median_curve_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(profiles_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(profiles_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
