#include "doctest.h"
#include "scenario_runner.hpp"
#include "support.hpp"

#include "cexdex/errors.hpp"
#include "cexdex/ingest.hpp"

#include <cmath>

using namespace cexdex;
using namespace cexdex::synth;
using doctest::Approx;

namespace {

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

}  // namespace

TEST_CASE("spread_shape peaks at the delay and decays per mode") {
  CHECK(spread_shape(1.0, 1.0, ImpactDecay::Gentle) == 1.0);
  CHECK(spread_shape(1.0, 1.0, ImpactDecay::Abrupt) == 1.0);
  CHECK(spread_shape(4.0, 1.0, ImpactDecay::Gentle) == Approx(0.7));
  CHECK(spread_shape(1.5, 1.0, ImpactDecay::Abrupt) == Approx(0.5));
  CHECK(spread_shape(9.0, 1.0, ImpactDecay::Abrupt) == Approx(0.5));
  CHECK(spread_shape(0.5, 1.0, ImpactDecay::Gentle) < 1.0);
  for (double t : synth_grid().offsets()) CHECK(spread_shape(t, 1.0, ImpactDecay::None) == 1.0);
}

TEST_CASE("synth config validation") {
  auto invalid = [](const std::string& json) {
    try {
      parse_synth_config(json, "synth.json");
    } catch (const LoadError& e) {
      return e.kind() == LoadErrorKind::InvalidConfig;
    }
    return false;
  };
  CHECK(invalid(R"({"searchers": []})"));
  CHECK(invalid(R"({"searchers": [{"label": "a", "true_hedge_delay_s": 0.3}]})"));
  CHECK(invalid(R"({"searchers": [{"label": "a", "tip_fraction": 1.5}]})"));
  CHECK(invalid(R"({"searchers": [{"label": "a"}], "surprise": 1})"));
  CHECK(invalid(R"({"searchers": [{"label": "a", "impact_decay": "wobbly"}]})"));
  auto cfg = parse_synth_config(R"({"seed": 9, "searchers": [{"label": "a", "impact_decay": "abrupt"}]})", "s.json");
  CHECK(cfg.seed == 9);
  CHECK(cfg.searchers.at(0).impact_decay == ImpactDecay::Abrupt);
  CHECK(parse_synth_config(synth_config_json(cfg), "s.json").seed == 9);
}

TEST_CASE("same seed gives byte-identical files") {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.n_days = 1;
  cfg.searchers = {testing::searcher("a", 1.0, ImpactDecay::Gentle, 60),
                   testing::searcher("b", 0.5, ImpactDecay::None, 40)};
  auto d1 = testing::scratch_dir("synth_a"), d2 = testing::scratch_dir("synth_b");
  write_scenario(generate(cfg), d1);
  write_scenario(generate(cfg), d2);
  for (const char* f : {"tokens.csv", "transactions.csv", "quotes.csv", "blocks.csv", "searchers.json", "config.json",
                        "ground_truth.json"}) {
    CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
  }
  cfg.seed = 4;
  auto d3 = testing::scratch_dir("synth_c");
  write_scenario(generate(cfg), d3);
  CHECK(slurp(d1 / "transactions.csv") != slurp(d3 / "transactions.csv"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
  std::filesystem::remove_all(d3);
}

TEST_CASE("generated files load cleanly and ground truth round-trips") {
  SynthConfig cfg;
  cfg.n_days = 1;
  cfg.searchers = {testing::searcher("a", 1.0, ImpactDecay::Gentle, 80)};
  auto sc = generate(cfg);
  auto dir = testing::scratch_dir("synth_load");
  write_scenario(sc, dir);
  CHECK(ingest::load_transactions(dir / "transactions.csv").size() == sc.transactions.size());
  CHECK(ingest::load_quotes(dir / "quotes.csv").size() > 0);
  CHECK(ingest::load_block_records(dir / "blocks.csv").size() == sc.blocks.size());
  auto truth = load_ground_truth(dir / "ground_truth.json");
  CHECK(ground_truth_json(truth) == ground_truth_json(sc.truth));
  std::filesystem::remove_all(dir);
}

TEST_CASE("pipeline recovers a gentle 1.0 s searcher and a flat one") {
  SynthConfig cfg;
  cfg.seed = 21;
  cfg.n_days = 2;
  cfg.searchers = {testing::searcher("gentle", 1.0, ImpactDecay::Gentle, 250),
                   testing::searcher("flat", 1.0, ImpactDecay::None, 150)};
  auto dir = testing::scratch_dir("synth_recover");
  auto run = testing::run_scenario(cfg, dir);
  REQUIRE(run.report.searchers.size() == 2);
  for (const auto& s : run.report.searchers) {
    if (s.label == "gentle") {
      CHECK(s.n_arb_trades == 500);
      CHECK(s.est_t_star_s == std::optional<double>(1.0));
      CHECK(s.est_pattern == std::optional<horizon::Pattern>(horizon::Pattern::P1));
    } else {
      CHECK(s.est_pattern == std::optional<horizon::Pattern>(horizon::Pattern::P3));
      CHECK_FALSE(s.est_t_star_s.has_value());
    }
  }
  CHECK(run.report.ev_compared == 500);
  CHECK(run.report.max_ev_rel_error < 1e-6);
  CHECK(run.report.bp_compared > 0);
  CHECK(run.report.bp_exact_matches == run.report.bp_compared);
  std::filesystem::remove_all(dir);
}

TEST_CASE("score over empty outputs compares nothing") {
  GroundTruth truth;
  truth.searchers.push_back(SearcherTruth{"a", 1.0, horizon::Pattern::P1, ImpactDecay::Gentle});
  auto r = score(truth, {}, {}, {});
  REQUIRE(r.searchers.size() == 1);
  CHECK_FALSE(r.searchers[0].est_pattern.has_value());
  CHECK(r.ev_compared == 0);
  CHECK(r.bp_compared == 0);
}
