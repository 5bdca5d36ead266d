#pragma once

#include "cexdex/builder.hpp"
#include "cexdex/estimate.hpp"
#include "cexdex/horizon.hpp"
#include "cexdex/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Deterministic synthetic scenarios with a known answer: every arbitrage's
// spread, hedge delay and fees are chosen up front, then rendered into the
// five input files so the estimation pipeline can be scored against them.
namespace cexdex::synth {

enum class ImpactDecay { Gentle, Abrupt, None };

std::string_view to_string(ImpactDecay d);
ImpactDecay parse_impact_decay(std::string_view s);

struct SynthSearcher {
  std::string label;
  double true_hedge_delay_s = 1.0;
  ImpactDecay impact_decay = ImpactDecay::Gentle;
  double trades_per_day = 100.0;
  double major_share = 0.7;
  double tip_fraction = 0.5;
  std::optional<std::string> integrated_with;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_days = 3;
  std::string start_date = "2024-03-03";
  /// Per-second log volatility of every CEX mid path.
  double base_volatility = 0.0;
  double taker_fee_rate = 0.0001725;
  std::vector<std::string> builders{"builder0", "builder1", "builder2"};
  std::vector<SynthSearcher> searchers;
  /// Share of each searcher's trades that are inventory rebalancing.
  double inventory_fraction = 0.0;
  /// Share of trades routed through an unlisted intermediate token.
  double multihop_fraction = 0.2;
  /// Non-arbitrage decoy transactions per arbitrage.
  double decoy_fraction = 0.05;
  double bid_adjustment_share = 0.3;
  /// Probability that a block opened by an integrated searcher goes to its builder.
  double integrated_routing = 0.9;

  /// Throws LoadError(InvalidConfig).
  void validate() const;
};

SynthConfig parse_synth_config(std::string_view json_text, const std::string& source);
SynthConfig load_synth_config(const std::filesystem::path& path);
std::string synth_config_json(const SynthConfig& cfg);

/// The recovery grid. Synthetic delays must sit on it.
markout::MarkoutGrid synth_grid();

/// Multiplier applied to the injected spread at `offset_s` for a searcher
/// with the given delay and decay; 1 exactly at the delay.
double spread_shape(double offset_s, double delay_s, ImpactDecay decay);

struct TradeTruth {
  std::string tx_hash;
  std::string searcher_label;
  std::int64_t block_number = 0;
  bool inventory = false;
  /// True when the DEX leg bought the volatile token.
  bool buys_volatile = true;
  double spread = 0.0;
  double volume_usd = 0.0;
  double eth_usd_at_slot = 0.0;
  double base_fee_eth = 0.0;
  double tip_eth = 0.0;
  /// Empty for inventory trades.
  std::optional<double> true_ev_usd;
  std::optional<double> true_pnl_usd;
};

struct SearcherTruth {
  std::string label;
  std::optional<double> true_hedge_delay_s;  // empty when decay is None
  horizon::Pattern true_pattern = horizon::Pattern::P3;
  ImpactDecay impact_decay = ImpactDecay::Gentle;
};

struct BlockTruth {
  std::int64_t block_number = 0;
  double true_bp_eth = 0.0;
  double true_bp_usd = 0.0;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  double taker_fee_rate = 0.0;
  std::vector<SearcherTruth> searchers;
  std::vector<TradeTruth> trades;
  std::vector<BlockTruth> blocks;
  std::vector<std::string> decoys;
};

std::string ground_truth_json(const GroundTruth& truth);
GroundTruth parse_ground_truth(std::string_view json_text, const std::string& source);
GroundTruth load_ground_truth(const std::filesystem::path& path);

struct Scenario {
  TokenRegistry tokens;
  std::vector<RawTransaction> transactions;
  std::vector<Quote> quotes;
  std::map<std::int64_t, BlockRecord> blocks;
  SearcherLabels labels;
  /// Pipeline config matching the scenario's fee rate.
  PipelineConfig pipeline_config;
  GroundTruth truth;
};

/// Single-threaded and fully determined by `cfg`.
Scenario generate(const SynthConfig& cfg);

/// Writes tokens.csv, transactions.csv, quotes.csv, blocks.csv,
/// searchers.json, config.json and ground_truth.json into `dir`.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

struct SearcherRecovery {
  std::string label;
  std::optional<double> true_t_star_s;
  std::optional<double> est_t_star_s;
  std::optional<double> abs_error_s;
  horizon::Pattern true_pattern = horizon::Pattern::P3;
  std::optional<horizon::Pattern> est_pattern;  // empty when the searcher has no profile
  std::size_t n_arb_trades = 0;
};

struct RecoveryReport {
  std::vector<SearcherRecovery> searchers;
  /// [true][estimated] over P1, P2, P3.
  std::array<std::array<std::size_t, 3>, 3> pattern_confusion{};
  std::size_t ev_compared = 0;
  double max_ev_rel_error = 0.0;
  double max_pnl_rel_error = 0.0;
  std::size_t bp_compared = 0;
  std::size_t bp_exact_matches = 0;
};

class MissingOutputs : public std::runtime_error {
 public:
  explicit MissingOutputs(const std::string& what) : std::runtime_error("MissingOutputs: " + what) {}
};

/// Compares pipeline outputs with the ground truth. Relative errors use
/// max(|true|, 1e-9) as the denominator.
RecoveryReport score(const GroundTruth& truth, std::span<const horizon::SearcherProfile> profiles,
                     std::span<const estimate::TradeEconomics> economics,
                     std::span<const builder::BuilderBlockEconomics> blocks);

std::string recovery_report_json(const RecoveryReport& report);

}  // namespace cexdex::synth
