#pragma once

#include "cexdex/estimate.hpp"
#include "cexdex/quotes.hpp"
#include "cexdex/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cexdex::builder {

/// Fraction of the relay's bid-adjustment delta refunded to the builder, by
/// slot time: `rate_before` strictly before the cutoff, `rate_after` from it on.
struct RefundSchedule {
  TimestampMs cutoff_ts_ms = 1709614800000;  // 2024-03-05T05:00:00Z
  double rate_before = 1.0;
  double rate_after = 0.5;

  static RefundSchedule from_config(const PipelineConfig& cfg);
  double rate_at(TimestampMs slot_time_ms) const;
};

/// Builder on-chain profit of one block, in ETH:
///   no bid adjustment:   dC
///   with bid adjustment: dC - bid + r * delta
double builder_onchain_profit_eth(const BlockRecord& block, const RefundSchedule& schedule);

/// USD form, converted at the slot-time ETH price.
double builder_onchain_profit(const BlockRecord& block, const RefundSchedule& schedule, double eth_usd);

struct SearcherPnl {
  double sp_usd = 0.0;
  /// False when the block's builder has no integrated searcher.
  bool applicable = false;
};

/// Sum of the integrated searchers' trade PnLs inside this block only.
SearcherPnl integrated_searcher_pnl(const BlockRecord& block, std::span<const estimate::TradeEconomics> block_trades,
                                    const SearcherLabels& labels);

class ZeroDenominator : public std::domain_error {
 public:
  explicit ZeroDenominator(std::int64_t block)
      : std::domain_error("ZeroDenominator: block " + std::to_string(block)) {}
};

/// profit / (profit + bid - r * delta), all in USD.
double aggregated_margin(const BlockRecord& block, double profit_usd, const RefundSchedule& schedule,
                         double eth_usd);

struct SubsidyFlags {
  bool before = false;
  bool after = false;
};

/// A block is subsidized before correction when BP < 0, and after
/// correction only when both BP and the aggregated profit are negative.
SubsidyFlags subsidy_flags(double bp_usd, double p_usd);

struct BuilderBlockEconomics {
  std::int64_t block_number = 0;
  std::string builder_label;
  TimestampMs slot_time_ms = 0;
  double eth_usd = 0.0;
  double bid_usd = 0.0;
  double bp_usd = 0.0;
  double sp_usd = 0.0;
  bool sp_applicable = false;
  double p_usd = 0.0;
  std::optional<double> builder_margin;
  std::optional<double> aggregated_margin;
  bool subsidized_before = false;
  bool subsidized_after = false;
};

struct BlockEconomicsResult {
  std::vector<BuilderBlockEconomics> blocks;
  /// Blocks skipped because no ETH price was available at slot time.
  std::vector<std::int64_t> unpriced_blocks;
};

/// Per-block economics in block order. OpenMP-parallel over blocks.
BlockEconomicsResult compute_block_economics(const std::map<std::int64_t, BlockRecord>& blocks,
                                             std::span<const estimate::TradeEconomics> economics,
                                             const SearcherLabels& labels, const QuoteStore& store,
                                             const PipelineConfig& cfg);

namespace serial {
BlockEconomicsResult compute_block_economics(const std::map<std::int64_t, BlockRecord>& blocks,
                                             std::span<const estimate::TradeEconomics> economics,
                                             const SearcherLabels& labels, const QuoteStore& store,
                                             const PipelineConfig& cfg);
}  // namespace serial

struct BuilderSummary {
  std::string builder_label;
  std::vector<std::string> integrated_searchers;
  std::size_t total_blocks = 0;
  double total_bid_value_usd = 0.0;
  double total_builder_profit_usd = 0.0;
  std::optional<double> builder_margin;      // mean of per-block builder margins
  std::optional<double> total_searcher_pnl_usd;  // empty when not integrated
  double aggregated_profit_usd = 0.0;
  std::optional<double> aggregated_margin;   // mean of per-block aggregated margins
  std::size_t subsidized_blocks_before = 0;
  std::size_t subsidized_blocks_after = 0;
  double subsidy_before_usd = 0.0;           // sum of BP over before-flagged blocks
  double subsidy_after_bp_usd = 0.0;         // sum of BP over after-flagged blocks
  double subsidy_after_p_usd = 0.0;          // sum of P over after-flagged blocks
  std::size_t zero_denominator_blocks = 0;
};

/// One row per builder label, in label order.
std::vector<BuilderSummary> builder_summary(std::span<const BuilderBlockEconomics> blocks,
                                            const SearcherLabels& labels);

}  // namespace cexdex::builder
