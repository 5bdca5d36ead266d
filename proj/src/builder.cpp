#include "cexdex/builder.hpp"

#include <algorithm>

namespace cexdex::builder {

RefundSchedule RefundSchedule::from_config(const PipelineConfig& cfg) {
  return RefundSchedule{cfg.refund_cutoff_ts_ms, cfg.refund_rate_before, cfg.refund_rate_after};
}

double RefundSchedule::rate_at(TimestampMs slot_time_ms) const {
  return slot_time_ms < cutoff_ts_ms ? rate_before : rate_after;
}

double builder_onchain_profit_eth(const BlockRecord& block, const RefundSchedule& schedule) {
  if (!block.used_bid_adjustment) return block.coinbase_delta_eth;
  return block.coinbase_delta_eth - block.bid_eth +
         schedule.rate_at(block.slot_time_ms) * block.adjustment_delta_eth;
}

double builder_onchain_profit(const BlockRecord& block, const RefundSchedule& schedule, double eth_usd) {
  return builder_onchain_profit_eth(block, schedule) * eth_usd;
}

SearcherPnl integrated_searcher_pnl(const BlockRecord& block, std::span<const estimate::TradeEconomics> block_trades,
                                    const SearcherLabels& labels) {
  SearcherPnl out;
  const auto searchers = labels.integrated_searchers_of(block.builder_label);
  out.applicable = !searchers.empty();
  for (const auto& e : block_trades) {
    if (e.block_number != block.block_number) continue;
    if (std::find(searchers.begin(), searchers.end(), e.searcher_label) != searchers.end()) {
      out.sp_usd += e.pnl_usd;
    }
  }
  return out;
}

double aggregated_margin(const BlockRecord& block, double profit_usd, const RefundSchedule& schedule,
                         double eth_usd) {
  const double refund_usd = schedule.rate_at(block.slot_time_ms) * block.adjustment_delta_eth * eth_usd;
  const double denominator = profit_usd + block.bid_eth * eth_usd - refund_usd;
  if (denominator == 0.0) throw ZeroDenominator(block.block_number);
  return profit_usd / denominator;
}

SubsidyFlags subsidy_flags(double bp_usd, double p_usd) {
  return SubsidyFlags{bp_usd < 0.0, bp_usd < 0.0 && p_usd < 0.0};
}

namespace {

using TradesByBlock = std::map<std::int64_t, std::vector<estimate::TradeEconomics>>;

TradesByBlock group_by_block(std::span<const estimate::TradeEconomics> economics) {
  TradesByBlock out;
  for (const auto& e : economics) out[e.block_number].push_back(e);
  return out;
}

std::optional<double> margin_or_empty(const BlockRecord& block, double profit, const RefundSchedule& schedule,
                                      double eth) {
  try {
    return aggregated_margin(block, profit, schedule, eth);
  } catch (const ZeroDenominator&) {
    return std::nullopt;
  }
}

std::optional<BuilderBlockEconomics> block_economics(const BlockRecord& block, const TradesByBlock& trades,
                                                     const SearcherLabels& labels, const QuoteStore& store,
                                                     const PipelineConfig& cfg) {
  auto eth = lookup_eth_usd(block.slot_time_ms, store, cfg.quote_staleness_ms);
  if (!eth) return std::nullopt;
  const RefundSchedule schedule = RefundSchedule::from_config(cfg);
  BuilderBlockEconomics b;
  b.block_number = block.block_number;
  b.builder_label = block.builder_label;
  b.slot_time_ms = block.slot_time_ms;
  b.eth_usd = eth.value;
  b.bid_usd = block.bid_eth * eth.value;
  b.bp_usd = builder_onchain_profit(block, schedule, eth.value);
  static const std::vector<estimate::TradeEconomics> kNone;
  auto it = trades.find(block.block_number);
  const auto sp = integrated_searcher_pnl(block, it == trades.end() ? kNone : it->second, labels);
  b.sp_usd = sp.sp_usd;
  b.sp_applicable = sp.applicable;
  b.p_usd = b.bp_usd + b.sp_usd;
  b.builder_margin = margin_or_empty(block, b.bp_usd, schedule, eth.value);
  b.aggregated_margin = margin_or_empty(block, b.p_usd, schedule, eth.value);
  const auto flags = subsidy_flags(b.bp_usd, b.p_usd);
  b.subsidized_before = flags.before;
  b.subsidized_after = flags.after;
  return b;
}

BlockEconomicsResult collect(const std::map<std::int64_t, BlockRecord>& blocks,
                             std::vector<std::optional<BuilderBlockEconomics>>& slots) {
  BlockEconomicsResult out;
  std::size_t i = 0;
  for (const auto& [number, block] : blocks) {
    if (slots[i]) {
      out.blocks.push_back(std::move(*slots[i]));
    } else {
      out.unpriced_blocks.push_back(number);
    }
    ++i;
  }
  return out;
}

}  // namespace

BlockEconomicsResult compute_block_economics(const std::map<std::int64_t, BlockRecord>& blocks,
                                             std::span<const estimate::TradeEconomics> economics,
                                             const SearcherLabels& labels, const QuoteStore& store,
                                             const PipelineConfig& cfg) {
  const TradesByBlock trades = group_by_block(economics);
  std::vector<const BlockRecord*> items;
  items.reserve(blocks.size());
  for (const auto& kv : blocks) items.push_back(&kv.second);
  std::vector<std::optional<BuilderBlockEconomics>> slots(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    slots[k] = block_economics(*items[k], trades, labels, store, cfg);
  }
  return collect(blocks, slots);
}

namespace serial {

BlockEconomicsResult compute_block_economics(const std::map<std::int64_t, BlockRecord>& blocks,
                                             std::span<const estimate::TradeEconomics> economics,
                                             const SearcherLabels& labels, const QuoteStore& store,
                                             const PipelineConfig& cfg) {
  const TradesByBlock trades = group_by_block(economics);
  std::vector<std::optional<BuilderBlockEconomics>> slots;
  slots.reserve(blocks.size());
  for (const auto& [number, block] : blocks) slots.push_back(block_economics(block, trades, labels, store, cfg));
  return collect(blocks, slots);
}

}  // namespace serial

std::vector<BuilderSummary> builder_summary(std::span<const BuilderBlockEconomics> blocks,
                                            const SearcherLabels& labels) {
  struct Acc {
    BuilderSummary s;
    double builder_margin_sum = 0.0;
    std::size_t builder_margin_n = 0;
    double agg_margin_sum = 0.0;
    std::size_t agg_margin_n = 0;
    double sp_sum = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& b : blocks) {
    Acc& a = acc[b.builder_label];
    BuilderSummary& s = a.s;
    ++s.total_blocks;
    s.total_bid_value_usd += b.bid_usd;
    s.total_builder_profit_usd += b.bp_usd;
    s.aggregated_profit_usd += b.p_usd;
    a.sp_sum += b.sp_usd;
    if (b.builder_margin) {
      a.builder_margin_sum += *b.builder_margin;
      ++a.builder_margin_n;
    }
    if (b.aggregated_margin) {
      a.agg_margin_sum += *b.aggregated_margin;
      ++a.agg_margin_n;
    }
    if (!b.builder_margin || !b.aggregated_margin) ++s.zero_denominator_blocks;
    if (b.subsidized_before) {
      ++s.subsidized_blocks_before;
      s.subsidy_before_usd += b.bp_usd;
    }
    if (b.subsidized_after) {
      ++s.subsidized_blocks_after;
      s.subsidy_after_bp_usd += b.bp_usd;
      s.subsidy_after_p_usd += b.p_usd;
    }
  }
  std::vector<BuilderSummary> out;
  for (auto& [label, a] : acc) {
    a.s.builder_label = label;
    a.s.integrated_searchers = labels.integrated_searchers_of(label);
    if (!a.s.integrated_searchers.empty()) a.s.total_searcher_pnl_usd = a.sp_sum;
    if (a.builder_margin_n > 0) a.s.builder_margin = a.builder_margin_sum / static_cast<double>(a.builder_margin_n);
    if (a.agg_margin_n > 0) a.s.aggregated_margin = a.agg_margin_sum / static_cast<double>(a.agg_margin_n);
    out.push_back(std::move(a.s));
  }
  return out;
}

}  // namespace cexdex::builder
