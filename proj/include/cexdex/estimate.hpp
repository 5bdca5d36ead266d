#pragma once

#include "cexdex/horizon.hpp"
#include "cexdex/markout.hpp"
#include "cexdex/quotes.hpp"
#include "cexdex/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cexdex::estimate {

/// Per-trade extracted value and PnL at the searcher's horizon.
///   EV  = MR(t*) - base fees
///   PnL = EV - builder tips
///   margin = PnL / EV, defined only when EV > 0.
struct TradeEconomics {
  std::string tx_hash;
  std::string searcher_label;
  std::int64_t block_number = 0;
  TimestampMs slot_time_ms = 0;
  double volume_usd = 0.0;
  double mr_at_t_star_usd = 0.0;
  double base_fee_usd = 0.0;
  double builder_tip_usd = 0.0;
  double ev_usd = 0.0;
  double pnl_usd = 0.0;
  std::optional<double> margin;
};

class PatternThreeExcluded : public std::domain_error {
 public:
  explicit PatternThreeExcluded(const std::string& label)
      : std::domain_error("PatternThreeExcluded: " + label + " has no execution horizon") {}
};

/// EV/PnL/margin from USD inputs.
TradeEconomics economics_from_usd(double mr_at_t_star_usd, double base_fee_usd, double builder_tip_usd);

/// Throws PatternThreeExcluded for P3 profiles and std::invalid_argument for
/// an excluded curve.
TradeEconomics trade_economics(const ArbTrade& trade, const markout::MarkoutCurve& curve,
                               const horizon::SearcherProfile& profile, const markout::MarkoutGrid& grid,
                               double eth_usd_at_slot);

/// Stage kernel: economics for every non-excluded trade whose searcher has a
/// horizon, in trade order. OpenMP-parallel over trades.
std::vector<TradeEconomics> estimate_all(const std::vector<ArbTrade>& trades,
                                         const std::vector<markout::MarkoutCurve>& curves,
                                         const std::vector<horizon::SearcherProfile>& profiles,
                                         const markout::MarkoutGrid& grid, const QuoteStore& store,
                                         const PipelineConfig& cfg);

namespace serial {
std::vector<TradeEconomics> estimate_all(const std::vector<ArbTrade>& trades,
                                         const std::vector<markout::MarkoutCurve>& curves,
                                         const std::vector<horizon::SearcherProfile>& profiles,
                                         const markout::MarkoutGrid& grid, const QuoteStore& store,
                                         const PipelineConfig& cfg);
}  // namespace serial

struct TradeCounts {
  std::size_t total = 0;
  std::size_t quote_gap = 0;
  std::size_t inventory_adj = 0;
  std::size_t arbitrage = 0;
  std::size_t profitable = 0;
  std::size_t unprofitable = 0;
};

struct SearcherSummary {
  std::string label;
  double total_volume_usd = 0.0;
  double total_ev_usd = 0.0;
  double total_tips_usd = 0.0;
  double total_pnl_usd = 0.0;
  std::optional<double> median_trade_ev;
  std::optional<double> median_trade_pnl;
  std::optional<double> median_margin;
  TradeCounts counts;
};

/// Totals and medians over `economics`; counts split profitable (PnL >= 0)
/// from unprofitable and carry the excluded trades from `exclusions` (one
/// entry per detected trade of the searcher).
SearcherSummary searcher_summary(const std::string& label, std::span<const TradeEconomics> economics,
                                 std::span<const markout::Exclusion> exclusions);

/// Summaries for every searcher with estimated economics, sorted by total
/// volume descending (label ascending on ties).
std::vector<SearcherSummary> summarize(const std::vector<ArbTrade>& trades,
                                       const std::vector<markout::MarkoutCurve>& curves,
                                       const std::vector<TradeEconomics>& economics);

enum class Bucketing { Daily, Weekly };

struct EvBucket {
  std::int64_t start_day = 0;  // days since epoch, UTC
  double ev_usd = 0.0;
  double cumulative_ev_usd = 0.0;
};

/// Per-searcher EV per bucket with running totals. Every searcher gets the
/// same contiguous bucket range; empty buckets carry 0.
std::map<std::string, std::vector<EvBucket>> cumulative_ev_series(std::span<const TradeEconomics> economics,
                                                                  Bucketing bucketing);

}  // namespace cexdex::estimate
