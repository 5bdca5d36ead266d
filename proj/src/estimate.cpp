#include "cexdex/estimate.hpp"

#include "cexdex/calendar.hpp"

#include <algorithm>

namespace cexdex::estimate {

TradeEconomics economics_from_usd(double mr_at_t_star_usd, double base_fee_usd, double builder_tip_usd) {
  TradeEconomics e;
  e.mr_at_t_star_usd = mr_at_t_star_usd;
  e.base_fee_usd = base_fee_usd;
  e.builder_tip_usd = builder_tip_usd;
  e.ev_usd = mr_at_t_star_usd - base_fee_usd;
  e.pnl_usd = e.ev_usd - builder_tip_usd;
  if (e.ev_usd > 0.0) e.margin = e.pnl_usd / e.ev_usd;
  return e;
}

TradeEconomics trade_economics(const ArbTrade& trade, const markout::MarkoutCurve& curve,
                               const horizon::SearcherProfile& profile, const markout::MarkoutGrid& grid,
                               double eth_usd_at_slot) {
  if (profile.pattern == horizon::Pattern::P3 || !profile.t_star_s) {
    throw PatternThreeExcluded(profile.searcher_label);
  }
  if (curve.excluded()) throw std::invalid_argument(trade.tx_hash + ": curve is excluded");
  auto idx = grid.index_of(*profile.t_star_s);
  if (!idx || *idx >= curve.mr_usd.size()) throw std::invalid_argument("t* is not on the markout grid");

  TradeEconomics e = economics_from_usd(curve.mr_usd[*idx], trade.base_fee_eth * eth_usd_at_slot,
                                        trade.builder_tip_eth * eth_usd_at_slot);
  e.tx_hash = trade.tx_hash;
  e.searcher_label = trade.searcher_label;
  e.block_number = trade.block_number;
  e.slot_time_ms = trade.slot_time_ms;
  e.volume_usd = trade.volume_usd;
  return e;
}

namespace {

using ProfileIndex = std::map<std::string, const horizon::SearcherProfile*>;

ProfileIndex index_profiles(const std::vector<horizon::SearcherProfile>& profiles) {
  ProfileIndex idx;
  for (const auto& p : profiles) idx.emplace(p.searcher_label, &p);
  return idx;
}

std::optional<TradeEconomics> estimate_one(const ArbTrade& trade, const markout::MarkoutCurve& curve,
                                           const ProfileIndex& profiles, const markout::MarkoutGrid& grid,
                                           const QuoteStore& store, const PipelineConfig& cfg) {
  if (curve.excluded()) return std::nullopt;
  auto it = profiles.find(trade.searcher_label);
  if (it == profiles.end() || it->second->pattern == horizon::Pattern::P3) return std::nullopt;
  // The markout stage already excluded trades without a slot-time ETH price.
  double eth = eth_usd(trade.slot_time_ms, store, cfg.quote_staleness_ms);
  return trade_economics(trade, curve, *it->second, grid, eth);
}

void check_aligned(const std::vector<ArbTrade>& trades, const std::vector<markout::MarkoutCurve>& curves) {
  if (trades.size() != curves.size()) throw std::invalid_argument("trades and curves are not aligned");
}

}  // namespace

std::vector<TradeEconomics> estimate_all(const std::vector<ArbTrade>& trades,
                                         const std::vector<markout::MarkoutCurve>& curves,
                                         const std::vector<horizon::SearcherProfile>& profiles,
                                         const markout::MarkoutGrid& grid, const QuoteStore& store,
                                         const PipelineConfig& cfg) {
  check_aligned(trades, curves);
  const ProfileIndex idx = index_profiles(profiles);
  std::vector<std::optional<TradeEconomics>> slots(trades.size());
  const auto n = static_cast<std::ptrdiff_t>(trades.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    slots[k] = estimate_one(trades[k], curves[k], idx, grid, store, cfg);
  }
  std::vector<TradeEconomics> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

namespace serial {

std::vector<TradeEconomics> estimate_all(const std::vector<ArbTrade>& trades,
                                         const std::vector<markout::MarkoutCurve>& curves,
                                         const std::vector<horizon::SearcherProfile>& profiles,
                                         const markout::MarkoutGrid& grid, const QuoteStore& store,
                                         const PipelineConfig& cfg) {
  check_aligned(trades, curves);
  const ProfileIndex idx = index_profiles(profiles);
  std::vector<TradeEconomics> out;
  for (std::size_t i = 0; i < trades.size(); ++i) {
    if (auto e = estimate_one(trades[i], curves[i], idx, grid, store, cfg)) out.push_back(std::move(*e));
  }
  return out;
}

}  // namespace serial

namespace {

std::optional<double> median_or_empty(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  return horizon::median_of(v);
}

}  // namespace

SearcherSummary searcher_summary(const std::string& label, std::span<const TradeEconomics> economics,
                                 std::span<const markout::Exclusion> exclusions) {
  SearcherSummary s;
  s.label = label;
  std::vector<double> evs, pnls, margins;
  for (const auto& e : economics) {
    s.total_volume_usd += e.volume_usd;
    s.total_ev_usd += e.ev_usd;
    s.total_tips_usd += e.builder_tip_usd;
    s.total_pnl_usd += e.pnl_usd;
    evs.push_back(e.ev_usd);
    pnls.push_back(e.pnl_usd);
    if (e.margin) margins.push_back(*e.margin);
    if (e.pnl_usd >= 0.0) {
      ++s.counts.profitable;
    } else {
      ++s.counts.unprofitable;
    }
  }
  s.median_trade_ev = median_or_empty(std::move(evs));
  s.median_trade_pnl = median_or_empty(std::move(pnls));
  s.median_margin = median_or_empty(std::move(margins));

  s.counts.total = exclusions.size();
  for (auto x : exclusions) {
    if (x == markout::Exclusion::QuoteGap || x == markout::Exclusion::ZeroVolume) ++s.counts.quote_gap;
    if (x == markout::Exclusion::InventoryAdjustment) ++s.counts.inventory_adj;
  }
  s.counts.arbitrage = economics.size();
  return s;
}

std::vector<SearcherSummary> summarize(const std::vector<ArbTrade>& trades,
                                       const std::vector<markout::MarkoutCurve>& curves,
                                       const std::vector<TradeEconomics>& economics) {
  check_aligned(trades, curves);
  std::map<std::string, std::vector<TradeEconomics>> by_label;
  for (const auto& e : economics) by_label[e.searcher_label].push_back(e);
  std::map<std::string, std::vector<markout::Exclusion>> exclusions;
  for (std::size_t i = 0; i < trades.size(); ++i) {
    if (by_label.count(trades[i].searcher_label) > 0) {
      exclusions[trades[i].searcher_label].push_back(curves[i].exclusion);
    }
  }
  std::vector<SearcherSummary> out;
  for (const auto& [label, econ] : by_label) out.push_back(searcher_summary(label, econ, exclusions[label]));
  std::stable_sort(out.begin(), out.end(), [](const SearcherSummary& a, const SearcherSummary& b) {
    return a.total_volume_usd > b.total_volume_usd;
  });
  return out;
}

std::map<std::string, std::vector<EvBucket>> cumulative_ev_series(std::span<const TradeEconomics> economics,
                                                                  Bucketing bucketing) {
  std::map<std::string, std::vector<EvBucket>> out;
  if (economics.empty()) return out;
  const std::int64_t width = bucketing == Bucketing::Daily ? 1 : 7;
  auto bucket_of = [&](TimestampMs ts) {
    std::int64_t d = utc_day(ts);
    return bucketing == Bucketing::Daily ? d : iso_week_start(d);
  };
  std::int64_t first = bucket_of(economics.front().slot_time_ms);
  std::int64_t last = first;
  for (const auto& e : economics) {
    first = std::min(first, bucket_of(e.slot_time_ms));
    last = std::max(last, bucket_of(e.slot_time_ms));
  }
  const auto n = static_cast<std::size_t>((last - first) / width + 1);
  for (const auto& e : economics) {
    auto& series = out[e.searcher_label];
    if (series.empty()) {
      series.resize(n);
      for (std::size_t i = 0; i < n; ++i) series[i].start_day = first + static_cast<std::int64_t>(i) * width;
    }
    series[static_cast<std::size_t>((bucket_of(e.slot_time_ms) - first) / width)].ev_usd += e.ev_usd;
  }
  for (auto& [label, series] : out) {
    double running = 0.0;
    for (auto& b : series) {
      running += b.ev_usd;
      b.cumulative_ev_usd = running;
    }
  }
  return out;
}

}  // namespace cexdex::estimate
