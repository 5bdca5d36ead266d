#include "cexdex/markout.hpp"

#include <cmath>
#include <limits>

namespace cexdex::markout {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOffsetTolerance = 1e-9;
}  // namespace

MarkoutGrid::MarkoutGrid(std::vector<double> offsets_s) : offsets_(std::move(offsets_s)) {
  if (offsets_.empty()) throw std::invalid_argument("markout grid is empty");
  bool has_zero = false;
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (!std::isfinite(offsets_[i])) throw std::invalid_argument("non-finite markout offset");
    if (i > 0 && !(offsets_[i] > offsets_[i - 1])) {
      throw std::invalid_argument("markout offsets must be strictly increasing");
    }
    has_zero = has_zero || std::abs(offsets_[i]) < kOffsetTolerance;
  }
  if (!has_zero) throw std::invalid_argument("markout grid must contain offset 0");
}

MarkoutGrid MarkoutGrid::from_config(const PipelineConfig& cfg) {
  auto steps = static_cast<long>(std::llround((cfg.grid_end_s - cfg.grid_start_s) / cfg.grid_step_s));
  std::vector<double> offsets;
  offsets.reserve(static_cast<std::size_t>(steps) + 1);
  for (long i = 0; i <= steps; ++i) {
    double o = cfg.grid_start_s + static_cast<double>(i) * cfg.grid_step_s;
    // Snap to the millisecond lattice so offsets print cleanly.
    o = static_cast<double>(std::llround(o * 1000.0)) / 1000.0;
    offsets.push_back(o == 0.0 ? 0.0 : o);
  }
  return MarkoutGrid(std::move(offsets));
}

std::optional<std::size_t> MarkoutGrid::index_of(double offset_s) const {
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (std::abs(offsets_[i] - offset_s) < kOffsetTolerance) return i;
  }
  return std::nullopt;
}

std::int64_t MarkoutGrid::to_ms(double offset_s) { return std::llround(offset_s * 1000.0); }

std::string_view to_string(Exclusion e) {
  switch (e) {
    case Exclusion::None: return "";
    case Exclusion::QuoteGap: return "QuoteGap";
    case Exclusion::InventoryAdjustment: return "InventoryAdjustment";
    case Exclusion::ZeroVolume: return "ZeroVolume";
  }
  return "";
}

Exclusion parse_exclusion(std::string_view s) {
  if (s.empty()) return Exclusion::None;
  if (s == "QuoteGap") return Exclusion::QuoteGap;
  if (s == "InventoryAdjustment") return Exclusion::InventoryAdjustment;
  if (s == "ZeroVolume") return Exclusion::ZeroVolume;
  throw std::invalid_argument("unknown exclusion reason '" + std::string(s) + "'");
}

double markout_revenue_at_prices(double amount_bought, double price_bought, double amount_sold,
                                 double price_sold, double taker_fee_rate) {
  const double long_leg = amount_bought * price_bought;
  const double short_leg = amount_sold * price_sold;
  return long_leg - short_leg - taker_fee_rate * (long_leg + short_leg);
}

PriceLookup try_markout_revenue(const ArbTrade& trade, double offset_s, const QuoteStore& store,
                                const TokenRegistry& registry, const PipelineConfig& cfg) {
  const TimestampMs t = trade.slot_time_ms + MarkoutGrid::to_ms(offset_s);
  auto pa = lookup_usd_price(trade.token_bought, t, registry, store, cfg.quote_staleness_ms);
  if (!pa) return pa;
  auto pb = lookup_usd_price(trade.token_sold, t, registry, store, cfg.quote_staleness_ms);
  if (!pb) return pb;
  return {markout_revenue_at_prices(to_double(trade.amount_bought), pa.value,
                                    to_double(trade.amount_sold), pb.value, cfg.taker_fee_rate),
          std::nullopt};
}

double markout_revenue(const ArbTrade& trade, double offset_s, const QuoteStore& store,
                       const TokenRegistry& registry, const PipelineConfig& cfg) {
  auto r = try_markout_revenue(trade, offset_s, store, registry, cfg);
  if (!r) throw QuoteLookupError(*r.error);
  return r.value;
}

double gross_return(double mr_usd, const ArbTrade& trade) {
  if (trade.volume_usd == 0.0) throw ZeroVolumeError(trade.tx_hash);
  return mr_usd / trade.volume_usd;
}

double gross_return(const ArbTrade& trade, double offset_s, const QuoteStore& store,
                    const TokenRegistry& registry, const PipelineConfig& cfg) {
  if (trade.volume_usd == 0.0) throw ZeroVolumeError(trade.tx_hash);
  return gross_return(markout_revenue(trade, offset_s, store, registry, cfg), trade);
}

MarkoutCurve markout_curve(const ArbTrade& trade, const MarkoutGrid& grid, const QuoteStore& store,
                           const TokenRegistry& registry, const PipelineConfig& cfg) {
  MarkoutCurve c;
  c.tx_hash = trade.tx_hash;
  c.mr_usd.assign(grid.size(), kNaN);
  c.gr.assign(grid.size(), kNaN);
  // Token amounts are converted once; per-offset work is two lookups.
  const double x = to_double(trade.amount_bought);
  const double y = to_double(trade.amount_sold);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const TimestampMs t = trade.slot_time_ms + MarkoutGrid::to_ms(grid[i]);
    auto pa = lookup_usd_price(trade.token_bought, t, registry, store, cfg.quote_staleness_ms);
    auto pb = pa ? lookup_usd_price(trade.token_sold, t, registry, store, cfg.quote_staleness_ms) : pa;
    if (!pb) {
      c.exclusion = Exclusion::QuoteGap;
      c.quote_error = pb.error;
      c.mr_usd.assign(grid.size(), kNaN);
      c.gr.assign(grid.size(), kNaN);
      return c;
    }
    c.mr_usd[i] = markout_revenue_at_prices(x, pa.value, y, pb.value, cfg.taker_fee_rate);
  }
  if (trade.volume_usd == 0.0) {
    c.exclusion = Exclusion::ZeroVolume;
    return c;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) c.gr[i] = c.mr_usd[i] / trade.volume_usd;
  return c;
}

bool flag_inventory_adjustment(const MarkoutCurve& curve, const ArbTrade& trade, double eth_usd_at_slot) {
  const double cost = trade.base_fee_eth * eth_usd_at_slot;
  for (double mr : curve.mr_usd) {
    if (!(mr < cost)) return false;
  }
  return !curve.mr_usd.empty();
}

namespace {

MarkoutCurve stage_curve(const ArbTrade& trade, const MarkoutGrid& grid, const QuoteStore& store,
                         const TokenRegistry& registry, const PipelineConfig& cfg) {
  MarkoutCurve c = markout_curve(trade, grid, store, registry, cfg);
  if (c.excluded()) return c;
  auto eth = lookup_eth_usd(trade.slot_time_ms, store, cfg.quote_staleness_ms);
  if (!eth) {
    c.exclusion = Exclusion::QuoteGap;
    c.quote_error = eth.error;
    return c;
  }
  if (flag_inventory_adjustment(c, trade, eth.value)) c.exclusion = Exclusion::InventoryAdjustment;
  return c;
}

}  // namespace

std::vector<MarkoutCurve> compute_markouts(const std::vector<ArbTrade>& trades, const MarkoutGrid& grid,
                                           const QuoteStore& store, const TokenRegistry& registry,
                                           const PipelineConfig& cfg) {
  std::vector<MarkoutCurve> out(trades.size());
  const auto n = static_cast<std::ptrdiff_t>(trades.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    out[k] = stage_curve(trades[k], grid, store, registry, cfg);
  }
  return out;
}

namespace serial {

std::vector<MarkoutCurve> compute_markouts(const std::vector<ArbTrade>& trades, const MarkoutGrid& grid,
                                           const QuoteStore& store, const TokenRegistry& registry,
                                           const PipelineConfig& cfg) {
  std::vector<MarkoutCurve> out;
  out.reserve(trades.size());
  for (const auto& t : trades) out.push_back(stage_curve(t, grid, store, registry, cfg));
  return out;
}

}  // namespace serial

}  // namespace cexdex::markout
