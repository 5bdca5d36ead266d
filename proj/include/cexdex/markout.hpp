#pragma once

#include "cexdex/quotes.hpp"
#include "cexdex/types.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cexdex::markout {

/// Markout offsets in seconds relative to slot time. Strictly increasing and
/// always containing 0.
class MarkoutGrid {
 public:
  /// Throws std::invalid_argument on an invalid offset list.
  explicit MarkoutGrid(std::vector<double> offsets_s);
  static MarkoutGrid from_config(const PipelineConfig& cfg);

  std::span<const double> offsets() const noexcept { return offsets_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  double operator[](std::size_t i) const { return offsets_[i]; }
  std::optional<std::size_t> index_of(double offset_s) const;

  static std::int64_t to_ms(double offset_s);

 private:
  std::vector<double> offsets_;
};

enum class Exclusion { None, QuoteGap, InventoryAdjustment, ZeroVolume };

std::string_view to_string(Exclusion e);
Exclusion parse_exclusion(std::string_view s);

/// Per-trade markout revenue MR(t) (USD) and gross return GR(t) = MR(t)/V on
/// the grid. Samples that could not be priced are NaN.
struct MarkoutCurve {
  std::string tx_hash;
  std::vector<double> mr_usd;
  std::vector<double> gr;
  Exclusion exclusion = Exclusion::None;
  std::optional<QuoteError> quote_error;

  bool excluded() const noexcept { return exclusion != Exclusion::None; }
};

class ZeroVolumeError : public std::domain_error {
 public:
  explicit ZeroVolumeError(const std::string& tx_hash)
      : std::domain_error("ZeroVolume: " + tx_hash) {}
};

/// Value of flattening the DEX inventory on the CEX: x·P_A − y·P_B, less
/// taker fees charged on both hedge legs' notionals.
double markout_revenue_at_prices(double amount_bought, double price_bought, double amount_sold,
                                 double price_sold, double taker_fee_rate);

PriceLookup try_markout_revenue(const ArbTrade& trade, double offset_s, const QuoteStore& store,
                                const TokenRegistry& registry, const PipelineConfig& cfg);

/// Throws QuoteLookupError when either leg cannot be priced.
double markout_revenue(const ArbTrade& trade, double offset_s, const QuoteStore& store,
                       const TokenRegistry& registry, const PipelineConfig& cfg);

/// MR / V. Throws ZeroVolumeError when V is zero.
double gross_return(double mr_usd, const ArbTrade& trade);
double gross_return(const ArbTrade& trade, double offset_s, const QuoteStore& store,
                    const TokenRegistry& registry, const PipelineConfig& cfg);

/// Samples every grid offset. A pricing failure anywhere marks the curve
/// QuoteGap-excluded; a zero-volume trade is ZeroVolume-excluded.
MarkoutCurve markout_curve(const ArbTrade& trade, const MarkoutGrid& grid, const QuoteStore& store,
                           const TokenRegistry& registry, const PipelineConfig& cfg);

/// True iff MR(t) stays strictly below the base-fee cost at every offset.
bool flag_inventory_adjustment(const MarkoutCurve& curve, const ArbTrade& trade, double eth_usd_at_slot);

/// Stage kernel: markout_curve plus slot-time ETH pricing and inventory
/// flagging, one curve per trade in input order. OpenMP-parallel over trades;
/// results are independent of the thread count.
std::vector<MarkoutCurve> compute_markouts(const std::vector<ArbTrade>& trades, const MarkoutGrid& grid,
                                           const QuoteStore& store, const TokenRegistry& registry,
                                           const PipelineConfig& cfg);

namespace serial {
std::vector<MarkoutCurve> compute_markouts(const std::vector<ArbTrade>& trades, const MarkoutGrid& grid,
                                           const QuoteStore& store, const TokenRegistry& registry,
                                           const PipelineConfig& cfg);
}  // namespace serial

}  // namespace cexdex::markout
