#pragma once

#include "cexdex/horizon.hpp"
#include "cexdex/stats.hpp"
#include "cexdex/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cexdex::market {

using stats::CorrelationResult;
using stats::hhi;

/// Builder column used for trades without a builder label.
inline constexpr std::string_view kOtherBuilder = "other";

/// Fraction of each searcher's arbitrage volume landing in each builder's
/// blocks. Rows sum to 1; searchers with zero volume have no row.
struct IntegrationMatrix {
  std::vector<std::string> builders;
  std::map<std::string, std::map<std::string, double>> rows;

  double cell(const std::string& searcher, const std::string& builder) const;
};

IntegrationMatrix integration_matrix(std::span<const ArbTrade> trades);

enum class ExclusivityKind { Neutral, Exclusive, Integrated };

std::string_view to_string(ExclusivityKind k);

struct Exclusivity {
  ExclusivityKind kind = ExclusivityKind::Neutral;
  std::string builder;       // empty for Neutral
  double max_share = 0.0;    // largest row cell
};

/// Integrated comes only from the label file; otherwise Exclusive(b) when
/// b's share strictly exceeds `threshold`; otherwise Neutral.
std::map<std::string, Exclusivity> classify_exclusivity(const IntegrationMatrix& matrix,
                                                        const SearcherLabels& labels, double threshold);

enum class PairClass { MajorMajor, MajorAlt, AltAlt };

std::string_view to_string(PairClass c);

class UnknownToken : public std::invalid_argument {
 public:
  explicit UnknownToken(const Address& a) : std::invalid_argument("UnknownToken: " + a) {}
};

PairClass pair_class(const Address& a, const Address& b, const TokenRegistry& registry);

struct MajorShare {
  double count_fraction = 0.0;
  double volume_fraction = 0.0;
  bool empty = true;
};

/// Share of trades (by count and by volume) in Major-Major pairs.
MajorShare major_major_share(std::span<const ArbTrade> trades, const TokenRegistry& registry);

/// Spearman rho of post-peak decline against Major-Major count share and
/// volume share, across searchers with a defined decline. Throws StatsError
/// (TooShort with fewer than 3 searchers, DegenerateRanks).
std::array<CorrelationResult, 2> decline_vs_major_correlation(
    std::span<const horizon::SearcherProfile> profiles, const std::map<std::string, MajorShare>& shares);

struct Observation {
  TimestampMs ts_ms = 0;
  std::string label;
  double weight = 0.0;
};

/// Per-UTC-day shares of total weight by label, with the day's HHI. Negative
/// weights count as zero; a day with zero total weight has no shares and no HHI.
struct DailyShares {
  std::int64_t first_day = 0;
  std::vector<std::map<std::string, double>> shares;
  std::vector<std::optional<double>> hhi;

  std::size_t days() const noexcept { return shares.size(); }
};

/// Covers [first_day, first_day + n_days); observations outside are ignored.
DailyShares daily_shares(std::span<const Observation> obs, std::int64_t first_day, std::size_t n_days);

/// Daily fraction of `searcher`'s volume landing in `builder`'s blocks (0 on
/// days without volume).
std::vector<double> searcher_share_in_builder(std::span<const ArbTrade> trades, const std::string& searcher,
                                              const std::string& builder, std::int64_t first_day,
                                              std::size_t n_days);

/// Daily fraction of all blocks won by `builder` (0 on days without blocks).
std::vector<double> builder_block_share(const std::map<std::int64_t, BlockRecord>& blocks,
                                        const std::string& builder, std::int64_t first_day,
                                        std::size_t n_days);

}  // namespace cexdex::market
