#pragma once

#include "cexdex/markout.hpp"
#include "cexdex/types.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cexdex::horizon {

/// P1: peak then gentle decay. P2: peak then abrupt drop and flat tail.
/// P3: flat, no discernible peak (no horizon can be inferred).
enum class Pattern { P1, P2, P3 };

std::string_view to_string(Pattern p);
Pattern parse_pattern(std::string_view s);

/// Cross-trade gross-return distribution of one searcher, per grid offset.
struct MedianCurve {
  std::string searcher_label;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
  std::size_t n_trades = 0;
};

struct SearcherProfile {
  std::string searcher_label;
  std::optional<double> t_star_s;
  Pattern pattern = Pattern::P3;
  std::optional<double> decline_3s_fraction;
  std::size_t n_arb_trades = 0;
  bool low_confidence = false;
};

enum class HorizonErrorKind { NoTrades, PeakNonPositive, OutOfGrid };

class HorizonError : public std::domain_error {
 public:
  HorizonError(HorizonErrorKind kind, const std::string& detail);
  HorizonErrorKind kind() const noexcept { return kind_; }

 private:
  HorizonErrorKind kind_;
};

/// Median of a sample: mean of the two central order statistics for even
/// sizes. Reorders `values`.
double median_of(std::span<double> values);

/// Linear-interpolation quantile (numpy's default). Reorders `values`.
double quantile_of(std::span<double> values, double q);

/// Per-offset median and quartiles over `curves`, which must all be
/// non-excluded and sampled on a grid of `grid_size` points.
/// Throws HorizonError(NoTrades) when `curves` is empty.
MedianCurve median_curve(std::string label, std::span<const markout::MarkoutCurve* const> curves,
                         std::size_t grid_size);

/// Grid index of the argmax of the median curve. Ties forming the leading
/// plateau (consecutive maxima before the first decrease) resolve to the
/// latest offset.
std::size_t optimal_horizon_index(const MedianCurve& curve);
double optimal_horizon(const MedianCurve& curve, const markout::MarkoutGrid& grid);

/// Relative fall of the median from t* to t* + horizon_s.
double decline_after_peak(const MedianCurve& curve, const markout::MarkoutGrid& grid, double t_star_s,
                          double horizon_s = 3.0);

Pattern classify_pattern(const MedianCurve& curve, const markout::MarkoutGrid& grid,
                         const PipelineConfig& cfg);

SearcherProfile build_profile(const MedianCurve& curve, const markout::MarkoutGrid& grid,
                              const PipelineConfig& cfg);

struct HorizonResult {
  std::vector<MedianCurve> curves;
  std::vector<SearcherProfile> profiles;
};

/// Groups non-excluded curves by searcher label and derives one profile per
/// searcher with at least one usable trade, in label order. `trades` and
/// `curves` are index-aligned. OpenMP-parallel over searchers.
HorizonResult build_profiles(const std::vector<ArbTrade>& trades,
                             const std::vector<markout::MarkoutCurve>& curves,
                             const markout::MarkoutGrid& grid, const PipelineConfig& cfg);

namespace serial {
/// Reference: full sort per offset instead of selection.
MedianCurve median_curve(std::string label, std::span<const markout::MarkoutCurve* const> curves,
                         std::size_t grid_size);
HorizonResult build_profiles(const std::vector<ArbTrade>& trades,
                             const std::vector<markout::MarkoutCurve>& curves,
                             const markout::MarkoutGrid& grid, const PipelineConfig& cfg);
}  // namespace serial

}  // namespace cexdex::horizon
