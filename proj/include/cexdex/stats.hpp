#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cexdex::stats {

enum class StatsErrorKind { LengthMismatch, TooShort, DegenerateRanks, SharesDontSumToOne };

class StatsError : public std::domain_error {
 public:
  StatsError(StatsErrorKind kind, const std::string& detail);
  StatsErrorKind kind() const noexcept { return kind_; }

 private:
  StatsErrorKind kind_;
};

struct CorrelationResult {
  double rho = 0.0;
  std::size_t n = 0;
  double p_value = 1.0;
  /// Positive: x leads y by lag_days. Negative: y leads x.
  int lag_days = 0;
};

/// Average (mid) ranks, 1-based.
std::vector<double> midranks(std::span<const double> values);

/// Spearman's rho with midranks for ties. Two-sided p-value from the
/// Student-t approximation when n >= 10, exact permutation otherwise.
/// Throws StatsError (LengthMismatch, TooShort for n < 3, DegenerateRanks
/// when either series is constant).
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// For every lag L: rho(x[t], y[t+L]) tagged +L and, for L > 0, the reverse
/// rho(y[t], x[t+L]) tagged -L.
std::vector<CorrelationResult> lagged_correlation(std::span<const double> x, std::span<const double> y,
                                                  std::span<const int> lags);

struct WindowCorrelation {
  std::size_t end_index = 0;
  /// Empty when the window's ranks are degenerate.
  std::optional<CorrelationResult> result;
};

/// One entry per window end index; empty when the input is shorter than the window.
std::vector<WindowCorrelation> rolling_correlation(std::span<const double> x, std::span<const double> y,
                                                   std::size_t window);

/// Herfindahl-Hirschman index: sum of squared shares. Shares must be
/// non-negative and sum to 1 within 1e-9.
double hhi(std::span<const double> shares);

}  // namespace cexdex::stats
