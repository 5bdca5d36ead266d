#pragma once

#include "cexdex/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cexdex {

/// Best bid/ask history of one CEX symbol. Immutable once constructed, so
/// concurrent lookups need no synchronization.
class QuoteSeries {
 public:
  QuoteSeries() = default;
  /// Throws std::invalid_argument unless timestamps are strictly increasing,
  /// bids are positive and no quote is crossed.
  QuoteSeries(std::string symbol, std::vector<TimestampMs> ts, std::vector<double> bid,
              std::vector<double> ask);

  const std::string& symbol() const noexcept { return symbol_; }
  std::span<const TimestampMs> timestamps() const noexcept { return ts_; }
  std::span<const double> bids() const noexcept { return bid_; }
  std::span<const double> asks() const noexcept { return ask_; }
  std::size_t size() const noexcept { return ts_.size(); }
  bool empty() const noexcept { return ts_.empty(); }

 private:
  std::string symbol_;
  std::vector<TimestampMs> ts_;
  std::vector<double> bid_;
  std::vector<double> ask_;
};

using QuoteStore = std::map<std::string, QuoteSeries>;

enum class QuoteErrorKind { NoQuoteBefore, StaleQuote, UnlistedToken };

struct QuoteError {
  QuoteErrorKind kind = QuoteErrorKind::NoQuoteBefore;
  std::string symbol;
  TimestampMs t_ms = 0;
  /// Age of the latest quote for StaleQuote.
  std::int64_t gap_ms = 0;

  std::string message() const;
};

/// Outcome of a price lookup: a value or the reason the trade must be
/// excluded.
struct PriceLookup {
  double value = 0.0;
  std::optional<QuoteError> error;

  bool ok() const noexcept { return !error.has_value(); }
  explicit operator bool() const noexcept { return ok(); }
};

class QuoteLookupError : public std::runtime_error {
 public:
  explicit QuoteLookupError(QuoteError err) : std::runtime_error(err.message()), error_(std::move(err)) {}
  const QuoteError& error() const noexcept { return error_; }

 private:
  QuoteError error_;
};

/// Midpoint of the latest quote at or before `t_ms`; a step function, never
/// interpolated.
PriceLookup lookup_mid(const QuoteSeries& series, TimestampMs t_ms, std::int64_t staleness_ms);

/// Throwing form of lookup_mid.
double mid_price(const QuoteSeries& series, TimestampMs t_ms, std::int64_t staleness_ms);

/// USD value of one unit of `token`. USDT is pinned to exactly 1.0; other
/// listed tokens use the "<CEX symbol>USDT" midpoint.
PriceLookup lookup_usd_price(const Address& token, TimestampMs t_ms, const TokenRegistry& registry,
                             const QuoteStore& store, std::int64_t staleness_ms);

double usd_price(const Address& token, TimestampMs t_ms, const TokenRegistry& registry,
                 const QuoteStore& store, std::int64_t staleness_ms);

/// ETHUSDT midpoint; NoQuoteBefore when the series is missing.
PriceLookup lookup_eth_usd(TimestampMs t_ms, const QuoteStore& store, std::int64_t staleness_ms);

double eth_usd(TimestampMs t_ms, const QuoteStore& store, std::int64_t staleness_ms);

}  // namespace cexdex
