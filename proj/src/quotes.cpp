#include "cexdex/quotes.hpp"

#include <algorithm>

namespace cexdex {

QuoteSeries::QuoteSeries(std::string symbol, std::vector<TimestampMs> ts, std::vector<double> bid,
                         std::vector<double> ask)
    : symbol_(std::move(symbol)), ts_(std::move(ts)), bid_(std::move(bid)), ask_(std::move(ask)) {
  if (ts_.size() != bid_.size() || ts_.size() != ask_.size()) {
    throw std::invalid_argument(symbol_ + ": column length mismatch");
  }
  for (std::size_t i = 0; i < ts_.size(); ++i) {
    if (i > 0 && ts_[i] <= ts_[i - 1]) {
      throw std::invalid_argument(symbol_ + ": timestamps not strictly increasing");
    }
    if (!(bid_[i] > 0.0)) throw std::invalid_argument(symbol_ + ": bid must be positive");
    if (ask_[i] < bid_[i]) throw std::invalid_argument(symbol_ + ": crossed quote");
  }
}

std::string QuoteError::message() const {
  switch (kind) {
    case QuoteErrorKind::NoQuoteBefore:
      return "NoQuoteBefore: no " + symbol + " quote at or before " + std::to_string(t_ms);
    case QuoteErrorKind::StaleQuote:
      return "StaleQuote: latest " + symbol + " quote is " + std::to_string(gap_ms) + " ms old at " +
             std::to_string(t_ms);
    case QuoteErrorKind::UnlistedToken:
      return "UnlistedToken: " + symbol;
  }
  return "QuoteError";
}

PriceLookup lookup_mid(const QuoteSeries& series, TimestampMs t_ms, std::int64_t staleness_ms) {
  auto ts = series.timestamps();
  auto it = std::upper_bound(ts.begin(), ts.end(), t_ms);
  if (it == ts.begin()) {
    return {0.0, QuoteError{QuoteErrorKind::NoQuoteBefore, series.symbol(), t_ms, 0}};
  }
  auto idx = static_cast<std::size_t>(std::distance(ts.begin(), it)) - 1;
  std::int64_t gap = t_ms - ts[idx];
  if (gap > staleness_ms) {
    return {0.0, QuoteError{QuoteErrorKind::StaleQuote, series.symbol(), t_ms, gap}};
  }
  return {(series.bids()[idx] + series.asks()[idx]) / 2.0, std::nullopt};
}

double mid_price(const QuoteSeries& series, TimestampMs t_ms, std::int64_t staleness_ms) {
  auto r = lookup_mid(series, t_ms, staleness_ms);
  if (!r) throw QuoteLookupError(*r.error);
  return r.value;
}

PriceLookup lookup_usd_price(const Address& token, TimestampMs t_ms, const TokenRegistry& registry,
                             const QuoteStore& store, std::int64_t staleness_ms) {
  const TokenInfo* info = registry.find(token);
  if (info == nullptr || !info->cex_listed) {
    return {0.0, QuoteError{QuoteErrorKind::UnlistedToken, info ? info->symbol : token, t_ms, 0}};
  }
  if (info->cex_symbol == "USDT") return {1.0, std::nullopt};
  std::string pair = info->cex_symbol + "USDT";
  auto it = store.find(pair);
  if (it == store.end()) {
    return {0.0, QuoteError{QuoteErrorKind::NoQuoteBefore, pair, t_ms, 0}};
  }
  return lookup_mid(it->second, t_ms, staleness_ms);
}

double usd_price(const Address& token, TimestampMs t_ms, const TokenRegistry& registry,
                 const QuoteStore& store, std::int64_t staleness_ms) {
  auto r = lookup_usd_price(token, t_ms, registry, store, staleness_ms);
  if (!r) throw QuoteLookupError(*r.error);
  return r.value;
}

PriceLookup lookup_eth_usd(TimestampMs t_ms, const QuoteStore& store, std::int64_t staleness_ms) {
  auto it = store.find("ETHUSDT");
  if (it == store.end()) {
    return {0.0, QuoteError{QuoteErrorKind::NoQuoteBefore, "ETHUSDT", t_ms, 0}};
  }
  return lookup_mid(it->second, t_ms, staleness_ms);
}

double eth_usd(TimestampMs t_ms, const QuoteStore& store, std::int64_t staleness_ms) {
  auto r = lookup_eth_usd(t_ms, store, staleness_ms);
  if (!r) throw QuoteLookupError(*r.error);
  return r.value;
}

}  // namespace cexdex
