#pragma once

// Shared helpers for the unit tests: tiny registries, trades and quote
// stores built by hand, plus scratch directories.

#include "cexdex/decimal.hpp"
#include "cexdex/quotes.hpp"
#include "cexdex/rng.hpp"
#include "cexdex/types.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline const cexdex::Address kWeth = "0x00000000000000000000000000000000000000e1";
inline const cexdex::Address kUsdt = "0x00000000000000000000000000000000000000d1";
inline const cexdex::Address kUsdc = "0x00000000000000000000000000000000000000d2";
inline const cexdex::Address kPepe = "0x00000000000000000000000000000000000000a1";
inline const cexdex::Address kLink = "0x00000000000000000000000000000000000000a2";
inline const cexdex::Address kJunk = "0x00000000000000000000000000000000000000f1";

inline cexdex::TokenRegistry registry() {
  cexdex::TokenRegistry r;
  r.add(kWeth, {"WETH", true, true, 18, "ETH"});
  r.add(kUsdt, {"USDT", true, true, 6, "USDT"});
  r.add(kUsdc, {"USDC", true, true, 6, "USDC"});
  r.add(kPepe, {"PEPE", true, false, 18, "PEPE"});
  r.add(kLink, {"LINK", true, false, 18, "LINK"});
  r.add(kJunk, {"JUNK", false, false, 18, ""});
  return r;
}

inline cexdex::SwapEvent swap(const cexdex::Address& tin, const char* ain, const cexdex::Address& tout,
                              const char* aout, bool first = true, std::int64_t log_index = 0) {
  cexdex::SwapEvent s;
  s.pool_id = "pool";
  s.dex = "uniswap_v3";
  s.token_in = tin;
  s.amount_in = cexdex::parse_decimal(ain);
  s.token_out = tout;
  s.amount_out = cexdex::parse_decimal(aout);
  s.log_index = log_index;
  s.first_in_direction = first;
  return s;
}

inline cexdex::ArbTrade trade(const cexdex::Address& bought, const char* x, const cexdex::Address& sold,
                              const char* y, double volume_usd, cexdex::TimestampMs slot_ms = 0) {
  cexdex::ArbTrade t;
  t.tx_hash = "0xt";
  t.searcher_label = "s";
  t.builder_label = "b";
  t.slot_time_ms = slot_ms;
  t.token_bought = bought;
  t.amount_bought = cexdex::parse_decimal(x);
  t.token_sold = sold;
  t.amount_sold = cexdex::parse_decimal(y);
  t.volume_usd = volume_usd;
  return t;
}

/// Constant two-sided quote every 500 ms over [from, to].
inline cexdex::QuoteSeries flat_series(const std::string& symbol, double bid, double ask, cexdex::TimestampMs from,
                                       cexdex::TimestampMs to) {
  std::vector<cexdex::TimestampMs> ts;
  std::vector<double> b, a;
  for (auto t = from; t <= to; t += 500) {
    ts.push_back(t);
    b.push_back(bid);
    a.push_back(ask);
  }
  return cexdex::QuoteSeries(symbol, ts, b, a);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("cexdex_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
