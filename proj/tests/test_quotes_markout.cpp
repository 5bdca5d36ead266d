#include "doctest.h"
#include "support.hpp"

#include "cexdex/markout.hpp"
#include "cexdex/quotes.hpp"

#include <cmath>
#include <cstring>

using namespace cexdex;
using namespace cexdex::markout;
using doctest::Approx;

namespace {

QuoteSeries series(std::vector<TimestampMs> ts, std::vector<double> bid, std::vector<double> ask,
                   std::string sym = "ETHUSDT") {
  return QuoteSeries(std::move(sym), std::move(ts), std::move(bid), std::move(ask));
}

PipelineConfig fees(double rate) {
  PipelineConfig cfg;
  cfg.taker_fee_rate = rate;
  return cfg;
}

}  // namespace

TEST_CASE("mid_price: midpoint, missing history and staleness") {
  auto s = series({0}, {99}, {101});
  CHECK(mid_price(s, 200, 5000) == 100.0);
  CHECK(mid_price(s, 0, 5000) == 100.0);

  auto before = lookup_mid(s, -1, 5000);
  REQUIRE_FALSE(before.ok());
  CHECK(before.error->kind == QuoteErrorKind::NoQuoteBefore);

  auto stale = lookup_mid(s, 6000, 5000);
  REQUIRE_FALSE(stale.ok());
  CHECK(stale.error->kind == QuoteErrorKind::StaleQuote);
  CHECK(stale.error->gap_ms == 6000);
  CHECK_THROWS_AS(mid_price(s, 6000, 5000), QuoteLookupError);
  CHECK(mid_price(s, 5000, 5000) == 100.0);
}

TEST_CASE("usd_price and eth_usd") {
  const auto reg = testing::registry();
  QuoteStore store;
  store.emplace("ETHUSDT", series({0}, {99}, {101}));
  CHECK(usd_price(testing::kUsdt, 123456, reg, store, 5000) == 1.0);
  CHECK(usd_price(testing::kWeth, 100, reg, store, 5000) == 100.0);
  auto unlisted = lookup_usd_price(testing::kJunk, 100, reg, store, 5000);
  REQUIRE_FALSE(unlisted.ok());
  CHECK(unlisted.error->kind == QuoteErrorKind::UnlistedToken);
  auto missing = lookup_usd_price(testing::kPepe, 100, reg, store, 5000);
  REQUIRE_FALSE(missing.ok());
  CHECK(missing.error->kind == QuoteErrorKind::NoQuoteBefore);

  QuoteStore eth;
  eth.emplace("ETHUSDT", series({0}, {1999}, {2001}));
  CHECK(eth_usd(0, eth, 5000) == 2000.0);
  auto none = lookup_eth_usd(0, QuoteStore{}, 5000);
  REQUIRE_FALSE(none.ok());
  CHECK(none.error->kind == QuoteErrorKind::NoQuoteBefore);
}

TEST_CASE("QuoteSeries rejects invalid histories") {
  CHECK_THROWS_AS(series({0, 0}, {1, 1}, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(series({0}, {3}, {2}), std::invalid_argument);
  CHECK_THROWS_AS(series({0}, {0}, {2}), std::invalid_argument);
}

TEST_CASE("property: binary-search lookup matches a linear scan") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto rng = SplitMix64::stream(seed, 3);
    std::vector<TimestampMs> ts;
    std::vector<double> bid, ask;
    TimestampMs t = static_cast<TimestampMs>(rng.below(1000));
    const std::size_t n = 1 + rng.below(200);
    for (std::size_t i = 0; i < n; ++i) {
      ts.push_back(t);
      const double b = rng.uniform(1, 100);
      bid.push_back(b);
      ask.push_back(b + rng.uniform(0, 1));
      t += 1 + static_cast<TimestampMs>(rng.below(3000));
    }
    auto s = series(ts, bid, ask);
    const std::int64_t staleness = static_cast<std::int64_t>(rng.below(4000));
    for (int k = 0; k < 200; ++k) {
      const TimestampMs q = static_cast<TimestampMs>(rng.below(static_cast<std::uint64_t>(t + 5000)));
      std::optional<std::size_t> last;
      for (std::size_t i = 0; i < n; ++i) {
        if (ts[i] <= q) last = i;
      }
      auto got = lookup_mid(s, q, staleness);
      if (!last) {
        REQUIRE_FALSE(got.ok());
        CHECK(got.error->kind == QuoteErrorKind::NoQuoteBefore);
      } else if (q - ts[*last] > staleness) {
        REQUIRE_FALSE(got.ok());
        CHECK(got.error->kind == QuoteErrorKind::StaleQuote);
        CHECK(got.error->gap_ms == q - ts[*last]);
      } else {
        REQUIRE(got.ok());
        CHECK(got.value == (bid[*last] + ask[*last]) / 2.0);
      }
    }
  }
}

TEST_CASE("markout revenue: two-leg fee oracle") {
  // x=2 A at 55, y=100 B at 1: 110 - 100 - rate * (110 + 100)
  CHECK(markout_revenue_at_prices(2, 55, 100, 1.0, 0.0001725) == Approx(9.963775).epsilon(1e-12));
  CHECK(markout_revenue_at_prices(2, 50, 100, 1.0, 0.0) == 0.0);
  CHECK(markout_revenue_at_prices(1, 100, 100, 1.0, 0.0001725) == Approx(-0.0345).epsilon(1e-12));

  auto t = testing::trade(testing::kWeth, "2", testing::kUsdt, "100", 110);
  CHECK(gross_return(9.963775, t) == Approx(9.963775 / 110).epsilon(1e-12));
  CHECK(gross_return(0.0, t) == 0.0);
  t.volume_usd = 0;
  CHECK_THROWS_AS(gross_return(1.0, t), ZeroVolumeError);
}

TEST_CASE("markout_revenue reads both legs from the store") {
  const auto reg = testing::registry();
  QuoteStore store;
  store.emplace("ETHUSDT", testing::flat_series("ETHUSDT", 54.5, 55.5, -1000, 11000));
  auto t = testing::trade(testing::kWeth, "2", testing::kUsdt, "100", 110);
  CHECK(markout_revenue(t, 0.5, store, reg, fees(0.0001725)) == Approx(9.963775).epsilon(1e-12));
  CHECK(gross_return(t, 0.5, store, reg, fees(0.0001725)) == Approx(9.963775 / 110).epsilon(1e-12));
}

TEST_CASE("markout_curve: cardinality, constant curves and quote gaps") {
  const auto reg = testing::registry();
  const PipelineConfig cfg;
  const auto grid = MarkoutGrid::from_config(cfg);
  CHECK(grid.size() == 23);
  CHECK(grid[0] == -1.0);
  CHECK(grid[22] == 10.0);
  CHECK(grid.index_of(0.5) == std::optional<std::size_t>(3));
  CHECK_FALSE(grid.index_of(0.25).has_value());

  QuoteStore store;
  store.emplace("ETHUSDT", testing::flat_series("ETHUSDT", 54.5, 55.5, -1000, 10000));
  auto t = testing::trade(testing::kWeth, "2", testing::kUsdt, "100", 110);
  auto c = markout_curve(t, grid, store, reg, cfg);
  CHECK_FALSE(c.excluded());
  REQUIRE(c.mr_usd.size() == 23);
  for (double mr : c.mr_usd) CHECK(mr == c.mr_usd[0]);

  // Drop every quote after +4 s with a 5 s staleness window: +10 s is a gap.
  QuoteStore gappy;
  gappy.emplace("ETHUSDT", testing::flat_series("ETHUSDT", 54.5, 55.5, -1000, 4500));
  c = markout_curve(t, grid, gappy, reg, cfg);
  CHECK(c.exclusion == Exclusion::QuoteGap);
  REQUIRE(c.quote_error);
  CHECK(c.quote_error->kind == QuoteErrorKind::StaleQuote);

  t.volume_usd = 0;
  CHECK(markout_curve(t, grid, store, reg, cfg).exclusion == Exclusion::ZeroVolume);
}

TEST_CASE("flag_inventory_adjustment") {
  auto t = testing::trade(testing::kWeth, "1", testing::kUsdt, "1", 1);
  t.base_fee_eth = 0.5;
  MarkoutCurve c;
  c.mr_usd.assign(23, -1.0);
  CHECK(flag_inventory_adjustment(c, t, 1.0));
  c.mr_usd[3] = 2.0;
  CHECK_FALSE(flag_inventory_adjustment(c, t, 1.0));
  t.base_fee_eth = 0.0;
  c.mr_usd.assign(23, 0.0);
  CHECK_FALSE(flag_inventory_adjustment(c, t, 1.0));
}

TEST_CASE("slot-time MR with zero fees is the price-gap valuation") {
  const auto reg = testing::registry();
  struct Case {
    const char* x;
    const char* y;
    double mid;
    double expected;
  };
  // DEX bought x WETH for y USDT; CEX mid m: gap = x*m - y.
  const Case cases[] = {{"1", "3400", 3500, 100},   {"2", "7100", 3500, -100}, {"0.5", "1700", 3500, 50},
                        {"10", "35000", 3500, 0},   {"3", "10200", 3450, 150}};
  for (const auto& k : cases) {
    QuoteStore store;
    store.emplace("ETHUSDT", testing::flat_series("ETHUSDT", k.mid - 1, k.mid + 1, -1000, 10000));
    auto t = testing::trade(testing::kWeth, k.x, testing::kUsdt, k.y, 1000);
    CHECK(markout_revenue(t, 0.0, store, reg, fees(0.0)) == Approx(k.expected).epsilon(1e-12));
  }
}

TEST_CASE("property: MR scales linearly, GR is scale invariant, MR rises with P_A") {
  const auto reg = testing::registry();
  const PipelineConfig cfg;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = SplitMix64::stream(seed, 5);
    const double x = rng.uniform(0.01, 100), y = rng.uniform(10, 1e5), pa = rng.uniform(10, 5000);
    const double pb = 1.0, c = rng.uniform(0.1, 50);
    const double v = x * pa;
    const double mr = markout_revenue_at_prices(x, pa, y, pb, cfg.taker_fee_rate);
    const double mr_c = markout_revenue_at_prices(c * x, pa, c * y, pb, cfg.taker_fee_rate);
    CHECK(mr_c == Approx(c * mr).epsilon(1e-9).scale(std::abs(c * y)));
    CHECK(mr_c / (c * v) == Approx(mr / v).epsilon(1e-9).scale(1.0));
    CHECK(markout_revenue_at_prices(x, pa * 1.001, y, pb, cfg.taker_fee_rate) > mr);

    QuoteStore store;
    store.emplace("ETHUSDT", testing::flat_series("ETHUSDT", pa * 0.999, pa * 1.001, -1000, 10000));
    auto t = testing::trade(testing::kWeth, "1", testing::kUsdt, "1", v);
    t.amount_bought = Decimal(x);
    t.amount_sold = Decimal(y);
    auto t2 = t;
    t2.amount_bought = Decimal(x) * Decimal(c);
    t2.amount_sold = Decimal(y) * Decimal(c);
    t2.volume_usd = v * c;
    const auto grid = MarkoutGrid::from_config(cfg);
    auto c1 = markout_curve(t, grid, store, reg, cfg);
    auto c2 = markout_curve(t2, grid, store, reg, cfg);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(c2.gr[i] == Approx(c1.gr[i]).epsilon(1e-9).scale(1e-6));
  }
}

TEST_CASE("compute_markouts: parallel equals serial bit for bit") {
  const auto reg = testing::registry();
  const PipelineConfig cfg;
  const auto grid = MarkoutGrid::from_config(cfg);
  auto rng = SplitMix64::stream(11, 0);
  std::vector<TimestampMs> ts;
  std::vector<double> bid, ask;
  for (TimestampMs t = -2000; t <= 400000; t += 500) {
    const double m = 3500 * std::exp(rng.normal() * 1e-3);
    ts.push_back(t);
    bid.push_back(m - 0.5);
    ask.push_back(m + 0.5);
  }
  QuoteStore store;
  store.emplace("ETHUSDT", series(ts, bid, ask));
  std::vector<ArbTrade> trades;
  for (int i = 0; i < 500; ++i) {
    auto t = testing::trade(testing::kWeth, "1", testing::kUsdt, "1", 0, 12000 * (i % 30));
    t.tx_hash = "0x" + std::to_string(i);
    t.amount_bought = Decimal(rng.uniform(0.1, 10));
    t.amount_sold = t.amount_bought * 3490;
    t.volume_usd = to_double(t.amount_sold);
    t.base_fee_eth = rng.uniform(0, 0.01);
    trades.push_back(t);
  }
  auto par = compute_markouts(trades, grid, store, reg, cfg);
  auto ser = serial::compute_markouts(trades, grid, store, reg, cfg);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].tx_hash == ser[i].tx_hash);
    CHECK(par[i].exclusion == ser[i].exclusion);
    CHECK(std::memcmp(par[i].mr_usd.data(), ser[i].mr_usd.data(), sizeof(double) * grid.size()) == 0);
  }
}
