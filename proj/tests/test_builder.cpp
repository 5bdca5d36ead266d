#include "doctest.h"
#include "support.hpp"

#include "cexdex/builder.hpp"

#include <cmath>

using namespace cexdex;
using namespace cexdex::builder;
using doctest::Approx;

namespace {

const RefundSchedule kSchedule{1709614800000, 1.0, 0.5};
constexpr TimestampMs kBefore = 1709614800000 - 12000;
constexpr TimestampMs kAfter = 1709614800000 + 12000;

BlockRecord block(double delta_c, double bid, double adj, TimestampMs slot, std::int64_t n = 1,
                  std::string builder = "titan") {
  BlockRecord b;
  b.block_number = n;
  b.builder_label = std::move(builder);
  b.coinbase_delta_eth = delta_c;
  b.bid_eth = bid;
  b.used_bid_adjustment = adj > 0.0;
  b.adjustment_delta_eth = adj;
  b.slot_time_ms = slot;
  return b;
}

estimate::TradeEconomics pnl_trade(std::int64_t block_number, const std::string& searcher, double pnl) {
  estimate::TradeEconomics e;
  e.block_number = block_number;
  e.searcher_label = searcher;
  e.pnl_usd = pnl;
  return e;
}

}  // namespace

TEST_CASE("builder on-chain profit branches") {
  auto plain = block(1.0, 0.3, 0.0, kAfter);
  CHECK(builder_onchain_profit(plain, kSchedule, 1.0) == 1.0);
  CHECK(builder_onchain_profit_eth(block(5, 10, 4, kAfter), kSchedule) == -3.0);
  CHECK(builder_onchain_profit_eth(block(5, 10, 4, kBefore), kSchedule) == -1.0);
  CHECK(builder_onchain_profit(block(5, 10, 4, kAfter), kSchedule, 2000.0) == -6000.0);
  CHECK(kSchedule.rate_at(1709614800000) == 0.5);
  CHECK(kSchedule.rate_at(1709614800000 - 1) == 1.0);
}

TEST_CASE("integrated searcher pnl") {
  SearcherLabels labels;
  labels.integrated_with["scp"] = "titan";
  labels.build_index();
  auto b = block(1, 1, 0, kAfter, 7);
  std::vector<estimate::TradeEconomics> trades{pnl_trade(7, "scp", 3), pnl_trade(7, "scp", -1), pnl_trade(7, "other", 50),
                                               pnl_trade(8, "scp", 100)};
  auto sp = integrated_searcher_pnl(b, trades, labels);
  CHECK(sp.applicable);
  CHECK(sp.sp_usd == 2.0);

  auto lone = block(1, 1, 0, kAfter, 7, "beaver");
  sp = integrated_searcher_pnl(lone, trades, labels);
  CHECK_FALSE(sp.applicable);
  CHECK(sp.sp_usd == 0.0);

  sp = integrated_searcher_pnl(b, std::vector<estimate::TradeEconomics>{}, labels);
  CHECK(sp.applicable);
  CHECK(sp.sp_usd == 0.0);
}

TEST_CASE("aggregated margin") {
  // P = 2, b = 10, r * delta = 2.
  auto b = block(0, 10, 4, kAfter);
  CHECK(aggregated_margin(b, 2.0, kSchedule, 1.0) == Approx(0.2).epsilon(1e-12));
  CHECK(aggregated_margin(b, 0.0, kSchedule, 1.0) == 0.0);
  CHECK_THROWS_AS(aggregated_margin(b, -8.0, kSchedule, 1.0), ZeroDenominator);
}

TEST_CASE("subsidy flags") {
  auto f = subsidy_flags(-1, 1);
  CHECK(f.before);
  CHECK_FALSE(f.after);
  f = subsidy_flags(-1, -2);
  CHECK(f.before);
  CHECK(f.after);
  f = subsidy_flags(1, -5);
  CHECK_FALSE(f.before);
  CHECK_FALSE(f.after);
}

TEST_CASE("compute_block_economics and builder_summary") {
  SearcherLabels labels;
  labels.integrated_with["scp"] = "titan";
  labels.build_index();
  PipelineConfig cfg;
  QuoteStore store;
  store.emplace("ETHUSDT", testing::flat_series("ETHUSDT", 0.5, 1.5, kAfter - 1000, kAfter + 1000));

  // BP = -3 after the cutoff; the integrated searcher earns 5, so P = +2.
  std::map<std::int64_t, BlockRecord> blocks{{1, block(5, 10, 4, kAfter, 1)}};
  std::vector<estimate::TradeEconomics> trades{pnl_trade(1, "scp", 3), pnl_trade(1, "scp", 2)};
  auto res = compute_block_economics(blocks, trades, labels, store, cfg);
  REQUIRE(res.blocks.size() == 1);
  const auto& b = res.blocks[0];
  CHECK(b.bp_usd == -3.0);
  CHECK(b.sp_usd == 5.0);
  CHECK(b.p_usd == 2.0);
  CHECK(b.subsidized_before);
  CHECK_FALSE(b.subsidized_after);
  CHECK(b.aggregated_margin.value() == Approx(0.2));

  auto summary = builder_summary(res.blocks, labels);
  REQUIRE(summary.size() == 1);
  const auto& s = summary[0];
  CHECK(s.builder_label == "titan");
  CHECK(s.integrated_searchers == std::vector<std::string>{"scp"});
  CHECK(s.subsidized_blocks_before == 1);
  CHECK(s.subsidy_before_usd == -3.0);
  CHECK(s.subsidized_blocks_after == 0);
  CHECK(s.subsidy_after_bp_usd == 0.0);
  CHECK(s.subsidy_after_p_usd == 0.0);

  // With SP = +2 the block stays subsidized after correction (P = -1).
  trades = {pnl_trade(1, "scp", 2)};
  res = compute_block_economics(blocks, trades, labels, store, cfg);
  summary = builder_summary(res.blocks, labels);
  CHECK(summary[0].subsidized_blocks_after == 1);
  CHECK(summary[0].subsidy_after_p_usd == -1.0);

  // All-positive blocks carry no subsidy.
  std::map<std::int64_t, BlockRecord> good{{1, block(2, 1, 0, kAfter, 1)}, {2, block(1, 1, 0, kAfter, 2, "beaver")}};
  res = compute_block_economics(good, std::vector<estimate::TradeEconomics>{}, labels, store, cfg);
  for (const auto& row : builder_summary(res.blocks, labels)) {
    CHECK(row.subsidized_blocks_before == 0);
    CHECK(row.subsidized_blocks_after == 0);
    CHECK(row.subsidy_before_usd == 0.0);
  }

  // No ETH price at slot time: the block is reported, not priced.
  std::map<std::int64_t, BlockRecord> dark{{9, block(1, 1, 0, kBefore - 600000, 9)}};
  res = compute_block_economics(dark, std::vector<estimate::TradeEconomics>{}, labels, store, cfg);
  CHECK(res.blocks.empty());
  CHECK(res.unpriced_blocks == std::vector<std::int64_t>{9});
}

TEST_CASE("property: randomized blocks keep after <= before, P = BP + SP, continuity at delta 0") {
  SearcherLabels labels;
  labels.integrated_with["s0"] = "b0";
  labels.integrated_with["s1"] = "b1";
  labels.build_index();
  PipelineConfig cfg;
  QuoteStore store;
  store.emplace("ETHUSDT", testing::flat_series("ETHUSDT", 3499, 3501, kBefore - 2'000'000, kAfter + 2'000'000));
  cfg.quote_staleness_ms = 10'000'000;

  auto rng = SplitMix64::stream(17, 0);
  std::map<std::int64_t, BlockRecord> blocks;
  std::vector<estimate::TradeEconomics> trades;
  for (std::int64_t n = 0; n < 1000; ++n) {
    const double adj = rng.bernoulli(0.4) ? rng.uniform(0.0, 0.05) : 0.0;
    const TimestampMs slot = (rng.bernoulli(0.5) ? kBefore : kAfter) + static_cast<TimestampMs>(rng.below(1000)) * 12;
    blocks[n] = block(rng.uniform(-0.05, 0.2), rng.uniform(0.0, 0.2), adj, slot, n, "b" + std::to_string(rng.below(3)));
    const std::size_t k = rng.below(4);
    for (std::size_t i = 0; i < k; ++i) {
      trades.push_back(pnl_trade(n, "s" + std::to_string(rng.below(3)), rng.uniform(-300, 300)));
    }
  }
  auto res = compute_block_economics(blocks, trades, labels, store, cfg);
  CHECK(res.blocks.size() == 1000);
  std::size_t before = 0, after = 0;
  double bp_total = 0, sp_total = 0, p_total = 0;
  for (const auto& b : res.blocks) {
    CHECK(b.p_usd == Approx(b.bp_usd + b.sp_usd));
    if (b.subsidized_after) CHECK(b.subsidized_before);
    before += b.subsidized_before;
    after += b.subsidized_after;
    bp_total += b.bp_usd;
    sp_total += b.sp_usd;
    p_total += b.p_usd;
  }
  CHECK(after <= before);
  CHECK(p_total == Approx(bp_total + sp_total));

  for (const auto& s : builder_summary(res.blocks, labels)) {
    CHECK(s.subsidized_blocks_after <= s.subsidized_blocks_before);
    // BP basis: the after-flagged blocks are a subset of the before-flagged ones.
    CHECK(std::abs(s.subsidy_after_bp_usd) <= std::abs(s.subsidy_before_usd) + 1e-9);
    CHECK(s.aggregated_profit_usd == Approx(s.total_builder_profit_usd + s.total_searcher_pnl_usd.value_or(0.0)));
  }

  auto ser = serial::compute_block_economics(blocks, trades, labels, store, cfg);
  REQUIRE(ser.blocks.size() == res.blocks.size());
  for (std::size_t i = 0; i < ser.blocks.size(); ++i) {
    CHECK(ser.blocks[i].p_usd == res.blocks[i].p_usd);
    CHECK(ser.blocks[i].aggregated_margin == res.blocks[i].aggregated_margin);
  }

  for (int k = 0; k < 200; ++k) {
    auto a = block(rng.uniform(-1, 1), rng.uniform(0, 1), 0.0, kBefore);
    a.used_bid_adjustment = rng.bernoulli(0.5);
    auto z = a;
    z.slot_time_ms = kAfter;
    CHECK(builder_onchain_profit_eth(a, kSchedule) == builder_onchain_profit_eth(z, kSchedule));
  }
}
