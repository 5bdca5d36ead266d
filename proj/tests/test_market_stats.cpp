#include "doctest.h"
#include "support.hpp"

#include "cexdex/calendar.hpp"
#include "cexdex/market.hpp"
#include "cexdex/stats.hpp"

#include <algorithm>
#include <cmath>

using namespace cexdex;
using namespace cexdex::market;
using stats::StatsError;
using stats::StatsErrorKind;
using doctest::Approx;

namespace {

// Brute-force rank oracle: midrank by counting, then Pearson on ranks.
double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) ++less;
        if (w == v[i]) ++equal;
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

StatsErrorKind stats_kind(auto&& f) {
  try {
    f();
  } catch (const StatsError& e) {
    return e.kind();
  }
  FAIL("expected StatsError");
  return StatsErrorKind::TooShort;
}

ArbTrade routed(const std::string& searcher, const std::string& builder, double volume,
                const Address& a = testing::kWeth, const Address& b = testing::kUsdc) {
  ArbTrade t;
  t.searcher_label = searcher;
  t.builder_label = builder;
  t.volume_usd = volume;
  t.token_bought = a;
  t.token_sold = b;
  return t;
}

}  // namespace

TEST_CASE("hhi") {
  CHECK(stats::hhi(std::vector<double>{1.0}) == 1.0);
  CHECK(stats::hhi(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 0.25);
  CHECK(stats::hhi(std::vector<double>{0.5, 0.3, 0.2}) == Approx(0.38).epsilon(1e-12));
  CHECK(stats_kind([] { stats::hhi(std::vector<double>{0.5, 0.4}); }) == StatsErrorKind::SharesDontSumToOne);
}

TEST_CASE("property: hhi bounds") {
  auto rng = SplitMix64::stream(1, 41);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<double> w(n);
    double total = 0;
    for (auto& v : w) total += (v = rng.uniform(0.0, 1.0) + 1e-12);
    for (auto& v : w) v /= total;
    const double h = stats::hhi(w);
    CHECK(h >= 1.0 / static_cast<double>(n) - 1e-12);
    CHECK(h <= 1.0 + 1e-12);
  }
  std::vector<double> equal(7, 1.0 / 7);
  CHECK(stats::hhi(equal) == Approx(1.0 / 7).epsilon(1e-12));
}

TEST_CASE("spearman: worked values and errors") {
  using V = std::vector<double>;
  CHECK(stats::spearman(V{1, 2, 3}, V{2, 4, 6}).rho == 1.0);
  CHECK(stats::spearman(V{1, 2, 3}, V{6, 4, 2}).rho == -1.0);
  auto r = stats::spearman(V{1, 2, 3, 4}, V{1, 3, 2, 4});
  CHECK(r.rho == Approx(0.8).epsilon(1e-12));
  CHECK(r.n == 4);
  // Exact permutation p-value: 8 of 24 orderings reach |rho| >= 0.8.
  CHECK(r.p_value == Approx(8.0 / 24.0).epsilon(1e-12));
  CHECK(stats_kind([] { stats::spearman(V{1, 2}, V{1, 2}); }) == StatsErrorKind::TooShort);
  CHECK(stats_kind([] { stats::spearman(V{1, 2, 3}, V{1, 2}); }) == StatsErrorKind::LengthMismatch);
  CHECK(stats_kind([] { stats::spearman(V{1, 1, 1}, V{1, 2, 3}); }) == StatsErrorKind::DegenerateRanks);
  CHECK(stats::midranks(V{10, 20, 20, 5}) == V{2, 3.5, 3.5, 1});
}

TEST_CASE("property: spearman matches the rank oracle and is transform invariant") {
  auto rng = SplitMix64::stream(2, 42);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(6));
      y[i] = static_cast<double>(rng.below(6));
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) x[0] += 1;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) y[0] += 1;
    const double rho = stats::spearman(x, y).rho;
    CHECK(std::abs(rho - oracle_spearman(x, y)) <= 1e-12);
    std::vector<double> tx(n);
    for (std::size_t i = 0; i < n; ++i) tx[i] = std::exp(x[i]) * 3 + 1;
    CHECK(std::abs(stats::spearman(tx, y).rho - rho) <= 1e-12);
  }
}

TEST_CASE("lagged_correlation") {
  std::vector<double> x{5, 1, 4, 2, 8, 3, 9, 6, 7, 0};
  std::vector<double> y(x.size());
  y[0] = 42;
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = x[i - 1];
  const int lags[] = {1};
  auto res = stats::lagged_correlation(x, y, lags);
  REQUIRE(res.size() == 2);
  CHECK(res[0].lag_days == 1);
  CHECK(res[0].rho == Approx(1.0));
  CHECK(res[1].lag_days == -1);

  const int zero[] = {0};
  auto lag0 = stats::lagged_correlation(x, y, zero);
  REQUIRE(lag0.size() == 1);
  CHECK(lag0[0].rho == stats::spearman(x, y).rho);
  CHECK(lag0[0].p_value == stats::spearman(x, y).p_value);

  const int too_far[] = {9};
  CHECK(stats_kind([&] { stats::lagged_correlation(x, y, too_far); }) == StatsErrorKind::TooShort);
}

TEST_CASE("property: white noise rarely looks correlated") {
  int quiet = 0;
  const int runs = 200;
  for (int seed = 0; seed < runs; ++seed) {
    auto rng = SplitMix64::stream(static_cast<std::uint64_t>(seed), 43);
    std::vector<double> x(122), y(122);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    auto r = stats::spearman(x, y);
    if (std::abs(r.rho) < 0.3 && r.p_value > 0.01) ++quiet;
  }
  CHECK(quiet >= runs * 95 / 100);
}

TEST_CASE("rolling_correlation") {
  std::vector<double> x(122), y(122);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i);
    y[i] = 2.0 * static_cast<double>(i) + 1;
  }
  auto all = stats::rolling_correlation(x, y, 30);
  CHECK(all.size() == 93);
  for (const auto& w : all) CHECK(w.result->rho == Approx(1.0));

  std::vector<double> short_x(29, 1.0), short_y(29, 2.0);
  CHECK(stats::rolling_correlation(short_x, short_y, 30).empty());

  // Correlated for the first 61 days, independent afterwards.
  auto rng = SplitMix64::stream(3, 44);
  for (std::size_t i = 61; i < y.size(); ++i) y[i] = rng.normal();
  auto regime = stats::rolling_correlation(x, y, 30);
  CHECK(regime.front().result->rho == Approx(1.0));
  double late = 0;
  for (std::size_t i = regime.size() - 10; i < regime.size(); ++i) late += std::abs(regime[i].result->rho);
  CHECK(late / 10 < 0.4);
}

TEST_CASE("integration_matrix and exclusivity") {
  std::vector<ArbTrade> trades{routed("solo", "titan", 5), routed("split", "titan", 60), routed("split", "beaver", 40),
                               routed("ghost", "titan", 0)};
  auto m = integration_matrix(trades);
  CHECK(m.cell("solo", "titan") == 1.0);
  CHECK(m.cell("split", "titan") == Approx(0.6));
  CHECK(m.cell("split", "beaver") == Approx(0.4));
  CHECK(m.rows.count("ghost") == 0);

  SearcherLabels labels;
  labels.integrated_with["scp"] = "beaver";
  labels.build_index();
  std::vector<ArbTrade> t2{routed("graves", "titan", 100), routed("kayle", "titan", 52), routed("kayle", "rsync", 48),
                           routed("even", "titan", 50),    routed("even", "rsync", 50),  routed("wide", "titan", 40),
                           routed("wide", "rsync", 35),    routed("wide", "beaver", 25), routed("scp", "titan", 70),
                           routed("scp", "beaver", 30)};
  auto cls = classify_exclusivity(integration_matrix(t2), labels, 0.5);
  CHECK(cls.at("graves").kind == ExclusivityKind::Exclusive);
  CHECK(cls.at("graves").builder == "titan");
  CHECK(cls.at("kayle").kind == ExclusivityKind::Exclusive);
  CHECK(cls.at("kayle").builder == "titan");
  CHECK(cls.at("even").kind == ExclusivityKind::Neutral);
  CHECK(cls.at("wide").kind == ExclusivityKind::Neutral);
  CHECK(cls.at("wide").max_share == Approx(0.4));
  CHECK(cls.at("scp").kind == ExclusivityKind::Integrated);
  CHECK(cls.at("scp").builder == "beaver");
}

TEST_CASE("property: integration rows sum to one, classification ignores column order") {
  SearcherLabels labels;
  labels.build_index();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = SplitMix64::stream(seed, 45);
    std::vector<ArbTrade> trades;
    for (int i = 0; i < 50; ++i) {
      trades.push_back(routed("s" + std::to_string(rng.below(5)), "b" + std::to_string(rng.below(4)),
                              rng.uniform(0, 1000)));
    }
    auto m = integration_matrix(trades);
    for (const auto& [s, row] : m.rows) {
      double sum = 0;
      for (const auto& [b, v] : row) sum += v;
      CHECK(sum == Approx(1.0).epsilon(1e-12));
    }
    auto base = classify_exclusivity(m, labels, 0.5);
    auto permuted = m;
    std::reverse(permuted.builders.begin(), permuted.builders.end());
    auto again = classify_exclusivity(permuted, labels, 0.5);
    for (const auto& [s, e] : base) {
      CHECK(again.at(s).kind == e.kind);
      CHECK(again.at(s).builder == e.builder);
    }
  }
}

TEST_CASE("pair_class and major_major_share") {
  const auto reg = testing::registry();
  CHECK(pair_class(testing::kWeth, testing::kUsdc, reg) == PairClass::MajorMajor);
  CHECK(pair_class(testing::kWeth, testing::kPepe, reg) == PairClass::MajorAlt);
  CHECK(pair_class(testing::kLink, testing::kPepe, reg) == PairClass::AltAlt);
  CHECK_THROWS_AS(pair_class(testing::kWeth, "0x0000000000000000000000000000000000000bad", reg), UnknownToken);

  std::vector<ArbTrade> mm{routed("s", "b", 1), routed("s", "b", 2)};
  auto all = major_major_share(mm, reg);
  CHECK(all.count_fraction == 1.0);
  CHECK(all.volume_fraction == 1.0);

  std::vector<ArbTrade> mixed{routed("s", "b", 45), routed("s", "b", 45), routed("s", "b", 5, testing::kPepe),
                              routed("s", "b", 5, testing::kLink, testing::kPepe)};
  auto half = major_major_share(mixed, reg);
  CHECK(half.count_fraction == 0.5);
  CHECK(half.volume_fraction == Approx(0.9));

  auto none = major_major_share(std::vector<ArbTrade>{}, reg);
  CHECK(none.empty);
  CHECK(none.count_fraction == 0.0);
  CHECK(none.volume_fraction == 0.0);
}

TEST_CASE("decline_vs_major_correlation") {
  auto profile = [](const std::string& label, double decline) {
    horizon::SearcherProfile p;
    p.searcher_label = label;
    p.pattern = horizon::Pattern::P1;
    p.t_star_s = 0.5;
    p.decline_3s_fraction = decline;
    return p;
  };
  auto share = [](double c, double v) {
    MajorShare s;
    s.count_fraction = c;
    s.volume_fraction = v;
    s.empty = false;
    return s;
  };
  std::vector<horizon::SearcherProfile> ps{profile("a", 0.9), profile("b", 0.6), profile("c", 0.3), profile("d", 0.1)};
  std::map<std::string, MajorShare> shares{
      {"a", share(0.1, 0.2)}, {"b", share(0.3, 0.4)}, {"c", share(0.5, 0.6)}, {"d", share(0.8, 0.9)}};
  auto r = decline_vs_major_correlation(ps, shares);
  CHECK(r[0].rho == -1.0);
  CHECK(r[1].rho == -1.0);

  std::vector<horizon::SearcherProfile> flat{profile("a", 0.4), profile("b", 0.4), profile("c", 0.4)};
  CHECK(stats_kind([&] { decline_vs_major_correlation(flat, shares); }) == StatsErrorKind::DegenerateRanks);

  std::vector<horizon::SearcherProfile> six{profile("a", 0.7), profile("b", 0.2), profile("c", 0.55),
                                            profile("d", 0.2), profile("e", 0.9), profile("f", 0.35)};
  shares["e"] = share(0.05, 0.5);
  shares["f"] = share(0.3, 0.1);
  auto m = decline_vs_major_correlation(six, shares);
  std::vector<double> dec{0.7, 0.2, 0.55, 0.2, 0.9, 0.35};
  std::vector<double> cnt{0.1, 0.3, 0.5, 0.8, 0.05, 0.3};
  std::vector<double> vol{0.2, 0.4, 0.6, 0.9, 0.5, 0.1};
  CHECK(std::abs(m[0].rho - oracle_spearman(dec, cnt)) <= 1e-12);
  CHECK(std::abs(m[1].rho - oracle_spearman(dec, vol)) <= 1e-12);
}

TEST_CASE("daily_shares and block share") {
  const std::int64_t day0 = parse_iso_date("2024-03-04");
  const TimestampMs t0 = day0 * 86'400'000;
  std::vector<Observation> obs{{t0, "a", 50}, {t0 + 1000, "b", 30}, {t0 + 2000, "c", 20}, {t0 + 86'400'000 * 2LL, "a", 1},
                               {t0 + 86'400'000 * 2LL, "b", -5}};
  auto ds = daily_shares(obs, day0, 3);
  REQUIRE(ds.days() == 3);
  CHECK(ds.shares[0].at("a") == Approx(0.5));
  CHECK(ds.hhi[0].value() == Approx(0.38));
  CHECK_FALSE(ds.hhi[1].has_value());
  CHECK(ds.hhi[2].value() == Approx(1.0));

  std::map<std::int64_t, BlockRecord> blocks;
  for (int i = 0; i < 4; ++i) {
    BlockRecord b;
    b.block_number = i;
    b.builder_label = i < 3 ? "titan" : "beaver";
    b.slot_time_ms = t0 + i * 12000;
    blocks[i] = b;
  }
  auto share = builder_block_share(blocks, "titan", day0, 2);
  CHECK(share[0] == Approx(0.75));
  CHECK(share[1] == 0.0);
}
