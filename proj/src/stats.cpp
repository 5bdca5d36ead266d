#include "cexdex/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cexdex::stats {

namespace {

const char* kind_name(StatsErrorKind k) {
  switch (k) {
    case StatsErrorKind::LengthMismatch: return "LengthMismatch";
    case StatsErrorKind::TooShort: return "TooShort";
    case StatsErrorKind::DegenerateRanks: return "DegenerateRanks";
    case StatsErrorKind::SharesDontSumToOne: return "SharesDontSumToOne";
  }
  return "StatsError";
}

// Pearson correlation of two rank vectors; NaN when either is constant.
double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nan("");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

constexpr std::size_t kExactPermutationLimit = 10;

// Exact two-sided test: enumerate every distinct arrangement of y's ranks
// against fixed x ranks. Distinct multiset permutations are equally likely
// under the null, so counting them directly is unbiased under ties.
double permutation_p_value(const std::vector<double>& rx, std::vector<double> ry, double rho) {
  const auto n = static_cast<double>(rx.size());
  const double mean_x = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double mean_y = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  std::vector<double> cx(rx.size());
  double sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    cx[i] = rx[i] - mean_x;
    sxx += cx[i] * cx[i];
    syy += (ry[i] - mean_y) * (ry[i] - mean_y);
  }
  const double norm = std::sqrt(sxx * syy);
  const double threshold = std::abs(rho) - 1e-12;
  std::sort(ry.begin(), ry.end());
  std::size_t extreme = 0, total = 0;
  do {
    double sxy = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i) sxy += cx[i] * (ry[i] - mean_y);
    ++total;
    if (std::abs(sxy / norm) >= threshold) ++extreme;
  } while (std::next_permutation(ry.begin(), ry.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double t_approx_p_value(double rho, std::size_t n) {
  if (std::abs(rho) >= 1.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

StatsError::StatsError(StatsErrorKind kind, const std::string& detail)
    : std::domain_error(std::string(kind_name(kind)) + ": " + detail), kind_(kind) {}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError(StatsErrorKind::LengthMismatch,
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 3) throw StatsError(StatsErrorKind::TooShort, "n = " + std::to_string(x.size()));
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double rho = pearson(rx, ry);
  if (std::isnan(rho)) throw StatsError(StatsErrorKind::DegenerateRanks, "constant series");
  CorrelationResult r;
  r.rho = rho;
  r.n = x.size();
  r.p_value = r.n < kExactPermutationLimit ? permutation_p_value(rx, ry, rho) : t_approx_p_value(rho, r.n);
  return r;
}

std::vector<CorrelationResult> lagged_correlation(std::span<const double> x, std::span<const double> y,
                                                  std::span<const int> lags) {
  if (x.size() != y.size()) {
    throw StatsError(StatsErrorKind::LengthMismatch,
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  std::vector<CorrelationResult> out;
  for (int lag : lags) {
    if (lag < 0) throw std::invalid_argument("lags must be non-negative");
    const auto l = static_cast<std::size_t>(lag);
    if (l + 3 > x.size()) {
      throw StatsError(StatsErrorKind::TooShort, "lag " + std::to_string(lag) + " leaves fewer than 3 points");
    }
    const std::size_t m = x.size() - l;
    auto forward = spearman(x.subspan(0, m), y.subspan(l, m));
    forward.lag_days = lag;
    out.push_back(forward);
    if (lag > 0) {
      auto reverse = spearman(y.subspan(0, m), x.subspan(l, m));
      reverse.lag_days = -lag;
      out.push_back(reverse);
    }
  }
  return out;
}

std::vector<WindowCorrelation> rolling_correlation(std::span<const double> x, std::span<const double> y,
                                                   std::size_t window) {
  if (x.size() != y.size()) {
    throw StatsError(StatsErrorKind::LengthMismatch,
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (window < 3) throw StatsError(StatsErrorKind::TooShort, "window below 3");
  std::vector<WindowCorrelation> out;
  for (std::size_t end = window - 1; end < x.size(); ++end) {
    WindowCorrelation w;
    w.end_index = end;
    try {
      w.result = spearman(x.subspan(end + 1 - window, window), y.subspan(end + 1 - window, window));
    } catch (const StatsError& e) {
      if (e.kind() != StatsErrorKind::DegenerateRanks) throw;
    }
    out.push_back(w);
  }
  return out;
}

double hhi(std::span<const double> shares) {
  double sum = 0.0, squares = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw StatsError(StatsErrorKind::SharesDontSumToOne, "negative share");
    sum += s;
    squares += s * s;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw StatsError(StatsErrorKind::SharesDontSumToOne, "shares sum to " + std::to_string(sum));
  }
  return squares;
}

}  // namespace cexdex::stats
