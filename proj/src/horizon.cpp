#include "cexdex/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cexdex::horizon {

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::P1: return "P1";
    case Pattern::P2: return "P2";
    case Pattern::P3: return "P3";
  }
  return "P3";
}

Pattern parse_pattern(std::string_view s) {
  if (s == "P1") return Pattern::P1;
  if (s == "P2") return Pattern::P2;
  if (s == "P3") return Pattern::P3;
  throw std::invalid_argument("unknown pattern '" + std::string(s) + "'");
}

namespace {

const char* kind_name(HorizonErrorKind k) {
  switch (k) {
    case HorizonErrorKind::NoTrades: return "NoTrades";
    case HorizonErrorKind::PeakNonPositive: return "PeakNonPositive";
    case HorizonErrorKind::OutOfGrid: return "OutOfGrid";
  }
  return "HorizonError";
}

// Quantile from the two order statistics bracketing position h = (n-1)q.
double interpolate(double lo_value, double hi_value, double frac) {
  return frac == 0.0 ? lo_value : lo_value + frac * (hi_value - lo_value);
}

}  // namespace

HorizonError::HorizonError(HorizonErrorKind kind, const std::string& detail)
    : std::domain_error(std::string(kind_name(kind)) + ": " + detail), kind_(kind) {}

double median_of(std::span<double> v) {
  const std::size_t n = v.size();
  const std::size_t k = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  const double upper = v[k];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
  return (lower + upper) / 2.0;
}

double quantile_of(std::span<double> v, double q) {
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double lo_value = v[lo];
  if (frac == 0.0) return lo_value;
  const double hi_value = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return interpolate(lo_value, hi_value, frac);
}

MedianCurve median_curve(std::string label, std::span<const markout::MarkoutCurve* const> curves,
                         std::size_t grid_size) {
  if (curves.empty()) throw HorizonError(HorizonErrorKind::NoTrades, label);
  MedianCurve out;
  out.searcher_label = std::move(label);
  out.n_trades = curves.size();
  out.median.resize(grid_size);
  out.q25.resize(grid_size);
  out.q75.resize(grid_size);
  std::vector<double> column(curves.size());
  for (std::size_t t = 0; t < grid_size; ++t) {
    for (std::size_t i = 0; i < curves.size(); ++i) column[i] = curves[i]->gr[t];
    out.median[t] = median_of(column);
    out.q25[t] = quantile_of(column, 0.25);
    out.q75[t] = quantile_of(column, 0.75);
  }
  return out;
}

std::size_t optimal_horizon_index(const MedianCurve& curve) {
  const auto& m = curve.median;
  if (m.empty()) throw HorizonError(HorizonErrorKind::NoTrades, curve.searcher_label);
  const double best = *std::max_element(m.begin(), m.end());
  std::size_t i = static_cast<std::size_t>(std::find(m.begin(), m.end(), best) - m.begin());
  while (i + 1 < m.size() && m[i + 1] == best) ++i;
  return i;
}

double optimal_horizon(const MedianCurve& curve, const markout::MarkoutGrid& grid) {
  return grid[optimal_horizon_index(curve)];
}

double decline_after_peak(const MedianCurve& curve, const markout::MarkoutGrid& grid, double t_star_s,
                          double horizon_s) {
  auto peak = grid.index_of(t_star_s);
  if (!peak) throw HorizonError(HorizonErrorKind::OutOfGrid, "t* not on grid");
  auto later = grid.index_of(t_star_s + horizon_s);
  if (!later) throw HorizonError(HorizonErrorKind::OutOfGrid, "t* + horizon beyond grid");
  const double at_peak = curve.median[*peak];
  if (!(at_peak > 0.0)) throw HorizonError(HorizonErrorKind::PeakNonPositive, curve.searcher_label);
  return (at_peak - curve.median[*later]) / at_peak;
}

namespace {

bool is_flat(const MedianCurve& curve, const PipelineConfig& cfg) {
  auto [lo, hi] = std::minmax_element(curve.median.begin(), curve.median.end());
  return (*hi - *lo) * 1e4 <= cfg.pattern_flat_epsilon_bps;
}

std::optional<double> try_decline(const MedianCurve& curve, const markout::MarkoutGrid& grid, double t_star) {
  try {
    return decline_after_peak(curve, grid, t_star);
  } catch (const HorizonError&) {
    return std::nullopt;
  }
}

}  // namespace

Pattern classify_pattern(const MedianCurve& curve, const markout::MarkoutGrid& grid,
                         const PipelineConfig& cfg) {
  if (is_flat(curve, cfg)) return Pattern::P3;
  auto decline = try_decline(curve, grid, optimal_horizon(curve, grid));
  // Undefined decline (peak too late or not positive) is not an abrupt drop.
  return decline && *decline >= cfg.pattern_abrupt_drop_fraction ? Pattern::P2 : Pattern::P1;
}

SearcherProfile build_profile(const MedianCurve& curve, const markout::MarkoutGrid& grid,
                              const PipelineConfig& cfg) {
  SearcherProfile p;
  p.searcher_label = curve.searcher_label;
  p.n_arb_trades = curve.n_trades;
  p.low_confidence = curve.n_trades < static_cast<std::size_t>(cfg.min_trades_for_confidence);
  p.pattern = classify_pattern(curve, grid, cfg);
  if (p.pattern != Pattern::P3) {
    p.t_star_s = optimal_horizon(curve, grid);
    p.decline_3s_fraction = try_decline(curve, grid, *p.t_star_s);
  }
  return p;
}

namespace {

using Groups = std::map<std::string, std::vector<const markout::MarkoutCurve*>>;

Groups group_usable(const std::vector<ArbTrade>& trades, const std::vector<markout::MarkoutCurve>& curves) {
  if (trades.size() != curves.size()) throw std::invalid_argument("trades and curves are not aligned");
  Groups groups;
  for (std::size_t i = 0; i < trades.size(); ++i) {
    if (!curves[i].excluded()) groups[trades[i].searcher_label].push_back(&curves[i]);
  }
  return groups;
}

template <typename MedianFn>
HorizonResult profile_groups(const Groups& groups, const markout::MarkoutGrid& grid,
                             const PipelineConfig& cfg, MedianFn&& median_fn, bool parallel) {
  std::vector<const Groups::value_type*> items;
  items.reserve(groups.size());
  for (const auto& g : groups) items.push_back(&g);

  HorizonResult out;
  out.curves.resize(items.size());
  out.profiles.resize(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    out.curves[k] = median_fn(items[k]->first, items[k]->second, grid.size());
    out.profiles[k] = build_profile(out.curves[k], grid, cfg);
  }
  return out;
}

}  // namespace

HorizonResult build_profiles(const std::vector<ArbTrade>& trades,
                             const std::vector<markout::MarkoutCurve>& curves,
                             const markout::MarkoutGrid& grid, const PipelineConfig& cfg) {
  auto fn = [](const std::string& label, const std::vector<const markout::MarkoutCurve*>& c, std::size_t g) {
    return median_curve(label, c, g);
  };
  return profile_groups(group_usable(trades, curves), grid, cfg, fn, true);
}

namespace serial {

MedianCurve median_curve(std::string label, std::span<const markout::MarkoutCurve* const> curves,
                         std::size_t grid_size) {
  if (curves.empty()) throw HorizonError(HorizonErrorKind::NoTrades, label);
  MedianCurve out;
  out.searcher_label = std::move(label);
  out.n_trades = curves.size();
  const std::size_t n = curves.size();
  auto at = [](const std::vector<double>& sorted, double q) {
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    return interpolate(sorted[lo], frac == 0.0 ? sorted[lo] : sorted[lo + 1], frac);
  };
  for (std::size_t t = 0; t < grid_size; ++t) {
    std::vector<double> column;
    column.reserve(n);
    for (const auto* c : curves) column.push_back(c->gr[t]);
    std::sort(column.begin(), column.end());
    out.median.push_back(n % 2 == 1 ? column[n / 2] : (column[n / 2 - 1] + column[n / 2]) / 2.0);
    out.q25.push_back(at(column, 0.25));
    out.q75.push_back(at(column, 0.75));
  }
  return out;
}

HorizonResult build_profiles(const std::vector<ArbTrade>& trades,
                             const std::vector<markout::MarkoutCurve>& curves,
                             const markout::MarkoutGrid& grid, const PipelineConfig& cfg) {
  auto fn = [](const std::string& label, const std::vector<const markout::MarkoutCurve*>& c, std::size_t g) {
    return serial::median_curve(label, c, g);
  };
  return profile_groups(group_usable(trades, curves), grid, cfg, fn, false);
}

}  // namespace serial

}  // namespace cexdex::horizon
