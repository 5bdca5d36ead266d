#pragma once

#include "cexdex/estimate.hpp"
#include "cexdex/horizon.hpp"
#include "cexdex/market.hpp"
#include "cexdex/markout.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Static SVG renderings of the main figures. Output is plain text and fully
// determined by the inputs.
namespace cexdex::charts {

/// Median GR with the interquartile band and a marker at the peak.
std::string median_gr_chart(const horizon::MedianCurve& curve, const markout::MarkoutGrid& grid,
                            std::optional<double> t_star_s);

/// One cumulative-EV line per searcher.
std::string cumulative_ev_chart(const std::map<std::string, std::vector<estimate::EvBucket>>& series);

/// Daily HHI series; days without a value are gaps.
std::string hhi_chart(const std::string& title, std::int64_t first_day,
                      const std::vector<std::optional<double>>& hhi);

/// Searcher x builder volume-share heatmap.
std::string integration_heatmap(const market::IntegrationMatrix& matrix);

}  // namespace cexdex::charts
