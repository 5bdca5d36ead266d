#include "cexdex/types.hpp"

#include "cexdex/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace cexdex {

const std::set<std::string>& default_major_symbols() {
  static const std::set<std::string> majors{"WETH", "WBTC", "USDT", "USDC",
                                            "TUSD", "FDUSD", "BUSD", "DAI"};
  return majors;
}

std::string default_cex_symbol(const std::string& symbol) {
  if (symbol == "WETH") return "ETH";
  if (symbol == "WBTC") return "BTC";
  return symbol;
}

void TokenRegistry::add(Address address, TokenInfo info) {
  if (info.is_major && !info.cex_listed) {
    throw std::invalid_argument(address + ": major token must be CEX-listed");
  }
  if (info.cex_symbol.empty()) info.cex_symbol = default_cex_symbol(info.symbol);
  auto [it, inserted] = entries_.emplace(std::move(address), std::move(info));
  if (!inserted) throw std::invalid_argument(it->first + ": duplicate token address");
}

const TokenInfo* TokenRegistry::find(const Address& address) const {
  auto it = entries_.find(address);
  return it == entries_.end() ? nullptr : &it->second;
}

void SearcherLabels::build_index() {
  by_address_.clear();
  for (const auto& [label, addresses] : labels) {
    for (const auto& a : addresses) {
      auto [it, inserted] = by_address_.emplace(a, label);
      if (!inserted && it->second != label) {
        throw std::invalid_argument(a + " listed under both '" + it->second + "' and '" + label + "'");
      }
    }
  }
}

std::optional<std::string> SearcherLabels::label_of(const Address& address) const {
  auto it = by_address_.find(address);
  if (it == by_address_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> SearcherLabels::integrated_searchers_of(const std::string& builder) const {
  std::vector<std::string> out;
  for (const auto& [searcher, b] : integrated_with) {
    if (b == builder) out.push_back(searcher);
  }
  return out;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw LoadError(LoadErrorKind::InvalidConfig, "config", 0, what);
  };
  if (!(grid_step_s > 0.0)) fail("grid_step_s must be positive");
  if (!(grid_start_s < grid_end_s)) fail("grid_start_s must be below grid_end_s");
  double zero_steps = -grid_start_s / grid_step_s;
  if (grid_start_s > 0.0 || grid_end_s < 0.0 || std::abs(zero_steps - std::round(zero_steps)) > 1e-9) {
    fail("markout grid must contain offset 0");
  }
  if (!(taker_fee_rate >= 0.0 && taker_fee_rate < 1.0)) fail("taker_fee_rate must be in [0, 1)");
  if (!(exclusivity_threshold > 0.0 && exclusivity_threshold < 1.0)) {
    fail("exclusivity_threshold must be in (0, 1)");
  }
  if (quote_staleness_ms < 0) fail("quote_staleness_ms must be non-negative");
  if (!(pattern_flat_epsilon_bps >= 0.0)) fail("pattern_flat_epsilon_bps must be non-negative");
  if (!(pattern_abrupt_drop_fraction > 0.0)) fail("pattern_abrupt_drop_fraction must be positive");
  if (rolling_window_days < 3) fail("rolling_window_days must be at least 3");
  if (min_trades_for_confidence < 0) fail("min_trades_for_confidence must be non-negative");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(refund_rate_before) || !rate_ok(refund_rate_after)) fail("refund rates must be in [0, 1]");
}

}  // namespace cexdex
