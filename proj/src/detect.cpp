#include "cexdex/detect.hpp"

#include <boost/multiprecision/number.hpp>

namespace cexdex::detect {

const char* heuristic_name(Heuristic h) {
  static constexpr const char* names[kHeuristicCount] = {"H1", "H2", "H3", "H4", "H5", "H6"};
  return names[static_cast<std::size_t>(h)];
}

NetFlows aggregate_swaps(const RawTransaction& tx) {
  NetFlows net;
  for (const auto& s : tx.swaps) {
    net[s.token_in] -= s.amount_in;
    net[s.token_out] += s.amount_out;
  }
  for (auto it = net.begin(); it != net.end();) {
    if (boost::multiprecision::abs(it->second) < kDustThreshold) {
      it = net.erase(it);
    } else {
      ++it;
    }
  }
  return net;
}

std::optional<EffectivePair> effective_pair(const NetFlows& net) {
  const NetFlows::value_type* in = nullptr;
  const NetFlows::value_type* out = nullptr;
  for (const auto& kv : net) {
    if (kv.second > 0) {
      if (in) return std::nullopt;
      in = &kv;
    } else if (kv.second < 0) {
      if (out) return std::nullopt;
      out = &kv;
    }
  }
  if (!in || !out) return std::nullopt;
  return EffectivePair{in->first, in->second, out->first, -out->second};
}

namespace {

struct Evaluation {
  DetectionVerdict verdict;
  std::optional<EffectivePair> pair;
};

Evaluation evaluate(const RawTransaction& tx, const TokenRegistry& registry) {
  Evaluation ev;
  DetectionVerdict& v = ev.verdict;
  v.tx_hash = tx.tx_hash;
  auto set = [&](Heuristic h, bool ok, const char* reason) {
    v.per_heuristic[static_cast<std::size_t>(h)] = ok;
    if (!ok) v.failure_reasons.emplace_back(std::string(heuristic_name(h)) + ": " + reason);
  };

  set(Heuristic::Private, !tx.seen_in_mempool, "seen in public mempool");

  bool first = false;
  for (const auto& s : tx.swaps) first = first || s.first_in_direction;
  set(Heuristic::FirstInPool, first, "no swap is first in its pool and direction");

  set(Heuristic::NotAtomicMev, !tx.atomic_mev_flag && !tx.liquidation_flag,
      tx.atomic_mev_flag ? "classified as atomic MEV" : "contains a liquidation");
  set(Heuristic::NotOfaBackrun, !tx.ofa_backrun_flag, "OFA backrun");
  set(Heuristic::NotRouterOrBot, !tx.router_or_bot_flag, "router or trading-bot contract");

  if (tx.erc721_transfer_count != 0) {
    set(Heuristic::TwoListedTokens, false, "contains ERC-721 transfers");
  } else if (tx.swaps.empty()) {
    set(Heuristic::TwoListedTokens, false, "no swaps");
  } else if (ev.pair = effective_pair(aggregate_swaps(tx)); !ev.pair) {
    set(Heuristic::TwoListedTokens, false, "does not settle as a two-token swap");
  } else {
    auto listed = [&](const Address& a) {
      const TokenInfo* info = registry.find(a);
      return info != nullptr && info->cex_listed;
    };
    set(Heuristic::TwoListedTokens, listed(ev.pair->token_bought) && listed(ev.pair->token_sold),
        "settled token not CEX-listed");
  }

  v.passed = true;
  for (bool b : v.per_heuristic) v.passed = v.passed && b;
  return ev;
}

std::optional<ArbTrade> to_trade(const RawTransaction& tx, const Evaluation& ev,
                                 const SearcherLabels& labels) {
  if (!ev.verdict.passed) return std::nullopt;
  ArbTrade t;
  t.tx_hash = tx.tx_hash;
  t.block_number = tx.block_number;
  t.searcher_contract = tx.searcher_contract;
  t.searcher_label = labels.label_of(tx.searcher_contract).value_or(unlabeled_searcher(tx.searcher_contract));
  t.builder_label = tx.builder_label;
  t.slot_time_ms = tx.slot_time_ms;
  t.token_bought = ev.pair->token_bought;
  t.amount_bought = ev.pair->amount_bought;
  t.token_sold = ev.pair->token_sold;
  t.amount_sold = ev.pair->amount_sold;
  t.volume_usd = tx.volume_usd;
  t.base_fee_eth = tx.base_fee_eth;
  t.builder_tip_eth = tx.priority_fee_eth + tx.coinbase_transfer_eth;
  return t;
}

DetectionResult collect(const std::vector<RawTransaction>& txs, std::vector<Evaluation>& evals,
                        const SearcherLabels& labels) {
  DetectionResult out;
  out.verdicts.reserve(txs.size());
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (auto t = to_trade(txs[i], evals[i], labels)) out.trades.push_back(std::move(*t));
    out.verdicts.push_back(std::move(evals[i].verdict));
  }
  return out;
}

}  // namespace

DetectionVerdict apply_heuristics(const RawTransaction& tx, const TokenRegistry& registry) {
  return evaluate(tx, registry).verdict;
}

std::string unlabeled_searcher(const Address& contract) { return "other:" + contract; }

DetectionResult detect_all(const std::vector<RawTransaction>& txs, const TokenRegistry& registry,
                           const SearcherLabels& labels) {
  std::vector<Evaluation> evals(txs.size());
  const auto n = static_cast<std::ptrdiff_t>(txs.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    evals[static_cast<std::size_t>(i)] = evaluate(txs[static_cast<std::size_t>(i)], registry);
  }
  return collect(txs, evals, labels);
}

namespace serial {

DetectionResult detect_all(const std::vector<RawTransaction>& txs, const TokenRegistry& registry,
                           const SearcherLabels& labels) {
  std::vector<Evaluation> evals;
  evals.reserve(txs.size());
  for (const auto& tx : txs) evals.push_back(evaluate(tx, registry));
  return collect(txs, evals, labels);
}

}  // namespace serial

}  // namespace cexdex::detect
