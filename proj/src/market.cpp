#include "cexdex/market.hpp"

#include "cexdex/calendar.hpp"

#include <set>

namespace cexdex::market {

double IntegrationMatrix::cell(const std::string& searcher, const std::string& builder) const {
  auto r = rows.find(searcher);
  if (r == rows.end()) return 0.0;
  auto c = r->second.find(builder);
  return c == r->second.end() ? 0.0 : c->second;
}

IntegrationMatrix integration_matrix(std::span<const ArbTrade> trades) {
  std::map<std::string, std::map<std::string, double>> volume;
  std::set<std::string> builders;
  for (const auto& t : trades) {
    std::string b = t.builder_label.empty() ? std::string(kOtherBuilder) : t.builder_label;
    builders.insert(b);
    volume[t.searcher_label][b] += t.volume_usd;
  }
  IntegrationMatrix m;
  m.builders.assign(builders.begin(), builders.end());
  for (auto& [searcher, row] : volume) {
    double total = 0.0;
    for (const auto& [b, v] : row) total += v;
    if (!(total > 0.0)) continue;
    auto& out = m.rows[searcher];
    for (const auto& [b, v] : row) out[b] = v / total;
  }
  return m;
}

std::string_view to_string(ExclusivityKind k) {
  switch (k) {
    case ExclusivityKind::Neutral: return "Neutral";
    case ExclusivityKind::Exclusive: return "Exclusive";
    case ExclusivityKind::Integrated: return "Integrated";
  }
  return "Neutral";
}

std::map<std::string, Exclusivity> classify_exclusivity(const IntegrationMatrix& matrix,
                                                        const SearcherLabels& labels, double threshold) {
  std::map<std::string, Exclusivity> out;
  for (const auto& [searcher, row] : matrix.rows) {
    Exclusivity e;
    std::string top;
    for (const auto& [b, share] : row) {
      if (share > e.max_share) {
        e.max_share = share;
        top = b;
      }
    }
    if (auto it = labels.integrated_with.find(searcher); it != labels.integrated_with.end()) {
      e.kind = ExclusivityKind::Integrated;
      e.builder = it->second;
    } else if (e.max_share > threshold) {
      e.kind = ExclusivityKind::Exclusive;
      e.builder = top;
    }
    out.emplace(searcher, std::move(e));
  }
  return out;
}

std::string_view to_string(PairClass c) {
  switch (c) {
    case PairClass::MajorMajor: return "MajorMajor";
    case PairClass::MajorAlt: return "MajorAlt";
    case PairClass::AltAlt: return "AltAlt";
  }
  return "AltAlt";
}

PairClass pair_class(const Address& a, const Address& b, const TokenRegistry& registry) {
  const TokenInfo* ia = registry.find(a);
  if (!ia) throw UnknownToken(a);
  const TokenInfo* ib = registry.find(b);
  if (!ib) throw UnknownToken(b);
  if (ia->is_major && ib->is_major) return PairClass::MajorMajor;
  if (!ia->is_major && !ib->is_major) return PairClass::AltAlt;
  return PairClass::MajorAlt;
}

MajorShare major_major_share(std::span<const ArbTrade> trades, const TokenRegistry& registry) {
  MajorShare s;
  if (trades.empty()) return s;
  double mm_count = 0.0, mm_volume = 0.0, volume = 0.0;
  for (const auto& t : trades) {
    volume += t.volume_usd;
    if (pair_class(t.token_bought, t.token_sold, registry) == PairClass::MajorMajor) {
      mm_count += 1.0;
      mm_volume += t.volume_usd;
    }
  }
  s.empty = false;
  s.count_fraction = mm_count / static_cast<double>(trades.size());
  s.volume_fraction = volume > 0.0 ? mm_volume / volume : 0.0;
  return s;
}

std::array<CorrelationResult, 2> decline_vs_major_correlation(
    std::span<const horizon::SearcherProfile> profiles, const std::map<std::string, MajorShare>& shares) {
  std::vector<double> decline, count_share, volume_share;
  for (const auto& p : profiles) {
    if (!p.decline_3s_fraction) continue;
    auto it = shares.find(p.searcher_label);
    if (it == shares.end() || it->second.empty) continue;
    decline.push_back(*p.decline_3s_fraction);
    count_share.push_back(it->second.count_fraction);
    volume_share.push_back(it->second.volume_fraction);
  }
  return {stats::spearman(decline, count_share), stats::spearman(decline, volume_share)};
}

DailyShares daily_shares(std::span<const Observation> obs, std::int64_t first_day, std::size_t n_days) {
  std::vector<std::map<std::string, double>> weight(n_days);
  for (const auto& o : obs) {
    const std::int64_t d = utc_day(o.ts_ms) - first_day;
    if (d < 0 || d >= static_cast<std::int64_t>(n_days)) continue;
    weight[static_cast<std::size_t>(d)][o.label] += o.weight > 0.0 ? o.weight : 0.0;
  }
  DailyShares out;
  out.first_day = first_day;
  out.shares.resize(n_days);
  out.hhi.resize(n_days);
  for (std::size_t d = 0; d < n_days; ++d) {
    double total = 0.0;
    for (const auto& [label, w] : weight[d]) total += w;
    if (!(total > 0.0)) continue;
    std::vector<double> s;
    for (const auto& [label, w] : weight[d]) {
      out.shares[d][label] = w / total;
      s.push_back(w / total);
    }
    out.hhi[d] = stats::hhi(s);
  }
  return out;
}

std::vector<double> searcher_share_in_builder(std::span<const ArbTrade> trades, const std::string& searcher,
                                              const std::string& builder, std::int64_t first_day,
                                              std::size_t n_days) {
  std::vector<double> in_builder(n_days, 0.0), total(n_days, 0.0);
  for (const auto& t : trades) {
    if (t.searcher_label != searcher) continue;
    const std::int64_t d = utc_day(t.slot_time_ms) - first_day;
    if (d < 0 || d >= static_cast<std::int64_t>(n_days)) continue;
    total[static_cast<std::size_t>(d)] += t.volume_usd;
    if (t.builder_label == builder) in_builder[static_cast<std::size_t>(d)] += t.volume_usd;
  }
  for (std::size_t d = 0; d < n_days; ++d) in_builder[d] = total[d] > 0.0 ? in_builder[d] / total[d] : 0.0;
  return in_builder;
}

std::vector<double> builder_block_share(const std::map<std::int64_t, BlockRecord>& blocks,
                                        const std::string& builder, std::int64_t first_day,
                                        std::size_t n_days) {
  std::vector<double> won(n_days, 0.0), total(n_days, 0.0);
  for (const auto& [number, b] : blocks) {
    const std::int64_t d = utc_day(b.slot_time_ms) - first_day;
    if (d < 0 || d >= static_cast<std::int64_t>(n_days)) continue;
    total[static_cast<std::size_t>(d)] += 1.0;
    if (b.builder_label == builder) won[static_cast<std::size_t>(d)] += 1.0;
  }
  for (std::size_t d = 0; d < n_days; ++d) won[d] = total[d] > 0.0 ? won[d] / total[d] : 0.0;
  return won;
}

}  // namespace cexdex::market
