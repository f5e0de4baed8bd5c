#pragma once

#include <cstdint>
#include <vector>

#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/types.hpp"

namespace fim {

inline constexpr std::size_t kOracleMaxItems = 20;

// Exhaustive reference miner: every non-empty itemset over the items that
// occur in `db`, counted by scanning all transactions. Refuses databases with
// more than kOracleMaxItems distinct items.
inline MiningResult brute_force_oracle(const TransactionDatabase& db, Support minsup_abs) {
  if (minsup_abs == 0) throw ConfigError("absolute minimum support must be at least 1");
  std::vector<ItemId> present;
  {
    std::vector<bool> seen(db.num_items(), false);
    for (const auto& t : db)
      for (ItemId it : t) seen[it] = true;
    for (ItemId i = 0; i < seen.size(); ++i)
      if (seen[i]) present.push_back(i);
  }
  if (present.size() > kOracleMaxItems)
    throw InputError("oracle refuses " + std::to_string(present.size()) + " distinct items (limit " +
                     std::to_string(kOracleMaxItems) + ")");

  std::vector<std::int32_t> bit_of(db.num_items(), -1);
  for (std::size_t b = 0; b < present.size(); ++b) bit_of[present[b]] = static_cast<std::int32_t>(b);
  std::vector<std::uint32_t> masks;
  masks.reserve(db.size());
  for (const auto& t : db) {
    std::uint32_t m = 0;
    for (ItemId it : t) m |= std::uint32_t{1} << bit_of[it];
    masks.push_back(m);
  }

  MiningResult result;
  result.algorithm = "oracle";
  result.backend = "sequential";
  result.minsup_abs = minsup_abs;
  const auto start = Clock::now();
  const std::uint32_t limit = present.empty() ? 0 : (std::uint32_t{1} << present.size());
  for (std::uint32_t cand = 1; cand < limit; ++cand) {
    Support sup = 0;
    for (auto m : masks)
      if ((m & cand) == cand) ++sup;
    if (sup < minsup_abs) continue;
    Itemset s;
    for (std::size_t b = 0; b < present.size(); ++b)
      if (cand & (std::uint32_t{1} << b)) s.push_back(present[b]);
    result.frequent.emplace(std::move(s), sup);
  }
  result.elapsed = Clock::now() - start;
  return result;
}

}  // namespace fim
