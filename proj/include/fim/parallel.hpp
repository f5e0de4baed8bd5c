#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fim/apriori.hpp"
#include "fim/datasets.hpp"
#include "fim/fpgrowth.hpp"
#include "fim/mapreduce.hpp"
#include "fim/types.hpp"

namespace fim {

namespace detail {

inline Support sum_values(const mr::Key&, std::span<Support> values) {
  Support s = 0;
  for (Support v : values) s += v;
  return s;
}

// Map/reduce item counting with per-partition partial counts.
inline mr::Stage<Transaction, Support> item_count_stage(std::size_t num_items) {
  mr::Stage<Transaction, Support> stage;
  stage.name = "count-items";
  stage.associative = true;
  stage.reduce = sum_values;
  stage.map = [num_items](const mr::Partition<Transaction>& part, mr::Emitter<Support>& emit) {
    std::vector<Support> counts(num_items, 0);
    for (const auto& t : part.items)
      for (ItemId it : t) ++counts[it];
    for (ItemId i = 0; i < counts.size(); ++i)
      if (counts[i] > 0) emit(mr::encode_itemset(std::span<const ItemId>(&i, 1)), counts[i]);
  };
  return stage;
}

}  // namespace detail

// Level-wise Apriori where each level's support counting is one map/reduce
// stage: mappers count the broadcast candidates inside their partition, the
// reducers sum the partial counts, and the driver filters by minsup and
// generates the next level's candidates from the global result.
inline MiningResult mr_apriori(const TransactionDatabase& db, Support minsup_abs, const mr::Backend& backend,
                               std::size_t partitions, std::vector<mr::StageReport>* stage_reports = nullptr) {
  if (minsup_abs == 0) throw ConfigError("absolute minimum support must be at least 1");
  MiningResult result;
  result.algorithm = "mr_apriori";
  result.backend = std::string(mr::to_string(backend.kind));
  result.minsup_abs = minsup_abs;
  const auto start = Clock::now();

  mr::Executor<Transaction> exec(backend, mr::partition(db, partitions));
  const std::size_t num_items = db.num_items();
  auto level_start = Clock::now();
  std::size_t level_k = 0;

  auto body = [&](std::size_t iteration,
                  const std::vector<mr::KeyValue<Support>>& prior) -> std::optional<mr::Stage<Transaction, Support>> {
    if (iteration == 0) {
      level_start = Clock::now();
      level_k = 1;
      result.level_candidates.push_back(num_items);
      return detail::item_count_stage(num_items);
    }
    FrequentLevel level{level_k, {}};
    for (const auto& kv : prior)
      if (kv.value >= minsup_abs) level.entries.emplace(mr::decode_itemset(kv.key), kv.value);
    for (const auto& [s, sup] : level.entries) result.frequent.emplace(s, sup);
    result.level_timings.push_back(Clock::now() - level_start);
    if (level.entries.empty()) return std::nullopt;

    level_start = Clock::now();
    auto candidates = std::make_shared<const CandidateSet>(generate_candidates(level));
    if (candidates->empty()) return std::nullopt;
    auto counter = std::make_shared<const SupportCounter>(*candidates, num_items);
    level_k = level.k + 1;
    result.level_candidates.push_back(candidates->size());

    mr::Stage<Transaction, Support> stage;
    stage.name = "count-" + std::to_string(level_k);
    stage.associative = true;
    stage.reduce = detail::sum_values;
    stage.map = [candidates, counter](const mr::Partition<Transaction>& part, mr::Emitter<Support>& emit) {
      std::vector<Support> counts(candidates->size(), 0);
      counter->count(part.items, counts);
      for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0) emit(mr::encode_itemset((*candidates)[i]), counts[i]);
    };
    return stage;
  };
  auto iterated = mr::iterate<Transaction, Support>(exec, body);
  if (stage_reports) *stage_reports = std::move(iterated.reports);
  result.elapsed = Clock::now() - start;
  return result;
}

class ItemGrouping {
 public:
  static constexpr std::int32_t kUngrouped = -1;

  ItemGrouping() = default;
  ItemGrouping(std::size_t num_groups, std::vector<std::int32_t> group_by_item)
      : num_groups_(num_groups), group_by_item_(std::move(group_by_item)) {}

  std::size_t num_groups() const noexcept { return num_groups_; }

  // kUngrouped for items outside the FList.
  std::int32_t group(ItemId item) const noexcept {
    return item < group_by_item_.size() ? group_by_item_[item] : kUngrouped;
  }

 private:
  std::size_t num_groups_ = 0;
  std::vector<std::int32_t> group_by_item_;
};

// Round-robin over FList rank: the item of rank r goes to group r mod g.
inline ItemGrouping pfp_group_items(const FList& flist, std::size_t g) {
  if (g == 0) throw ConfigError("group count must be at least 1");
  std::vector<std::int32_t> group_by_item(flist.num_items(), ItemGrouping::kUngrouped);
  for (std::size_t r = 0; r < flist.size(); ++r) group_by_item[flist.item(r)] = static_cast<std::int32_t>(r % g);
  return ItemGrouping(g, std::move(group_by_item));
}

struct GroupShard {
  std::uint32_t group = 0;
  std::vector<ItemId> items;  // FList rank order

  bool operator==(const GroupShard&) const = default;
};

// Sends each group the prefix of the rank-ordered transaction that ends at
// the group's last (least frequent) item in it.
inline std::vector<GroupShard> pfp_shard_transaction(std::span<const ItemId> txn, const FList& flist,
                                                     const ItemGrouping& grouping) {
  std::vector<std::uint32_t> ranks;
  flist.ranked(txn, ranks);
  std::vector<GroupShard> shards;
  if (ranks.empty()) return shards;
  std::vector<ItemId> ordered;
  ordered.reserve(ranks.size());
  for (auto r : ranks) ordered.push_back(flist.item(r));

  std::vector<bool> seen(grouping.num_groups(), false);
  for (std::size_t j = ordered.size(); j-- > 0;) {
    const auto g = grouping.group(ordered[j]);
    if (g == ItemGrouping::kUngrouped) throw InputError("item missing from grouping");
    if (seen[static_cast<std::size_t>(g)]) continue;
    seen[static_cast<std::size_t>(g)] = true;
    shards.push_back({static_cast<std::uint32_t>(g), std::vector<ItemId>(ordered.begin(), ordered.begin() + j + 1)});
  }
  return shards;
}

// Per-group detail of a PFP run, for inspection and tests.
struct PfpTrace {
  FList flist;
  ItemGrouping grouping;
  std::vector<FPTree> group_trees;
  std::vector<FrequentMap> group_results;
  std::vector<mr::StageReport> stages;
};

// Parallel FP-Growth: (1) map/reduce item counting builds the FList, (2)
// mappers emit group-dependent shards that reducers concatenate per group,
// (3) each group builds a local FP-tree from its shards and mines the
// itemsets whose least frequent item it owns. The group outputs are disjoint.
inline MiningResult pfp_mine(const TransactionDatabase& db, Support minsup_abs, const mr::Backend& backend,
                             std::size_t partitions, std::size_t groups, PfpTrace* trace = nullptr) {
  if (minsup_abs == 0) throw ConfigError("absolute minimum support must be at least 1");
  if (groups == 0) throw ConfigError("group count must be at least 1");
  MiningResult result;
  result.algorithm = "pfp";
  result.backend = std::string(mr::to_string(backend.kind));
  result.minsup_abs = minsup_abs;
  const auto start = Clock::now();
  std::vector<mr::StageReport> reports;

  mr::Executor<Transaction> exec(backend, mr::partition(db, partitions));
  auto counted = exec.run(detail::item_count_stage(db.num_items()));
  reports.push_back(counted.report);
  std::vector<std::pair<ItemId, Support>> entries;
  for (const auto& kv : counted.output)
    if (kv.value >= minsup_abs) entries.emplace_back(mr::decode_itemset(kv.key).front(), kv.value);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  auto flist = std::make_shared<const FList>(std::move(entries), db.num_items());
  auto grouping = std::make_shared<const ItemGrouping>(pfp_group_items(*flist, groups));

  // Shards travel as one flat list per group: [len, items..., len, items...].
  using Flat = std::vector<ItemId>;
  mr::Stage<Transaction, Flat> shard_stage;
  shard_stage.name = "shard";
  shard_stage.associative = true;
  // Each mapper emits one flat list per group it touched.
  shard_stage.map = [flist, grouping, groups](const mr::Partition<Transaction>& part, mr::Emitter<Flat>& emit) {
    std::vector<Flat> per_group(groups);
    for (const auto& t : part.items) {
      for (auto& shard : pfp_shard_transaction(t, *flist, *grouping)) {
        Flat& flat = per_group[shard.group];
        flat.push_back(static_cast<ItemId>(shard.items.size()));
        flat.insert(flat.end(), shard.items.begin(), shard.items.end());
      }
    }
    for (std::uint32_t g = 0; g < groups; ++g)
      if (!per_group[g].empty()) emit(mr::encode_itemset(std::span<const ItemId>(&g, 1)), std::move(per_group[g]));
  };
  shard_stage.reduce = [](const mr::Key&, std::span<Flat> values) {
    Flat out = std::move(values[0]);
    for (std::size_t i = 1; i < values.size(); ++i) out.insert(out.end(), values[i].begin(), values[i].end());
    return out;
  };
  auto sharded = exec.run(shard_stage);
  reports.push_back(sharded.report);

  using GroupWork = std::pair<std::uint32_t, Flat>;
  std::vector<GroupWork> work;
  work.reserve(sharded.output.size());
  for (auto& kv : sharded.output) work.emplace_back(mr::decode_itemset(kv.key).front(), std::move(kv.value));

  if (trace) {
    trace->flist = *flist;
    trace->grouping = *grouping;
    trace->group_trees.assign(groups, FPTree());
    trace->group_results.assign(groups, FrequentMap{});
  }

  mr::Stage<GroupWork, Support> mine_stage;
  mine_stage.name = "mine-groups";
  mine_stage.associative = true;
  mine_stage.reduce = detail::sum_values;
  mine_stage.map = [flist, grouping, minsup_abs, trace](const mr::Partition<GroupWork>& part,
                                                        mr::Emitter<Support>& emit) {
    std::vector<ItemId> items;
    items.reserve(flist->size());
    for (const auto& [it, _] : flist->entries()) items.push_back(it);
    std::vector<std::uint32_t> ranks;
    for (const auto& [group, flat] : part.items) {
      FPTree tree(items);
      for (std::size_t p = 0; p < flat.size();) {
        const std::size_t len = flat[p++];
        ranks.clear();
        for (std::size_t i = 0; i < len; ++i) ranks.push_back(static_cast<std::uint32_t>(flist->rank(flat[p + i])));
        p += len;
        tree.insert(ranks, 1);
      }
      const auto g = static_cast<std::int32_t>(group);
      FrequentMap* local = trace ? &trace->group_results[group] : nullptr;
      fpgrowth_mine_tree(
          tree, minsup_abs,
          [&](Itemset s, Support sup) {
            if (local) local->emplace(s, sup);
            emit(mr::encode_itemset(s), sup);
          },
          [&](ItemId it) { return grouping->group(it) == g; });
      if (trace) trace->group_trees[group] = std::move(tree);
    }
  };
  const std::size_t nwork = work.size();
  mr::Executor<GroupWork> group_exec(backend, mr::partition(std::span<const GroupWork>(work), std::max<std::size_t>(1, nwork)));
  auto mined = group_exec.run(mine_stage);
  reports.push_back(mined.report);

  for (const auto& kv : mined.output) result.frequent.emplace(mr::decode_itemset(kv.key), kv.value);
  if (trace) trace->stages = std::move(reports);
  result.elapsed = Clock::now() - start;
  return result;
}

}  // namespace fim
