#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/types.hpp"

namespace fim {

// Frequent items by support descending, ties by id ascending. The position of
// an item in `entries` is its rank; rank 0 is the most frequent item.
class FList {
 public:
  static constexpr std::int32_t kAbsent = -1;

  FList() = default;
  FList(std::vector<std::pair<ItemId, Support>> entries, std::size_t num_items)
      : entries_(std::move(entries)), rank_of_(num_items, kAbsent) {
    for (std::size_t r = 0; r < entries_.size(); ++r) rank_of_.at(entries_[r].first) = static_cast<std::int32_t>(r);
  }

  const std::vector<std::pair<ItemId, Support>>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  ItemId item(std::size_t rank) const { return entries_[rank].first; }
  Support support(std::size_t rank) const { return entries_[rank].second; }
  std::size_t num_items() const noexcept { return rank_of_.size(); }

  // kAbsent for items below the threshold.
  std::int32_t rank(ItemId item) const noexcept {
    return item < rank_of_.size() ? rank_of_[item] : kAbsent;
  }
  bool contains(ItemId item) const noexcept { return rank(item) != kAbsent; }

  // Keeps the FList items of `t`, ordered by rank, as ranks.
  void ranked(std::span<const ItemId> t, std::vector<std::uint32_t>& out) const {
    out.clear();
    for (ItemId it : t)
      if (auto r = rank(it); r != kAbsent) out.push_back(static_cast<std::uint32_t>(r));
    std::sort(out.begin(), out.end());
  }

 private:
  std::vector<std::pair<ItemId, Support>> entries_;
  std::vector<std::int32_t> rank_of_;
};

// Wraps a database so that every full pass over its transactions is counted.
class ScanCountingView {
 public:
  explicit ScanCountingView(const TransactionDatabase& db) : db_(&db) {}

  auto begin() const {
    ++passes_;
    return db_->transactions().begin();
  }
  auto end() const { return db_->transactions().end(); }
  std::size_t passes() const noexcept { return passes_; }
  std::size_t num_items() const noexcept { return db_->num_items(); }

 private:
  const TransactionDatabase* db_;
  mutable std::size_t passes_ = 0;
};

// First scan: item supports, filtered and ordered.
template <class TxnRange>
FList build_flist(const TxnRange& txns, std::size_t num_items, Support minsup_abs) {
  if (minsup_abs == 0) throw ConfigError("absolute minimum support must be at least 1");
  std::vector<Support> counts(num_items, 0);
  for (const auto& t : txns)
    for (ItemId it : t) ++counts[it];
  std::vector<std::pair<ItemId, Support>> entries;
  for (ItemId i = 0; i < counts.size(); ++i)
    if (counts[i] >= minsup_abs) entries.emplace_back(i, counts[i]);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return FList(std::move(entries), num_items);
}

inline FList build_flist(const TransactionDatabase& db, Support minsup_abs) {
  return build_flist(db.transactions(), db.num_items(), minsup_abs);
}

struct ConditionalPatternBase {
  // Prefix paths in rank order, each with the count of the node it leads to.
  std::vector<std::pair<std::vector<ItemId>, Support>> paths;

  Support total() const {
    Support s = 0;
    for (const auto& [_, c] : paths) s += c;
    return s;
  }
};

// Prefix tree over rank-ordered transactions. Nodes live in an arena and are
// addressed by index; the root is node 0. Each tree keeps a local item table
// (`items()`, ascending global rank) and nodes refer to items by local slot.
class FPTree {
 public:
  using NodeIndex = std::uint32_t;
  static constexpr NodeIndex kNone = std::numeric_limits<NodeIndex>::max();
  static constexpr std::uint32_t kRootSlot = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::uint32_t slot;  // local item slot, kRootSlot for the root
    Support count;
    NodeIndex parent;
    NodeIndex first_child;
    NodeIndex next_sibling;
    NodeIndex node_link;
  };

  struct HeaderEntry {
    Support total = 0;
    NodeIndex head = kNone;
    NodeIndex tail = kNone;
  };

  // `items` lists the tree's items in rank order; slot i holds items[i].
  explicit FPTree(std::vector<ItemId> items = {})
      : items_(std::move(items)), header_(items_.size()), root_child_(items_.size(), kNone) {
    nodes_.push_back({kRootSlot, 0, kNone, kNone, kNone, kNone});
  }

  // Inserts a path of slots (strictly ascending) with multiplicity `count`.
  void insert(std::span<const std::uint32_t> slots, Support count) {
    NodeIndex cur = 0;
    for (std::uint32_t slot : slots) {
      NodeIndex child;
      NodeIndex* index_entry = nullptr;
      if (cur == 0) {
        child = root_child_[slot];
      } else {
        index_entry = &child_index_.find_or_insert(edge_key(cur, slot));
        child = *index_entry;
      }
      if (child == kNone) {
        child = static_cast<NodeIndex>(nodes_.size());
        nodes_.push_back({slot, 0, cur, kNone, nodes_[cur].first_child, kNone});
        nodes_[cur].first_child = child;
        if (cur == 0) root_child_[slot] = child;
        else *index_entry = child;
        auto& h = header_[slot];
        if (h.tail == kNone) h.head = child;
        else nodes_[h.tail].node_link = child;
        h.tail = child;
      }
      nodes_[child].count += count;
      header_[slot].total += count;
      cur = child;
    }
    nodes_[0].count += count;
  }

  const std::vector<ItemId>& items() const noexcept { return items_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  const HeaderEntry& header(std::uint32_t slot) const { return header_[slot]; }
  std::size_t num_slots() const noexcept { return items_.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  ItemId item_of(NodeIndex i) const { return items_[nodes_[i].slot]; }
  bool empty() const noexcept { return nodes_.size() == 1; }

  std::int64_t slot_of(ItemId item) const noexcept {
    for (std::size_t s = 0; s < items_.size(); ++s)
      if (items_[s] == item) return static_cast<std::int64_t>(s);
    return -1;
  }

  std::size_t leaf_count() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (nodes_[i].first_child == kNone) ++n;
    return n;
  }

  bool is_single_path() const noexcept {
    for (const auto& n : nodes_)
      if (n.first_child != kNone && nodes_[n.first_child].next_sibling != kNone) return false;
    return true;
  }

  // Expands the tree back into the multiset of inserted paths (as item ids,
  // rank order). A node ends count - sum(children) of them.
  std::vector<std::pair<std::vector<ItemId>, Support>> paths() const {
    std::vector<std::pair<std::vector<ItemId>, Support>> out;
    for (NodeIndex i = 1; i < nodes_.size(); ++i) {
      Support below = 0;
      for (NodeIndex c = nodes_[i].first_child; c != kNone; c = nodes_[c].next_sibling) below += nodes_[c].count;
      if (nodes_[i].count > below) out.emplace_back(path_to(i), nodes_[i].count - below);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Item ids from the root's child down to node i.
  std::vector<ItemId> path_to(NodeIndex i) const {
    std::vector<ItemId> p;
    for (; i != 0 && i != kNone; i = nodes_[i].parent) p.push_back(item_of(i));
    std::reverse(p.begin(), p.end());
    return p;
  }

 private:
  std::vector<ItemId> items_;
  std::vector<HeaderEntry> header_;
  std::vector<Node> nodes_;
  // Open-addressing map from (parent, slot) to child for non-root nodes.
  class EdgeIndex {
   public:
    NodeIndex& find_or_insert(std::uint64_t key) {
      if (2 * (size_ + 1) > keys_.size()) grow();
      std::size_t mask = keys_.size() - 1;
      for (std::size_t i = mix(key) & mask;; i = (i + 1) & mask) {
        if (keys_[i] == key) return values_[i];
        if (keys_[i] == kEmpty) {
          keys_[i] = key;
          ++size_;
          return values_[i];
        }
      }
    }

   private:
    static constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();
    static std::uint64_t mix(std::uint64_t k) {
      k ^= k >> 33;
      k *= 0xff51afd7ed558ccdULL;
      return k ^ (k >> 33);
    }
    void grow() {
      std::vector<std::uint64_t> old_keys(std::max<std::size_t>(16, 2 * keys_.size()), kEmpty);
      std::vector<NodeIndex> old_values(old_keys.size(), kNone);
      old_keys.swap(keys_);
      old_values.swap(values_);
      const std::size_t mask = keys_.size() - 1;
      for (std::size_t j = 0; j < old_keys.size(); ++j) {
        if (old_keys[j] == kEmpty) continue;
        std::size_t i = mix(old_keys[j]) & mask;
        while (keys_[i] != kEmpty) i = (i + 1) & mask;
        keys_[i] = old_keys[j];
        values_[i] = old_values[j];
      }
    }
    std::vector<std::uint64_t> keys_;
    std::vector<NodeIndex> values_;
    std::size_t size_ = 0;
  };

  static std::uint64_t edge_key(NodeIndex parent, std::uint32_t slot) {
    return (static_cast<std::uint64_t>(parent) << 32) | slot;
  }

  std::vector<NodeIndex> root_child_;  // the root fans out widest
  EdgeIndex child_index_;
};

// Second scan: inserts every transaction, reduced to FList items in rank
// order, as a root path.
template <class TxnRange>
FPTree build_fptree(const TxnRange& txns, const FList& flist) {
  std::vector<ItemId> items;
  items.reserve(flist.size());
  for (const auto& [it, _] : flist.entries()) items.push_back(it);
  FPTree tree(std::move(items));
  std::vector<std::uint32_t> ranks;
  for (const auto& t : txns) {
    flist.ranked(t, ranks);
    if (!ranks.empty()) tree.insert(ranks, 1);
  }
  return tree;
}

inline FPTree build_fptree(const TransactionDatabase& db, const FList& flist) {
  return build_fptree(db.transactions(), flist);
}

inline ConditionalPatternBase conditional_pattern_base(const FPTree& tree, ItemId item) {
  const auto slot = tree.slot_of(item);
  if (slot < 0 || tree.header(static_cast<std::uint32_t>(slot)).head == FPTree::kNone)
    throw InputError("item " + std::to_string(item) + " is not in the tree header");
  ConditionalPatternBase base;
  for (auto n = tree.header(static_cast<std::uint32_t>(slot)).head; n != FPTree::kNone; n = tree.node(n).node_link) {
    auto path = tree.path_to(tree.node(n).parent);
    base.paths.emplace_back(std::move(path), tree.node(n).count);
  }
  return base;
}

namespace detail {

// Builds the conditional tree of `slot` directly from its node-link chain,
// keeping only items whose conditional support reaches the threshold.
inline FPTree conditional_tree(const FPTree& tree, std::uint32_t slot, Support minsup) {
  std::vector<Support> local(tree.num_slots(), 0);
  for (auto n = tree.header(slot).head; n != FPTree::kNone; n = tree.node(n).node_link) {
    const Support c = tree.node(n).count;
    for (auto p = tree.node(n).parent; p != 0; p = tree.node(p).parent) local[tree.node(p).slot] += c;
  }
  std::vector<std::uint32_t> remap(tree.num_slots(), FPTree::kRootSlot);
  std::vector<ItemId> items;
  for (std::uint32_t s = 0; s < slot; ++s) {
    if (local[s] >= minsup) {
      remap[s] = static_cast<std::uint32_t>(items.size());
      items.push_back(tree.items()[s]);
    }
  }
  FPTree cond(std::move(items));
  if (cond.num_slots() == 0) return cond;
  std::vector<std::uint32_t> path;
  for (auto n = tree.header(slot).head; n != FPTree::kNone; n = tree.node(n).node_link) {
    path.clear();
    for (auto p = tree.node(n).parent; p != 0; p = tree.node(p).parent)
      if (auto r = remap[tree.node(p).slot]; r != FPTree::kRootSlot) path.push_back(r);
    if (path.empty()) continue;
    std::reverse(path.begin(), path.end());
    cond.insert(path, tree.node(n).count);
  }
  return cond;
}

struct AcceptAll {
  bool operator()(ItemId) const noexcept { return true; }
};

template <class Sink>
void emit_sorted(Itemset items, Support support, Sink& sink) {
  std::sort(items.begin(), items.end());
  sink(std::move(items), support);
}

template <class Sink>
void mine_single_path(const FPTree& tree, Support minsup, Itemset& suffix, Sink& sink) {
  // Counts never grow down the chain, so the frequent part is a prefix.
  std::vector<FPTree::NodeIndex> chain;
  for (auto n = tree.node(0).first_child; n != FPTree::kNone && tree.node(n).count >= minsup;
       n = tree.node(n).first_child)
    chain.push_back(n);
  const std::size_t len = chain.size();
  if (len >= 63) throw InputError("single path too long to enumerate");
  const std::uint64_t combos = std::uint64_t{1} << len;
  for (std::uint64_t mask = 1; mask < combos; ++mask) {
    Itemset s = suffix;
    Support sup = 0;
    for (std::size_t i = 0; i < len; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        s.push_back(tree.item_of(chain[i]));
        sup = tree.node(chain[i]).count;  // counts shrink along the chain
      }
    }
    emit_sorted(std::move(s), sup, sink);
  }
}

// Mines every itemset that extends `suffix` within `tree`. Header slots are
// visited from the least frequent up; `top_filter` restricts the first level.
template <class Sink, class Filter>
void mine_tree(const FPTree& tree, Support minsup, Itemset& suffix, Sink& sink, const Filter& top_filter) {
  if (tree.empty()) return;
  if (tree.is_single_path()) {
    bool all = true;
    for (std::uint32_t s = 0; s < tree.num_slots(); ++s) all = all && top_filter(tree.items()[s]);
    if (all) {
      mine_single_path(tree, minsup, suffix, sink);
      return;
    }
  }
  for (std::uint32_t slot = static_cast<std::uint32_t>(tree.num_slots()); slot-- > 0;) {
    const auto& h = tree.header(slot);
    if (h.total < minsup || !top_filter(tree.items()[slot])) continue;
    suffix.push_back(tree.items()[slot]);
    emit_sorted(suffix, h.total, sink);
    FPTree cond = conditional_tree(tree, slot, minsup);
    mine_tree(cond, minsup, suffix, sink, AcceptAll{});
    suffix.pop_back();
  }
}

}  // namespace detail

// Mines all frequent itemsets represented by `tree`, calling sink(itemset,
// support) once per itemset. Only itemsets whose least frequent item passes
// `owned` are reported.
template <class Sink, class Filter>
void fpgrowth_mine_tree(const FPTree& tree, Support minsup_abs, Sink&& sink, const Filter& owned) {
  Itemset suffix;
  detail::mine_tree(tree, minsup_abs, suffix, sink, owned);
}

template <class Sink>
void fpgrowth_mine_tree(const FPTree& tree, Support minsup_abs, Sink&& sink) {
  fpgrowth_mine_tree(tree, minsup_abs, std::forward<Sink>(sink), detail::AcceptAll{});
}

inline MiningResult fpgrowth_mine(const TransactionDatabase& db, Support minsup_abs) {
  if (minsup_abs == 0) throw ConfigError("absolute minimum support must be at least 1");
  MiningResult result;
  result.algorithm = "fpgrowth";
  result.backend = "sequential";
  result.minsup_abs = minsup_abs;
  const auto start = Clock::now();
  const FList flist = build_flist(db, minsup_abs);
  const FPTree tree = build_fptree(db, flist);
  std::vector<std::pair<Itemset, Support>> found;
  fpgrowth_mine_tree(tree, minsup_abs, [&found](Itemset s, Support sup) { found.emplace_back(std::move(s), sup); });
  for (auto& [s, sup] : found) result.frequent.emplace(std::move(s), sup);
  result.elapsed = Clock::now() - start;
  return result;
}

}  // namespace fim
