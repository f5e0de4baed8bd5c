#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <unordered_set>
#include <vector>

#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/types.hpp"

namespace fim {

// Frequent itemsets of one length, ordered lexicographically.
struct FrequentLevel {
  std::size_t k = 0;
  std::map<Itemset, Support> entries;
};

// Candidates of one length, sorted lexicographically and duplicate-free.
using CandidateSet = std::vector<Itemset>;

// Counts how many transactions contain each candidate. All candidates must
// share one length k and be distinct. Length 1 uses a per-item array and length 2 a dense
// pair table. Longer candidates are indexed by a prefix trie; per transaction
// the counter either enumerates the transaction's k-subsets through the trie
// or tests every candidate by sorted-merge containment, whichever is
// estimated cheaper.
class SupportCounter {
 public:
  // Subset enumeration is chosen while C(|t|, k) <= factor * |candidates|.
  static constexpr double kDefaultEnumerationFactor = 4.0;

  SupportCounter(std::span<const Itemset> candidates, std::size_t num_items,
                 double enumeration_factor = kDefaultEnumerationFactor)
      : candidates_(candidates), relevant_(num_items, 0), enumeration_factor_(enumeration_factor) {
    if (candidates.empty()) return;
    k_ = candidates.front().size();
    if (k_ == 0) throw InputError("candidate itemsets must be non-empty");
    for (const auto& c : candidates) {
      if (c.size() != k_) throw InputError("candidates of mixed length");
      if (!is_strictly_increasing(c)) throw InputError("candidate items not strictly increasing");
      if (c.back() >= num_items) throw InputError("candidate contains unknown item id " + std::to_string(c.back()));
      for (ItemId it : c) relevant_[it] = 1;
    }
    if (k_ == 2) build_pair_table();
    if (k_ >= 2 && pair_table_.empty()) build_trie();
  }

  std::size_t length() const noexcept { return k_; }

  // Adds the supports found in `txns` to `counts` (aligned with the candidates).
  void count(std::span<const Transaction> txns, std::span<Support> counts) const {
    if (candidates_.empty()) return;
    if (k_ == 1) {
      std::vector<Support> per_item(relevant_.size(), 0);
      for (const auto& t : txns)
        for (ItemId it : t) ++per_item[it];
      for (std::size_t i = 0; i < candidates_.size(); ++i) counts[i] += per_item[candidates_[i].front()];
      return;
    }
    if (!pair_table_.empty()) {
      count_pairs(txns, counts);
      return;
    }
    Transaction filtered;
    const double budget = enumeration_factor_ * static_cast<double>(candidates_.size());
    for (const auto& t : txns) {
      filtered.clear();
      for (ItemId it : t)
        if (relevant_[it]) filtered.push_back(it);
      if (filtered.size() < k_) continue;
      if (binomial_capped(filtered.size(), k_, budget) <= budget) {
        walk(0, filtered, 0, 0, counts);
      } else {
        for (std::size_t i = 0; i < candidates_.size(); ++i)
          if (contains_sorted(filtered, candidates_[i])) ++counts[i];
      }
    }
  }

 private:
  static constexpr std::size_t kMaxPairTable = std::size_t{1} << 24;
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  // C(n, k), saturating once it exceeds `cap`.
  static double binomial_capped(std::size_t n, std::size_t k, double cap) {
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
      r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
      if (r > cap) return std::numeric_limits<double>::infinity();
    }
    return r;
  }

  // Square table over the items occurring in candidates; entry (a, b) is the
  // index of candidate {a, b}.
  void build_pair_table() {
    std::size_t n = 0;
    compact_.assign(relevant_.size(), kNone);
    for (std::size_t it = 0; it < relevant_.size(); ++it)
      if (relevant_[it]) compact_[it] = static_cast<std::uint32_t>(n++);
    if (n * n > kMaxPairTable || candidates_.size() >= kNone) {
      compact_.clear();
      return;
    }
    width_ = n;
    pair_table_.assign(n * n, kNone);
    for (std::size_t i = 0; i < candidates_.size(); ++i)
      pair_table_[compact_[candidates_[i][0]] * n + compact_[candidates_[i][1]]] = static_cast<std::uint32_t>(i);
  }

  void count_pairs(std::span<const Transaction> txns, std::span<Support> counts) const {
    std::vector<std::uint32_t> local;
    for (const auto& t : txns) {
      local.clear();
      for (ItemId it : t)
        if (compact_[it] != kNone) local.push_back(compact_[it]);
      for (std::size_t a = 0; a + 1 < local.size(); ++a) {
        const std::uint32_t* row = pair_table_.data() + local[a] * width_;
        for (std::size_t b = a + 1; b < local.size(); ++b)
          if (auto idx = row[local[b]]; idx != kNone) ++counts[idx];
      }
    }
  }

  struct TrieNode {
    std::uint32_t first_edge = 0;
    std::uint32_t num_edges = 0;
    std::uint32_t candidate = kNone;
  };
  struct TrieEdge {
    ItemId item;
    std::uint32_t child;
  };

  void build_trie() {
    std::vector<std::uint32_t> order(candidates_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [this](std::uint32_t a, std::uint32_t b) { return candidates_[a] < candidates_[b]; });
    nodes_.reserve(candidates_.size() * 2);
    build_node(order, 0, order.size(), 0);
  }

  std::uint32_t build_node(const std::vector<std::uint32_t>& order, std::size_t lo, std::size_t hi, std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    if (depth == k_) {
      nodes_[id].candidate = order[lo];
      return id;
    }
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t i = lo; i < hi;) {
      std::size_t j = i + 1;
      while (j < hi && candidates_[order[j]][depth] == candidates_[order[i]][depth]) ++j;
      groups.emplace_back(i, j);
      i = j;
    }
    const auto first = static_cast<std::uint32_t>(edges_.size());
    edges_.resize(edges_.size() + groups.size());
    nodes_[id].first_edge = first;
    nodes_[id].num_edges = static_cast<std::uint32_t>(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const ItemId item = candidates_[order[groups[g].first]][depth];
      const auto child = build_node(order, groups[g].first, groups[g].second, depth + 1);
      edges_[first + g] = {item, child};
    }
    return id;
  }

  // Merges the unused suffix of the transaction with the node's edges.
  void walk(std::uint32_t node, const Transaction& t, std::size_t start, std::size_t depth,
            std::span<Support> counts) const {
    const auto& n = nodes_[node];
    if (depth == k_) {
      ++counts[n.candidate];
      return;
    }
    const std::size_t need = k_ - depth;
    const TrieEdge* e = edges_.data() + n.first_edge;
    const TrieEdge* e_end = e + n.num_edges;
    for (std::size_t i = start; i + need <= t.size() && e != e_end;) {
      if (t[i] < e->item) {
        ++i;
      } else if (e->item < t[i]) {
        ++e;
      } else {
        walk(e->child, t, i + 1, depth + 1, counts);
        ++i;
        ++e;
      }
    }
  }

  std::span<const Itemset> candidates_;
  std::size_t k_ = 0;
  std::vector<std::uint8_t> relevant_;
  double enumeration_factor_;
  std::vector<std::uint32_t> compact_;
  std::vector<std::uint32_t> pair_table_;
  std::size_t width_ = 0;
  std::vector<TrieNode> nodes_;
  std::vector<TrieEdge> edges_;
};

// Support of every candidate over the whole database; zero-support
// candidates are present with count 0.
inline std::map<Itemset, Support> count_supports(const TransactionDatabase& db, const CandidateSet& candidates) {
  std::map<Itemset, Support> out;
  if (candidates.empty()) return out;
  CandidateSet distinct = candidates;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  SupportCounter counter(distinct, db.num_items());
  std::vector<Support> counts(distinct.size(), 0);
  counter.count(db.transactions(), counts);
  for (std::size_t i = 0; i < distinct.size(); ++i) out.emplace(distinct[i], counts[i]);
  return out;
}

namespace detail {

using ItemsetLookup = std::unordered_set<Itemset, ItemsetHash>;

inline ItemsetLookup make_lookup(const FrequentLevel& level) {
  ItemsetLookup lookup;
  lookup.reserve(level.entries.size());
  for (const auto& [s, _] : level.entries) lookup.insert(s);
  return lookup;
}

// Checks the k-subsets of `cand` obtained by dropping position i for every i
// in [0, limit).
inline bool subsets_frequent(const Itemset& cand, std::size_t limit, const ItemsetLookup& lookup,
                             Itemset& scratch) {
  scratch.resize(cand.size() - 1);
  for (std::size_t drop = 0; drop < limit; ++drop) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (i != drop) scratch[w++] = cand[i];
    if (!lookup.contains(scratch)) return false;
  }
  return true;
}

}  // namespace detail

// Keeps the candidates all of whose k-subsets are frequent at `level`.
inline CandidateSet prune_by_apriori(const CandidateSet& candidates, const FrequentLevel& level) {
  CandidateSet kept;
  if (candidates.empty()) return kept;
  const auto lookup = detail::make_lookup(level);
  Itemset scratch;
  for (const auto& c : candidates) {
    if (c.size() != level.k + 1) throw InputError("candidate length does not match level");
    if (detail::subsets_frequent(c, c.size(), lookup, scratch)) kept.push_back(c);
  }
  return kept;
}

// Prefix join of frequent k-itemsets sharing their first k-1 items, followed
// by downward-closure pruning. The output is sorted lexicographically.
inline CandidateSet generate_candidates(const FrequentLevel& level) {
  if (level.k == 0) throw InputError("level length must be at least 1");
  CandidateSet out;
  std::vector<const Itemset*> sets;
  sets.reserve(level.entries.size());
  for (const auto& [s, _] : level.entries) sets.push_back(&s);

  const std::size_t k = level.k;
  // The two joined parents are the subsets dropping one of the last two items;
  // only the remaining k-1 subsets need checking, and none for k == 1.
  detail::ItemsetLookup lookup;
  if (k > 1) lookup = detail::make_lookup(level);
  Itemset scratch;

  std::size_t begin = 0;
  while (begin < sets.size()) {
    std::size_t end = begin + 1;
    while (end < sets.size() && std::equal(sets[begin]->begin(), sets[begin]->end() - 1, sets[end]->begin()))
      ++end;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = i + 1; j < end; ++j) {
        Itemset cand = *sets[i];
        cand.push_back(sets[j]->back());
        if (k == 1 || detail::subsets_frequent(cand, k - 1, lookup, scratch)) out.push_back(std::move(cand));
      }
    }
    begin = end;
  }
  return out;
}

inline FrequentLevel frequent_items(const TransactionDatabase& db, Support minsup_abs) {
  std::vector<Support> counts(db.num_items(), 0);
  for (const auto& t : db)
    for (ItemId it : t) ++counts[it];
  FrequentLevel level{1, {}};
  for (ItemId i = 0; i < counts.size(); ++i)
    if (counts[i] >= minsup_abs) level.entries.emplace(Itemset{i}, counts[i]);
  return level;
}

// Sequential level-wise Apriori.
inline MiningResult apriori_mine(const TransactionDatabase& db, Support minsup_abs) {
  if (minsup_abs == 0) throw ConfigError("absolute minimum support must be at least 1");
  MiningResult result;
  result.algorithm = "apriori";
  result.backend = "sequential";
  result.minsup_abs = minsup_abs;
  const auto start = Clock::now();

  auto level_start = Clock::now();
  FrequentLevel level = frequent_items(db, minsup_abs);
  result.level_candidates.push_back(db.num_items());
  result.level_timings.push_back(Clock::now() - level_start);

  while (!level.entries.empty()) {
    for (const auto& [s, sup] : level.entries) result.frequent.emplace(s, sup);
    level_start = Clock::now();
    CandidateSet candidates = generate_candidates(level);
    if (candidates.empty()) break;
    SupportCounter counter(candidates, db.num_items());
    std::vector<Support> counts(candidates.size(), 0);
    counter.count(db.transactions(), counts);
    FrequentLevel next{level.k + 1, {}};
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (counts[i] >= minsup_abs) next.entries.emplace(std::move(candidates[i]), counts[i]);
    result.level_candidates.push_back(counts.size());
    result.level_timings.push_back(Clock::now() - level_start);
    level = std::move(next);
  }
  result.elapsed = Clock::now() - start;
  return result;
}

}  // namespace fim
