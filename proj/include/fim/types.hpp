#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fim {

using ItemId = std::uint32_t;
using Support = std::uint64_t;

// Sorted ascending, duplicate-free.
using Itemset = std::vector<ItemId>;

// Same representation as Itemset; kept as a separate name for readability.
using Transaction = std::vector<ItemId>;

inline bool is_strictly_increasing(std::span<const ItemId> items) {
  return std::adjacent_find(items.begin(), items.end(),
                            [](ItemId a, ItemId b) { return a >= b; }) == items.end();
}

// True when every item of `needle` occurs in `haystack`. Both sorted ascending.
inline bool contains_sorted(std::span<const ItemId> haystack, std::span<const ItemId> needle) {
  return std::includes(haystack.begin(), haystack.end(), needle.begin(), needle.end());
}

struct ItemsetHash {
  std::size_t operator()(const Itemset& s) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (ItemId v : s) {
      h ^= v;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

// Canonical presentation order: length first, then lexicographic.
struct CanonicalLess {
  bool operator()(const Itemset& a, const Itemset& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

using FrequentMap = std::map<Itemset, Support, CanonicalLess>;

using Duration = std::chrono::nanoseconds;
using Clock = std::chrono::steady_clock;

struct MiningResult {
  FrequentMap frequent;
  Support minsup_abs = 1;
  std::string algorithm;
  std::string backend;
  Duration elapsed{0};
  // One entry per level for the Apriori family, empty for FP-Growth.
  std::vector<Duration> level_timings;
  // Number of candidates counted at each level (Apriori family only).
  std::vector<std::size_t> level_candidates;
};

inline double to_ms(Duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

}  // namespace fim
